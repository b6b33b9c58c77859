#pragma once

// Probability densities of the uncertain parameter, supported on (a subset
// of) the stochastic domain [0,1]. The truncated normal is deliberately NOT
// renormalized after clipping (its in-interval mass for N(0.5,0.15) is
// ~0.9991). All three families are unimodal on [0,1], which makes per-cell
// sup-norms exact via endpoint/mode evaluation.

#include <string>

#include "mrdg/errors.hpp"

namespace mrdg {

class Distribution {
 public:
  enum class Kind { uniform, normal, beta };

  static Distribution uniform(double a, double b);
  static Distribution normal(double mu, double sigma);
  static Distribution beta(double alpha, double beta);

  // Accepted forms: "uniform", "uniform(a,b)", "normal(mu,sigma)", "beta(a,b)".
  static Distribution parse(const std::string& text);

  Kind kind() const { return kind_; }
  double param1() const { return p1_; }
  double param2() const { return p2_; }

  // Density at xi; zero outside [0,1] and outside the support.
  double pdf(double xi) const;

  // Exact sup of the density over [xi0, xi1] (intersected with [0,1]).
  // Zero when the cell misses the support entirely.
  double cell_sup_norm(double xi0, double xi1) const;

  // Sup over the whole stochastic domain [0,1].
  double max_pdf() const { return cell_sup_norm(0.0, 1.0); }

  // Stable identifier used in artifact filenames, e.g. "beta_2_5".
  std::string name() const;
  // Human-readable form, e.g. "beta(2,5)".
  std::string describe() const;

 private:
  Distribution(Kind k, double p1, double p2);

  Kind kind_;
  double p1_, p2_;
  double norm_;  // precomputed normalization factor
};

}  // namespace mrdg
