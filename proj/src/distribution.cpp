#include "mrdg/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace mrdg {

Distribution::Distribution(Kind k, double p1, double p2)
    : kind_(k), p1_(p1), p2_(p2), norm_(1.0) {
  switch (kind_) {
    case Kind::uniform:
      if (!(p2_ > p1_)) throw ConfigError("distribution: uniform needs b > a");
      if (p2_ <= 0.0 || p1_ >= 1.0)
        throw ConfigError("distribution: uniform support misses [0,1]");
      norm_ = 1.0 / (p2_ - p1_);
      break;
    case Kind::normal:
      if (!(p2_ > 0.0)) throw ConfigError("distribution: normal needs sigma > 0");
      norm_ = 1.0 / (p2_ * std::sqrt(2.0 * M_PI));
      break;
    case Kind::beta:
      // alpha, beta >= 1 keeps the density bounded and unimodal.
      if (!(p1_ >= 1.0) || !(p2_ >= 1.0))
        throw ConfigError("distribution: beta needs alpha, beta >= 1");
      norm_ = std::exp(std::lgamma(p1_ + p2_) - std::lgamma(p1_) - std::lgamma(p2_));
      break;
  }
}

Distribution Distribution::uniform(double a, double b) {
  return Distribution(Kind::uniform, a, b);
}
Distribution Distribution::normal(double mu, double sigma) {
  return Distribution(Kind::normal, mu, sigma);
}
Distribution Distribution::beta(double alpha, double beta) {
  return Distribution(Kind::beta, alpha, beta);
}

Distribution Distribution::parse(const std::string& text) {
  std::string s = text;
  s.erase(std::remove_if(s.begin(), s.end(), [](char c) { return std::isspace(c); }),
          s.end());
  if (s == "uniform") return uniform(0.0, 1.0);
  auto args2 = [&](const std::string& head) -> std::pair<double, double> {
    double a = 0, b = 0;
    const std::string fmt = head + "(%lf,%lf)";
    if (std::sscanf(s.c_str(), fmt.c_str(), &a, &b) != 2)
      throw ConfigError("distribution: cannot parse '" + text + "'");
    return {a, b};
  };
  if (s.rfind("uniform(", 0) == 0) {
    auto [a, b] = args2("uniform");
    return uniform(a, b);
  }
  if (s.rfind("normal(", 0) == 0) {
    auto [a, b] = args2("normal");
    return normal(a, b);
  }
  if (s.rfind("beta(", 0) == 0) {
    auto [a, b] = args2("beta");
    return beta(a, b);
  }
  throw ConfigError("distribution: unknown form '" + text +
                    "' (use uniform | uniform(a,b) | normal(mu,sigma) | beta(a,b))");
}

double Distribution::pdf(double xi) const {
  if (xi < 0.0 || xi > 1.0) return 0.0;
  switch (kind_) {
    case Kind::uniform:
      return (xi >= p1_ && xi <= p2_) ? norm_ : 0.0;
    case Kind::normal: {
      const double z = (xi - p1_) / p2_;
      return norm_ * std::exp(-0.5 * z * z);
    }
    case Kind::beta: {
      if (xi <= 0.0) return p1_ == 1.0 ? norm_ * std::pow(1.0 - xi, p2_ - 1.0) : 0.0;
      if (xi >= 1.0) return p2_ == 1.0 ? norm_ * std::pow(xi, p1_ - 1.0) : 0.0;
      return norm_ * std::pow(xi, p1_ - 1.0) * std::pow(1.0 - xi, p2_ - 1.0);
    }
  }
  return 0.0;
}

double Distribution::cell_sup_norm(double xi0, double xi1) const {
  if (xi1 < xi0) std::swap(xi0, xi1);
  double lo = std::max(xi0, 0.0), hi = std::min(xi1, 1.0);
  if (lo > hi) return 0.0;
  if (kind_ == Kind::uniform) {
    lo = std::max(lo, p1_);
    hi = std::min(hi, p2_);
    return lo <= hi ? norm_ : 0.0;
  }
  double sup = std::max(pdf(lo), pdf(hi));
  double mode = 0.0;
  bool has_mode = false;
  if (kind_ == Kind::normal) {
    mode = p1_;
    has_mode = true;
  } else {  // beta, alpha,beta >= 1
    if (p1_ > 1.0 && p2_ > 1.0) {
      mode = (p1_ - 1.0) / (p1_ + p2_ - 2.0);
      has_mode = true;
    }
    // alpha == 1 or beta == 1: monotone, endpoints suffice.
  }
  if (has_mode && mode > lo && mode < hi) sup = std::max(sup, pdf(mode));
  return sup;
}

std::string Distribution::name() const {
  char buf[64];
  switch (kind_) {
    case Kind::uniform:
      if (p1_ == 0.0 && p2_ == 1.0) return "uniform";
      std::snprintf(buf, sizeof buf, "uniform_%g_%g", p1_, p2_);
      return buf;
    case Kind::normal:
      std::snprintf(buf, sizeof buf, "normal_%g_%g", p1_, p2_);
      return buf;
    case Kind::beta:
      std::snprintf(buf, sizeof buf, "beta_%g_%g", p1_, p2_);
      return buf;
  }
  return "unknown";
}

std::string Distribution::describe() const {
  char buf[64];
  switch (kind_) {
    case Kind::uniform:
      std::snprintf(buf, sizeof buf, "uniform(%g,%g)", p1_, p2_);
      return buf;
    case Kind::normal:
      std::snprintf(buf, sizeof buf, "normal(%g,%g)", p1_, p2_);
      return buf;
    case Kind::beta:
      std::snprintf(buf, sizeof buf, "beta(%g,%g)", p1_, p2_);
      return buf;
  }
  return "unknown";
}

}  // namespace mrdg
