#include "mrdg/moments.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <ostream>

#include "mrdg/quadrature.hpp"

namespace mrdg {

namespace {

constexpr int kMomentQuadOrder = 10;  // per xi-leaf Gauss order

// Visit every xi-leaf intersecting the vertical line through x, in ascending
// xi order. The visitor receives the leaf slot and its geometry.
template <typename Fn>
void walk_column(const LeafField& field, double x, const Fn& fn) {
  const GridConfig& cfg = field.cfg;
  const int L = cfg.max_level;
  if (x < cfg.x_lo || x > cfg.x_hi)
    throw ConfigError("moments: x sample outside the domain");
  int fix = static_cast<int>((x - cfg.x_lo) / cfg.h_x(L));
  fix = std::min(std::max(fix, 0), cfg.cells_x(L) - 1);
  const int n_fine_xi = cfg.cells_xi(L);
  int fxi = 0;
  while (fxi < n_fine_xi) {
    const auto leaf = field.tree.leaf_covering(CellIndex{L, fix, fxi});
    if (!leaf)
      throw ConfigError("moments: leaves do not cover the xi range at x column");
    const int slot = field.find(*leaf);
    if (slot < 0) throw ConfigError("moments: field data missing for leaf");
    fn(slot, cell_geometry(cfg, *leaf));
    fxi += 1 << (L - leaf->level);
  }
}

}  // namespace

std::vector<double> finest_column_centers(const GridConfig& cfg) {
  const int n = cfg.cells_x(cfg.max_level);
  const double h = cfg.h_x(cfg.max_level);
  std::vector<double> xs(n);
  for (int j = 0; j < n; ++j) xs[j] = cfg.x_lo + (j + 0.5) * h;
  return xs;
}

MomentField compute_moments(const LeafField& field, const Basis& basis,
                            const Distribution& dist,
                            const std::vector<double>& x_samples, int nquant,
                            const QuantityMap& map) {
  const int ncomp = field.ncomp;
  if (nquant <= 0) nquant = ncomp;
  if (!map && nquant != ncomp)
    throw ConfigError("moments: nquant without a quantity map");
  MomentField mf;
  mf.nquant = nquant;
  mf.x = x_samples.empty() ? finest_column_centers(field.cfg) : x_samples;
  const int nx = static_cast<int>(mf.x.size());
  mf.mean.assign(static_cast<std::size_t>(nx) * nquant, 0.0);
  mf.variance.assign(static_cast<std::size_t>(nx) * nquant, 0.0);
  const QuadRule& q = gauss_rule(kMomentQuadOrder);
  std::vector<double> state(ncomp), vals(nquant);
  for (int i = 0; i < nx; ++i) {
    const double x = mf.x[i];
    double* mean_i = mf.mean.data() + static_cast<std::size_t>(i) * nquant;
    double* var_i = mf.variance.data() + static_cast<std::size_t>(i) * nquant;
    auto accumulate = [&](double* acc, const double* center) {
      walk_column(field, x, [&](int slot, const Rect& r) {
        const double hxi = r.xi1 - r.xi0;
        for (std::size_t k = 0; k < q.x.size(); ++k) {
          const double xi = r.xi0 + hxi * q.x[k];
          const double w = q.w[k] * hxi * dist.pdf(xi);
          if (w == 0.0) continue;
          evaluate_block(basis, field.block(slot), ncomp, r, x, xi, state.data());
          if (map)
            map(state.data(), vals.data());
          else
            std::memcpy(vals.data(), state.data(), sizeof(double) * nquant);
          if (center == nullptr)
            for (int qq = 0; qq < nquant; ++qq) acc[qq] += w * vals[qq];
          else
            for (int qq = 0; qq < nquant; ++qq) {
              const double d = vals[qq] - center[qq];
              acc[qq] += w * d * d;
            }
        }
      });
    };
    accumulate(mean_i, nullptr);  // expectation
    accumulate(var_i, mean_i);    // centralized second moment
  }
  return mf;
}

void write_moments_csv(std::ostream& os, const MomentField& mf, int quant) {
  os << "x,mean,variance,mean_minus_std,mean_plus_std\n";
  char buf[160];
  for (std::size_t i = 0; i < mf.x.size(); ++i) {
    const double m = mf.mean_at(static_cast<int>(i), quant);
    const double v = mf.variance_at(static_cast<int>(i), quant);
    const double sd = std::sqrt(std::max(v, 0.0));
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", mf.x[i], m, v,
                  m - sd, m + sd);
    os << buf;
  }
}

bool StabilityReport::pass(double slack) const {
  for (const BoundPair& b : bounds)
    if (!(b.margin() >= -slack * (1.0 + std::abs(b.rhs)))) return false;
  return true;
}

StabilityReport moment_stability_check(const LeafField& u, const LeafField& v,
                                       const Basis& basis, const Distribution& dist) {
  if (!(u.tree == v.tree) || u.ncomp != 1 || v.ncomp != 1 || u.p != v.p)
    throw ConfigError("stability check: needs scalar fields on the same tree");
  const GridConfig& cfg = u.cfg;
  const int L = cfg.max_level;
  const double pmax = dist.max_pdf();

  // Domain integrals and the sup-norm estimate, per leaf. Gauss nodes give the
  // integrals (exact for these polynomial degrees); an equispaced lattice with
  // corners tightens the sup estimate. Both sample below the true sup, which
  // only makes the verified inequalities stricter.
  const QuadRule& q2 = gauss_rule(6);
  double l1_u1 = 0.0, l1_u2 = 0.0, l1_diff = 0.0, msup = 0.0, msup_ub = 0.0;
  double su = 0.0, sv = 0.0;
  const double phimax[3] = {1.0, std::sqrt(3.0), std::sqrt(5.0)};
  for (std::size_t s = 0; s < u.cells.size(); ++s) {
    const Rect r = cell_geometry(cfg, u.cells[s]);
    const int sv_slot = v.find(u.cells[s]);
    for (std::size_t a = 0; a < q2.x.size(); ++a)
      for (std::size_t b = 0; b < q2.x.size(); ++b) {
        const double x = r.x0 + (r.x1 - r.x0) * q2.x[a];
        const double xi = r.xi0 + (r.xi1 - r.xi0) * q2.x[b];
        evaluate_block(basis, u.block(static_cast<int>(s)), 1, r, x, xi, &su);
        evaluate_block(basis, v.block(sv_slot), 1, r, x, xi, &sv);
        const double w = q2.w[a] * q2.w[b] * r.area();
        l1_u1 += w * std::abs(su);
        l1_u2 += w * su * su;
        l1_diff += w * std::abs(su - sv);
        msup = std::max({msup, std::abs(su), std::abs(sv)});
      }
    for (int a = 0; a <= 4; ++a)
      for (int b = 0; b <= 4; ++b) {
        const double x = r.x0 + (r.x1 - r.x0) * a / 4.0;
        const double xi = r.xi0 + (r.xi1 - r.xi0) * b / 4.0;
        evaluate_block(basis, u.block(static_cast<int>(s)), 1, r, x, xi, &su);
        evaluate_block(basis, v.block(sv_slot), 1, r, x, xi, &sv);
        msup = std::max({msup, std::abs(su), std::abs(sv)});
      }
    // Guaranteed upper bound of the cell sup: sum_|c| * max|phi_i1| * max|phi_i2|.
    const double inv_sq = 1.0 / std::sqrt(r.area());
    double bu = 0.0, bv = 0.0;
    const double* cu = u.block(static_cast<int>(s));
    const double* cv = v.block(sv_slot);
    for (int i1 = 0; i1 < u.p; ++i1)
      for (int i2 = 0; i2 < u.p; ++i2) {
        bu += std::abs(cu[i1 * u.p + i2]) * phimax[i1] * phimax[i2];
        bv += std::abs(cv[i1 * u.p + i2]) * phimax[i1] * phimax[i2];
      }
    msup_ub = std::max({msup_ub, bu * inv_sq, bv * inv_sq});
  }

  // Expectation-level integrals: per finest x-column 12-point Gauss in x, the
  // xi integral per leaf at moment order. E is one polynomial per column, so
  // the only quadrature error is the |.| kink, far below the check slack.
  const QuadRule& qx = gauss_rule(12);
  const QuadRule& qxi = gauss_rule(kMomentQuadOrder);
  double n_eu = 0.0, n_eu2 = 0.0, n_ediff = 0.0, n_eabs = 0.0, n_m2diff = 0.0;
  double n_eu2_minus_ev2 = 0.0, sup_eu = 0.0;
  const double hcol = cfg.h_x(L);
  for (int col = 0; col < cfg.cells_x(L); ++col) {
    const double x0 = cfg.x_lo + col * hcol;
    for (std::size_t a = 0; a < qx.x.size(); ++a) {
      const double x = x0 + hcol * qx.x[a];
      double eu = 0.0, ev = 0.0, eu2 = 0.0, ev2 = 0.0, eabs = 0.0;
      walk_column(u, x, [&](int slot, const Rect& r) {
        const int slot_v = v.find(u.cells[slot]);
        const double hxi = r.xi1 - r.xi0;
        for (std::size_t k = 0; k < qxi.x.size(); ++k) {
          const double xi = r.xi0 + hxi * qxi.x[k];
          const double w = qxi.w[k] * hxi * dist.pdf(xi);
          if (w == 0.0) continue;
          double uu, vv;
          evaluate_block(basis, u.block(slot), 1, r, x, xi, &uu);
          evaluate_block(basis, v.block(slot_v), 1, r, x, xi, &vv);
          eu += w * uu;
          ev += w * vv;
          eu2 += w * uu * uu;
          ev2 += w * vv * vv;
          eabs += w * std::abs(uu - vv);
        }
      });
      const double wx = qx.w[a] * hcol;
      n_eu += wx * std::abs(eu);
      n_eu2 += wx * std::abs(eu2);
      n_ediff += wx * std::abs(eu - ev);
      n_eabs += wx * eabs;
      n_eu2_minus_ev2 += wx * std::abs(eu2 - ev2);
      // centralized second moments M^2 = E[u^2] - E[u]^2
      n_m2diff += wx * std::abs((eu2 - eu * eu) - (ev2 - ev * ev));
      sup_eu = std::max(sup_eu, std::abs(eu));
    }
  }

  const double m = msup;
  const double c2 = 4.0 * m * m * m + 6.0 * m * m + 2.0 * m;
  StabilityReport rep;
  rep.m_sup = m;
  rep.e_abs_diff_l1 = n_eabs;
  rep.e_diff_l1 = n_ediff;
  rep.bounds = {
      {"expectation L1 bound (k=1)", n_eu, pmax * l1_u1},
      {"expectation L1 bound (k=2)", n_eu2, pmax * l1_u2},
      {"expectation sup bound", sup_eu, msup_ub},
      {"expectation difference (k=2)", n_eu2_minus_ev2, 2.0 * m * n_eabs},
      {"stability of expectation", n_ediff, pmax * l1_diff},
      {"stability of second moment", n_m2diff, c2 * std::max(pmax, pmax * pmax) * n_eabs},
  };
  return rep;
}

}  // namespace mrdg
