#include "mrdg/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <string>
#include <utility>

#include "mrdg/errors.hpp"
#include "mrdg/parallel.hpp"
#include "mrdg/quadrature.hpp"

namespace mrdg {

namespace {

#ifdef MRDG_PROFILE
struct PhaseClock {
  double refine = 0, plan = 0, speed = 0, residual = 0, combine = 0, limit = 0,
         coarsen = 0, fwd = 0, predict_ = 0, inv = 0, thresh = 0, make = 0;
  ~PhaseClock() {
    std::fprintf(stderr,
                 "[profile] refine=%.2fs plan=%.2fs speed=%.2fs residual=%.2fs "
                 "combine=%.2fs limit=%.2fs coarsen=%.2fs\n"
                 "[profile] fwd=%.2fs predict=%.2fs inv=%.2fs thresh=%.2fs make=%.2fs\n",
                 refine, plan, speed, residual, combine, limit, coarsen, fwd,
                 predict_, inv, thresh, make);
  }
};
PhaseClock g_phases;
struct ScopedPhase {
  double* acc;
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  explicit ScopedPhase(double* a) : acc(a) {}
  ~ScopedPhase() { *acc += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); }
};
#define MRDG_PHASE(name) ScopedPhase phase_##name(&g_phases.name)
#else
#define MRDG_PHASE(name)
#endif

int resolve_nq(const SolverOptions& opt, int p) {
  // p-point Gauss integrates degree 2p-1, enough for f(u) phi' with the
  // degree p-1 modal ansatz (exact for quadratic fluxes, standard otherwise).
  return opt.nq > 0 ? opt.nq : p;
}

// Scaling basis and its derivative tabulated at the quadrature nodes, plus
// the two face traces.
struct BasisTab {
  int p = 0, nq = 0;
  const QuadRule* q = nullptr;
  std::vector<double> phi, dphi;  // [j*nq + k]
  std::vector<double> phiT;       // [k*p + j], the face row for full coverage
  std::vector<double> phi0, phi1;
};

BasisTab make_tab(const Basis& basis, int nq) {
  BasisTab tb;
  tb.p = basis.p;
  tb.nq = nq;
  tb.q = &gauss_rule(nq);
  tb.phi.resize(static_cast<std::size_t>(basis.p) * nq);
  tb.dphi.resize(static_cast<std::size_t>(basis.p) * nq);
  tb.phiT.resize(static_cast<std::size_t>(basis.p) * nq);
  tb.phi0.resize(basis.p);
  tb.phi1.resize(basis.p);
  for (int j = 0; j < basis.p; ++j) {
    for (int k = 0; k < nq; ++k) {
      tb.phi[j * nq + k] = basis.scaling.eval(j, tb.q->x[k]);
      tb.dphi[j * nq + k] = basis.scaling.deriv(j, tb.q->x[k]);
      tb.phiT[k * basis.p + j] = tb.phi[j * nq + k];
    }
    tb.phi0[j] = basis.scaling.eval(j, 0.0);
    tb.phi1[j] = basis.scaling.eval(j, 1.0);
  }
  return tb;
}

// States of one block at the tensor quadrature points,
// out[(k1*nq + k2)*ncomp + c]; tmp holds p*nq scratch values.
void tabulate_states(const double* blk, int ncomp, int p, double inv_sqa,
                     const BasisTab& tb, double* tmp, double* out) {
  const int nq = tb.nq;
  for (int c = 0; c < ncomp; ++c) {
    const double* b = blk + c * p * p;
    for (int i2 = 0; i2 < p; ++i2)
      for (int k1 = 0; k1 < nq; ++k1) {
        double a = 0.0;
        for (int i1 = 0; i1 < p; ++i1) a += b[i1 * p + i2] * tb.phi[i1 * nq + k1];
        tmp[i2 * nq + k1] = a;
      }
    for (int k1 = 0; k1 < nq; ++k1)
      for (int k2 = 0; k2 < nq; ++k2) {
        double a = 0.0;
        for (int i2 = 0; i2 < p; ++i2) a += tmp[i2 * nq + k1] * tb.phi[i2 * nq + k2];
        out[(k1 * nq + k2) * ncomp + c] = a * inv_sqa;
      }
  }
}

void check_states(const ModelSpec& model, const CellIndex& cell,
                  const double* states, int n) {
  for (int i = 0; i < n; ++i)
    if (!model.admissible(states + i * model.ncomp))
      throw AdmissibilityError("inadmissible state in cell " + cell_str(cell) +
                               ": " + model.format_state(states + i * model.ncomp));
}

// One x-face overlap between two leaves (or a leaf and a clamped-boundary
// ghost). The xi-extent [fa, fb) is in finest-level cell units.
struct Seg {
  int ls = -1, rs = -1;  // leaf slots; -1 marks the ghost side
  int fa = 0, fb = 0;
};

struct FacePlan {
  std::vector<Seg> segs;
  std::vector<std::vector<int>> right_of, left_of;  // seg ids per leaf slot
};

FacePlan build_faces(const LeafField& f, BoundaryMode bc) {
  const GridConfig& cfg = f.cfg;
  const int L = cfg.max_level;
  const int nxf = cfg.cells_x(L);
  const int nleaf = static_cast<int>(f.cells.size());
  FacePlan plan;
  plan.right_of.resize(nleaf);
  plan.left_of.resize(nleaf);
  for (int s = 0; s < nleaf; ++s) {
    const CellIndex c = f.cells[s];
    const int shift = L - c.level;
    int fx = (c.ix + 1) << shift;
    const int f0 = c.ixi << shift, f1 = (c.ixi + 1) << shift;
    if (fx == nxf) {
      if (bc == BoundaryMode::clamped) {
        plan.right_of[s].push_back(static_cast<int>(plan.segs.size()));
        plan.segs.push_back({s, -1, f0, f1});
        continue;
      }
      fx = 0;
    }
    int g = f0;
    while (g < f1) {
      const auto nb = f.tree.leaf_covering({L, fx, g});
      if (!nb) throw ConfigError("face walk found no covering leaf (tree not graded?)");
      const int ns = f.find(*nb);
      if (ns < 0) throw ConfigError("face walk found a leaf without a field slot");
      const int nend = (nb->ixi + 1) << (L - nb->level);
      const int g1 = std::min(f1, nend);
      plan.right_of[s].push_back(static_cast<int>(plan.segs.size()));
      plan.left_of[ns].push_back(static_cast<int>(plan.segs.size()));
      plan.segs.push_back({s, ns, g, g1});
      g = g1;
    }
  }
  if (bc == BoundaryMode::clamped) {
    for (int s = 0; s < nleaf; ++s) {
      const CellIndex c = f.cells[s];
      if (c.ix != 0) continue;
      const int shift = L - c.level;
      plan.left_of[s].push_back(static_cast<int>(plan.segs.size()));
      plan.segs.push_back({-1, s, c.ixi << shift, (c.ixi + 1) << shift});
    }
  }
  return plan;
}

// Scaling-basis values row[k*p + i2] = phi_{i2}(t_k) at the nq quadrature
// points of the xi-interval [xia, xib] in the cell's local coordinate; shared
// by the trace evaluation and the flux quadrature of one segment side.
void face_basis_row(const GridConfig& cfg, const Basis& basis, const CellIndex& cell,
                    const BasisTab& tb, double xia, double xib, double* row) {
  const Rect r = cell_geometry(cfg, cell);
  for (int k = 0; k < tb.nq; ++k) {
    const double xi = xia + (xib - xia) * tb.q->x[k];
    const double t = (xi - r.xi0) / (r.xi1 - r.xi0);
    for (int i2 = 0; i2 < tb.p; ++i2) row[k * tb.p + i2] = basis.scaling.eval(i2, t);
  }
}

// Trace of one cell on a face xi-interval: out[k*ncomp + c] at the nq
// quadrature points encoded in `row`; `face_phi` is tb.phi1 (right face of
// the cell) or tb.phi0 (left face).
void face_trace(const LeafField& f, int slot, const double* face_phi,
                const double* row, int nq, double* out) {
  const int p = f.p, nc = f.ncomp;
  const double inv_sqa = 1.0 / std::sqrt(cell_geometry(f.cfg, f.cells[slot]).area());
  const double* blk = f.block(slot);
  for (int c = 0; c < nc; ++c) {
    double prof[8];  // xi-profile on the face; p <= 8
    for (int i2 = 0; i2 < p; ++i2) {
      double a = 0.0;
      for (int i1 = 0; i1 < p; ++i1) a += blk[c * p * p + i1 * p + i2] * face_phi[i1];
      prof[i2] = a;
    }
    for (int k = 0; k < nq; ++k) {
      double a = 0.0;
      for (int i2 = 0; i2 < p; ++i2) a += prof[i2] * row[k * p + i2];
      out[k * nc + c] = a * inv_sqa;
    }
  }
}

std::vector<double> residual_impl(const LeafField& f, const Basis& basis,
                                  const ModelSpec& model, const SolverOptions& opt,
                                  const FacePlan& plan, double* amax_out = nullptr) {
  const GridConfig& cfg = f.cfg;
  const int p = f.p, nc = f.ncomp, nq = resolve_nq(opt, p);
  const BasisTab tb = make_tab(basis, nq);
  const int nqq = nq * nq;
  const int bs = f.block_size();
  const int nleaf = static_cast<int>(f.cells.size());
  std::vector<double> rhs(f.data.size(), 0.0);
  std::vector<double> chunk_amax(
      amax_out ? chunk_count(nleaf, opt.nthreads) + chunk_count(
                     static_cast<int>(plan.segs.size()), opt.nthreads)
               : 0,
      0.0);

  // Volume terms: rhs_{i1,i2} += sqrt(hxi/hx) sum w1 w2 f(u) phi'_{i1} phi_{i2}.
  parallel_chunks(nleaf, opt.nthreads, [&](int ch, int sb, int se) {
    std::vector<double> tmp(p * nq), u(nqq * nc), fx(nqq * nc), ex(nq * p);
    for (int s = sb; s < se; ++s) {
      const CellIndex c = f.cells[s];
      const Rect r = cell_geometry(cfg, c);
      tabulate_states(f.block(s), nc, p, 1.0 / std::sqrt(r.area()), tb, tmp.data(),
                      u.data());
      check_states(model, c, u.data(), nqq);
      if (amax_out)
        chunk_amax[ch] = std::max(chunk_amax[ch], model.max_speed(u.data(), nqq));
      model.flux(u.data(), nqq, fx.data());
      const double scale = std::sqrt((r.xi1 - r.xi0) / (r.x1 - r.x0));
      double* out = rhs.data() + static_cast<std::size_t>(s) * bs;
      for (int comp = 0; comp < nc; ++comp) {
        for (int k1 = 0; k1 < nq; ++k1)
          for (int i2 = 0; i2 < p; ++i2) {
            double a = 0.0;
            for (int k2 = 0; k2 < nq; ++k2)
              a += tb.q->w[k2] * fx[(k1 * nq + k2) * nc + comp] * tb.phi[i2 * nq + k2];
            ex[k1 * p + i2] = a;
          }
        for (int i1 = 0; i1 < p; ++i1)
          for (int i2 = 0; i2 < p; ++i2) {
            double a = 0.0;
            for (int k1 = 0; k1 < nq; ++k1)
              a += tb.q->w[k1] * tb.dphi[i1 * nq + k1] * ex[k1 * p + i2];
            out[comp * p * p + i1 * p + i2] += scale * a;
          }
      }
    }
  });

  // Face terms, phase 1 (parallel): per-segment flux quadrature
  //   S_side[c][i2] = |seg| * sum_k w_k Fhat_k[c] phi_{i2}(t_side(xi_k)).
  const int nsg = static_cast<int>(plan.segs.size());
  const int voff = chunk_count(nleaf, opt.nthreads);  // face chunk_amax offset
  std::vector<double> segsum(static_cast<std::size_t>(nsg) * 2 * nc * p);
  const double hxif = cfg.h_xi(cfg.max_level);
  parallel_chunks(nsg, opt.nthreads, [&](int ch, int b, int e) {
    std::vector<double> ul(nq * nc), ur(nq * nc), fl(nq * nc), fr(nq * nc);
    std::vector<double> rowl(nq * p), rowr(nq * p);
    for (int si = b; si < e; ++si) {
      const Seg sg = plan.segs[si];
      const double xia = cfg.xi_lo + sg.fa * hxif;
      const double xib = cfg.xi_lo + sg.fb * hxif;
      const double* rl = nullptr;
      const double* rr = nullptr;
      if (sg.ls >= 0) {
        const CellIndex c = f.cells[sg.ls];
        const int shift = cfg.max_level - c.level;
        if (sg.fa == (c.ixi << shift) && sg.fb == ((c.ixi + 1) << shift)) {
          rl = tb.phiT.data();  // segment covers the whole side cell
        } else {
          face_basis_row(cfg, basis, c, tb, xia, xib, rowl.data());
          rl = rowl.data();
        }
        face_trace(f, sg.ls, tb.phi1.data(), rl, nq, ul.data());
      }
      if (sg.rs >= 0) {
        const CellIndex c = f.cells[sg.rs];
        const int shift = cfg.max_level - c.level;
        if (sg.fa == (c.ixi << shift) && sg.fb == ((c.ixi + 1) << shift)) {
          rr = tb.phiT.data();
        } else {
          face_basis_row(cfg, basis, c, tb, xia, xib, rowr.data());
          rr = rowr.data();
        }
        face_trace(f, sg.rs, tb.phi0.data(), rr, nq, ur.data());
      }
      if (sg.ls < 0) ul = ur;  // clamped ghost: zero-gradient trace
      if (sg.rs < 0) ur = ul;
      check_states(model, f.cells[sg.ls >= 0 ? sg.ls : sg.rs], ul.data(), nq);
      check_states(model, f.cells[sg.rs >= 0 ? sg.rs : sg.ls], ur.data(), nq);
      const double alpha =
          std::max(model.max_speed(ul.data(), nq), model.max_speed(ur.data(), nq));
      if (amax_out) chunk_amax[voff + ch] = std::max(chunk_amax[voff + ch], alpha);
      model.flux(ul.data(), nq, fl.data());
      model.flux(ur.data(), nq, fr.data());
      // Fhat in fl
      for (int k = 0; k < nq * nc; ++k)
        fl[k] = 0.5 * (fl[k] + fr[k]) - 0.5 * alpha * (ur[k] - ul[k]);
      double* S = segsum.data() + static_cast<std::size_t>(si) * 2 * nc * p;
      const double len = xib - xia;
      for (int side = 0; side < 2; ++side) {
        const int slot = side == 0 ? sg.ls : sg.rs;
        double* Ss = S + side * nc * p;
        if (slot < 0) {
          std::memset(Ss, 0, sizeof(double) * nc * p);
          continue;
        }
        const double* row = side == 0 ? rl : rr;
        for (int c = 0; c < nc; ++c)
          for (int i2 = 0; i2 < p; ++i2) {
            double a = 0.0;
            for (int k = 0; k < nq; ++k) a += tb.q->w[k] * fl[k * nc + c] * row[k * p + i2];
            Ss[c * p + i2] = len * a;
          }
      }
    }
  });

  // Face terms, phase 2 (serial scatter): rhs_left -= S_L phi_{i1}(1)/sqrt(A),
  // rhs_right += S_R phi_{i1}(0)/sqrt(A).
  for (int si = 0; si < nsg; ++si) {
    const Seg sg = plan.segs[si];
    const double* S = segsum.data() + static_cast<std::size_t>(si) * 2 * nc * p;
    if (sg.ls >= 0) {
      const double isq = 1.0 / std::sqrt(cell_geometry(cfg, f.cells[sg.ls]).area());
      double* out = rhs.data() + static_cast<std::size_t>(sg.ls) * bs;
      for (int c = 0; c < nc; ++c)
        for (int i1 = 0; i1 < p; ++i1)
          for (int i2 = 0; i2 < p; ++i2)
            out[c * p * p + i1 * p + i2] -= isq * tb.phi1[i1] * S[c * p + i2];
    }
    if (sg.rs >= 0) {
      const double isq = 1.0 / std::sqrt(cell_geometry(cfg, f.cells[sg.rs]).area());
      const double* Sr = S + nc * p;
      double* out = rhs.data() + static_cast<std::size_t>(sg.rs) * bs;
      for (int c = 0; c < nc; ++c)
        for (int i1 = 0; i1 < p; ++i1)
          for (int i2 = 0; i2 < p; ++i2)
            out[c * p * p + i1 * p + i2] += isq * tb.phi0[i1] * Sr[c * p + i2];
    }
  }
  if (amax_out) {
    double a = 0.0;
    for (const double v : chunk_amax) a = std::max(a, v);
    *amax_out = a;
  }
  return rhs;
}

// Virtual x-neighbor means for the limiter: per leaf, the area-weighted mean
// of the face-adjacent solution over this leaf's xi-extent, one value per
// side and component. Ghost sides use the cell's own mean (zero gradient).
void limit_field(LeafField& f, const Basis& basis, const ModelSpec& model,
                 const FacePlan& plan, int nthreads) {
  const int p = f.p;
  if (p < 2) return;
  const GridConfig& cfg = f.cfg;
  const int nc = f.ncomp, pp = p * p;
  const int nleaf = static_cast<int>(f.cells.size());
  const QuadRule& g3 = gauss_rule(3);
  const double hxif = cfg.h_xi(cfg.max_level);
  std::vector<double> mm(static_cast<std::size_t>(nleaf) * nc),
      mp(static_cast<std::size_t>(nleaf) * nc);
  parallel_chunks(nleaf, nthreads, [&](int, int b, int e) {
    for (int s = b; s < e; ++s) {
      const CellIndex c = f.cells[s];
      const int shift = cfg.max_level - c.level;
      const double span = static_cast<double>(1 << shift);
      const double own_isq = 1.0 / std::sqrt(cell_geometry(cfg, c).area());
      for (int side = 0; side < 2; ++side) {
        const auto& ids = side == 0 ? plan.left_of[s] : plan.right_of[s];
        double* out = (side == 0 ? mm.data() : mp.data()) + static_cast<std::size_t>(s) * nc;
        for (int comp = 0; comp < nc; ++comp) out[comp] = 0.0;
        for (const int si : ids) {
          const Seg sg = plan.segs[si];
          const double ratio = static_cast<double>(sg.fb - sg.fa) / span;
          const int nslot = side == 0 ? sg.ls : sg.rs;
          if (nslot < 0) {
            for (int comp = 0; comp < nc; ++comp)
              out[comp] += ratio * f.block(s)[comp * pp] * own_isq;
            continue;
          }
          const Rect nr = cell_geometry(cfg, f.cells[nslot]);
          const double isq = 1.0 / std::sqrt(nr.area());
          const double xia = cfg.xi_lo + sg.fa * hxif, xib = cfg.xi_lo + sg.fb * hxif;
          const double ta = (xia - nr.xi0) / (nr.xi1 - nr.xi0);
          const double tb2 = (xib - nr.xi0) / (nr.xi1 - nr.xi0);
          const double* nb = f.block(nslot);
          double avg[8];
          for (int i2 = 0; i2 < p; ++i2) {
            double a = 0.0;
            for (int k = 0; k < 3; ++k)
              a += g3.w[k] * basis.scaling.eval(i2, ta + (tb2 - ta) * g3.x[k]);
            avg[i2] = a;
          }
          for (int comp = 0; comp < nc; ++comp) {
            double a = 0.0;
            for (int i2 = 0; i2 < p; ++i2) a += nb[comp * pp + i2] * avg[i2];
            out[comp] += ratio * isq * a;
          }
        }
      }
    }
  });
  parallel_chunks(nleaf, nthreads, [&](int, int b, int e) {
    for (int s = b; s < e; ++s) {
      const Rect r = cell_geometry(cfg, f.cells[s]);
      shu_limit(f.block(s), nc, p, r.area(), r.x1 - r.x0,
                mm.data() + static_cast<std::size_t>(s) * nc,
                mp.data() + static_cast<std::size_t>(s) * nc, model.tvb_m);
    }
  });
}

// Overwrites blocks of `to` with the blocks of `from` wherever both fields
// have the same leaf (refinement persistence: unchanged leaves are verbatim).
void copy_common_leaves(const LeafField& from, LeafField& to) {
  const std::size_t bytes = sizeof(double) * to.block_size();
  for (int s = 0; s < static_cast<int>(to.cells.size()); ++s) {
    const int sf = from.find(to.cells[s]);
    if (sf >= 0) std::memcpy(to.block(s), from.block(sf), bytes);
  }
}

std::string format_time(double t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", t);
  return buf;
}

}  // namespace

LeafField project_initial(const GridConfig& cfg, const Basis& basis,
                          const ModelSpec& model, const DetailTree& tree, int nq,
                          int nthreads) {
  const int p = basis.p, nc = model.ncomp;
  if (nq <= 0) nq = p + 2;
  LeafField f = LeafField::make(cfg, nc, p, tree);
  const BasisTab tb = make_tab(basis, nq);
  const int nleaf = static_cast<int>(f.cells.size());
  parallel_chunks(nleaf, nthreads, [&](int, int b, int e) {
    std::vector<double> state(nc);
    for (int s = b; s < e; ++s) {
      const Rect r = cell_geometry(cfg, f.cells[s]);
      const double sqa = std::sqrt(r.area());
      double* blk = f.block(s);
      for (int k1 = 0; k1 < nq; ++k1)
        for (int k2 = 0; k2 < nq; ++k2) {
          const double x = r.x0 + (r.x1 - r.x0) * tb.q->x[k1];
          const double xi = r.xi0 + (r.xi1 - r.xi0) * tb.q->x[k2];
          model.initial(x, xi, state.data());
          const double wgt = sqa * tb.q->w[k1] * tb.q->w[k2];
          for (int c = 0; c < nc; ++c) {
            const double sc = wgt * state[c];
            for (int i1 = 0; i1 < p; ++i1) {
              const double ph1 = sc * tb.phi[i1 * nq + k1];
              for (int i2 = 0; i2 < p; ++i2)
                blk[c * p * p + i1 * p + i2] += ph1 * tb.phi[i2 * nq + k2];
            }
          }
        }
    }
  });
  return f;
}

SolverState initialize(const GridConfig& cfg, const Basis& basis,
                       const ModelSpec& model, const ThresholdPolicy& policy,
                       const SolverOptions& opt) {
  SolverState st;
  LeafField fine = project_initial(cfg, basis, model, full_tree(cfg), 0, opt.nthreads);
  if (!opt.adaptive) {
    st.field = std::move(fine);
    return st;
  }
  MultiscaleState ms = forward_transform(fine, basis);
  threshold(ms, policy);
  if (ms.tree == fine.tree) {
    st.field = std::move(fine);
  } else {
    st.field = inverse_transform(ms, basis);
    copy_common_leaves(fine, st.field);
  }
  return st;
}

void lax_friedrichs(const ModelSpec& model, const double* ul, const double* ur,
                    double* out) {
  const int nc = model.ncomp;
  std::vector<double> fl(nc), fr(nc);
  model.flux(ul, 1, fl.data());
  model.flux(ur, 1, fr.data());
  const double a = std::max(model.max_speed(ul, 1), model.max_speed(ur, 1));
  for (int c = 0; c < nc; ++c)
    out[c] = 0.5 * (fl[c] + fr[c]) - 0.5 * a * (ur[c] - ul[c]);
}

std::vector<double> assemble_residual(const LeafField& f, const Basis& basis,
                                      const ModelSpec& model,
                                      const SolverOptions& opt) {
  return residual_impl(f, basis, model, opt, build_faces(f, model.boundary));
}

double max_wave_speed(const LeafField& f, const Basis& basis,
                      const ModelSpec& model, const SolverOptions& opt) {
  const int p = f.p, nc = f.ncomp, nq = resolve_nq(opt, p);
  const BasisTab tb = make_tab(basis, nq);
  const int nleaf = static_cast<int>(f.cells.size());
  std::vector<double> part(chunk_count(nleaf, opt.nthreads), 0.0);
  parallel_chunks(nleaf, opt.nthreads, [&](int ch, int b, int e) {
    std::vector<double> tmp(p * nq), u(nq * nq * nc);
    double a = 0.0;
    for (int s = b; s < e; ++s) {
      const Rect r = cell_geometry(f.cfg, f.cells[s]);
      tabulate_states(f.block(s), nc, p, 1.0 / std::sqrt(r.area()), tb, tmp.data(),
                      u.data());
      check_states(model, f.cells[s], u.data(), nq * nq);
      a = std::max(a, model.max_speed(u.data(), nq * nq));
    }
    part[ch] = a;
  });
  double a = 0.0;
  for (const double v : part) a = std::max(a, v);
  return a;
}

double step(SolverState& st, const Basis& basis, const ModelSpec& model,
            const ThresholdPolicy& policy, double t_end, const SolverOptions& opt) {
  LeafField& f = st.field;
  const double remaining = t_end - st.t;
  if (!(remaining > 0.0)) throw ConfigError("step called at or past the final time");

  if (opt.adaptive) {  // refine: transform, predict, reconstruct
    // The very first step runs on the full finest grid: initial data that is
    // exactly representable on a coarse grid (e.g. a face-aligned jump)
    // carries no detail coefficients, so prediction alone could never seed
    // refinement. One resolved step creates honest details everywhere the
    // dynamics need them; thresholding prunes the rest immediately after.
    MRDG_PHASE(refine);
    MultiscaleState ms = [&] {
      MRDG_PHASE(fwd);
      return forward_transform(f, basis);
    }();
    DetailTree ptree = [&] {
      MRDG_PHASE(predict_);
      return st.steps == 0 ? full_tree(f.cfg)
                           : predict(f.tree, ms, policy, model.boundary);
    }();
    if (!(ptree == f.tree)) {
      MRDG_PHASE(inv);
      LeafField nf = inverse_transform(ms, basis, ptree);
      copy_common_leaves(f, nf);
      f = std::move(nf);
    }
  }
  st.n_total += static_cast<long long>(f.cells.size());
  st.leaves_per_step.push_back(static_cast<long>(f.cells.size()));

  FacePlan plan;
  {
    MRDG_PHASE(plan);
    plan = build_faces(f, model.boundary);
  }
  // SSP-RK3 (Shu-Osher): u <- a*u0 + b*(u + dt*L(u)), limited per stage.
  // dt comes from the wave speeds sampled during the stage-1 residual (the
  // stage needs dt only for the combine, after assembly).
  static constexpr double kA[3] = {0.0, 0.75, 1.0 / 3.0};
  static constexpr double kB[3] = {1.0, 0.25, 2.0 / 3.0};
  const std::vector<double> u0 = f.data;
  double dt = remaining;
  bool final_step = true;
  for (int stg = 0; stg < 3; ++stg) {
    std::vector<double> rhs;
    double amax = 0.0;
    try {
      MRDG_PHASE(residual);
      rhs = residual_impl(f, basis, model, opt, plan, stg == 0 ? &amax : nullptr);
    } catch (const AdmissibilityError& err) {
      throw AdmissibilityError(std::string(err.what()) + " at t=" + format_time(st.t) +
                               ", RK stage " + std::to_string(stg + 1));
    }
    if (stg == 0) {
      const int finest = f.cells.empty() ? 0 : f.cells.back().level;
      if (amax > 0.0) dt = std::min(dt, opt.cfl * f.cfg.h_x(finest) / amax);
      final_step = dt >= remaining;
      if (final_step) dt = remaining;
    }
    const double a = kA[stg], b = kB[stg];
    {
      MRDG_PHASE(combine);
      double* d = f.data.data();
      const std::size_t n = f.data.size();
      for (std::size_t i = 0; i < n; ++i) d[i] = a * u0[i] + b * (d[i] + dt * rhs[i]);
    }
    {
      MRDG_PHASE(limit);
      limit_field(f, basis, model, plan, opt.nthreads);
    }
  }

  if (opt.adaptive) {  // coarsen: transform, threshold, reconstruct
    MRDG_PHASE(coarsen);
    MultiscaleState ms = [&] {
      MRDG_PHASE(fwd);
      return forward_transform(f, basis);
    }();
    {
      MRDG_PHASE(thresh);
      threshold(ms, policy);
    }
    if (!(ms.tree == f.tree)) {
      MRDG_PHASE(inv);
      LeafField nf = inverse_transform(ms, basis);
      copy_common_leaves(f, nf);
      f = std::move(nf);
    }
  }

  st.t = final_step ? t_end : st.t + dt;
  ++st.steps;
  return dt;
}

RunStats run(SolverState& st, const Basis& basis, const ModelSpec& model,
             const ThresholdPolicy& policy, double t_end, const SolverOptions& opt) {
  const auto tic = std::chrono::steady_clock::now();
  while (st.t < t_end) step(st, basis, model, policy, t_end, opt);
  RunStats rs;
  rs.steps = st.steps;
  rs.n_total = st.n_total;
  rs.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - tic).count();
  return rs;
}

}  // namespace mrdg
