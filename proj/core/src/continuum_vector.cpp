#include "murraynet/continuum_vector.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <string>

#include "murraynet/errors.hpp"

namespace murraynet {

namespace {

void zero_mean(std::vector<double>& v) {
  if (v.empty()) return;
  double s = 0.0;
  for (double x : v) s += x;
  const double m = s / static_cast<double>(v.size());
  for (double& x : v) x -= m;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

std::vector<double> face_r_axis(const VectorProblem& pb, int axis) {
  const RectGrid& g = pb.grid;
  std::vector<double> out(static_cast<std::size_t>(g.face_count(axis)), 0.0);
  if (axis == 0) {
    for (int iy = 0; iy < g.n[1]; ++iy)
      for (int fx = 0; fx <= g.n[0]; ++fx) {
        const bool hasl = fx > 0;
        const bool hasr = fx < g.n[0];
        const double rl = hasl ? pb.r[g.cell(fx - 1, iy)] : 0.0;
        const double rr = hasr ? pb.r[g.cell(fx, iy)] : 0.0;
        out[g.face(0, fx, iy)] =
            (hasl && hasr) ? 0.5 * (rl + rr) : (hasl ? rl : rr);
      }
  } else {
    for (int fy = 0; fy <= g.n[1]; ++fy)
      for (int ix = 0; ix < g.n[0]; ++ix) {
        const bool hasl = fy > 0;
        const bool hasr = fy < g.n[1];
        const double rl = hasl ? pb.r[g.cell(ix, fy - 1)] : 0.0;
        const double rr = hasr ? pb.r[g.cell(ix, fy)] : 0.0;
        out[g.face(1, ix, fy)] =
            (hasl && hasr) ? 0.5 * (rl + rr) : (hasl ? rl : rr);
      }
  }
  return out;
}

// Full gradient carried by every face: nrm is the two-point difference
// across the face, trv averages the four nearest differences of the other
// axis (boundary faces of either axis count as zero, matching no-flux).
struct FaceGradients {
  std::array<std::vector<double>, 2> nrm;
  std::array<std::vector<double>, 2> trv;
};

void face_gradients(const RectGrid& g, const std::vector<double>& p,
                    FaceGradients& fg) {
  const double invh0 = 1.0 / g.h[0];
  const double invh1 = 1.0 / g.h[1];
  fg.nrm[0].assign(static_cast<std::size_t>(g.face_count(0)), 0.0);
  fg.nrm[1].assign(static_cast<std::size_t>(g.face_count(1)), 0.0);
  fg.trv[0].assign(fg.nrm[0].size(), 0.0);
  fg.trv[1].assign(fg.nrm[1].size(), 0.0);

  for (int iy = 0; iy < g.n[1]; ++iy)
    for (int fx = 1; fx < g.n[0]; ++fx)
      fg.nrm[0][g.face(0, fx, iy)] =
          (p[g.cell(fx, iy)] - p[g.cell(fx - 1, iy)]) * invh0;
  for (int fy = 1; fy < g.n[1]; ++fy)
    for (int ix = 0; ix < g.n[0]; ++ix)
      fg.nrm[1][g.face(1, ix, fy)] =
          (p[g.cell(ix, fy)] - p[g.cell(ix, fy - 1)]) * invh1;

  auto d1 = [&](int ix, int fy) {
    return (fy >= 1 && fy <= g.n[1] - 1) ? fg.nrm[1][g.face(1, ix, fy)] : 0.0;
  };
  auto d0 = [&](int fx, int iy) {
    return (fx >= 1 && fx <= g.n[0] - 1) ? fg.nrm[0][g.face(0, fx, iy)] : 0.0;
  };
  for (int iy = 0; iy < g.n[1]; ++iy)
    for (int fx = 1; fx < g.n[0]; ++fx)
      fg.trv[0][g.face(0, fx, iy)] =
          0.25 * (d1(fx - 1, iy) + d1(fx - 1, iy + 1) + d1(fx, iy) +
                  d1(fx, iy + 1));
  for (int fy = 1; fy < g.n[1]; ++fy)
    for (int ix = 0; ix < g.n[0]; ++ix)
      fg.trv[1][g.face(1, ix, fy)] =
          0.25 * (d0(ix, fy - 1) + d0(ix + 1, fy - 1) + d0(ix, fy) +
                  d0(ix + 1, fy));
}

// lambda_f = r_f + kappa |g_f|^{2/(gamma-1)} on interior faces.
void face_mobility(const std::array<std::vector<double>, 2>& rf,
                   const FaceGradients& fg, double kappa, double halfexpo,
                   std::array<std::vector<double>, 2>& lam) {
  for (int axis = 0; axis < 2; ++axis) {
    lam[axis].assign(fg.nrm[axis].size(), 0.0);
    for (std::size_t f = 0; f < fg.nrm[axis].size(); ++f) {
      const double g2 = fg.nrm[axis][f] * fg.nrm[axis][f] +
                        fg.trv[axis][f] * fg.trv[axis][f];
      lam[axis][f] = rf[axis][f] + kappa * std::pow(g2, halfexpo);
    }
  }
}

// Conservation defect with the given face mobilities: sum of outward
// q_f A_f minus S_i V per cell.
void defect(const RectGrid& g, const std::array<std::vector<double>, 2>& lam,
            const FaceGradients& fg, const std::vector<double>& src, double V,
            std::vector<double>& d) {
  d.assign(static_cast<std::size_t>(g.cell_count()), 0.0);
  const double A0 = g.face_area(0);
  for (int iy = 0; iy < g.n[1]; ++iy)
    for (int fx = 1; fx < g.n[0]; ++fx) {
      const int f = g.face(0, fx, iy);
      const double q = -lam[0][f] * fg.nrm[0][f];
      d[g.cell(fx - 1, iy)] += q * A0;
      d[g.cell(fx, iy)] -= q * A0;
    }
  const double A1 = g.face_area(1);
  for (int fy = 1; fy < g.n[1]; ++fy)
    for (int ix = 0; ix < g.n[0]; ++ix) {
      const int f = g.face(1, ix, fy);
      const double q = -lam[1][f] * fg.nrm[1][f];
      d[g.cell(ix, fy - 1)] += q * A1;
      d[g.cell(ix, fy)] -= q * A1;
    }
  for (int c = 0; c < g.cell_count(); ++c) d[c] -= src[c] * V;
}

void fill_cell_gradient(const RectGrid& g, const std::vector<double>& p,
                        std::array<std::vector<double>, 2>& grad) {
  const int n0 = g.n[0], n1 = g.n[1];
  grad[0].assign(p.size(), 0.0);
  grad[1].assign(p.size(), 0.0);
  for (int iy = 0; iy < n1; ++iy)
    for (int ix = 0; ix < n0; ++ix) {
      const int c = g.cell(ix, iy);
      if (ix == 0)
        grad[0][c] = (p[g.cell(1, iy)] - p[g.cell(0, iy)]) / g.h[0];
      else if (ix == n0 - 1)
        grad[0][c] =
            (p[g.cell(n0 - 1, iy)] - p[g.cell(n0 - 2, iy)]) / g.h[0];
      else
        grad[0][c] =
            (p[g.cell(ix + 1, iy)] - p[g.cell(ix - 1, iy)]) / (2.0 * g.h[0]);
      if (iy == 0)
        grad[1][c] = (p[g.cell(ix, 1)] - p[g.cell(ix, 0)]) / g.h[1];
      else if (iy == n1 - 1)
        grad[1][c] =
            (p[g.cell(ix, n1 - 1)] - p[g.cell(ix, n1 - 2)]) / g.h[1];
      else
        grad[1][c] =
            (p[g.cell(ix, iy + 1)] - p[g.cell(ix, iy - 1)]) / (2.0 * g.h[1]);
    }
}

VectorState solve_vec_impl(const VectorProblem& pb, std::vector<double> p,
                           double tol, int max_iter) {
  pb.validate();
  if (tol <= 0.0 || max_iter < 1)
    throw ConfigError("pressure solve needs tol > 0 and max_iter >= 1");
  const RectGrid& g = pb.grid;
  const int N = g.cell_count();
  if (static_cast<int>(p.size()) != N)
    throw ConfigError("initial pressure field has wrong size");
  zero_mean(p);

  std::vector<double> src = pb.source;
  zero_mean(src);

  const double kappa = std::pow(pb.nu, -1.0 / (pb.gamma - 1.0));
  const double halfexpo = 1.0 / (pb.gamma - 1.0);  // exponent of |g|^2
  const double V = g.cell_volume();
  const double s_scale = std::max(1.0, max_abs(src));
  const double bound = tol * s_scale * V;

  std::array<std::vector<double>, 2> rf{face_r_axis(pb, 0),
                                        face_r_axis(pb, 1)};
  FaceGradients fg;
  std::array<std::vector<double>, 2> lam_star, lam;
  std::vector<double> d;

  face_gradients(g, p, fg);
  face_mobility(rf, fg, kappa, halfexpo, lam_star);
  lam = lam_star;

  defect(g, lam_star, fg, src, V, d);
  double dmax = max_abs(d);
  if (dmax <= bound) {
    VectorState out;
    out.grid = g;
    out.p = std::move(p);
    fill_cell_gradient(g, out.p, out.grad_p);
    return out;
  }

  Eigen::SparseMatrix<double> A(N, N);
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd b(N), x(N);
  bool pattern_ready = false;

  // lagged-mobility damping: safe cap 2/(1 + curvature exponent), adapted on
  // the observed contraction of the defect
  double theta = std::min(1.0, 2.0 / (1.0 + 2.0 * halfexpo));
  double dprev = dmax;

  for (int iter = 0; iter < max_iter; ++iter) {
    for (int axis = 0; axis < 2; ++axis)
      for (std::size_t f = 0; f < lam[axis].size(); ++f)
        lam[axis][f] += theta * (lam_star[axis][f] - lam[axis][f]);

    trip.clear();
    trip.reserve(static_cast<std::size_t>(5 * N));
    double diag_sum = 0.0;
    const double c0 = g.face_area(0) / g.h[0];
    for (int iy = 0; iy < g.n[1]; ++iy)
      for (int fx = 1; fx < g.n[0]; ++fx) {
        const double w = lam[0][g.face(0, fx, iy)] * c0;
        const int l = g.cell(fx - 1, iy), r = g.cell(fx, iy);
        trip.emplace_back(l, l, w);
        trip.emplace_back(r, r, w);
        trip.emplace_back(l, r, -w);
        trip.emplace_back(r, l, -w);
        diag_sum += 2.0 * w;
      }
    const double c1 = g.face_area(1) / g.h[1];
    for (int fy = 1; fy < g.n[1]; ++fy)
      for (int ix = 0; ix < g.n[0]; ++ix) {
        const double w = lam[1][g.face(1, ix, fy)] * c1;
        const int l = g.cell(ix, fy - 1), r = g.cell(ix, fy);
        trip.emplace_back(l, l, w);
        trip.emplace_back(r, r, w);
        trip.emplace_back(l, r, -w);
        trip.emplace_back(r, l, -w);
        diag_sum += 2.0 * w;
      }
    // gauge pin: fixes the additive constant without touching compatible
    // right-hand sides (the pinned solution has p[0] = 0, re-gauged below)
    trip.emplace_back(0, 0, std::max(diag_sum / N, 1e-300));

    A.setFromTriplets(trip.begin(), trip.end());
    if (!pattern_ready) {
      ldlt.analyzePattern(A);
      pattern_ready = true;
    }
    ldlt.factorize(A);
    if (ldlt.info() != Eigen::Success)
      throw NonConvergence("inner linear factorization failed",
                           dmax / (s_scale * V));
    for (int c = 0; c < N; ++c) b[c] = src[c] * V;
    x = ldlt.solve(b);
    for (int c = 0; c < N; ++c) p[c] = x[c];
    zero_mean(p);

    face_gradients(g, p, fg);
    face_mobility(rf, fg, kappa, halfexpo, lam_star);
    defect(g, lam_star, fg, src, V, d);
    dmax = max_abs(d);
    if (dmax <= bound) {
      VectorState out;
      out.grid = g;
      out.p = std::move(p);
      fill_cell_gradient(g, out.p, out.grad_p);
      return out;
    }
    // any progress earns theta back; demanding fast contraction here would
    // deadlock (small theta -> slow contraction -> theta stays small)
    if (dmax >= dprev)
      theta = std::max(0.5 * theta, 0.02);
    else
      theta = std::min(1.2 * theta, 1.0);
    dprev = dmax;
  }
  throw NonConvergence("mobility iteration hit the iteration cap",
                       dmax / (s_scale * V));
}

}  // namespace

void VectorProblem::validate() const {
  if (grid.dim != 2)
    throw ConfigError("the vector model needs a two-dimensional grid");
  for (int axis = 0; axis < 2; ++axis) {
    if (grid.n[axis] < 2)
      throw ConfigError("grid needs at least 2 cells per axis");
    if (!(grid.h[axis] > 0.0) || !std::isfinite(grid.h[axis]))
      throw ConfigError("grid spacing must be positive");
  }
  if (!(gamma > 1.0) || !std::isfinite(gamma))
    throw ConfigError("gamma must exceed 1");
  if (!(nu > 0.0) || !std::isfinite(nu)) throw ConfigError("nu must be positive");
  const std::size_t nc = static_cast<std::size_t>(grid.cell_count());
  if (r.size() != nc)
    throw ConfigError("permeability field size does not match the grid");
  if (source.size() != nc)
    throw ConfigError("source field size does not match the grid");
  for (double v : r)
    if (!(v > 0.0) || !std::isfinite(v))
      throw ConfigError("permeability must be strictly positive and finite");
  for (double v : source)
    if (!std::isfinite(v)) throw ConfigError("source must be finite");
}

VectorProblem project_source(VectorProblem problem) {
  problem.validate();
  const double V = problem.grid.cell_volume();
  double shift = 0.0;
  for (int pass = 0; pass < 2; ++pass) {
    double tot = 0.0, c = 0.0;
    for (double s : problem.source) {
      const double y = s * V - c;
      const double t = tot + y;
      c = (t - tot) - y;
      tot = t;
    }
    const double mean = tot / (V * static_cast<double>(problem.source.size()));
    for (double& s : problem.source) s -= mean;
    shift += mean;
  }
  problem.source_shift += shift;
  return problem;
}

VectorState solve_pressure_vec(const VectorProblem& problem, double tol,
                               int max_iter) {
  return solve_vec_impl(
      problem,
      std::vector<double>(static_cast<std::size_t>(problem.grid.cell_count()),
                          0.0),
      tol, max_iter);
}

VectorState solve_pressure_vec(const VectorProblem& problem,
                               const std::vector<double>& initial, double tol,
                               int max_iter) {
  return solve_vec_impl(problem, initial, tol, max_iter);
}

VectorState reconstruct_m(VectorState state, const VectorProblem& problem,
                          double sign_eps,
                          const std::vector<std::int8_t>& orientation_mask) {
  problem.validate();
  const std::size_t N = static_cast<std::size_t>(problem.grid.cell_count());
  if (state.p.size() != N)
    throw ConfigError("pressure field size does not match the grid");
  if (state.grad_p[0].size() != N || state.grad_p[1].size() != N)
    fill_cell_gradient(problem.grid, state.p, state.grad_p);
  if (!orientation_mask.empty()) {
    if (orientation_mask.size() != N)
      throw ConfigError("orientation mask size does not match the grid");
    for (auto v : orientation_mask)
      if (v != 1 && v != -1)
        throw ConfigError("orientation mask entries must be +1 or -1");
  }

  if (sign_eps < 0.0) {
    double m = 0.0;
    for (std::size_t c = 0; c < N; ++c)
      m = std::max(m, std::hypot(state.grad_p[0][c], state.grad_p[1][c]));
    sign_eps = 1e-12 * m;
  }
  state.sign_eps = sign_eps;

  const double magcoef = std::pow(problem.nu, 0.5 / (1.0 - problem.gamma));
  const double magexpo = 1.0 / (problem.gamma - 1.0);
  state.m[0].assign(N, 0.0);
  state.m[1].assign(N, 0.0);
  state.orientation.assign(N, 0);
  for (std::size_t c = 0; c < N; ++c) {
    const double gx = state.grad_p[0][c];
    const double gy = state.grad_p[1][c];
    const double gn = std::hypot(gx, gy);
    if (gn <= sign_eps) continue;  // m stays exactly 0, orientation null
    const double sgn = orientation_mask.empty()
                           ? 1.0
                           : static_cast<double>(orientation_mask[c]);
    const double scale = sgn * magcoef * std::pow(gn, magexpo) / gn;
    state.m[0][c] = scale * gx;
    state.m[1][c] = scale * gy;
    state.orientation[c] = static_cast<std::int8_t>(sgn);
  }
  return state;
}

std::vector<double> eigen_residual(const VectorState& state,
                                   const VectorProblem& problem) {
  problem.validate();
  const std::size_t N = static_cast<std::size_t>(problem.grid.cell_count());
  if (state.m[0].size() != N || state.m[1].size() != N)
    throw ConfigError("m missing; reconstruct it first");
  std::vector<double> out(N, 0.0);
  for (std::size_t c = 0; c < N; ++c) {
    const double gx = state.grad_p[0][c], gy = state.grad_p[1][c];
    const double mx = state.m[0][c], my = state.m[1][c];
    const double m2 = mx * mx + my * my;
    const double dot = gx * mx + gy * my;
    const double coef = problem.nu * std::pow(m2, problem.gamma - 1.0);
    const double rx = dot * gx - coef * mx;
    const double ry = dot * gy - coef * my;
    const double den = coef * std::sqrt(m2) + 1e-300;
    out[c] = std::hypot(rx, ry) / den;
  }
  return out;
}

BalanceRecord murray_balance_vec(const VectorState& state,
                                 const VectorProblem& problem,
                                 const std::vector<std::uint8_t>& subdomain,
                                 double sign_eps) {
  problem.validate();
  const RectGrid& g = problem.grid;
  const std::size_t N = static_cast<std::size_t>(g.cell_count());
  if (state.p.size() != N)
    throw ConfigError("pressure field size does not match the grid");
  if (subdomain.size() != N)
    throw ConfigError("subdomain mask size does not match the grid");
  int inside = 0;
  for (auto m : subdomain) inside += m ? 1 : 0;
  if (inside == 0) throw EmptySubdomain("subdomain covers no cells");

  FaceGradients fg;
  face_gradients(g, state.p, fg);
  std::array<std::vector<double>, 2> rf{face_r_axis(problem, 0),
                                        face_r_axis(problem, 1)};
  const double kappa = std::pow(problem.nu, -1.0 / (problem.gamma - 1.0));
  const double halfexpo = 1.0 / (problem.gamma - 1.0);
  std::array<std::vector<double>, 2> lam;
  face_mobility(rf, fg, kappa, halfexpo, lam);

  if (sign_eps < 0.0) {
    double m = 0.0;
    for (int axis = 0; axis < 2; ++axis)
      for (double u : fg.nrm[axis]) m = std::max(m, std::abs(u));
    sign_eps = 1e-12 * m;
  }

  const double V = g.cell_volume();
  BalanceRecord rec;
  for (std::size_t c = 0; c < N; ++c)
    if (subdomain[c]) rec.source_integral += problem.source[c] * V;
  double floor = 0.0;
  for (double s : problem.source) floor += std::abs(s) * V;

  const double sqnu = std::sqrt(problem.nu);
  const double magcoef = std::pow(problem.nu, 0.5 / (1.0 - problem.gamma));

  auto face_visit = [&](int axis, int f, double nrm_sign) {
    ++rec.boundary_faces;
    const double u = fg.nrm[axis][f];
    if (std::abs(u) <= sign_eps) {
      ++rec.null_faces;
      return;
    }
    const double A = g.face_area(axis);
    const double t = fg.trv[axis][f];
    const double gn = std::hypot(u, t);
    // face-held direction field: magnitude from the gradient law, unit
    // direction from the face gradient
    const double mag = magcoef * std::pow(gn, halfexpo);
    const double murray = sqnu * (rf[axis][f] + mag * mag) *
                          std::pow(mag, problem.gamma - 1.0) *
                          (std::abs(u) / gn) * A;
    const double qn = -lam[axis][f] * u * nrm_sign * A;  // outward flux
    if (qn < 0.0) {
      rec.influx += murray;
      rec.raw_influx += -qn;
    } else {
      rec.outflux += murray;
      rec.raw_outflux += qn;
    }
  };

  for (int iy = 0; iy < g.n[1]; ++iy)
    for (int fx = 0; fx <= g.n[0]; ++fx) {
      const bool inl = fx > 0 && subdomain[g.cell(fx - 1, iy)];
      const bool inr = fx < g.n[0] && subdomain[g.cell(fx, iy)];
      if (inl != inr) face_visit(0, g.face(0, fx, iy), inl ? 1.0 : -1.0);
    }
  for (int fy = 0; fy <= g.n[1]; ++fy)
    for (int ix = 0; ix < g.n[0]; ++ix) {
      const bool inl = fy > 0 && subdomain[g.cell(ix, fy - 1)];
      const bool inr = fy < g.n[1] && subdomain[g.cell(ix, fy)];
      if (inl != inr) face_visit(1, g.face(1, ix, fy), inl ? 1.0 : -1.0);
    }

  const double den = rec.influx + rec.outflux + std::abs(rec.source_integral) +
                     floor;
  rec.residual =
      den > 0.0
          ? std::abs(rec.outflux - rec.influx - rec.source_integral) / den
          : 0.0;
  const double rden = rec.raw_influx + rec.raw_outflux +
                      std::abs(rec.source_integral) + floor;
  rec.raw_residual =
      rden > 0.0
          ? std::abs(rec.raw_outflux - rec.raw_influx - rec.source_integral) /
                rden
          : 0.0;
  const double fden =
      rec.influx + rec.outflux + rec.raw_influx + rec.raw_outflux;
  rec.form_agreement =
      fden > 0.0 ? (std::abs(rec.influx - rec.raw_influx) +
                    std::abs(rec.outflux - rec.raw_outflux)) /
                       fden
                 : 0.0;
  return rec;
}

}  // namespace murraynet
