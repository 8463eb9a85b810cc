#include "murraynet/continuum_grid.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "murraynet/errors.hpp"

namespace murraynet {

namespace {

double kappa_of(const ContinuumProblem& pb) {
  return std::pow(pb.nu, -1.0 / (pb.gamma - 1.0));
}

// r averaged onto the faces of one axis; boundary faces take the single
// adjacent cell.
std::vector<double> face_r(const ContinuumProblem& pb, int axis) {
  const RectGrid& g = pb.grid;
  std::vector<double> out(static_cast<std::size_t>(g.face_count(axis)), 0.0);
  if (axis >= g.dim) return out;
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

// Two-point face differences of a cell field; boundary faces stay 0, which
// is exactly the no-flux convention.
void face_grad_into(const RectGrid& g, const std::vector<double>& p, int axis,
                    std::vector<double>& out) {
  out.assign(static_cast<std::size_t>(g.face_count(axis)), 0.0);
  if (axis >= g.dim) return;
  const double invh = 1.0 / g.h[axis];
  if (axis == 0) {
    for (int iy = 0; iy < g.n[1]; ++iy)
      for (int fx = 1; fx < g.n[0]; ++fx)
        out[g.face(0, fx, iy)] =
            (p[g.cell(fx, iy)] - p[g.cell(fx - 1, iy)]) * invh;
  } else {
    for (int fy = 1; fy < g.n[1]; ++fy)
      for (int ix = 0; ix < g.n[0]; ++ix)
        out[g.face(1, ix, fy)] =
            (p[g.cell(ix, fy)] - p[g.cell(ix, fy - 1)]) * invh;
  }
}

std::vector<double> face_grad(const RectGrid& g, const std::vector<double>& p,
                              int axis) {
  std::vector<double> out;
  face_grad_into(g, p, axis, out);
  return out;
}

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

double max_abs_grad(const RectGrid& g, const std::vector<double>& p) {
  double m = 0.0;
  for (int axis = 0; axis < g.dim; ++axis)
    for (double u : face_grad(g, p, axis)) m = std::max(m, std::abs(u));
  return m;
}

// One scalar flux law sigma(u) = r u + kappa |u|^expo u and its inverse.
double sigma_law(double r, double kappa, double expo, double u) {
  return r * u + kappa * std::pow(std::abs(u), expo) * u;
}

double sigma_law_deriv(double r, double kappa, double expo, double u) {
  return r + kappa * (expo + 1.0) * std::pow(std::abs(u), expo);
}

// Root of sigma(u) = t. Strictly increasing for r > 0, so the root is
// unique and bracketed by 0 and t/r; the expansion loop is defensive only.
double invert_flux_law(double r, double kappa, double expo, double t) {
  if (t == 0.0) return 0.0;
  double lo = std::min(0.0, t / r);
  double hi = std::max(0.0, t / r);
  int guard = 0;
  while (sigma_law(r, kappa, expo, hi) < t) {
    hi = (hi == 0.0) ? 1.0 : hi * 2.0;
    if (++guard > 200) throw BisectionFailure("cannot bracket flux law root");
  }
  while (sigma_law(r, kappa, expo, lo) > t) {
    lo = (lo == 0.0) ? -1.0 : lo * 2.0;
    if (++guard > 400) throw BisectionFailure("cannot bracket flux law root");
  }
  const double tol = 1e-14 * std::max({1.0, std::abs(lo), std::abs(hi)});
  for (int it = 0; it < 200 && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (sigma_law(r, kappa, expo, mid) < t)
      lo = mid;
    else
      hi = mid;
  }
  double u = 0.5 * (lo + hi);
  for (int it = 0; it < 3; ++it) {
    const double f = sigma_law(r, kappa, expo, u) - t;
    const double d = sigma_law_deriv(r, kappa, expo, u);
    const double un = u - f / d;
    if (std::isfinite(un) && un >= lo - tol && un <= hi + tol) u = un;
  }
  return u;
}

// 5-point Gauss-Legendre on [a, b].
double gl5(double a, double b, const std::function<double(double)>& f) {
  static constexpr double X[5] = {-0.9061798459386640, -0.5384693101056831,
                                  0.0, 0.5384693101056831,
                                  0.9061798459386640};
  static constexpr double W[5] = {0.2369268850561891, 0.4786286704993665,
                                  0.5688888888888889, 0.4786286704993665,
                                  0.2369268850561891};
  const double c = 0.5 * (a + b);
  const double hw = 0.5 * (b - a);
  double s = 0.0;
  for (int k = 0; k < 5; ++k) s += W[k] * f(c + hw * X[k]);
  return s * hw;
}

struct ObjectiveConstants {
  double kappa;  // nu^{-1/(gamma-1)}
  double expo;   // 2/(gamma-1), conductivity exponent
  double sexp;   // 2 gamma/(gamma-1), energy exponent
  double acoef;  // kappa (gamma-1)/(2 gamma); acoef * sexp == kappa
};

ObjectiveConstants constants_of(const ContinuumProblem& pb) {
  ObjectiveConstants k{};
  k.kappa = kappa_of(pb);
  k.expo = 2.0 / (pb.gamma - 1.0);
  k.sexp = 2.0 * pb.gamma / (pb.gamma - 1.0);
  k.acoef = k.kappa * (pb.gamma - 1.0) / (2.0 * pb.gamma);
  return k;
}

// Objective whose cell gradient is the finite-volume conservation defect
//   G_c = sum_faces +-A sigma(u_f) - V S_c.
double eval_objective(const ContinuumProblem& pb,
                      const std::vector<double>& src,
                      const ObjectiveConstants& k,
                      const std::array<std::vector<double>, 2>& rf,
                      const std::vector<double>& p,
                      std::array<std::vector<double>, 2>& u,
                      std::vector<double>& grad) {
  const RectGrid& g = pb.grid;
  const double V = g.cell_volume();
  grad.assign(p.size(), 0.0);
  double energy = 0.0;
  for (int axis = 0; axis < g.dim; ++axis) {
    face_grad_into(g, p, axis, u[axis]);
    const double A = g.face_area(axis);
    if (axis == 0) {
      for (int iy = 0; iy < g.n[1]; ++iy)
        for (int fx = 1; fx < g.n[0]; ++fx) {
          const int f = g.face(0, fx, iy);
          const double uf = u[0][f];
          const double au = std::abs(uf);
          const double sig = rf[0][f] * uf + k.kappa * std::pow(au, k.expo) * uf;
          energy += V * (0.5 * rf[0][f] * uf * uf +
                         k.acoef * std::pow(au, k.sexp));
          grad[g.cell(fx, iy)] += A * sig;
          grad[g.cell(fx - 1, iy)] -= A * sig;
        }
    } else {
      for (int fy = 1; fy < g.n[1]; ++fy)
        for (int ix = 0; ix < g.n[0]; ++ix) {
          const int f = g.face(1, ix, fy);
          const double uf = u[1][f];
          const double au = std::abs(uf);
          const double sig = rf[1][f] * uf + k.kappa * std::pow(au, k.expo) * uf;
          energy += V * (0.5 * rf[1][f] * uf * uf +
                         k.acoef * std::pow(au, k.sexp));
          grad[g.cell(ix, fy)] += A * sig;
          grad[g.cell(ix, fy - 1)] -= A * sig;
        }
    }
  }
  for (int c = 0; c < g.cell_count(); ++c) {
    energy -= V * p[c] * src[c];
    grad[c] -= V * src[c];
  }
  return energy;
}

GridField solve_pressure_impl(const ContinuumProblem& pb,
                              std::vector<double> p, double tol,
                              int max_iter) {
  pb.validate();
  if (tol <= 0.0 || max_iter < 1)
    throw ConfigError("pressure solve needs tol > 0 and max_iter >= 1");
  const RectGrid& g = pb.grid;
  const int N = g.cell_count();
  const double V = g.cell_volume();
  if (static_cast<int>(p.size()) != N)
    throw ConfigError("initial pressure field has wrong size");
  zero_mean(p);

  // Work against the re-centered source: on zero-mean fields the objective
  // is unchanged, and the conservation defect of an unprojected source
  // would otherwise never drop below its mean.
  std::vector<double> src = pb.source;
  zero_mean(src);

  const ObjectiveConstants k = constants_of(pb);
  std::array<std::vector<double>, 2> rf{face_r(pb, 0), face_r(pb, 1)};
  std::array<std::vector<double>, 2> u;

  const double s_scale = std::max(1.0, max_abs(src));
  const double bound = tol * s_scale * V;

  std::vector<double> grad, grad_t, pt;
  double energy = eval_objective(pb, src, k, rf, p, u, grad);

  // Diagonal curvature row bound at the starting gradients; seeds the step.
  double rowsum = 0.0;
  for (int axis = 0; axis < g.dim; ++axis) {
    double mx = 0.0;
    for (std::size_t f = 0; f < u[axis].size(); ++f)
      mx = std::max(mx,
                    sigma_law_deriv(rf[axis][f], k.kappa, k.expo, u[axis][f]));
    rowsum += 2.0 * mx * g.face_area(axis) / g.h[axis];
  }
  const double L0 = std::max(rowsum, 1e-300);
  double alpha = 1.0 / L0;

  // short energy history for the nonmonotone acceptance test
  std::array<double, 10> ering;
  ering.fill(energy);
  int ehead = 0;

  double gmax = max_abs(grad);
  for (int iter = 0; iter < max_iter; ++iter) {
    if (gmax <= bound) {
      GridField out;
      out.grid = g;
      out.pressure = std::move(p);
      zero_mean(out.pressure);
      return out;
    }
    double gg = 0.0;
    for (double gi : grad) gg += gi * gi;
    double eref = ering[0];
    for (double e : ering) eref = std::max(eref, e);

    double step = alpha;
    bool accepted = false;
    double energy_t = 0.0;
    for (int bt = 0; bt < 60; ++bt) {
      pt.resize(p.size());
      for (std::size_t i = 0; i < p.size(); ++i) pt[i] = p[i] - step * grad[i];
      zero_mean(pt);
      energy_t = eval_objective(pb, src, k, rf, pt, u, grad_t);
      const double slack =
          4e-15 * (std::abs(eref) + std::abs(energy_t)) + 1e-300;
      if (energy_t <= eref - 1e-4 * step * gg + slack) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted)
      throw NonConvergence("pressure descent stalled in the line search",
                           gmax / (s_scale * V));

    double sy = 0.0, ss = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double si = pt[i] - p[i];
      const double yi = grad_t[i] - grad[i];
      sy += si * yi;
      ss += si * si;
    }
    alpha = (std::isfinite(sy) && sy > 0.0) ? ss / sy : step * 2.0;
    alpha = std::clamp(alpha, 1e-12 / L0, 1e12 / L0);

    p.swap(pt);
    grad.swap(grad_t);
    energy = energy_t;
    ering[ehead] = energy;
    ehead = (ehead + 1) % static_cast<int>(ering.size());
    gmax = max_abs(grad);
  }
  throw NonConvergence("pressure descent hit the iteration cap",
                       gmax / (s_scale * V));
}

}  // namespace

void ContinuumProblem::validate() const {
  if (grid.dim != 1 && grid.dim != 2)
    throw ConfigError("grid dimension must be 1 or 2");
  for (int axis = 0; axis < grid.dim; ++axis) {
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

ContinuumProblem project_source(ContinuumProblem problem) {
  problem.validate();
  const double V = problem.grid.cell_volume();
  double shift = 0.0;
  for (int pass = 0; pass < 2; ++pass) {
    double tot = 0.0, c = 0.0;
    for (double s : problem.source) {  // Kahan, the totals matter here
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

double functional_value(const GridField& p, const ContinuumProblem& problem) {
  problem.validate();
  const RectGrid& g = problem.grid;
  if (p.pressure.size() != static_cast<std::size_t>(g.cell_count()))
    throw ConfigError("pressure field size does not match the grid");
  const ObjectiveConstants k = constants_of(problem);
  const double V = g.cell_volume();
  double acc = 0.0;

  auto add_term = [&](double r_face, double uf, double weight) {
    acc += weight * (0.5 * r_face * uf * uf +
                     k.kappa * std::pow(std::abs(uf), k.sexp));
  };

  for (int axis = 0; axis < g.dim; ++axis) {
    const std::vector<double> rf = face_r(problem, axis);
    const double invh = 1.0 / g.h[axis];
    if (axis == 0) {
      for (int iy = 0; iy < g.n[1]; ++iy) {
        for (int fx = 1; fx < g.n[0]; ++fx)
          add_term(rf[g.face(0, fx, iy)],
                   (p.pressure[g.cell(fx, iy)] -
                    p.pressure[g.cell(fx - 1, iy)]) *
                       invh,
                   V);
        // one-sided boundary differences, half dual volume
        add_term(rf[g.face(0, 0, iy)],
                 (p.pressure[g.cell(1, iy)] - p.pressure[g.cell(0, iy)]) *
                     invh,
                 0.5 * V);
        add_term(rf[g.face(0, g.n[0], iy)],
                 (p.pressure[g.cell(g.n[0] - 1, iy)] -
                  p.pressure[g.cell(g.n[0] - 2, iy)]) *
                     invh,
                 0.5 * V);
      }
    } else {
      for (int ix = 0; ix < g.n[0]; ++ix) {
        for (int fy = 1; fy < g.n[1]; ++fy)
          add_term(rf[g.face(1, ix, fy)],
                   (p.pressure[g.cell(ix, fy)] -
                    p.pressure[g.cell(ix, fy - 1)]) *
                       invh,
                   V);
        add_term(rf[g.face(1, ix, 0)],
                 (p.pressure[g.cell(ix, 1)] - p.pressure[g.cell(ix, 0)]) *
                     invh,
                 0.5 * V);
        add_term(rf[g.face(1, ix, g.n[1])],
                 (p.pressure[g.cell(ix, g.n[1] - 1)] -
                  p.pressure[g.cell(ix, g.n[1] - 2)]) *
                     invh,
                 0.5 * V);
      }
    }
  }
  for (int c = 0; c < g.cell_count(); ++c)
    acc -= V * p.pressure[c] * problem.source[c];
  return acc;
}

GridField solve_pressure(const ContinuumProblem& problem, double tol,
                         int max_iter) {
  return solve_pressure_impl(
      problem,
      std::vector<double>(static_cast<std::size_t>(problem.grid.cell_count()),
                          0.0),
      tol, max_iter);
}

GridField solve_pressure(const ContinuumProblem& problem,
                         const std::vector<double>& initial, double tol,
                         int max_iter) {
  return solve_pressure_impl(problem, initial, tol, max_iter);
}

GridField reconstruct_conductivity(GridField p,
                                   const ContinuumProblem& problem) {
  problem.validate();
  const RectGrid& g = problem.grid;
  if (p.pressure.size() != static_cast<std::size_t>(g.cell_count()))
    throw ConfigError("pressure field size does not match the grid");
  const ObjectiveConstants k = constants_of(problem);
  for (int axis = 0; axis < 2; ++axis) {
    const std::vector<double> u = face_grad(g, p.pressure, axis);
    auto& c = p.conductivity[axis];
    c.assign(u.size(), 0.0);
    for (std::size_t f = 0; f < u.size(); ++f)
      c[f] = k.kappa * std::pow(std::abs(u[f]), k.expo);
  }
  return p;
}

double conductivity_identity_residual(const GridField& p,
                                      const ContinuumProblem& problem) {
  const RectGrid& g = problem.grid;
  double worst = 0.0;
  for (int axis = 0; axis < g.dim; ++axis) {
    if (p.conductivity[axis].size() !=
        static_cast<std::size_t>(g.face_count(axis)))
      throw ConfigError("conductivity missing; reconstruct it first");
    const std::vector<double> u = face_grad(g, p.pressure, axis);
    for (std::size_t f = 0; f < u.size(); ++f) {
      const double lhs = u[f] * u[f];
      const double rhs =
          problem.nu * std::pow(p.conductivity[axis][f], problem.gamma - 1.0);
      const double den = std::max({lhs, rhs, 1e-300});
      worst = std::max(worst, std::abs(lhs - rhs) / den);
    }
  }
  return worst;
}

SignMasks sign_sets(const GridField& p, double sign_eps) {
  const RectGrid& g = p.grid;
  std::array<std::vector<double>, 2> u{face_grad(g, p.pressure, 0),
                                       face_grad(g, p.pressure, 1)};
  if (sign_eps < 0.0) {
    double m = 0.0;
    for (int axis = 0; axis < 2; ++axis)
      for (double x : u[axis]) m = std::max(m, std::abs(x));
    sign_eps = 1e-12 * m;
  }
  SignMasks masks;
  masks.sign_eps = sign_eps;
  for (int axis = 0; axis < 2; ++axis) {
    masks.label[axis].assign(u[axis].size(), 0);
    for (std::size_t f = 0; f < u[axis].size(); ++f) {
      if (u[axis][f] > sign_eps)
        masks.label[axis][f] = 1;
      else if (u[axis][f] < -sign_eps)
        masks.label[axis][f] = -1;
    }
  }
  // interior null faces only; boundary faces are null by construction
  int nulls = 0;
  for (int iy = 0; iy < g.n[1]; ++iy)
    for (int fx = 1; fx < g.n[0]; ++fx)
      if (masks.label[0][g.face(0, fx, iy)] == 0) ++nulls;
  if (g.dim == 2)
    for (int fy = 1; fy < g.n[1]; ++fy)
      for (int ix = 0; ix < g.n[0]; ++ix)
        if (masks.label[1][g.face(1, ix, fy)] == 0) ++nulls;
  masks.null_interior_faces = nulls;
  return masks;
}

GridField face_fluxes(GridField p, const ContinuumProblem& problem) {
  problem.validate();
  const RectGrid& g = problem.grid;
  for (int axis = 0; axis < g.dim; ++axis)
    if (p.conductivity[axis].size() !=
        static_cast<std::size_t>(g.face_count(axis)))
      throw ConfigError("conductivity missing; reconstruct it first");
  for (int axis = 0; axis < 2; ++axis) {
    const std::vector<double> u = face_grad(g, p.pressure, axis);
    const std::vector<double> rf = face_r(problem, axis);
    auto& q = p.flux[axis];
    q.assign(u.size(), 0.0);
    if (axis >= g.dim) continue;
    for (std::size_t f = 0; f < u.size(); ++f)
      q[f] = -(rf[f] + p.conductivity[axis][f]) * u[f];
  }
  return p;
}

BalanceRecord murray_balance(const GridField& p,
                             const ContinuumProblem& problem,
                             const std::vector<std::uint8_t>& subdomain,
                             double sign_eps) {
  problem.validate();
  const RectGrid& g = problem.grid;
  if (p.pressure.size() != static_cast<std::size_t>(g.cell_count()))
    throw ConfigError("pressure field size does not match the grid");
  if (subdomain.size() != static_cast<std::size_t>(g.cell_count()))
    throw ConfigError("subdomain mask size does not match the grid");
  for (int axis = 0; axis < g.dim; ++axis)
    if (p.conductivity[axis].size() !=
        static_cast<std::size_t>(g.face_count(axis)))
      throw ConfigError("conductivity missing; reconstruct it first");

  int inside = 0;
  for (auto m : subdomain) inside += m ? 1 : 0;
  if (inside == 0) throw EmptySubdomain("subdomain covers no cells");

  const double V = g.cell_volume();
  if (sign_eps < 0.0) sign_eps = 1e-12 * max_abs_grad(g, p.pressure);

  BalanceRecord rec;
  for (int c = 0; c < g.cell_count(); ++c)
    if (subdomain[c]) rec.source_integral += problem.source[c] * V;
  double floor = 0.0;
  for (int c = 0; c < g.cell_count(); ++c)
    floor += std::abs(problem.source[c]) * V;

  const double half = 0.5 * (problem.gamma - 1.0);
  const double sqnu = std::sqrt(problem.nu);

  // pull face data once per axis, then walk the mask boundary; the outward
  // normal points along +axis when the inside cell sits on the left
  for (int axis = 0; axis < g.dim; ++axis) {
    const std::vector<double> u = face_grad(g, p.pressure, axis);
    const std::vector<double> rf = face_r(problem, axis);
    if (axis == 0) {
      for (int iy = 0; iy < g.n[1]; ++iy)
        for (int fx = 0; fx <= g.n[0]; ++fx) {
          const bool inl = fx > 0 && subdomain[g.cell(fx - 1, iy)];
          const bool inr = fx < g.n[0] && subdomain[g.cell(fx, iy)];
          if (inl == inr) continue;
          const int f = g.face(0, fx, iy);
          const double nrm = inl ? 1.0 : -1.0;
          ++rec.boundary_faces;
          if (std::abs(u[f]) <= sign_eps) {
            ++rec.null_faces;
            continue;
          }
          const double A = g.face_area(0);
          const double cf = p.conductivity[0][f];
          const double chi = u[f] > 0.0 ? 1.0 : -1.0;
          const double murray =
              sqnu * chi * std::pow(cf, half) * (rf[f] + cf) * nrm * A;
          const double qn = -(rf[f] + cf) * u[f] * nrm * A;
          if (u[f] * nrm > 0.0) {
            rec.influx += murray;
            rec.raw_influx += -qn;
          } else {
            rec.outflux += -murray;
            rec.raw_outflux += qn;
          }
        }
    } else {
      for (int fy = 0; fy <= g.n[1]; ++fy)
        for (int ix = 0; ix < g.n[0]; ++ix) {
          const bool inl = fy > 0 && subdomain[g.cell(ix, fy - 1)];
          const bool inr = fy < g.n[1] && subdomain[g.cell(ix, fy)];
          if (inl == inr) continue;
          const int f = g.face(1, ix, fy);
          const double nrm = inl ? 1.0 : -1.0;
          ++rec.boundary_faces;
          if (std::abs(u[f]) <= sign_eps) {
            ++rec.null_faces;
            continue;
          }
          const double A = g.face_area(1);
          const double cf = p.conductivity[1][f];
          const double chi = u[f] > 0.0 ? 1.0 : -1.0;
          const double murray =
              sqnu * chi * std::pow(cf, half) * (rf[f] + cf) * nrm * A;
          const double qn = -(rf[f] + cf) * u[f] * nrm * A;
          if (u[f] * nrm > 0.0) {
            rec.influx += murray;
            rec.raw_influx += -qn;
          } else {
            rec.outflux += -murray;
            rec.raw_outflux += qn;
          }
        }
    }
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

namespace {

GridField oracle_fill(const ContinuumProblem& pb, std::vector<double> pcell,
                      std::vector<double> uface, std::vector<double> qface) {
  zero_mean(pcell);
  const ObjectiveConstants k = constants_of(pb);
  GridField out;
  out.grid = pb.grid;
  out.pressure = std::move(pcell);
  out.conductivity[0].assign(uface.size(), 0.0);
  for (std::size_t f = 0; f < uface.size(); ++f)
    out.conductivity[0][f] = k.kappa * std::pow(std::abs(uface[f]), k.expo);
  qface.front() = 0.0;
  qface.back() = 0.0;
  out.flux[0] = std::move(qface);
  return out;
}

}  // namespace

GridField oracle_1d(const ContinuumProblem& problem) {
  problem.validate();
  if (problem.grid.dim != 1)
    throw ConfigError("the direct reference solve is one-dimensional");
  const RectGrid& g = problem.grid;
  const int n = g.n[0];
  const double h = g.h[0];
  const ObjectiveConstants k = constants_of(problem);

  std::vector<double> src = problem.source;
  zero_mean(src);  // mirror the solver

  std::vector<double> q(static_cast<std::size_t>(n) + 1, 0.0);
  for (int i = 0; i < n; ++i) q[i + 1] = q[i] + src[i] * h;
  const std::vector<double> rf = face_r(problem, 0);

  std::vector<double> u(q.size(), 0.0);
  for (std::size_t f = 0; f < q.size(); ++f)
    u[f] = invert_flux_law(rf[f], k.kappa, k.expo, -q[f]);

  std::vector<double> p(static_cast<std::size_t>(n), 0.0);
  for (int c = 1; c < n; ++c) p[c] = p[c - 1] + h * u[c];
  return oracle_fill(problem, std::move(p), std::move(u), std::move(q));
}

GridField oracle_1d(const ContinuumProblem& problem,
                    const std::function<double(double)>& source,
                    const std::function<double(double)>& r_of_x) {
  problem.validate();
  if (problem.grid.dim != 1)
    throw ConfigError("the direct reference solve is one-dimensional");
  if (!source || !r_of_x)
    throw ConfigError("reference solve needs source and permeability callables");
  const RectGrid& g = problem.grid;
  const int n = g.n[0];
  const double h = g.h[0];
  const ObjectiveConstants k = constants_of(problem);

  std::vector<double> qface(static_cast<std::size_t>(n) + 1, 0.0);
  for (int i = 0; i < n; ++i)
    qface[i + 1] = qface[i] + gl5(i * h, (i + 1) * h, source);

  auto q_at = [&](double x) {
    int j = static_cast<int>(x / h);
    j = std::clamp(j, 0, n - 1);
    return qface[j] + gl5(j * h, x, source);
  };
  auto u_at = [&](double x) {
    return invert_flux_law(r_of_x(x), k.kappa, k.expo, -q_at(x));
  };

  std::vector<double> uface(qface.size(), 0.0);
  for (int f = 0; f <= n; ++f)
    uface[f] = invert_flux_law(r_of_x(f * h), k.kappa, k.expo, -qface[f]);

  std::vector<double> p(static_cast<std::size_t>(n), 0.0);
  p[0] = gl5(0.0, 0.5 * h, u_at);
  for (int c = 1; c < n; ++c)
    p[c] = p[c - 1] + gl5((c - 0.5) * h, (c + 0.5) * h, u_at);
  return oracle_fill(problem, std::move(p), std::move(uface),
                     std::move(qface));
}

}  // namespace murraynet
