#include "murraynet/presets.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <utility>

#include "murraynet/errors.hpp"

namespace murraynet {

Network y_junction() {
  std::vector<Edge> edges{{0, 1}, {1, 2}, {1, 3}};
  std::vector<std::vector<double>> pos{
      {0.0, 0.0}, {0.0, 1.0}, {-1.0, 2.0}, {1.0, 2.0}};
  return Network(4, std::move(edges), {1.0, 1.0, 1.0}, {1.0, 1.0, 1.0},
                 {2.0, 0.0, -1.0, -1.0}, std::move(pos));
}

Network binary_tree_depth3() {
  std::vector<Edge> edges{{0, 1}, {1, 2}, {1, 3}, {2, 4},
                          {2, 5}, {3, 6}, {3, 7}};
  std::vector<std::vector<double>> pos{{0.0, 0.0},  {0.0, 1.0}, {-2.0, 2.0},
                                       {2.0, 2.0},  {-3.0, 3.0}, {-1.0, 3.0},
                                       {1.0, 3.0},  {3.0, 3.0}};
  std::vector<double> ones(7, 1.0);
  return Network(8, std::move(edges), ones, ones,
                 {4.0, 0.0, 0.0, 0.0, -1.0, -1.0, -1.0, -1.0},
                 std::move(pos));
}

Network grid_graph_4x4() {
  std::vector<Edge> edges;
  std::vector<std::vector<double>> pos;
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) {
      pos.push_back({static_cast<double>(x), static_cast<double>(y)});
      const int n = x + 4 * y;
      if (x + 1 < 4) edges.push_back({n, n + 1});
      if (y + 1 < 4) edges.push_back({n, n + 4});
    }
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });
  std::vector<double> ones(edges.size(), 1.0);
  std::vector<double> src(16, 0.0);
  src[0] = 1.0;
  src[15] = -1.0;
  return Network(16, std::move(edges), ones, ones, std::move(src),
                 std::move(pos));
}

Network random_connected_network(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> nd(3, 15);
  const int n = nd(rng);

  std::set<std::pair<int, int>> used;
  std::vector<Edge> edges;
  for (int v = 1; v < n; ++v) {
    std::uniform_int_distribution<int> pd(0, v - 1);
    const int parent = pd(rng);
    used.insert({std::min(parent, v), std::max(parent, v)});
  }
  // a few chords on top of the spanning tree, skipping duplicates
  std::uniform_int_distribution<int> extra_d(0, n / 3);
  std::uniform_int_distribution<int> node_d(0, n - 1);
  int extras = extra_d(rng);
  for (int t = 0; t < 4 * extras && extras > 0; ++t) {
    int a = node_d(rng), b = node_d(rng);
    if (a == b) continue;
    auto key = std::make_pair(std::min(a, b), std::max(a, b));
    if (used.insert(key).second) --extras;
  }
  for (const auto& [i, j] : used) edges.push_back({i, j});

  std::uniform_real_distribution<double> len_d(0.5, 2.0);
  std::uniform_real_distribution<double> cond_d(0.1, 10.0);
  std::vector<double> length, conductivity;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    length.push_back(len_d(rng));
    conductivity.push_back(cond_d(rng));
  }

  std::uniform_real_distribution<double> src_d(-1.0, 1.0);
  std::vector<double> source(static_cast<std::size_t>(n));
  for (double& s : source) s = src_d(rng);
  double mean = 0.0;
  for (double s : source) mean += s;
  mean /= n;
  for (double& s : source) s -= mean;
  double amax = 0.0;
  for (double s : source) amax = std::max(amax, std::abs(s));
  if (amax < 1e-3) {  // near-degenerate draw; force a unit dipole
    source.assign(static_cast<std::size_t>(n), 0.0);
    source.front() = 1.0;
    source.back() = -1.0;
  }
  return Network(n, std::move(edges), std::move(length),
                 std::move(conductivity), std::move(source));
}

double cos1d_value(double x) { return std::cos(M_PI * x); }

namespace {

double gauss2(double x, double y, double cx, double cy, double sigma) {
  const double dx = x - cx, dy = y - cy;
  return std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
}

}  // namespace

double dipole2d_value(double x, double y) {
  return gauss2(x, y, 0.3, 0.5, 0.1) - gauss2(x, y, 0.7, 0.5, 0.1);
}

double radial2d_value(double rho) {
  constexpr double s1 = 0.08;   // source bump width
  constexpr double s2 = 0.05;   // sink ring width
  constexpr double rho0 = 0.3;  // sink ring radius
  // ring weight chosen so that int_0^inf S(rho) rho drho = 0:
  // the bump integrates to s1^2, the unit ring to
  // s2^2 exp(-rho0^2/(2 s2^2)) + rho0 s2 sqrt(pi/2) (1 + erf(rho0/(s2 sqrt2)))
  static const double ring_mass =
      s2 * s2 * std::exp(-rho0 * rho0 / (2.0 * s2 * s2)) +
      rho0 * s2 * std::sqrt(M_PI / 2.0) *
          (1.0 + std::erf(rho0 / (s2 * std::sqrt(2.0))));
  static const double beta = s1 * s1 / ring_mass;
  const double d = rho - rho0;
  return std::exp(-rho * rho / (2.0 * s1 * s1)) -
         beta * std::exp(-d * d / (2.0 * s2 * s2));
}

std::vector<double> sample_cos1d(const RectGrid& grid) {
  if (grid.dim != 1) throw ConfigError("cos1d source needs a 1-D grid");
  std::vector<double> s(static_cast<std::size_t>(grid.cell_count()));
  for (int i = 0; i < grid.n[0]; ++i) s[i] = cos1d_value(grid.cell_coord(0, i));
  return s;
}

std::vector<double> sample_dipole2d(const RectGrid& grid) {
  if (grid.dim != 2) throw ConfigError("dipole2d source needs a 2-D grid");
  std::vector<double> s(static_cast<std::size_t>(grid.cell_count()));
  for (int iy = 0; iy < grid.n[1]; ++iy)
    for (int ix = 0; ix < grid.n[0]; ++ix)
      s[grid.cell(ix, iy)] =
          dipole2d_value(grid.cell_coord(0, ix), grid.cell_coord(1, iy));
  return s;
}

std::vector<double> sample_radial2d(const RectGrid& grid) {
  if (grid.dim != 2) throw ConfigError("radial2d source needs a 2-D grid");
  std::vector<double> s(static_cast<std::size_t>(grid.cell_count()));
  for (int iy = 0; iy < grid.n[1]; ++iy)
    for (int ix = 0; ix < grid.n[0]; ++ix) {
      const double dx = grid.cell_coord(0, ix) - 0.5;
      const double dy = grid.cell_coord(1, iy) - 0.5;
      s[grid.cell(ix, iy)] = radial2d_value(std::hypot(dx, dy));
    }
  return s;
}

}  // namespace murraynet
