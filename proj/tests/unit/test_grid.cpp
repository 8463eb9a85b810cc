#include <array>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "murraynet/continuum_grid.hpp"
#include "murraynet/errors.hpp"
#include "murraynet/grid.hpp"
#include "murraynet/presets.hpp"

using namespace murraynet;

TEST_CASE("grid construction and validation") {
  CHECK_THROWS_AS(RectGrid::make(3, {1, 1}, {4, 4}), ConfigError);
  CHECK_THROWS_AS(RectGrid::make(0, {1, 1}, {4, 4}), ConfigError);
  CHECK_THROWS_AS(RectGrid::make(1, {1, 1}, {1, 1}), ConfigError);
  CHECK_THROWS_AS(RectGrid::make(2, {1, 1}, {4, 1}), ConfigError);
  CHECK_THROWS_AS(RectGrid::make(1, {0, 1}, {4, 1}), ConfigError);
  CHECK_THROWS_AS(RectGrid::make(2, {1, -2}, {4, 4}), ConfigError);

  RectGrid g1 = RectGrid::make(1, {2.0, 99.0}, {8, 99});
  CHECK(g1.cell_count() == 8);
  CHECK(g1.n[1] == 1);  // trailing axis collapsed
  CHECK(g1.h[0] == doctest::Approx(0.25));
  CHECK(g1.face_count(0) == 9);
  CHECK(g1.face_count(1) == 0);
  CHECK(g1.face_area(0) == 1.0);
  CHECK(g1.cell_volume() == doctest::Approx(0.25));

  RectGrid g2 = RectGrid::make(2, {1.0, 2.0}, {4, 8});
  CHECK(g2.cell_count() == 32);
  CHECK(g2.cell(3, 0) == 3);
  CHECK(g2.cell(0, 1) == 4);
  CHECK(g2.face_count(0) == 5 * 8);
  CHECK(g2.face_count(1) == 4 * 9);
  CHECK(g2.face(0, 2, 3) == 2 + 5 * 3);
  CHECK(g2.face(1, 2, 3) == 2 + 4 * 3);
  CHECK(g2.face_area(0) == doctest::Approx(0.25));  // h[1]
  CHECK(g2.face_area(1) == doctest::Approx(0.25));  // h[0]
  CHECK(g2.cell_volume() == doctest::Approx(0.0625));
  CHECK(g2.face_coord(1, 4) == doctest::Approx(1.0));
  CHECK(g2.cell_coord(0, 0) == doctest::Approx(0.125));
}

TEST_CASE("rectangle snapping picks nearest faces") {
  RectGrid g = RectGrid::make(1, {1, 1}, {4, 1});
  auto mask = snap_rectangle(g, {0.2, 0.8, 0, 0});
  CHECK(mask == std::vector<std::uint8_t>{0, 1, 1, 0});
  // snapping both ends to the same face leaves nothing
  CHECK_THROWS_AS(snap_rectangle(g, {0.49, 0.51, 0, 0}), EmptySubdomain);
  CHECK_THROWS_AS(snap_rectangle(g, {0.8, 0.2, 0, 0}), EmptySubdomain);

  // whole domain, with slop beyond the ends clamped back
  auto all = snap_rectangle(g, {-0.3, 1.7, 0, 0});
  CHECK(std::accumulate(all.begin(), all.end(), 0) == 4);

  RectGrid g2 = RectGrid::make(2, {1, 1}, {4, 4});
  auto m2 = snap_rectangle(g2, {0.2, 0.8, 0.4, 1.0});
  int count = 0;
  for (int iy = 0; iy < 4; ++iy)
    for (int ix = 0; ix < 4; ++ix)
      if (m2[g2.cell(ix, iy)]) {
        ++count;
        CHECK(ix >= 1);
        CHECK(ix <= 2);
        CHECK(iy >= 2);
      }
  CHECK(count == 4);
}

static ContinuumProblem problem_1d(int n, double gamma, double nu,
                                   double (*src)(double)) {
  ContinuumProblem prob;
  prob.grid = RectGrid::make(1, {1, 1}, {n, 1});
  prob.gamma = gamma;
  prob.nu = nu;
  prob.r.assign(prob.grid.cell_count(), 1.0);
  prob.source.resize(prob.grid.cell_count());
  for (int i = 0; i < n; ++i)
    prob.source[i] = src(prob.grid.cell_coord(0, i));
  return project_source(std::move(prob));
}

TEST_CASE("gradient sign labels for a single-lobe source") {
  // S = cos(pi x): the face flux sin(pi x)/pi never changes sign, so the
  // pressure falls monotonically and every interior face is labeled -1
  ContinuumProblem prob =
      problem_1d(64, 2.0, 1.0, +[](double x) { return std::cos(M_PI * x); });
  GridField f = oracle_1d(prob);
  SignMasks masks = sign_sets(f);
  CHECK(masks.label[0].front() == 0);
  CHECK(masks.label[0].back() == 0);
  for (int fx = 1; fx < 64; ++fx) CHECK(masks.label[0][fx] == -1);
  CHECK(masks.null_interior_faces == 0);
  CHECK(masks.sign_eps > 0.0);
}

TEST_CASE("gradient sign flips exactly once for a two-lobe source") {
  // S = cos(2 pi x): flux positive on the left half, negative on the right;
  // the midpoint face carries (up to round-off) zero flux and goes null
  const int n = 64;
  ContinuumProblem prob = problem_1d(
      n, 2.0, 1.0, +[](double x) { return std::cos(2.0 * M_PI * x); });
  GridField f = oracle_1d(prob);
  SignMasks masks = sign_sets(f, 1e-9);
  int flips = 0;
  std::int8_t prev = 0;
  for (int fx = 1; fx < n; ++fx) {
    std::int8_t l = masks.label[0][fx];
    if (l != 0 && prev != 0 && l != prev) ++flips;
    if (l != 0) prev = l;
  }
  CHECK(flips == 1);
  CHECK(masks.label[0][n / 2] == 0);
  CHECK(masks.null_interior_faces == 1);
  for (int fx = 1; fx < n / 2; ++fx) CHECK(masks.label[0][fx] == -1);
  for (int fx = n / 2 + 1; fx < n; ++fx) CHECK(masks.label[0][fx] == 1);
}

TEST_CASE("gradient decomposes into sign label times conductivity power") {
  for (double gamma : {1.5, 2.0, 3.0}) {
    const double nu = 2.0;
    ContinuumProblem prob = problem_1d(
        32, gamma, nu, +[](double x) { return std::cos(M_PI * x); });
    GridField f = reconstruct_conductivity(solve_pressure(prob, 1e-11), prob);
    SignMasks masks = sign_sets(f);
    const double expo = 0.5 * (gamma - 1.0);
    for (int fx = 0; fx <= 32; ++fx) {
      const double u = [&] {
        if (fx == 0 || fx == 32) return 0.0;
        return (f.pressure[fx] - f.pressure[fx - 1]) / f.grid.h[0];
      }();
      const double rebuilt = masks.label[0][fx] * std::sqrt(nu) *
                             std::pow(f.conductivity[0][fx], expo);
      CHECK(std::abs(u - rebuilt) <=
            1e-12 * std::max(1.0, std::abs(u)) + masks.sign_eps);
    }
  }
}
