#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "murraynet/errors.hpp"

namespace murraynet {

// Uniform rectangular grid in 1 or 2 dimensions. Scalars (pressure, source,
// r) live at cell centers; gradients, conductivities and fluxes live at
// faces, stored per axis including domain-boundary faces (which carry zero
// flux under the no-flux condition).
//
// Axis-0 faces: (n0+1) x n1, index fx + (n0+1)*iy.
// Axis-1 faces: n0 x (n1+1), index ix + n0*fy (dim == 2 only).
struct RectGrid {
  int dim = 1;
  std::array<double, 2> extent{1.0, 1.0};
  std::array<int, 2> n{1, 1};
  std::array<double, 2> h{1.0, 1.0};

  static RectGrid make(int dim, std::array<double, 2> extent,
                       std::array<int, 2> cells);

  int cell_count() const { return n[0] * n[1]; }
  int cell(int ix, int iy) const { return ix + n[0] * iy; }
  double cell_volume() const { return dim == 1 ? h[0] : h[0] * h[1]; }

  int face_count(int axis) const {
    if (axis >= dim) return 0;
    return axis == 0 ? (n[0] + 1) * n[1] : n[0] * (n[1] + 1);
  }
  int face(int axis, int fx, int fy) const {
    return axis == 0 ? fx + (n[0] + 1) * fy : fx + n[0] * fy;
  }
  double face_area(int axis) const {
    if (dim == 1) return 1.0;
    return axis == 0 ? h[1] : h[0];
  }
  // physical coordinate of a face center along its axis
  double face_coord(int axis, int idx_along) const { return h[axis] * idx_along; }
  double cell_coord(int axis, int idx_along) const {
    return h[axis] * (idx_along + 0.5);
  }
};

struct GridField {
  RectGrid grid;
  std::vector<double> pressure;                       // cells
  std::array<std::vector<double>, 2> conductivity;    // faces per axis
  std::array<std::vector<double>, 2> flux;            // faces per axis
};

// Face labels from the sign of the pressure gradient: +1 / -1 / 0 (null).
struct SignMasks {
  std::array<std::vector<std::int8_t>, 2> label;
  double sign_eps = 0.0;
  int null_interior_faces = 0;
};

// Boundary bookkeeping of a subdomain balance. influx/outflux are the
// boundary sums of the branching-law integrand; raw_* are the same sums from
// the plain face fluxes (the two agree analytically). Residuals are
// normalized by |influx| + |outflux| + |source_integral| + total absolute
// source mass (the last term keeps near-empty balances meaningful).
struct BalanceRecord {
  double influx = 0.0;
  double outflux = 0.0;
  double source_integral = 0.0;
  double residual = 0.0;
  double raw_influx = 0.0;
  double raw_outflux = 0.0;
  double raw_residual = 0.0;
  double form_agreement = 0.0;  // relative gap between the two boundary sums
  int boundary_faces = 0;
  int null_faces = 0;
};

// Cells covered by [x0,x1] x [y0,y1] with bounds snapped to the nearest
// faces. rect = {x0, x1, y0, y1}; the y pair is ignored in 1-D.
// Throws EmptySubdomain if no cell survives the snap.
std::vector<std::uint8_t> snap_rectangle(const RectGrid& grid,
                                         const std::array<double, 4>& rect);

}  // namespace murraynet
