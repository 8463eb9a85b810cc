#include "murraynet/grid.hpp"

#include <algorithm>
#include <cmath>

namespace murraynet {

RectGrid RectGrid::make(int dim, std::array<double, 2> extent,
                        std::array<int, 2> cells) {
  if (dim != 1 && dim != 2) throw ConfigError("grid dimension must be 1 or 2");
  RectGrid g;
  g.dim = dim;
  if (dim == 1) {
    cells[1] = 1;
    extent[1] = 1.0;
  }
  for (int k = 0; k < dim; ++k) {
    if (cells[k] < 2) throw ConfigError("need at least 2 cells per axis");
    if (!(extent[k] > 0.0)) throw ConfigError("extent must be positive");
  }
  g.extent = extent;
  g.n = cells;
  g.h = {extent[0] / cells[0], dim == 2 ? extent[1] / cells[1] : 1.0};
  return g;
}

std::vector<std::uint8_t> snap_rectangle(const RectGrid& grid,
                                         const std::array<double, 4>& rect) {
  std::array<int, 2> lo{0, 0}, hi{grid.n[0], grid.n[1]};
  for (int k = 0; k < grid.dim; ++k) {
    const double a = rect[2 * k], b = rect[2 * k + 1];
    lo[k] = std::clamp<int>(int(std::lround(a / grid.h[k])), 0, grid.n[k]);
    hi[k] = std::clamp<int>(int(std::lround(b / grid.h[k])), 0, grid.n[k]);
  }
  std::vector<std::uint8_t> mask(grid.cell_count(), 0);
  int count = 0;
  for (int iy = (grid.dim == 2 ? lo[1] : 0); iy < (grid.dim == 2 ? hi[1] : 1); ++iy)
    for (int ix = lo[0]; ix < hi[0]; ++ix) {
      mask[grid.cell(ix, iy)] = 1;
      ++count;
    }
  if (count == 0)
    throw EmptySubdomain("rectangle snapped to zero cells");
  return mask;
}

}  // namespace murraynet
