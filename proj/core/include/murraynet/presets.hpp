#pragma once

#include <cstdint>
#include <vector>

#include "murraynet/grid.hpp"
#include "murraynet/network.hpp"

namespace murraynet {

// Root feeds a junction that splits into two equal leaves. S = (+2, 0, -1, -1),
// unit lengths and conductivities.
Network y_junction();

// Perfect binary tree, three edge levels: root 0 -> hub 1 -> mids 2,3 ->
// leaves 4..7. S = +4 at the root, -1 per leaf; unit lengths/conductivities.
Network binary_tree_depth3();

// 4x4 lattice, unit lengths/conductivities, unit source at node 0 and sink
// at node 15 (row-major numbering).
Network grid_graph_4x4();

// Random spanning tree plus a few chords; N in [3,15], L in [0.5,2],
// C in [0.1,10], sources mean-subtracted so they balance exactly.
Network random_connected_network(std::uint64_t seed);

// Source presets for the continuum problems, evaluated pointwise.
double cos1d_value(double x);                // cos(pi x) on [0,1]
double dipole2d_value(double x, double y);   // Gaussian source/sink pair
double radial2d_value(double rho);           // center bump minus sink ring,
                                             // weighted for zero radial mass

// Cell-center samples of the presets on a grid (1-D for cos, 2-D otherwise).
std::vector<double> sample_cos1d(const RectGrid& grid);
std::vector<double> sample_dipole2d(const RectGrid& grid);
std::vector<double> sample_radial2d(const RectGrid& grid);

}  // namespace murraynet
