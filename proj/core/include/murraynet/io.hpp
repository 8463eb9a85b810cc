#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "murraynet/grid.hpp"
#include "murraynet/murray.hpp"
#include "murraynet/network.hpp"

namespace murraynet {

// Shortest decimal text that round-trips the exact double. All numeric
// output goes through this so repeated runs are byte-identical.
std::string format_double(double v);

std::string read_text_file(const std::string& path);  // InputError
void write_text_file(const std::string& path, const std::string& content);

// FNV-1a, 64-bit; content_hash renders it as "fnv1a64:<16 hex digits>".
std::uint64_t fnv1a64(const std::string& bytes);
std::string content_hash(const std::string& bytes);

// Network JSON:
//   { "nodes": [{"id": 0, "source": 1.0, "pos": [x, y]?}, ...],
//     "edges": [{"i": 0, "j": 1, "length": 1.0, "conductivity": 1.0}, ...] }
// ids must be dense 0..N-1; pos is optional but must be consistent.
Network read_network_json(const std::string& path);
std::string network_json_text(const Network& net);
void write_network_json(const std::string& path, const Network& net);

std::string balance_record_json(const BalanceRecord& rec);
std::string murray_report_json(const MurrayReport& rep);

// Grid sample CSV, one cell per row: "i,value" (1-D) or "i,j,value" (2-D),
// header row optional. Every cell must appear exactly once.
std::vector<double> read_grid_csv(const std::string& path,
                                  const RectGrid& grid);

// CSV renderings of cell and per-axis face fields, same "i[,j],value" layout
// (face indices include the domain-boundary faces).
std::string grid_cell_csv(const RectGrid& grid, const std::vector<double>& v);
std::string grid_face_csv(const RectGrid& grid, int axis,
                          const std::vector<double>& v);

}  // namespace murraynet
