#include "murraynet/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "murraynet/errors.hpp"

namespace murraynet {

using nlohmann::json;

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path + ": cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw InputError(path + ": read failed");
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError(path + ": cannot open for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) throw InputError(path + ": write failed");
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string content_hash(const std::string& bytes) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "fnv1a64:%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes)));
  return std::string(buf);
}

namespace {

[[noreturn]] void bad_input(const std::string& path, const std::string& msg) {
  throw InputError(path + ": " + msg);
}

double number_field(const json& obj, const char* key, const std::string& path,
                    const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_number())
    bad_input(path, where + ": missing numeric \"" + key + "\"");
  return it->get<double>();
}

int int_field(const json& obj, const char* key, const std::string& path,
              const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_number_integer())
    bad_input(path, where + ": missing integer \"" + key + "\"");
  return it->get<int>();
}

}  // namespace

Network read_network_json(const std::string& path) {
  const std::string text = read_text_file(path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    bad_input(path, std::string("JSON parse error: ") + e.what());
  }
  if (!doc.is_object()) bad_input(path, "top level must be an object");
  auto nodes_it = doc.find("nodes");
  auto edges_it = doc.find("edges");
  if (nodes_it == doc.end() || !nodes_it->is_array())
    bad_input(path, "missing \"nodes\" array");
  if (edges_it == doc.end() || !edges_it->is_array())
    bad_input(path, "missing \"edges\" array");

  const int n = static_cast<int>(nodes_it->size());
  if (n == 0) bad_input(path, "\"nodes\" is empty");

  std::vector<double> source(n, 0.0);
  std::vector<std::vector<double>> positions;
  std::vector<char> seen(n, 0);
  std::size_t pos_dim = 0;
  bool any_pos = false, all_pos = true;

  for (std::size_t k = 0; k < nodes_it->size(); ++k) {
    const json& nd = (*nodes_it)[k];
    const std::string where = "nodes[" + std::to_string(k) + "]";
    if (!nd.is_object()) bad_input(path, where + ": must be an object");
    const int id = int_field(nd, "id", path, where);
    if (id < 0 || id >= n)
      bad_input(path, where + ": id " + std::to_string(id) +
                          " outside 0.." + std::to_string(n - 1));
    if (seen[id]) bad_input(path, where + ": duplicate id " + std::to_string(id));
    seen[id] = 1;
    source[id] = number_field(nd, "source", path, where);
    auto pit = nd.find("pos");
    if (pit != nd.end()) {
      if (!pit->is_array() || pit->empty())
        bad_input(path, where + ": \"pos\" must be a nonempty array");
      std::vector<double> p;
      for (const json& c : *pit) {
        if (!c.is_number()) bad_input(path, where + ": \"pos\" entries must be numbers");
        p.push_back(c.get<double>());
      }
      if (!any_pos) {
        pos_dim = p.size();
        positions.assign(static_cast<std::size_t>(n), {});
        any_pos = true;
      } else if (p.size() != pos_dim) {
        bad_input(path, where + ": \"pos\" dimension mismatch");
      }
      positions[static_cast<std::size_t>(id)] = std::move(p);
    } else {
      all_pos = false;
    }
  }
  if (any_pos && !all_pos)
    bad_input(path, "either every node carries \"pos\" or none does");

  std::vector<Edge> edges;
  std::vector<double> length, conductivity;
  for (std::size_t k = 0; k < edges_it->size(); ++k) {
    const json& ed = (*edges_it)[k];
    const std::string where = "edges[" + std::to_string(k) + "]";
    if (!ed.is_object()) bad_input(path, where + ": must be an object");
    Edge e{int_field(ed, "i", path, where), int_field(ed, "j", path, where)};
    length.push_back(number_field(ed, "length", path, where));
    conductivity.push_back(number_field(ed, "conductivity", path, where));
    edges.push_back(e);
  }

  try {
    return Network(n, std::move(edges), std::move(length),
                   std::move(conductivity), std::move(source),
                   std::move(positions));
  } catch (const StructuralError& e) {
    bad_input(path, e.what());
  }
}

std::string network_json_text(const Network& net) {
  json nodes = json::array();
  const bool has_pos = !net.positions().empty();
  for (int i = 0; i < net.node_count(); ++i) {
    json nd{{"id", i}, {"source", net.source(i)}};
    if (has_pos) nd["pos"] = net.positions()[static_cast<std::size_t>(i)];
    nodes.push_back(std::move(nd));
  }
  json edges = json::array();
  for (int e = 0; e < net.edge_count(); ++e) {
    edges.push_back(json{{"i", net.edge(e).i},
                         {"j", net.edge(e).j},
                         {"length", net.length(e)},
                         {"conductivity", net.conductivity(e)}});
  }
  json doc{{"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
  return doc.dump(2) + "\n";
}

void write_network_json(const std::string& path, const Network& net) {
  write_text_file(path, network_json_text(net));
}

std::string balance_record_json(const BalanceRecord& rec) {
  json doc{{"influx", rec.influx},
           {"outflux", rec.outflux},
           {"source_integral", rec.source_integral},
           {"residual", rec.residual},
           {"raw_influx", rec.raw_influx},
           {"raw_outflux", rec.raw_outflux},
           {"raw_residual", rec.raw_residual},
           {"form_agreement", rec.form_agreement},
           {"boundary_faces", rec.boundary_faces},
           {"null_faces", rec.null_faces}};
  return doc.dump(2) + "\n";
}

std::string murray_report_json(const MurrayReport& rep) {
  json nodes = json::array();
  for (const MurrayNodeRecord& r : rep.nodes) {
    nodes.push_back(json{{"node", r.node},
                         {"inflow_power_sum", r.inflow_power_sum},
                         {"outflow_power_sum", r.outflow_power_sum},
                         {"source", r.source},
                         {"residual", r.residual},
                         {"n_plus", r.n_plus},
                         {"n_minus", r.n_minus}});
  }
  json doc{{"nodes", std::move(nodes)},
           {"max_residual", rep.max_residual},
           {"mean_residual", rep.mean_residual},
           {"exponent", rep.exponent}};
  return doc.dump(2) + "\n";
}

std::string grid_cell_csv(const RectGrid& g, const std::vector<double>& v) {
  std::string s = g.dim == 1 ? "i,value\n" : "i,j,value\n";
  if (g.dim == 1) {
    for (int i = 0; i < g.n[0]; ++i)
      s += std::to_string(i) + "," + format_double(v[i]) + "\n";
  } else {
    for (int iy = 0; iy < g.n[1]; ++iy)
      for (int ix = 0; ix < g.n[0]; ++ix)
        s += std::to_string(ix) + "," + std::to_string(iy) + "," +
             format_double(v[g.cell(ix, iy)]) + "\n";
  }
  return s;
}

std::string grid_face_csv(const RectGrid& g, int axis,
                          const std::vector<double>& v) {
  std::string s = g.dim == 1 ? "i,value\n" : "i,j,value\n";
  const int fx_end = axis == 0 ? g.n[0] + 1 : g.n[0];
  const int fy_end = axis == 0 ? g.n[1] : g.n[1] + 1;
  if (g.dim == 1) {
    for (int fx = 0; fx < fx_end; ++fx)
      s += std::to_string(fx) + "," + format_double(v[g.face(axis, fx, 0)]) +
           "\n";
  } else {
    for (int fy = 0; fy < fy_end; ++fy)
      for (int fx = 0; fx < fx_end; ++fx)
        s += std::to_string(fx) + "," + std::to_string(fy) + "," +
             format_double(v[g.face(axis, fx, fy)]) + "\n";
  }
  return s;
}

std::vector<double> read_grid_csv(const std::string& path,
                                  const RectGrid& grid) {
  const std::string text = read_text_file(path);
  const int want_cols = grid.dim + 1;
  std::vector<double> out(static_cast<std::size_t>(grid.cell_count()), 0.0);
  std::vector<char> seen(out.size(), 0);

  std::istringstream lines(text);
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& msg) {
    throw InputError(path + ":" + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(lines, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::size_t first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;

    std::vector<std::string> cols;
    std::size_t start = 0;
    while (true) {
      std::size_t comma = line.find(',', start);
      cols.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    for (std::string& c : cols) {
      std::size_t a = c.find_first_not_of(" \t");
      std::size_t b = c.find_last_not_of(" \t");
      c = (a == std::string::npos) ? std::string() : c.substr(a, b - a + 1);
    }

    // optional header: skip if the first field is not a number
    {
      const std::string& f = cols[0];
      char* end = nullptr;
      std::strtod(f.c_str(), &end);
      if (end == f.c_str() || *end != '\0') {
        if (lineno == 1) continue;
        fail("non-numeric field \"" + f + "\"");
      }
    }
    if (static_cast<int>(cols.size()) != want_cols)
      fail("expected " + std::to_string(want_cols) + " columns, got " +
           std::to_string(cols.size()));

    int idx[2] = {0, 0};
    for (int d = 0; d < grid.dim; ++d) {
      int v = 0;
      auto res = std::from_chars(cols[d].data(), cols[d].data() + cols[d].size(), v);
      if (res.ec != std::errc() || res.ptr != cols[d].data() + cols[d].size())
        fail("bad cell index \"" + cols[d] + "\"");
      if (v < 0 || v >= grid.n[d])
        fail("cell index " + std::to_string(v) + " outside 0.." +
             std::to_string(grid.n[d] - 1));
      idx[d] = v;
    }
    const std::string& vs = cols[static_cast<std::size_t>(want_cols - 1)];
    char* end = nullptr;
    double val = std::strtod(vs.c_str(), &end);
    if (end == vs.c_str() || *end != '\0') fail("bad value \"" + vs + "\"");
    if (!std::isfinite(val)) fail("value must be finite");

    const int cell = grid.cell(idx[0], idx[1]);
    if (seen[static_cast<std::size_t>(cell)]) fail("duplicate cell entry");
    seen[static_cast<std::size_t>(cell)] = 1;
    out[static_cast<std::size_t>(cell)] = val;
  }
  for (std::size_t i = 0; i < seen.size(); ++i)
    if (!seen[i])
      throw InputError(path + ": missing entry for cell " + std::to_string(i));
  return out;
}

}  // namespace murraynet
