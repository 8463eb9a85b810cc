#include <algorithm>
#include <filesystem>
#include <random>

#include "doctest.h"
#include "json.hpp"
#include "murraynet/errors.hpp"
#include "murraynet/io.hpp"
#include "murraynet/kirchhoff.hpp"
#include "murraynet/presets.hpp"
#include "murraynet/toml.hpp"
#include "support.hpp"

using namespace murraynet;
namespace fs = std::filesystem;

TEST_CASE("toml parsing covers the config subset") {
  const char* text = R"(# run configuration
title = "net \"A\""   # trailing comment

[discrete]
gamma = 0.5
nu = 2
max_iter = 10_000
verbose = true
weights = [1.0, 2, 3.5]

[continuum]
cells = [64, 64]
model = "vector"
)";
  toml::Table t = toml::parse_string(text, "inline");
  CHECK(t.origin() == "inline");
  CHECK(t.require("title").as_string("title") == "net \"A\"");
  CHECK(t.require("discrete.gamma").as_number("discrete.gamma") == 0.5);
  CHECK(t.require("discrete.nu").as_number("discrete.nu") == 2.0);
  CHECK(t.require("discrete.max_iter").as_integer("discrete.max_iter") == 10000);
  CHECK(t.require("discrete.verbose").as_boolean("discrete.verbose"));
  CHECK(t.require("discrete.weights").as_numbers("discrete.weights") ==
        std::vector<double>{1.0, 2.0, 3.5});
  CHECK(t.require("continuum.model").as_string("continuum.model") == "vector");
  CHECK(t.require("continuum.cells").as_numbers("continuum.cells") ==
        std::vector<double>{64.0, 64.0});

  CHECK(t.number_or("discrete.gamma", 9.0) == 0.5);
  CHECK(t.number_or("discrete.absent", 9.0) == 9.0);
  CHECK(t.integer_or("discrete.max_iter", 1) == 10000);
  CHECK(t.boolean_or("discrete.verbose", false));
  CHECK(t.string_or("continuum.model", "grid") == "vector");
  CHECK(t.find("nope") == nullptr);
}

TEST_CASE("toml errors carry the line number") {
  auto line_of = [](const char* text) -> std::string {
    try {
      toml::parse_string(text, "bad.toml");
    } catch (const InputError& e) {
      return e.what();
    }
    return "";
  };
  CHECK(line_of("a == 1\n").find("bad.toml:1") != std::string::npos);
  CHECK(line_of("[t]\nkey 5\n").find("bad.toml:2") != std::string::npos);
  CHECK(line_of("x = \"unterminated\n").find(":1") != std::string::npos);
  CHECK(line_of("x = [1, 2\n").find(":1") != std::string::npos);
  CHECK(line_of("x = 1\nx = 2\n").find(":2") != std::string::npos);
  CHECK(line_of("x = zzz\n").find(":1") != std::string::npos);

  toml::Table t = toml::parse_string("x = 5\n", "types.toml");
  CHECK_THROWS_AS(t.require("x").as_string("x"), InputError);
  CHECK_THROWS_AS(t.require("x").as_boolean("x"), InputError);
  CHECK_THROWS_AS(t.require("missing"), InputError);
  CHECK(t.require("x").as_number("x") == 5.0);  // ints read as numbers
}

TEST_CASE("double formatting round-trips exactly") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> uni(-1e6, 1e6);
  for (int k = 0; k < 200; ++k) {
    const double v = (k % 3 == 0) ? std::ldexp(uni(rng), -30) : uni(rng);
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(0.0) == "0");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(-2.5e-300) == "-2.5e-300");
}

TEST_CASE("content hashing is the reference FNV-1a") {
  CHECK(fnv1a64("") == 14695981039346656037ull);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
  CHECK(fnv1a64("hello") == 0xa430d84680aabd0bull);
  CHECK(content_hash("") == "fnv1a64:cbf29ce484222325");
}

TEST_CASE("network json round-trips bitwise") {
  const std::string dir = testsupport::make_temp_dir("netjson");
  Network net = random_connected_network(77);
  const std::string path = dir + "/net.json";
  write_network_json(path, net);
  Network back = read_network_json(path);
  REQUIRE(back.node_count() == net.node_count());
  REQUIRE(back.edge_count() == net.edge_count());
  for (int n = 0; n < net.node_count(); ++n)
    CHECK(back.source(n) == net.source(n));
  for (int e = 0; e < net.edge_count(); ++e) {
    CHECK(back.edge(e).i == net.edge(e).i);
    CHECK(back.edge(e).j == net.edge(e).j);
    CHECK(back.length(e) == net.length(e));
    CHECK(back.conductivity(e) == net.conductivity(e));
  }
  // a second serialization of the reread network is byte-identical
  CHECK(network_json_text(back) == network_json_text(net));

  // positions survive too
  Network yj = y_junction();
  write_network_json(path, yj);
  Network yback = read_network_json(path);
  REQUIRE(yback.positions().size() == yj.positions().size());
  for (std::size_t i = 0; i < yj.positions().size(); ++i) {
    CHECK(yback.positions()[i][0] == yj.positions()[i][0]);
    CHECK(yback.positions()[i][1] == yj.positions()[i][1]);
  }
  fs::remove_all(dir);
}

TEST_CASE("network json rejects malformed inputs") {
  const std::string dir = testsupport::make_temp_dir("netbad");
  auto expect_reject = [&](const char* name, const std::string& body) {
    const std::string path = dir + "/" + name + ".json";
    write_text_file(path, body);
    CHECK_THROWS_AS(read_network_json(path), InputError);
  };

  CHECK_THROWS_AS(read_network_json(dir + "/absent.json"), InputError);
  expect_reject("syntax", "{ nodes: ");
  expect_reject("nonarray", R"({"nodes": 5, "edges": []})");
  expect_reject("noid", R"({"nodes": [{"source": 0}], "edges": []})");
  expect_reject("sparse_ids",
                R"({"nodes": [{"id": 0, "source": 1}, {"id": 2, "source": -1}],
                    "edges": [{"i": 0, "j": 1, "length": 1, "conductivity": 1}]})");
  expect_reject("dup_ids",
                R"({"nodes": [{"id": 0, "source": 1}, {"id": 0, "source": -1}],
                    "edges": [{"i": 0, "j": 1, "length": 1, "conductivity": 1}]})");
  expect_reject("bad_edge",
                R"({"nodes": [{"id": 0, "source": 1}, {"id": 1, "source": -1}],
                    "edges": [{"i": 0, "j": 5, "length": 1, "conductivity": 1}]})");
  expect_reject("neg_length",
                R"({"nodes": [{"id": 0, "source": 1}, {"id": 1, "source": -1}],
                    "edges": [{"i": 0, "j": 1, "length": -1, "conductivity": 1}]})");
  expect_reject("partial_pos",
                R"({"nodes": [{"id": 0, "source": 1, "pos": [0, 0]},
                              {"id": 1, "source": -1}],
                    "edges": [{"i": 0, "j": 1, "length": 1, "conductivity": 1}]})");
  expect_reject("pos_dim",
                R"({"nodes": [{"id": 0, "source": 1, "pos": [0, 0]},
                              {"id": 1, "source": -1, "pos": [1]}],
                    "edges": [{"i": 0, "j": 1, "length": 1, "conductivity": 1}]})");
  fs::remove_all(dir);
}

TEST_CASE("grid csv reads cell samples and rejects shape mismatches") {
  const std::string dir = testsupport::make_temp_dir("gridcsv");
  const RectGrid g1 = RectGrid::make(1, {1, 1}, {4, 1});
  const RectGrid g2 = RectGrid::make(2, {1, 1}, {2, 2});

  write_text_file(dir + "/ok1.csv", "i,value\n0,1.5\n2,3.5\n1,2.5\n3,-4\n");
  CHECK(read_grid_csv(dir + "/ok1.csv", g1) ==
        std::vector<double>{1.5, 2.5, 3.5, -4.0});

  // header optional, any order, row-major target
  write_text_file(dir + "/ok2.csv", "0,0,1\n1,0,2\n0,1,3\n1,1,4\n");
  CHECK(read_grid_csv(dir + "/ok2.csv", g2) ==
        std::vector<double>{1.0, 2.0, 3.0, 4.0});

  auto expect_reject = [&](const char* name, const std::string& body,
                           const RectGrid& g) {
    const std::string path = dir + "/" + name + ".csv";
    write_text_file(path, body);
    CHECK_THROWS_AS(read_grid_csv(path, g), InputError);
  };
  expect_reject("missing_cell", "0,1\n1,2\n2,3\n", g1);
  expect_reject("dup_cell", "0,1\n1,2\n1,2\n3,4\n", g1);
  expect_reject("out_of_range", "0,1\n1,2\n2,3\n9,4\n", g1);
  expect_reject("bad_number", "0,1\n1,2\n2,x\n3,4\n", g1);
  expect_reject("wrong_cols", "0,0,1\n1,2\n2,3\n3,4\n", g1);
  expect_reject("nonfinite", "0,1\n1,2\n2,inf\n3,4\n", g1);
  CHECK_THROWS_AS(read_grid_csv(dir + "/absent.csv", g1), InputError);
  fs::remove_all(dir);
}

TEST_CASE("grid csv writers round-trip through the reader") {
  const std::string dir = testsupport::make_temp_dir("csvout");
  const RectGrid g = RectGrid::make(2, {1, 1}, {3, 2});
  std::vector<double> cells(6);
  for (int i = 0; i < 6; ++i) cells[i] = 0.5 * i - 0.125;
  const std::string cell_text = grid_cell_csv(g, cells);
  CHECK(cell_text.substr(0, 10) == "i,j,value\n");
  write_text_file(dir + "/cells.csv", cell_text);
  CHECK(read_grid_csv(dir + "/cells.csv", g) == cells);

  std::vector<double> fx(g.face_count(0));
  for (std::size_t i = 0; i < fx.size(); ++i) fx[i] = double(i);
  const std::string face_text = grid_face_csv(g, 0, fx);
  // 4 x 2 axis-0 faces plus the header line
  CHECK(std::count(face_text.begin(), face_text.end(), '\n') == 9);
  fs::remove_all(dir);
}

TEST_CASE("record serializations parse as json with the documented keys") {
  BalanceRecord rec;
  rec.influx = 1.25;
  rec.outflux = 2.5;
  rec.source_integral = 1.25;
  rec.residual = 1e-12;
  rec.boundary_faces = 8;
  const auto doc = nlohmann::json::parse(balance_record_json(rec));
  CHECK(doc.at("influx").get<double>() == 1.25);
  CHECK(doc.at("outflux").get<double>() == 2.5);
  CHECK(doc.at("source_integral").get<double>() == 1.25);
  CHECK(doc.at("residual").get<double>() == 1e-12);
  CHECK(doc.at("boundary_faces").get<int>() == 8);
  CHECK(doc.contains("raw_influx"));
  CHECK(doc.contains("form_agreement"));
  CHECK(doc.contains("null_faces"));

  Network net = y_junction();
  FlowState flow = solve_pressures(net);
  MurrayReport rep = node_murray_report(net, flow, MetabolicParams{1.0, 1.0});
  const auto mdoc = nlohmann::json::parse(murray_report_json(rep));
  CHECK(mdoc.at("exponent").get<double>() == 1.0);
  CHECK(mdoc.at("nodes").size() == 4);
  CHECK(mdoc.at("nodes")[0].at("residual").get<double>() ==
        doctest::Approx(1.0 / 3.0));
  CHECK(mdoc.at("max_residual").get<double>() == rep.max_residual);
}
