#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "mccs/keystream.hpp"
#include "mccs/signals.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::string kBin = MCCS_CLI_BIN;

fs::path work_dir() {
  const auto dir = fs::temp_directory_path() / "mccs_cli_test";
  fs::create_directories(dir);
  return dir;
}

int run(const std::string& args) {
  const int status = std::system((kBin + " " + args + " >/dev/null 2>&1").c_str());
  return WEXITSTATUS(status);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// File content with the provenance comment lines removed (they echo the
// config, which includes the output path itself).
std::string data_lines(const fs::path& path) {
  std::ifstream in(path);
  std::string line, out;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] == '#') continue;
    out += line;
    out += '\n';
  }
  return out;
}

fs::path write_config(const fs::path& dir, const std::string& name,
                      const json& config) {
  const auto path = dir / name;
  std::ofstream(path) << config.dump();
  return path;
}

// k-sparse corpus in the DCT basis, one window per frame.
fs::path write_corpus(const fs::path& dir, const std::string& name, int n,
                      int k, int windows, std::uint64_t seed) {
  const auto basis = mccs::signals::make_dct2_basis(n);
  mccs::keystream::BitStream stream(mccs::keystream::Seed{seed});
  const auto path = dir / name;
  std::ofstream out(path);
  for (int w = 0; w < windows; ++w) {
    const auto sig = mccs::signals::sample_signal(
        {n, k, mccs::signals::CoefficientLaw::gaussian_on_support, 1.0}, basis,
        stream);
    for (int i = 0; i < n; ++i) {
      char buf[40];
      std::snprintf(buf, sizeof(buf), "%.17g", sig.x[i]);
      out << buf << "\n";
    }
  }
  return path;
}

// Median of the rsnr_db column of a results CSV.
double median_rsnr(const fs::path& results) {
  std::ifstream in(results);
  std::string line;
  std::vector<double> values;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("frame", 0) == 0) continue;
    std::stringstream ss(line);
    std::string cell;
    for (int col = 0; std::getline(ss, cell, ','); ++col) {
      if (col == 3 && !cell.empty()) values.push_back(std::stod(cell));
    }
  }
  REQUIRE(!values.empty());
  std::sort(values.begin(), values.end());
  return values[values.size() / 2];
}

}  // namespace

TEST_CASE("keygen outputs are deterministic and truncation is a prefix") {
  const auto dir = work_dir();
  REQUIRE(run("keygen --seed 99 --config " +
              write_config(dir, "kg1.json",
                           json{{"w", 3}, {"out", (dir / "k1.json").string()}})
                  .string()) == 0);
  REQUIRE(run("keygen --seed 99 --config " +
              write_config(dir, "kg2.json",
                           json{{"w", 3}, {"out", (dir / "k2.json").string()}})
                  .string()) == 0);
  CHECK(read_file(dir / "k1.json") == read_file(dir / "k2.json"));

  REQUIRE(run("keygen --seed 99 --config " +
              write_config(dir, "kg3.json",
                           json{{"w", 2}, {"out", (dir / "k3.json").string()}})
                  .string()) == 0);
  const auto full = json::parse(read_file(dir / "k1.json"));
  const auto lower = json::parse(read_file(dir / "k3.json"));
  CHECK(full["matrix_seed"] == lower["matrix_seed"]);
  CHECK(full["flip_seeds"][0] == lower["flip_seeds"][0]);

  CHECK(run("keygen") == 2);  // missing output path
}

TEST_CASE("encode, decode round trip and class separation") {
  const auto dir = work_dir();
  const int n = 64, m = 32, k = 3, windows = 12;
  const auto corpus = write_corpus(dir, "corpus.csv", n, k, windows, 31337);
  const auto key = dir / "key.json";
  REQUIRE(run("keygen --seed 7 --config " +
              write_config(dir, "kg.json",
                           json{{"w", 2}, {"out", key.string()}})
                  .string()) == 0);

  const json encode_cfg{{"key", key.string()},     {"input", corpus.string()},
                        {"out", (dir / "y.csv").string()},
                        {"m", m},                  {"n", n},
                        {"etas", {0.05}},          {"scaled", true}};
  REQUIRE(run("encode --config " + write_config(dir, "enc.json", encode_cfg)
                           .string()) == 0);

  // Determinism: re-encoding gives a byte-identical file.
  json encode_cfg2 = encode_cfg;
  encode_cfg2["out"] = (dir / "y2.csv").string();
  REQUIRE(run("encode --config " + write_config(dir, "enc2.json", encode_cfg2)
                           .string()) == 0);
  CHECK(data_lines(dir / "y.csv") == data_lines(dir / "y2.csv"));

  json decode_cfg{{"key", key.string()},
                  {"measurements", (dir / "y.csv").string()},
                  {"out", (dir / "r1.csv").string()},
                  {"m", m},
                  {"n", n},
                  {"etas", {0.05}},
                  {"class", 1},
                  {"solver", "bpdn"},
                  {"truth", corpus.string()},
                  {"basis", {{"kind", "dct2"}}},
                  {"scaled", true}};
  REQUIRE(run("decode --config " + write_config(dir, "dec1.json", decode_cfg)
                           .string()) == 0);
  const double first_class = median_rsnr(dir / "r1.csv");
  CHECK(first_class > 80.0);

  json second_cfg = decode_cfg;
  second_cfg["class"] = 0;
  second_cfg["genie"] = true;
  second_cfg["out"] = (dir / "r0.csv").string();
  REQUIRE(run("decode --config " + write_config(dir, "dec0.json", second_cfg)
                           .string()) == 0);
  const double second_class = median_rsnr(dir / "r0.csv");
  CHECK(first_class - second_class >= 20.0);

  // Decode reruns are byte-identical.
  json rerun_cfg = decode_cfg;
  rerun_cfg["out"] = (dir / "r1b.csv").string();
  REQUIRE(run("decode --config " + write_config(dir, "dec1b.json", rerun_cfg)
                           .string()) == 0);
  CHECK(data_lines(dir / "r1.csv") == data_lines(dir / "r1b.csv"));

  // CoSaMP also produces rows.
  json cosamp_cfg = decode_cfg;
  cosamp_cfg["solver"] = "cosamp";
  cosamp_cfg["k"] = k;
  cosamp_cfg["out"] = (dir / "rc.csv").string();
  REQUIRE(run("decode --config " + write_config(dir, "decc.json", cosamp_cfg)
                           .string()) == 0);
  CHECK(median_rsnr(dir / "rc.csv") > 80.0);

  // Missing ground truth leaves the rsnr column empty.
  json blind_cfg = decode_cfg;
  blind_cfg.erase("truth");
  blind_cfg["out"] = (dir / "rb.csv").string();
  REQUIRE(run("decode --config " + write_config(dir, "decb.json", blind_cfg)
                           .string()) == 0);
  std::ifstream in(dir / "rb.csv");
  std::string line;
  bool saw_row = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("frame", 0) == 0) continue;
    saw_row = true;
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');
    std::getline(ss, cell, ',');
    std::getline(ss, cell, ',');
    std::getline(ss, cell, ',');
    CHECK(cell.empty());
    break;
  }
  CHECK(saw_row);

  // Class beyond the key chain is a config error.
  json deficit_cfg = decode_cfg;
  deficit_cfg["class"] = 2;
  CHECK(run("decode --config " + write_config(dir, "decd.json", deficit_cfg)
                         .string()) == 2);
}

TEST_CASE("bounds sweep CSV") {
  const auto dir = work_dir();
  const json cfg{{"m", 64},   {"n", 128},        {"etas", {0.01, 0.02, 0.04, 0.08}},
                 {"theta", 0.1}, {"lb_trials", 60}, {"out", (dir / "b.csv").string()},
                 {"seed", "5"}};
  REQUIRE(run("bounds --config " + write_config(dir, "b.json", cfg).string()) ==
          0);

  std::ifstream in(dir / "b.csv");
  std::string line;
  std::vector<double> ubs;
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("eta", 0) == 0) continue;
    ++rows;
    std::stringstream ss(line);
    std::string cell;
    for (int col = 0; std::getline(ss, cell, ','); ++col) {
      if (col == 2) ubs.push_back(std::stod(cell));
    }
  }
  CHECK(rows == 4);
  for (std::size_t i = 1; i < ubs.size(); ++i) {
    CHECK(ubs[i] < ubs[i - 1]);  // Eq-13 style monotone decrease
  }
}

TEST_CASE("attack report JSON is reproducible") {
  const auto dir = work_dir();
  const json cfg{{"e1", 1.0}, {"e2", 4.0},  {"n", 32},
                 {"chi", 2000L}, {"P", 24}, {"seed", "12"},
                 {"out", (dir / "a1.json").string()}};
  REQUIRE(run("attack --config " + write_config(dir, "a1c.json", cfg).string()) ==
          0);
  json cfg2 = cfg;
  cfg2["out"] = (dir / "a2.json").string();
  REQUIRE(run("attack --config " + write_config(dir, "a2c.json", cfg2).string()) ==
          0);

  const auto r1 = json::parse(read_file(dir / "a1.json"));
  const auto r2 = json::parse(read_file(dir / "a2.json"));
  CHECK(r1["p_values"] == r2["p_values"]);
  CHECK(r1["second_level_p"] == r2["second_level_p"]);
  CHECK(r1["verdict"] == "distinguishable");
}

TEST_CASE("convergence command emits CSV rows and JSON summary") {
  const auto dir = work_dir();
  const json cfg{{"n_grid", {16}},
                 {"plaintexts_per_n", 5},
                 {"rows_per_plaintext", 20000L},
                 {"rho_list", {0.5, 0.1}},
                 {"seed", "3"},
                 {"out_csv", (dir / "c.csv").string()},
                 {"out_json", (dir / "c.json").string()}};
  REQUIRE(run("convergence --config " + write_config(dir, "cc.json", cfg)
                           .string()) == 0);

  const auto doc = json::parse(read_file(dir / "c.json"));
  CHECK(doc["loglog_slope"].is_null());  // single grid point
  CHECK(doc["c_rho"].size() == 2);
  CHECK(doc["c_rho"][0]["c_rho"].get<double>() <=
        doc["c_rho"][1]["c_rho"].get<double>() + 1e-12);

  std::ifstream in(dir / "c.csv");
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '#' && line.rfind("n,", 0) != 0) ++rows;
  }
  CHECK(rows == 5);
}

TEST_CASE("gaussianity and ric commands produce reports") {
  const auto dir = work_dir();
  REQUIRE(run("gaussianity --config " +
              write_config(dir, "g.json",
                           json{{"n", 256},
                                {"chi", 20000L},
                                {"seed", "9"},
                                {"out", (dir / "g.out.json").string()}})
                  .string()) == 0);
  const auto g = json::parse(read_file(dir / "g.out.json"));
  CHECK(g["p_value"].get<double>() > 0.001);

  REQUIRE(run("ric --config " +
              write_config(dir, "r.json",
                           json{{"m", 64},
                                {"n", 128},
                                {"k", 4},
                                {"eta", 0.004},
                                {"trials", 120},
                                {"seed", "11"},
                                {"basis", {{"kind", "random-onb"}, {"seed", 2}}},
                                {"out", (dir / "r.out.json").string()}})
                  .string()) == 0);
  const auto r = json::parse(read_file(dir / "r.out.json"));
  CHECK(r["ric_k"]["eps"].get<double>() >= 0.0);
  CHECK(r["ric_2k"]["k"].get<int>() == 8);

  CHECK(run("nonsense") == 2);
}
