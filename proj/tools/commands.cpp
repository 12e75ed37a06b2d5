#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <vector>

#include "mccs/bounds.hpp"
#include "mccs/errors.hpp"
#include "mccs/keystream.hpp"
#include "mccs/numerics.hpp"
#include "mccs/recovery.hpp"
#include "mccs/secrecy.hpp"
#include "mccs/sensing.hpp"
#include "mccs/signals.hpp"
#include "mccs/version.hpp"

namespace mccs::cli {

namespace {

using nlohmann::json;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::uint64_t parse_seed(const json& v) {
  if (v.is_string()) {
    return std::stoull(v.get<std::string>());
  }
  return v.get<std::uint64_t>();
}

keystream::Seed config_seed(const json& config, const char* key = "seed") {
  return keystream::Seed{config.contains(key) ? parse_seed(config.at(key))
                                              : 0};
}

std::string require_path(const json& config, const char* key) {
  if (!config.contains(key)) {
    throw std::invalid_argument(std::string("config: missing '") + key + "'");
  }
  return config.at(key).get<std::string>();
}

std::vector<double> eta_list(const json& config) {
  std::vector<double> etas;
  if (config.contains("etas")) {
    etas = config.at("etas").get<std::vector<double>>();
  }
  return etas;
}

signals::OrthonormalBasis basis_from_config(const json& config, int n) {
  if (!config.contains("basis")) {
    return signals::make_identity_basis(n);
  }
  const json& b = config.at("basis");
  const auto kind =
      signals::basis_kind_from_string(b.value("kind", std::string("identity")));
  keystream::Seed seed{b.contains("seed") ? parse_seed(b.at("seed")) : 0};
  return signals::make_basis(kind, n, seed, b.value("path", std::string()));
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot open output file: " + path);
  }
  return out;
}

void write_echo(std::ofstream& out, const json& config) {
  out << "# mccs " << kVersion << "\n# config " << config.dump() << "\n";
}

json json_report_header(const json& config) {
  json doc;
  doc["version"] = kVersion;
  doc["config"] = config;
  return doc;
}

struct MeasurementFile {
  std::vector<std::uint64_t> frames;
  std::vector<Eigen::VectorXd> rows;
};

MeasurementFile read_measurements(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open measurements file: " + path);
  }
  MeasurementFile file;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (line.rfind("frame_index", 0) == 0) continue;  // header
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> values;
    while (std::getline(ss, cell, ',')) {
      values.push_back(std::stod(cell));
    }
    if (values.size() < 2) {
      throw IoError("measurements file row too short: " + path);
    }
    file.frames.push_back(static_cast<std::uint64_t>(values[0]));
    Eigen::VectorXd y(static_cast<Eigen::Index>(values.size()) - 1);
    for (std::size_t i = 1; i < values.size(); ++i) {
      y[static_cast<Eigen::Index>(i - 1)] = values[i];
    }
    file.rows.push_back(std::move(y));
  }
  if (file.rows.empty()) {
    throw IoError("measurements file is empty: " + path);
  }
  return file;
}

}  // namespace

int cmd_keygen(const json& config) {
  const int w = config.value("w", 1);
  if (w < 1) {
    throw std::invalid_argument("keygen: w must be >= 1");
  }
  const auto keys = keystream::make_keychain(w, config_seed(config));
  keystream::save_keychain(require_path(config, "out"), keys);
  return kExitOk;
}

int cmd_encode(const json& config) {
  const auto keys = keystream::load_keychain(require_path(config, "key"));
  const int m = config.at("m").get<int>();
  const int n = config.at("n").get<int>();
  const bool scaled = config.value("scaled", false);
  const auto etas = eta_list(config);
  if (static_cast<int>(etas.size()) != keys.class_count() - 1) {
    throw std::invalid_argument("encode: need one eta per flip seed");
  }
  const std::uint64_t frame_start = config.value("frame_start", 0ULL);
  const auto windows = signals::ingest_csv(require_path(config, "input"), n);

  const int top_class = keys.class_count() - 1;
  std::vector<Eigen::VectorXd> outputs(windows.size());
  const long count = static_cast<long>(windows.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < count; ++i) {
    const auto a = sensing::gen_matrix(keys, top_class, m, n,
                                       frame_start + static_cast<std::uint64_t>(i),
                                       etas);
    outputs[static_cast<std::size_t>(i)] =
        sensing::encode(a, windows[static_cast<std::size_t>(i)], scaled).y;
  }

  auto out = open_output(require_path(config, "out"));
  write_echo(out, config);
  out << "frame_index";
  for (int j = 0; j < m; ++j) out << ",y_" << j;
  out << "\n";
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    out << frame_start + i;
    for (int j = 0; j < m; ++j) out << ',' << fmt(outputs[i][j]);
    out << "\n";
  }
  return kExitOk;
}

int cmd_decode(const json& config) {
  const auto keys = keystream::load_keychain(require_path(config, "key"));
  const int m = config.at("m").get<int>();
  const int n = config.at("n").get<int>();
  const int u = config.value("class", keys.class_count() - 1);
  const bool scaled = config.value("scaled", false);
  const auto etas = eta_list(config);
  if (u < 0 || u >= keys.class_count()) {
    throw std::invalid_argument("decode: key deficit for requested class");
  }
  if (static_cast<int>(etas.size()) < u) {
    throw std::invalid_argument("decode: need one eta per flip level below the class");
  }
  const std::string solver = config.value("solver", std::string("bpdn"));
  if (solver != "bpdn" && solver != "cosamp") {
    throw std::invalid_argument("decode: solver must be bpdn or cosamp");
  }
  const auto measurements = read_measurements(require_path(config, "measurements"));
  if (measurements.rows.front().size() != m) {
    throw std::invalid_argument("decode: measurement width does not match m");
  }
  const auto basis = basis_from_config(config, n);

  std::vector<Eigen::VectorXd> truth;
  if (config.contains("truth")) {
    truth = signals::ingest_csv(config.at("truth").get<std::string>(), n);
    if (truth.size() < measurements.rows.size()) {
      throw std::invalid_argument("decode: ground truth has fewer windows than measurements");
    }
  }
  const bool genie = config.value("genie", false);
  if (genie && truth.empty()) {
    throw std::invalid_argument("decode: genie gamma needs ground truth");
  }
  const double fixed_gamma = config.value("gamma", 0.0);
  std::optional<int> k;
  if (config.contains("k")) k = config.at("k").get<int>();
  if (solver == "cosamp" && !k.has_value()) {
    throw std::invalid_argument("decode: cosamp needs the sparsity level k");
  }

  // Density unknown to this decoder: flip levels at and above its class.
  double eta_above = 0;
  for (std::size_t v = static_cast<std::size_t>(u); v < etas.size(); ++v) {
    eta_above += etas[v];
  }
  const double scale = scaled ? 1.0 / std::sqrt(static_cast<double>(n)) : 1.0;

  struct Row {
    double rsnr = 0;
    bool has_rsnr = false;
    int iterations = 0;
    double residual = 0;
    bool converged = false;
  };
  std::vector<Row> rows(measurements.rows.size());
  const long count = static_cast<long>(measurements.rows.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < count; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    const auto a =
        sensing::gen_matrix(keys, u, m, n, measurements.frames[idx], etas);
    const Eigen::MatrixXd a_eff = a.entries * scale;
    const Eigen::VectorXd& y = measurements.rows[idx];

    double gamma = fixed_gamma;
    if (genie) {
      gamma = (y - a_eff * truth[idx]).norm();
    }
    recovery::RecoveryResult result =
        solver == "bpdn" ? recovery::solve_bpdn(y, a_eff, basis, gamma)
                         : recovery::solve_cosamp(y, a_eff, basis, k);
    Row row;
    row.iterations = result.iterations;
    row.residual = result.residual;
    row.converged = result.converged;
    if (!truth.empty()) {
      row.rsnr = recovery::rsnr(truth[idx], result.x_hat);
      row.has_rsnr = true;
    }
    rows[idx] = row;
  }

  auto out = open_output(require_path(config, "out"));
  write_echo(out, config);
  out << "frame_index,class,eta,rsnr_db,iterations,residual,converged\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out << measurements.frames[i] << ',' << u << ',' << fmt(eta_above) << ',';
    if (rows[i].has_rsnr) out << fmt(rows[i].rsnr);
    out << ',' << rows[i].iterations << ',' << fmt(rows[i].residual) << ','
        << (rows[i].converged ? 1 : 0) << "\n";
  }
  return kExitOk;
}

int cmd_bounds(const json& config) {
  const int m = config.at("m").get<int>();
  const int n = config.at("n").get<int>();
  const double theta = config.value("theta", 0.1);
  const double e_x = config.value("e_x", 1.0);
  const double f_over_e2 = config.value("f_over_e2", 1.0);
  const int lb_trials = config.value("lb_trials", 200);
  const int ric_trials = config.value("ric_trials", 200);
  const int k = config.value("k", 0);
  const auto etas = eta_list(config);
  if (etas.empty()) {
    throw std::invalid_argument("bounds: eta grid must be nonempty");
  }
  const auto seed = config_seed(config);
  const std::string sigma_mode =
      config.value("sigma_mode", std::string("asymptotic"));

  double sigma = std::sqrt(static_cast<double>(m)) +
                 std::sqrt(static_cast<double>(n));
  if (sigma_mode == "instance") {
    keystream::BitStream stream(keystream::Seed{seed.value ^ 0xA0A0A0A0ULL});
    sigma = numerics::sigma_max(bounds::random_bernoulli(stream, m, n));
  } else if (sigma_mode != "asymptotic") {
    throw std::invalid_argument("bounds: sigma_mode must be asymptotic or instance");
  }

  signals::OrthonormalBasis basis =
      k > 0 ? basis_from_config(config, n) : signals::make_identity_basis(1);

  auto out = open_output(require_path(config, "out"));
  write_echo(out, config);
  out << "eta,lb_arsnr_db,ub_arsnr_db,zeta,theorem1_lb,ub_applicable,ub_value\n";

  const auto eta_seeds = keystream::derive_seeds(seed, 2 * etas.size());
  for (std::size_t i = 0; i < etas.size(); ++i) {
    const double eta = etas[i];
    const bounds::PerturbationRegime regime{m, n, eta, theta};
    const auto t1 = bounds::theorem1_lb(regime, e_x, f_over_e2, sigma);
    const double lb =
        bounds::practical_lb_arsnr(m, n, eta, lb_trials, eta_seeds[2 * i]);
    const double ub = bounds::practical_ub_arsnr(m, n, eta);

    bool applicable = false;
    double ub_value = 0;
    if (k > 0) {
      keystream::BitStream stream(eta_seeds[2 * i + 1]);
      const keystream::KeyChain keys =
          keystream::make_keychain(2, keystream::Seed{stream.next_word()});
      const std::vector<double> one_eta{eta};
      const auto a0 = sensing::gen_matrix(keys, 0, m, n, 0, one_eta);
      const auto flips = sensing::gen_flipset(
          keystream::frame_seed(keys.flip_seeds[0], 0), 0, m, n,
          sensing::flip_cardinality(eta, m, n), {});
      const auto da = sensing::perturbation_of(a0, flips);
      auto a1 = a0;
      a1.class_level = 1;
      for (const auto p : flips.positions) {
        a1.entries.data()[p] = -a1.entries.data()[p];
      }
      const auto [est_k, est_2k] = bounds::estimate_ric_constants(
          a1, da, basis, k, ric_trials, keystream::Seed{stream.next_word()});
      try {
        // Unit-energy plaintext convention: ||y|| = 1 under the normalised
        // encoding used for the RIC estimates.
        const auto prop1 = bounds::proposition1_ub(est_k, est_2k, 1.0);
        applicable = true;
        ub_value = prop1.ub;
      } catch (const bounds::InapplicableBound&) {
        applicable = false;
      }
    }

    out << fmt(eta) << ',' << fmt(lb) << ',' << fmt(ub) << ',' << fmt(t1.zeta)
        << ',' << fmt(t1.bound) << ',' << (applicable ? 1 : 0) << ',';
    if (applicable) out << fmt(ub_value);
    out << "\n";
  }
  return kExitOk;
}

int cmd_attack(const json& config) {
  const double e1 = config.value("e1", 1.0);
  const double e2 = config.value("e2", 1.0);
  const int n = config.value("n", 256);
  const long chi = config.value("chi", 50000L);
  const int reps = config.value("P", 200);
  const auto report =
      secrecy::distinguishing_attack(e1, e2, n, chi, reps, config_seed(config));

  json doc = json_report_header(config);
  doc["e1"] = report.e1;
  doc["e2"] = report.e2;
  doc["n"] = report.n;
  doc["chi"] = report.chi;
  doc["P"] = report.repetitions;
  doc["p_values"] = report.p_values;
  doc["second_level_p"] = report.second_level_p;
  doc["verdict"] =
      report.distinguishable ? "distinguishable" : "indistinguishable";

  auto out = open_output(require_path(config, "out"));
  out << doc.dump(2) << "\n";
  return kExitOk;
}

int cmd_convergence(const json& config) {
  const auto n_grid = config.at("n_grid").get<std::vector<int>>();
  const int per_n = config.value("plaintexts_per_n", 100);
  const long rows = config.value("rows_per_plaintext", 100000L);
  std::vector<double> rho_list{0.5, 0.1, 0.001};
  if (config.contains("rho_list")) {
    rho_list = config.at("rho_list").get<std::vector<double>>();
  }
  const auto report = secrecy::estimate_convergence_constant(
      n_grid, per_n, rows, rho_list, config_seed(config));

  auto csv = open_output(require_path(config, "out_csv"));
  write_echo(csv, config);
  csv << "n,plaintext_id,deviation\n";
  for (const auto& point : report.deviations) {
    csv << point.n << ',' << point.plaintext_id << ',' << fmt(point.deviation)
        << "\n";
  }

  json doc = json_report_header(config);
  doc["n_grid"] = report.n_grid;
  doc["median_deviation"] = report.median_deviation;
  if (report.n_grid.size() >= 2) {
    doc["loglog_slope"] = report.loglog_slope;
  } else {
    doc["loglog_slope"] = nullptr;
  }
  auto c_rho = json::array();
  for (const auto& [rho, c] : report.c_rho) {
    c_rho.push_back(json{{"rho", rho}, {"c_rho", c}});
  }
  doc["c_rho"] = std::move(c_rho);
  auto out = open_output(require_path(config, "out_json"));
  out << doc.dump(2) << "\n";
  return kExitOk;
}

int cmd_gaussianity(const json& config) {
  const int n = config.value("n", 1024);
  const long chi = config.value("chi", 10000L);
  const auto seed = config_seed(config);

  Eigen::VectorXd x;
  if (config.contains("input")) {
    const auto windows =
        signals::ingest_csv(config.at("input").get<std::string>(), n);
    x = windows.front();
  } else {
    keystream::BitStream stream(keystream::Seed{seed.value ^ 0xF00DULL});
    x = signals::sphere_uniform(stream, n, 1.0);
  }
  const auto outcome = secrecy::gaussianity_check(x, chi, seed);

  json doc = json_report_header(config);
  doc["n"] = n;
  doc["chi"] = chi;
  doc["statistic"] = outcome.statistic;
  doc["p_value"] = outcome.p_value;
  auto out = open_output(require_path(config, "out"));
  out << doc.dump(2) << "\n";
  return kExitOk;
}

int cmd_ric(const json& config) {
  const int m = config.at("m").get<int>();
  const int n = config.at("n").get<int>();
  const int k = config.at("k").get<int>();
  const double eta = config.at("eta").get<double>();
  const int trials = config.value("trials", 1000);
  const auto seed = config_seed(config);
  const auto basis = basis_from_config(config, n);

  keystream::BitStream stream(seed);
  const keystream::KeyChain keys =
      keystream::make_keychain(2, keystream::Seed{stream.next_word()});
  const std::vector<double> one_eta{eta};
  const auto a0 = sensing::gen_matrix(keys, 0, m, n, 0, one_eta);
  const auto flips = sensing::gen_flipset(
      keystream::frame_seed(keys.flip_seeds[0], 0), 0, m, n,
      sensing::flip_cardinality(eta, m, n), {});
  const auto da = sensing::perturbation_of(a0, flips);
  auto a1 = a0;
  a1.class_level = 1;
  for (const auto p : flips.positions) {
    a1.entries.data()[p] = -a1.entries.data()[p];
  }
  const auto [est_k, est_2k] = bounds::estimate_ric_constants(
      a1, da, basis, k, trials, keystream::Seed{stream.next_word()});

  auto to_json = [](const bounds::RicEstimate& est) {
    return json{{"k", est.k},
                {"sigma_min", est.sigma_min},
                {"sigma_max", est.sigma_max},
                {"delta", est.delta},
                {"eps", est.eps},
                {"trials", est.trials}};
  };
  json doc = json_report_header(config);
  doc["ric_k"] = to_json(est_k);
  doc["ric_2k"] = to_json(est_2k);
  try {
    const auto prop1 = bounds::proposition1_ub(est_k, est_2k, 1.0);
    doc["prop1"] = json{{"applicable", true},
                        {"gamma", prop1.gamma},
                        {"cbar", prop1.cbar},
                        {"ub", prop1.ub}};
  } catch (const bounds::InapplicableBound& e) {
    doc["prop1"] = json{{"applicable", false}, {"reason", e.what()}};
  }
  auto out = open_output(require_path(config, "out"));
  out << doc.dump(2) << "\n";
  return kExitOk;
}

int run_command(const std::string& name, const json& config) {
  try {
    if (name == "keygen") return cmd_keygen(config);
    if (name == "encode") return cmd_encode(config);
    if (name == "decode") return cmd_decode(config);
    if (name == "bounds") return cmd_bounds(config);
    if (name == "attack") return cmd_attack(config);
    if (name == "convergence") return cmd_convergence(config);
    if (name == "gaussianity") return cmd_gaussianity(config);
    if (name == "ric") return cmd_ric(config);
    std::cerr << "unknown command: " << name << "\n";
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const bounds::InapplicableBound& e) {
    std::cerr << "bound inapplicable: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
}

}  // namespace mccs::cli
