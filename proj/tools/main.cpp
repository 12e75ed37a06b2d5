#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"
#include "json.hpp"
#include "mccs/errors.hpp"
#include "mccs/version.hpp"

namespace {

using nlohmann::json;

struct CommonFlags {
  std::string config_path;
  std::string seed;
  std::string out_dir;
  std::string class_level;
  std::string solver;
  std::string trials;
  bool scaled = false;
};

// Default output file names used when --out names a directory.
const char* default_output(const std::string& command) {
  if (command == "keygen") return "key.json";
  if (command == "encode") return "measurements.csv";
  if (command == "decode") return "results.csv";
  if (command == "bounds") return "bounds.csv";
  if (command == "attack") return "attack.json";
  if (command == "gaussianity") return "gaussianity.json";
  if (command == "ric") return "ric.json";
  return "out.json";
}

json load_config(const CommonFlags& flags, const std::string& command) {
  json config = json::object();
  if (!flags.config_path.empty()) {
    std::ifstream in(flags.config_path);
    if (!in) {
      throw mccs::IoError("cannot open config file: " + flags.config_path);
    }
    try {
      in >> config;
    } catch (const json::exception& e) {
      throw std::invalid_argument(std::string("bad config JSON: ") + e.what());
    }
  }
  if (!flags.seed.empty()) config["seed"] = flags.seed;
  if (!flags.class_level.empty()) config["class"] = std::stoi(flags.class_level);
  if (!flags.solver.empty()) config["solver"] = flags.solver;
  if (!flags.trials.empty()) config["trials"] = std::stol(flags.trials);
  if (flags.scaled) config["scaled"] = true;
  if (!flags.out_dir.empty()) {
    const std::filesystem::path dir(flags.out_dir);
    if (command == "convergence") {
      if (!config.contains("out_csv")) {
        config["out_csv"] = (dir / "convergence.csv").string();
      }
      if (!config.contains("out_json")) {
        config["out_json"] = (dir / "convergence.json").string();
      }
    } else if (!config.contains("out")) {
      config["out"] = (dir / default_output(command)).string();
    }
  }
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiclass encryption by compressed sensing"};
  app.set_version_flag("--version", std::string("mccs ") + mccs::kVersion);
  app.require_subcommand(1);

  CommonFlags flags;
  const std::vector<std::string> names = {"keygen",      "encode", "decode",
                                          "bounds",      "attack", "convergence",
                                          "gaussianity", "ric"};
  const std::vector<std::string> descriptions = {
      "derive and store a key chain",
      "encode a signal corpus into measurement frames",
      "recover signals at a given user class",
      "sweep the second-class recovery bounds over eta",
      "run the two-level distinguishing attack",
      "estimate the Gaussian convergence constant C(rho)",
      "test measurement Gaussianity for one plaintext",
      "estimate RIC / perturbation constants"};
  for (std::size_t i = 0; i < names.size(); ++i) {
    auto* sub = app.add_subcommand(names[i], descriptions[i]);
    sub->add_option("--config", flags.config_path, "JSON config file");
    sub->add_option("--seed", flags.seed, "master seed (u64)");
    sub->add_option("--out", flags.out_dir, "output directory");
    sub->add_option("--class", flags.class_level, "decoder class u");
    sub->add_option("--solver", flags.solver, "bpdn or cosamp");
    sub->add_option("--trials", flags.trials, "Monte Carlo trials");
    sub->add_flag("--scaled", flags.scaled, "1/sqrt(n) measurement scaling");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : mccs::cli::kExitConfig;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    return mccs::cli::run_command(command, load_config(flags, command));
  } catch (const mccs::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return mccs::cli::kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return mccs::cli::kExitConfig;
  }
}
