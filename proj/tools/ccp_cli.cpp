// Command line front end: deterministic data simulation, single calibration
// runs, and calibration/horizon sweeps driven by a JSON config.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "ccp/ccp.hpp"
#include "ccp/serialization.hpp"

namespace fs = std::filesystem;
using ccp::Json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitConfig = 2;
constexpr int kExitInsufficientCal = 3;

struct DataConfig {
  std::string generator;  // "oscillator", "toy_ar", or empty when csv_path set
  std::string csv_path;
  std::size_t n = 1000;
  std::size_t t = 10;
  std::size_t k = 5;
  std::size_t d = 2;
  double sigma = 0.05;
  double rho = 0.0;
  std::string regime = "switching";
  std::uint64_t seed = 0;
};

struct RunConfig {
  DataConfig data;
  ccp::SplitSpec split;
  ccp::ForecasterSpec forecaster;
  std::vector<ccp::CalibrationMethod> methods{ccp::CalibrationMethod::kDichotomy};
  bool method_was_scalar = true;
  std::vector<double> alphas{0.1};
  bool alpha_was_scalar = true;
  std::vector<std::uint64_t> seeds;  // defaults to {split.seed}
  std::vector<std::size_t> ks;       // horizon sweep when non-empty
  ccp::SgdConfig sgd;
  std::string output_dir = "out";
};

DataConfig data_config_from_json(const Json& j) {
  ccp::detail::reject_unknown_keys(
      j, {"generator", "csv_path", "n", "t", "k", "d", "sigma", "rho", "regime", "seed"},
      "data");
  DataConfig cfg;
  if (j.contains("generator")) cfg.generator = j.at("generator").get<std::string>();
  if (j.contains("csv_path")) cfg.csv_path = j.at("csv_path").get<std::string>();
  if (cfg.generator.empty() == cfg.csv_path.empty())
    throw ccp::InvalidParam("data needs exactly one of 'generator' or 'csv_path'");
  if (j.contains("n")) cfg.n = j.at("n").get<std::size_t>();
  if (j.contains("t")) cfg.t = j.at("t").get<std::size_t>();
  if (j.contains("k")) cfg.k = j.at("k").get<std::size_t>();
  if (j.contains("d")) cfg.d = j.at("d").get<std::size_t>();
  if (j.contains("sigma")) cfg.sigma = j.at("sigma").get<double>();
  if (j.contains("rho")) cfg.rho = j.at("rho").get<double>();
  if (j.contains("regime")) cfg.regime = j.at("regime").get<std::string>();
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  return cfg;
}

RunConfig run_config_from_json(const Json& j) {
  ccp::detail::reject_unknown_keys(j,
                                   {"data", "split", "forecaster", "method", "methods", "alpha",
                                    "alphas", "seeds", "ks", "sgd", "output_dir"},
                                   "config");
  RunConfig cfg;
  if (!j.contains("data")) throw ccp::InvalidParam("config needs a 'data' object");
  cfg.data = data_config_from_json(j.at("data"));
  if (j.contains("split")) cfg.split = ccp::split_spec_from_json(j.at("split"));
  if (j.contains("forecaster"))
    cfg.forecaster = ccp::forecaster_spec_from_json(j.at("forecaster"));
  if (j.contains("method") && j.contains("methods"))
    throw ccp::InvalidParam("config may set 'method' or 'methods', not both");
  if (j.contains("method"))
    cfg.methods = {ccp::method_from_string(j.at("method").get<std::string>())};
  if (j.contains("methods")) {
    cfg.method_was_scalar = false;
    cfg.methods.clear();
    for (const auto& m : j.at("methods"))
      cfg.methods.push_back(ccp::method_from_string(m.get<std::string>()));
  }
  if (j.contains("alpha") && j.contains("alphas"))
    throw ccp::InvalidParam("config may set 'alpha' or 'alphas', not both");
  if (j.contains("alpha")) cfg.alphas = {j.at("alpha").get<double>()};
  if (j.contains("alphas")) {
    cfg.alpha_was_scalar = false;
    cfg.alphas = j.at("alphas").get<std::vector<double>>();
  }
  if (j.contains("seeds")) cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  if (j.contains("ks")) cfg.ks = j.at("ks").get<std::vector<std::size_t>>();
  if (j.contains("sgd")) cfg.sgd = ccp::sgd_config_from_json(j.at("sgd"));
  if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();
  if (cfg.seeds.empty()) cfg.seeds = {cfg.split.seed};
  return cfg;
}

Json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ccp::IoError("cannot open config '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const std::exception& e) {
    throw ccp::InvalidParam(std::string("config is not valid JSON: ") + e.what());
  }
}

ccp::Dataset make_dataset(const DataConfig& cfg) {
  if (!cfg.csv_path.empty()) return ccp::load_csv(cfg.csv_path, cfg.t, cfg.k);
  if (cfg.generator == "oscillator")
    return ccp::gen_oscillator(cfg.n, cfg.t, cfg.k, cfg.d, cfg.sigma, cfg.rho, cfg.seed);
  if (cfg.generator == "toy_ar")
    return ccp::gen_toy_ar(cfg.n, ccp::toy_regime_from_string(cfg.regime), cfg.seed);
  throw ccp::InvalidParam("unknown generator '" + cfg.generator + "'");
}

Json meta_json(const DataConfig& cfg) {
  Json meta{{"generator", cfg.generator}, {"n", cfg.n},         {"t", cfg.t},
            {"k", cfg.k},                 {"d", cfg.d},         {"sigma", cfg.sigma},
            {"rho", cfg.rho},             {"seed", cfg.seed}};
  if (cfg.generator == "toy_ar") {
    meta["regime"] = cfg.regime;
    meta["t"] = 1;
    meta["k"] = 3;
    meta["d"] = 1;
    meta.erase("sigma");
    meta.erase("rho");
  }
  return meta;
}

fs::path meta_path_for(const fs::path& out) {
  fs::path p = out;
  p.replace_extension(".meta.json");
  return p;
}

int cmd_simulate(const DataConfig& cfg, const std::string& out) {
  const auto ds = make_dataset(cfg);
  if (const auto parent = fs::path(out).parent_path(); !parent.empty())
    fs::create_directories(parent);
  ccp::save_csv(ds, out);
  ccp::write_json(meta_json(cfg), meta_path_for(out).string());
  std::printf("wrote %zu series x %zu steps to %s\n", ds.size(), ds.meta.t + ds.meta.k,
              out.c_str());
  return kExitOk;
}

void emit_summary(const ccp::EvalReport& report, bool as_json) {
  if (as_json) {
    Json line{{"method", report.method},
              {"alpha", report.alpha},
              {"joint_coverage", report.joint_coverage},
              {"mean_measure", ccp::detail::radius_to_json(report.mean_region_measure)},
              {"unbounded_fraction", report.unbounded_fraction},
              {"n_test", report.n_test}};
    std::cout << line.dump() << "\n";
  } else {
    std::printf("method=%s alpha=%g joint_coverage=%.4f mean_measure=%.6g n_test=%zu\n",
                report.method.c_str(), report.alpha, report.joint_coverage,
                report.mean_region_measure, report.n_test);
  }
}

int cmd_run(const RunConfig& cfg, bool as_json) {
  if (cfg.methods.size() != 1 || cfg.alphas.size() != 1 || cfg.seeds.size() != 1)
    throw ccp::InvalidParam("'run' needs a single method, alpha and seed; use 'sweep' for grids");
  const auto ds = make_dataset(cfg.data);
  ccp::SplitSpec split = cfg.split;
  split.seed = cfg.seeds[0];
  const auto result = ccp::run_experiment(ds, split, cfg.forecaster, cfg.alphas[0],
                                          cfg.methods[0], cfg.sgd);

  fs::create_directories(cfg.output_dir);
  const fs::path dir(cfg.output_dir);
  ccp::write_json(ccp::model_to_json(result.model), (dir / "model.json").string());
  ccp::write_json(ccp::regions_to_json(result.test_ids, result.regions, cfg.alphas[0]),
                  (dir / "regions.json").string());
  std::vector<ccp::SweepRow> rows{{result.report.method, cfg.alphas[0], split.seed,
                                   result.report.joint_coverage,
                                   result.report.mean_region_measure,
                                   result.report.unbounded_fraction, ds.meta.k,
                                   result.report.n_test}};
  ccp::write_metrics_csv(rows, (dir / "metrics.csv").string());
  emit_summary(result.report, as_json);
  return kExitOk;
}

int cmd_sweep(const RunConfig& cfg, bool as_json) {
  if (cfg.alphas.empty()) throw ccp::InvalidParam("sweep needs a non-empty 'alphas' list");
  std::vector<ccp::SweepRow> rows;
  if (!cfg.ks.empty()) {
    if (cfg.data.generator != "oscillator")
      throw ccp::InvalidParam("horizon sweep ('ks') requires the oscillator generator");
    if (cfg.alphas.size() != 1)
      throw ccp::InvalidParam("horizon sweep uses a single alpha");
    ccp::OscillatorParams params{cfg.data.n, cfg.data.t, cfg.data.d, cfg.data.sigma,
                                 cfg.data.rho};
    rows = ccp::horizon_sweep(params, cfg.ks, cfg.split, cfg.forecaster, cfg.alphas[0],
                              cfg.seeds, cfg.sgd);
  } else {
    const auto ds = make_dataset(cfg.data);
    rows = ccp::calibration_sweep(ds, cfg.split, cfg.forecaster, cfg.methods, cfg.alphas,
                                  cfg.seeds, cfg.sgd);
  }
  fs::create_directories(cfg.output_dir);
  const auto path = (fs::path(cfg.output_dir) / "metrics.csv").string();
  ccp::write_metrics_csv(rows, path);
  if (as_json) {
    Json line{{"rows", rows.size()}, {"metrics_csv", path}};
    std::cout << line.dump() << "\n";
  } else {
    std::printf("wrote %zu rows to %s\n", rows.size(), path.c_str());
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Copula-calibrated conformal prediction for multi-step time series"};
  app.require_subcommand(1);

  DataConfig sim;
  std::string sim_out = "data.csv";
  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic dataset as CSV");
  simulate->add_option("--generator", sim.generator, "oscillator or toy_ar")->required();
  simulate->add_option("--n", sim.n, "number of series");
  simulate->add_option("--t", sim.t, "input window length");
  simulate->add_option("--k", sim.k, "target horizon length");
  simulate->add_option("--d", sim.d, "dimensions per step");
  simulate->add_option("--sigma", sim.sigma, "target noise scale");
  simulate->add_option("--rho", sim.rho, "cross-step noise correlation in [0,1]");
  simulate->add_option("--regime", sim.regime, "toy_ar regime: switching or stationary");
  simulate->add_option("--seed", sim.seed, "generator seed");
  simulate->add_option("--out", sim_out, "output CSV path");

  std::string config_path;
  std::string out_override;
  std::optional<std::uint64_t> seed_override;
  bool as_json = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config path")->required();
    sub->add_option("--out", out_override, "override output_dir");
    sub->add_option("--seed", seed_override, "override data and split seed");
    sub->add_flag("--json", as_json, "machine-readable one-line summary on stdout");
  };
  auto* run = app.add_subcommand("run", "Calibrate, predict and evaluate once");
  add_common(run);
  auto* sweep = app.add_subcommand("sweep", "Sweep confidence levels or horizons");
  add_common(sweep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(sim, sim_out);
    RunConfig cfg = run_config_from_json(load_config(config_path));
    if (!out_override.empty()) cfg.output_dir = out_override;
    if (seed_override) {
      cfg.data.seed = *seed_override;
      cfg.split.seed = *seed_override;
      cfg.seeds = {*seed_override};
    }
    if (run->parsed()) return cmd_run(cfg, as_json);
    return cmd_sweep(cfg, as_json);
  } catch (const ccp::InsufficientCalibration& e) {
    std::cerr << e.what() << "\n";
    return kExitInsufficientCal;
  } catch (const ccp::EmptySubset& e) {
    std::cerr << e.what() << "\n";
    return kExitInsufficientCal;
  } catch (const ccp::InvalidParam& e) {
    std::cerr << e.what() << "\n";
    return kExitConfig;
  } catch (const ccp::InvalidLevel& e) {
    std::cerr << e.what() << "\n";
    return kExitConfig;
  } catch (const ccp::Error& e) {
    std::cerr << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
}
