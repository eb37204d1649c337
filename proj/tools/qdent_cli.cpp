// Command-line front end. Every subcommand loads a config (or a preset),
// applies flag overrides, runs and prints the JSON summary. Failures print
// a JSON error object on stderr and exit nonzero.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "qdent/config.hpp"
#include "qdent/error.hpp"
#include "qdent/experiment.hpp"
#include "qdent/parallel.hpp"

namespace {

using nlohmann::json;

enum ExitCode { kOk = 0, kFailure = 1, kConfig = 2, kIo = 3, kParse = 4, kUsage = 64 };

struct Options {
  std::string config;
  std::string preset = "default";
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> pulses;
  std::optional<double> window_ps;
  std::string out = "out";
  std::string kind;
  std::string input;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config, "JSON config file");
  cmd->add_option("--preset", o.preset, "starting values when no config is given")
      ->check(CLI::IsMember({"default", "device"}));
  cmd->add_option("--seed", o.seed, "override run.seed");
  cmd->add_option("--pulses", o.pulses, "override run.n_pulses (pulse pairs for hom)");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--window-ps", o.window_ps,
                  "hom: temporal filter window; other commands: peak integration window");
}

qdent::ExperimentConfig load(const Options& o) {
  qdent::ExperimentConfig cfg;
  if (!o.config.empty()) {
    cfg = qdent::load_config(o.config);
  } else {
    cfg = qdent::parse_config(json{{"preset", o.preset}});
  }
  if (o.seed) cfg.run.seed = *o.seed;
  if (o.pulses) cfg.run.n_pulses = *o.pulses;
  return cfg;
}

void apply_window(qdent::ExperimentConfig& cfg, const Options& o) {
  if (!o.window_ps) return;
  if (cfg.kind == qdent::ExperimentKind::Hom) {
    cfg.hom.config.filter_window = *o.window_ps;
  } else {
    cfg.analysis.peak_window = *o.window_ps;
  }
}

json error_json(const char* type, const std::string& message) {
  return {{"error", {{"type", type}, {"message", message}}}};
}

int fail(const Options& o, json err, int code) {
  std::cerr << err.dump(2) << '\n';
  if (o.out.empty()) return code;
  std::error_code ec;
  std::filesystem::create_directories(o.out, ec);
  if (!ec) {
    std::ofstream f(std::filesystem::path(o.out) / "error.json", std::ios::trunc);
    if (f) f << err.dump(2) << '\n';
  }
  return code;
}

int run_kind(Options& o, std::optional<qdent::ExperimentKind> forced) {
  qdent::ExperimentConfig cfg = load(o);
  if (forced) {
    cfg.kind = *forced;
  } else if (!o.kind.empty()) {
    cfg.kind = qdent::kind_from_name(o.kind);
  }
  apply_window(cfg, o);
  cfg.validate();
  const auto result = qdent::run_experiment(cfg, o.out, qdent::default_thread_count());
  std::cout << result.summary.dump(2) << '\n';
  return kOk;
}

int run_bookkeeping(Options& o) {
  const qdent::ExperimentConfig cfg = load(o);
  cfg.validate();
  json report = {{"kind", "bookkeeping"},
                 {"provenance",
                  {{"config_hash", qdent::config_hash(cfg)},
                   {"seed", cfg.run.seed},
                   {"version", qdent::kVersion}}},
                 {"results", qdent::summarize_bookkeeping(cfg)}};
  std::filesystem::create_directories(o.out);
  const auto path = (std::filesystem::path(o.out) / "summary.json").string();
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw qdent::IoError("cannot open output file", path);
  f << report.dump(2) << '\n';
  std::cout << report.dump(2) << '\n';
  return kOk;
}

int run_analyze(Options& o) {
  qdent::ExperimentConfig cfg = load(o);
  apply_window(cfg, o);
  cfg.validate();
  const auto result = qdent::analyze_timetags(o.input, cfg.analysis, o.out);
  std::cout << result.summary.dump(2) << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entangled photon-pair source simulator and analysis toolkit"};
  app.require_subcommand(1);
  Options o;

  auto* simulate = app.add_subcommand("simulate", "run the experiment kind named in the config");
  add_common(simulate, o);
  simulate->add_option("--kind", o.kind, "override the experiment kind")
      ->check(CLI::IsMember({"rabi_sweep", "hbt", "tomography12", "hom", "calibrate", "design"}));

  auto* analyze = app.add_subcommand("analyze", "histogram and estimators for a time-tag file");
  add_common(analyze, o);
  analyze->add_option("--input", o.input, "time-tag file")->required();

  auto* hom = app.add_subcommand("hom", "Hong-Ou-Mandel cross/parallel run");
  add_common(hom, o);
  auto* calibrate = app.add_subcommand("calibrate", "side-to-center pulse-area sweep");
  add_common(calibrate, o);
  auto* design = app.add_subcommand("design", "CBG design-rule report");
  add_common(design, o);
  auto* bookkeeping = app.add_subcommand("bookkeeping", "closed-form efficiency chain");
  add_common(bookkeeping, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    if (simulate->parsed()) return run_kind(o, std::nullopt);
    if (analyze->parsed()) return run_analyze(o);
    if (hom->parsed()) return run_kind(o, qdent::ExperimentKind::Hom);
    if (calibrate->parsed()) return run_kind(o, qdent::ExperimentKind::Calibrate);
    if (design->parsed()) return run_kind(o, qdent::ExperimentKind::Design);
    if (bookkeeping->parsed()) return run_bookkeeping(o);
  } catch (const qdent::ConfigError& e) {
    json err = error_json("config_error", e.what());
    err["error"]["path"] = e.path();
    return fail(o, err, kConfig);
  } catch (const qdent::ParseError& e) {
    json err = error_json("parse_error", e.what());
    err["error"]["offset"] = e.offset();
    return fail(o, err, kParse);
  } catch (const qdent::IoError& e) {
    json err = error_json("io_error", e.what());
    err["error"]["path"] = e.path();
    return fail(o, err, kIo);
  } catch (const qdent::ValidationError& e) {
    return fail(o, error_json("validation_error", e.what()), kConfig);
  } catch (const qdent::EstimatorError& e) {
    return fail(o, error_json("estimator_error", e.what()), kFailure);
  } catch (const qdent::NoSolutionError& e) {
    return fail(o, error_json("no_solution", e.what()), kFailure);
  } catch (const std::exception& e) {
    return fail(o, error_json("error", e.what()), kFailure);
  }
  return kUsage;
}
