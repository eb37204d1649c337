#include "qdent/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>

#include "qdent/error.hpp"
#include "qdent/hom.hpp"
#include "qdent/timetag_io.hpp"
#include "qdent/units.hpp"

namespace qdent {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

class Artifacts {
 public:
  explicit Artifacts(const std::string& dir) : dir_(dir) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec || !fs::is_directory(dir_)) throw IoError("cannot create output directory", dir);
  }

  std::string path(const std::string& name) const { return (fs::path(dir_) / name).string(); }

  std::ofstream open(const std::string& name) {
    const std::string p = path(name);
    std::ofstream out(p, std::ios::trunc);
    if (!out) throw IoError("cannot open output file", p);
    files.push_back(p);
    return out;
  }

  void close(std::ofstream& out, const std::string& name) {
    out.flush();
    if (!out) throw IoError("write failed", path(name));
  }

  void timetags(const std::string& name, const std::vector<DetectionRecord>& records,
                double rep_period) {
    TimeTagHeader h;
    h.rep_period_ps = static_cast<std::uint64_t>(std::llround(rep_period));
    h.channel_count = 2;
    write_timetags(path(name), h, records);
    files.push_back(path(name));
  }

  void histogram(const std::string& name, const CorrelationHistogram& hist) {
    auto out = open(name);
    out << "delay_ps,counts\n";
    for (std::size_t i = 0; i < hist.counts.size(); ++i) {
      out << fmt(hist.delay(i)) << ',' << hist.counts[i] << '\n';
    }
    close(out, name);
  }

  void summary(json& s) {
    auto out = open("summary.json");
    out << s.dump(2) << '\n';
    close(out, "summary.json");
  }

  std::vector<std::string> files;

 private:
  std::string dir_;
};

CorrelationHistogram cross_histogram(const std::vector<DetectionRecord>& records,
                                     const AnalysisParams& a, double rep_period) {
  const auto xx = channel_timestamps(records, 0);
  const auto x = channel_timestamps(records, 1);
  return build_histogram(xx, x, a.bin_width, a.max_delay, rep_period);
}

json provenance(const ExperimentConfig& cfg) {
  return {{"config_hash", config_hash(cfg)}, {"seed", cfg.run.seed}, {"version", kVersion}};
}

json blinking_json(const BlinkingFit& b) {
  return {{"on_fraction", b.on_fraction},
          {"t_corr_ns", b.t_corr},
          {"amplitude", b.amplitude},
          {"chi2_per_dof", b.chi2_per_dof}};
}

DetectionRun detect(const ExperimentConfig& cfg, const SourceParams& src, Routing routing,
                    std::uint64_t seed, unsigned threads,
                    std::optional<AnalyzerSetting> analyzer = std::nullopt) {
  SimConfig sim = cfg.sim_config();
  sim.source = src;
  sim.seed = seed;
  DetectionConfig det = cfg.detection_config();
  det.routing = routing;
  det.analyzer = analyzer;
  return simulate_detections(sim, det, threads);
}

std::uint64_t zero_peak_counts(const DetectionRun& run, double window) {
  const auto xx = channel_timestamps(run.records, 0);
  const auto x = channel_timestamps(run.records, 1);
  std::uint64_t n = 0;
  for_each_delay(xx, x, static_cast<std::int64_t>(std::floor(window / 2)),
                 [&](std::int64_t) { ++n; });
  return n;
}

std::uint64_t channel_count(const DetectionRun& run, std::uint8_t ch) {
  std::uint64_t n = 0;
  for (const auto& r : run.records) n += r.channel == ch;
  return n;
}

json run_hbt(const ExperimentConfig& cfg, Artifacts& art, unsigned threads) {
  json out;
  const DetectionRun cross = detect(cfg, cfg.source, Routing::Cross, sub_seed(cfg.run.seed, 0), threads);
  art.timetags("cross.qtt", cross.records, cross.rep_period);
  art.histogram("cross_histogram.csv", cross_histogram(cross.records, cfg.analysis, cross.rep_period));
  const CrossRunSummary cs = summarize_cross_run(cross, cfg.analysis);
  out["cross"] = {{"rate_xx", cs.rate_xx},
                  {"rate_x", cs.rate_x},
                  {"rate_coincidence", cs.rate_cc},
                  {"klyshko_xx", cs.rate_xx > 0 ? cs.rate_cc / cs.rate_xx : 0.0},
                  {"klyshko_x", cs.rate_x > 0 ? cs.rate_cc / cs.rate_x : 0.0},
                  {"side_to_center", estimate_json(cs.p_side_to_center)},
                  {"side_to_center_blinking_corrected", cs.p_blinking_corrected},
                  {"blinking", blinking_json(cs.blinking)},
                  {"tau_xx_ps", estimate_json(cs.tau_xx)},
                  {"tau_x_ps", estimate_json(cs.tau_x)},
                  {"pair_rate", cs.p_blinking_corrected * cs.blinking.on_fraction}};
  if (!cs.warnings.empty()) out["cross"]["warnings"] = cs.warnings;

  const std::pair<Routing, const char*> hbt[] = {{Routing::HbtXX, "hbt_xx"}, {Routing::HbtX, "hbt_x"}};
  std::uint64_t index = 1;
  for (const auto& [routing, name] : hbt) {
    const DetectionRun run = detect(cfg, cfg.source, routing, sub_seed(cfg.run.seed, index++), threads);
    art.timetags(std::string(name) + ".qtt", run.records, run.rep_period);
    const auto hist = cross_histogram(run.records, cfg.analysis, run.rep_period);
    art.histogram(std::string(name) + "_histogram.csv", hist);
    const PeakAreas peaks = integrate_peaks(hist, cfg.analysis.peak_window);
    out[name] = {{"g2_zero", estimate_json(g2_zero(peaks, cfg.analysis.g2_min_side_delay))},
                 {"center_counts", peaks.center}};
  }
  out["predicted"] = summarize_bookkeeping(cfg);
  return out;
}

json run_tomography(const ExperimentConfig& cfg, Artifacts& art, unsigned threads) {
  std::vector<TomographyRecord> records;
  json per_setting = json::object();
  auto csv = art.open("tomography_histograms.csv");
  csv << "setting,delay_ps,counts\n";
  std::uint64_t index = 0;
  for (const AnalyzerSetting& s : tomography_settings()) {
    const DetectionRun run =
        detect(cfg, cfg.source, Routing::Cross, sub_seed(cfg.run.seed, index++), threads, s);
    art.timetags("tomography_" + s.label() + ".qtt", run.records, run.rep_period);
    const auto hist = cross_histogram(run.records, cfg.analysis, run.rep_period);
    for (std::size_t i = 0; i < hist.counts.size(); ++i) {
      csv << s.label() << ',' << fmt(hist.delay(i)) << ',' << hist.counts[i] << '\n';
    }
    const PeakAreas peaks = integrate_peaks(hist, cfg.analysis.peak_window);
    records.push_back(make_tomography_record(s, peaks, cfg.analysis.g2_min_side_delay));
    per_setting[s.label()] = {{"zero_peak_counts", records.back().zero_peak_counts},
                              {"normalization", records.back().normalization},
                              {"g2", estimate_json(records.back().g2())}};
  }
  art.close(csv, "tomography_histograms.csv");

  const TomographyResult r = analyze_tomography(records);
  const double gamma_x = 1.0 / cfg.source.lifetimes().tau_x;
  const Visibilities model = predict_visibilities(rho_time_integrated(cfg.source.qdot, gamma_x));
  return {{"settings", per_setting},
          {"v_linear", estimate_json(r.v_linear)},
          {"v_diagonal", estimate_json(r.v_diagonal)},
          {"v_circular", estimate_json(r.v_circular)},
          {"fidelity", estimate_json(r.fidelity)},
          {"single_cascade_model",
           {{"v_linear", model.linear},
            {"v_diagonal", model.diagonal},
            {"v_circular", model.circular},
            {"fidelity", fidelity_from_visibilities(model.linear, model.diagonal, model.circular)}}}};
}

json run_rabi(const ExperimentConfig& cfg, Artifacts& art, unsigned threads) {
  auto csv = art.open("rabi.csv");
  csv << "power_ratio,power_nw,sqrt_power,pulse_area_pi,xx_counts,x_counts,coincidences,predicted_prep\n";
  json points = json::array();
  double best = -1;
  double best_area = 0;
  std::uint64_t index = 0;
  for (double ratio : cfg.rabi.power_ratios) {
    SourceParams src = cfg.source;
    src.excitation.power = ratio * src.excitation.p_pi_power;
    const DetectionRun run = detect(cfg, src, Routing::Cross, sub_seed(cfg.run.seed, index++), threads);
    const auto n_xx = channel_count(run, 0);
    const auto n_x = channel_count(run, 1);
    const auto cc = zero_peak_counts(run, cfg.analysis.peak_window);
    const double area = rabi_pulse_area(src.excitation) / units::kPi;
    const double prep = rabi_preparation_probability(src.excitation);
    csv << fmt(ratio) << ',' << fmt(src.excitation.power) << ',' << fmt(std::sqrt(src.excitation.power))
        << ',' << fmt(area) << ',' << n_xx << ',' << n_x << ',' << cc << ',' << fmt(prep) << '\n';
    points.push_back({{"power_ratio", ratio}, {"pulse_area_pi", area}, {"xx_counts", n_xx}});
    if (static_cast<double>(n_xx) > best) {
      best = static_cast<double>(n_xx);
      best_area = area;
    }
  }
  art.close(csv, "rabi.csv");
  return {{"points", points}, {"max_counts_pulse_area_pi", best_area}, {"max_xx_counts", best}};
}

json run_calibrate(const ExperimentConfig& cfg, Artifacts& art, unsigned threads) {
  auto csv = art.open("calibrate.csv");
  csv << "pulse_area_pi,power_nw,xx_counts,normalized_counts,p,p_uncertainty,p_blinking_corrected\n";
  struct Point {
    double area, power, counts;
    CrossRunSummary s;
  };
  std::vector<Point> pts;
  std::uint64_t index = 0;
  for (double area : cfg.calibrate.pulse_areas) {
    SourceParams src = cfg.source;
    src.excitation.power = area * area * src.excitation.p_pi_power;
    const DetectionRun run = detect(cfg, src, Routing::Cross, sub_seed(cfg.run.seed, index++), threads);
    pts.push_back({area, src.excitation.power, static_cast<double>(channel_count(run, 0)),
                   summarize_cross_run(run, cfg.analysis)});
  }
  double max_counts = 0;
  for (const auto& p : pts) max_counts = std::max(max_counts, p.counts);
  if (!(max_counts > 0)) throw EstimatorError("calibrate: no XX counts recorded");

  // Least-squares line p = a + b·normalized_counts.
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  json points = json::array();
  for (const auto& p : pts) {
    const double x = p.counts / max_counts;
    const double y = p.s.p_side_to_center.value;
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
    csv << fmt(p.area) << ',' << fmt(p.power) << ',' << static_cast<std::uint64_t>(p.counts) << ','
        << fmt(x) << ',' << fmt(y) << ',' << fmt(p.s.p_side_to_center.uncertainty) << ','
        << fmt(p.s.p_blinking_corrected) << '\n';
    points.push_back({{"pulse_area_pi", p.area},
                      {"normalized_counts", x},
                      {"p", estimate_json(p.s.p_side_to_center)},
                      {"p_blinking_corrected", p.s.p_blinking_corrected}});
    if (!p.s.warnings.empty()) points.back()["warnings"] = p.s.warnings;
  }
  art.close(csv, "calibrate.csv");
  const double n = static_cast<double>(pts.size());
  const double cov = sxy - sx * sy / n;
  const double vx = sxx - sx * sx / n;
  const double vy = syy - sy * sy / n;
  const double r2 = (vx > 0 && vy > 0) ? cov * cov / (vx * vy) : 0.0;
  const double slope = vx > 0 ? cov / vx : 0.0;

  // The largest pulse area is the reference point (π in the default sweep).
  const auto ref = std::max_element(pts.begin(), pts.end(),
                                    [](const Point& a, const Point& b) { return a.area < b.area; });
  return {{"points", points},
          {"linearity_r2", r2},
          {"slope", slope},
          {"intercept", (sy - slope * sx) / n},
          {"reference_pulse_area_pi", ref->area},
          {"p", estimate_json(ref->s.p_side_to_center)},
          {"p_blinking_corrected", ref->s.p_blinking_corrected},
          {"pair_rate", ref->s.p_blinking_corrected * ref->s.blinking.on_fraction}};
}

json run_hom(const ExperimentConfig& cfg, Artifacts& art, unsigned threads) {
  HomConfig hom = cfg.hom.config;
  const std::uint64_t seed = sub_seed(cfg.run.seed, 0);
  hom.polarization = HomPolarization::Cross;
  const HomRun cross = simulate_hom(cfg.source, hom, cfg.run.n_pulses, seed, cfg.detector, threads);
  hom.polarization = HomPolarization::Parallel;
  const HomRun par = simulate_hom(cfg.source, hom, cfg.run.n_pulses, seed, cfg.detector, threads);
  art.timetags("hom_cross.qtt", cross.records, cross.rep_period);
  art.timetags("hom_parallel.qtt", par.records, par.rep_period);

  {
    const double bin = 50.0;
    const auto hc = hom_histogram(cross, bin);
    const auto hp = hom_histogram(par, bin);
    auto csv = art.open("hom_histogram.csv");
    csv << "delay_ps,counts,polarization\n";
    for (std::size_t i = 0; i < hc.counts.size(); ++i) csv << fmt(hc.delay(i)) << ',' << hc.counts[i] << ",cross\n";
    for (std::size_t i = 0; i < hp.counts.size(); ++i) csv << fmt(hp.delay(i)) << ',' << hp.counts[i] << ",parallel\n";
    art.close(csv, "hom_histogram.csv");
  }

  const double delay = hom.pulse_pair_delay;
  auto csv = art.open("hom_window_sweep.csv");
  csv << "window_ps,visibility,uncertainty,cross_counts,parallel_counts\n";
  json sweep = json::array();
  for (double w : cfg.hom.window_sweep) {
    const double we = std::min(w, delay / 2);
    const auto c = hom_center_counts(cross.records, we);
    const auto p = hom_center_counts(par.records, we);
    if (c == 0) continue;
    const Estimate v = hom_visibility(static_cast<double>(c), static_cast<double>(p));
    csv << fmt(w) << ',' << fmt(v.value) << ',' << fmt(v.uncertainty) << ',' << c << ',' << p << '\n';
    sweep.push_back({{"window_ps", w}, {"visibility", estimate_json(v)}});
  }
  art.close(csv, "hom_window_sweep.csv");

  const Estimate raw = temporal_filter_visibility(cross.records, par.records, delay / 2, delay);
  const Estimate filtered =
      temporal_filter_visibility(cross.records, par.records, hom.filter_window, delay);
  const double g2 = hom.species == Species::XX ? cfg.hom.g2_xx : cfg.hom.g2_x;
  const CorrectedVisibility corr =
      correct_visibility(raw.value, g2, hom.bs_reflectivity, cfg.hom.correction_visibility);
  return {{"species", species_name(hom.species)},
          {"n_pulse_pairs", cfg.run.n_pulses},
          {"center_cross", hom_center_counts(cross.records, delay / 2)},
          {"center_parallel", hom_center_counts(par.records, delay / 2)},
          {"raw_visibility", estimate_json(raw)},
          {"corrected_visibility", corr.value},
          {"correction_clamped", corr.clamped},
          {"filter_window_ps", hom.filter_window},
          {"filtered_visibility", estimate_json(filtered)},
          {"window_sweep", sweep}};
}

json run_design(const ExperimentConfig& cfg) {
  const auto& d = cfg.design;
  const ModeWavelength mode = mode_wavelength(d.geometry, d.rules);
  const DetuningBudget budget = detuning_budget(d.rules, cfg.source.cavity);
  const double target = cfg.source.cavity.lambda_c;
  return {{"mode_wavelength_nm", mode.lambda},
          {"extrapolated", mode.extrapolated},
          {"target_lambda_nm", target},
          {"radius_for_target_nm", solve_radius(target, d.geometry.grating_period, d.rules)},
          {"sigma_lambda_nm", budget.sigma_lambda},
          {"cavity_fwhm_nm", budget.cavity_fwhm},
          {"sigma_to_fwhm", budget.ratio},
          {"purcell_penalty", budget.purcell_penalty}};
}

}  // namespace

std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t state = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  return splitmix64(state);
}

json estimate_json(const Estimate& e) { return {{"value", e.value}, {"uncertainty", e.uncertainty}}; }

CrossRunSummary summarize_cross_run(const DetectionRun& run, const AnalysisParams& analysis) {
  CrossRunSummary s;
  s.duration = run.duration / units::kPsPerSecond;
  const auto xx = channel_timestamps(run.records, 0);
  const auto x = channel_timestamps(run.records, 1);
  s.rate_xx = static_cast<double>(xx.size()) / s.duration;
  s.rate_x = static_cast<double>(x.size()) / s.duration;

  const auto hist = build_histogram(xx, x, analysis.bin_width, analysis.max_delay, run.rep_period);
  s.peaks = integrate_peaks(hist, analysis.peak_window);
  s.rate_cc = s.peaks.center / s.duration;
  s.p_side_to_center = side_to_center_calibration(s.peaks);
  s.p_blinking_corrected = s.p_side_to_center.value;
  try {
    s.blinking = blinking_envelope(s.peaks);
    // The nearest side peaks still carry the blinking bunching at one period.
    const double bunching =
        s.blinking.on_fraction + (1.0 - s.blinking.on_fraction) *
                                     std::exp(-run.rep_period / (s.blinking.t_corr * units::kPsPerNs));
    s.p_blinking_corrected = s.p_side_to_center.value / bunching;
  } catch (const EstimatorError& e) {
    s.blinking = {};
    s.warnings.push_back(e.what());
  }

  std::vector<double> phase;
  phase.reserve(xx.size());
  for (const std::uint64_t t : xx) {
    double ph = std::fmod(static_cast<double>(t), run.rep_period);
    if (ph > run.rep_period / 2) ph -= run.rep_period;
    phase.push_back(ph);
  }
  try {
    s.tau_xx = fit_decay_time(phase, kLifetimeFitStartXX, run.rep_period / 2);
  } catch (const EstimatorError& e) {
    s.warnings.push_back(e.what());
  }

  std::vector<double> delays;
  const double half = analysis.peak_window / 2;
  for_each_delay(xx, x, static_cast<std::int64_t>(std::floor(half)),
                 [&](std::int64_t d) { delays.push_back(static_cast<double>(d)); });
  try {
    s.tau_x = fit_decay_time(delays, kLifetimeFitStartX, half);
  } catch (const EstimatorError& e) {
    s.warnings.push_back(e.what());
  }
  return s;
}

json summarize_bookkeeping(const ExperimentConfig& cfg) {
  const SourceParams& src = cfg.source;
  const SetupEfficiencies& eff = cfg.efficiencies;
  const double prep = rabi_preparation_probability(src.excitation);
  const double pair_rate = prep * src.blinking.on_fraction;
  const PredictedRates rates = predict_rates(eff, pair_rate, src.excitation.rep_rate);
  return {{"prep_radiative", prep},
          {"on_fraction", src.blinking.on_fraction},
          {"pair_rate", pair_rate},
          {"eta_xx", eff.eta_xx()},
          {"eta_x", eff.eta_x()},
          {"rate_xx", rates.r_xx},
          {"rate_x", rates.r_x},
          {"rate_coincidence", rates.r_cc},
          // Labelled by the singles arm in the denominator.
          {"klyshko_xx", rates.r_xx > 0 ? klyshko(rates.r_cc, rates.r_xx) : 0.0},
          {"klyshko_x", rates.r_x > 0 ? klyshko(rates.r_cc, rates.r_x) : 0.0},
          {"pair_extraction", pair_extraction_efficiency(eff.eta_extr_xx, eff.eta_extr_x)}};
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::string& out_dir,
                                unsigned threads) {
  cfg.validate();
  Artifacts art(out_dir);
  json results;
  switch (cfg.kind) {
    case ExperimentKind::RabiSweep: results = run_rabi(cfg, art, threads); break;
    case ExperimentKind::Hbt: results = run_hbt(cfg, art, threads); break;
    case ExperimentKind::Tomography12: results = run_tomography(cfg, art, threads); break;
    case ExperimentKind::Hom: results = run_hom(cfg, art, threads); break;
    case ExperimentKind::Calibrate: results = run_calibrate(cfg, art, threads); break;
    case ExperimentKind::Design: results = run_design(cfg); break;
  }
  ExperimentResult out;
  out.summary = {{"kind", kind_name(cfg.kind)}, {"provenance", provenance(cfg)}, {"results", results}};
  art.summary(out.summary);
  out.files = art.files;
  return out;
}

ExperimentResult analyze_timetags(const std::string& path, const AnalysisParams& analysis,
                                  const std::string& out_dir) {
  const TimeTagFile file = read_timetags(path);
  if (file.header.rep_period_ps == 0) throw EstimatorError("time-tag file has no repetition period");
  const double rep = static_cast<double>(file.header.rep_period_ps);
  Artifacts art(out_dir);
  const auto hist = cross_histogram(file.records, analysis, rep);
  art.histogram("histogram.csv", hist);
  const PeakAreas peaks = integrate_peaks(hist, analysis.peak_window);

  json results = {{"input", path},
                  {"records", file.records.size()},
                  {"center_counts", peaks.center},
                  {"side_peaks", peaks.sides.size()}};
  auto attempt = [&](const char* key, auto&& fn) {
    try {
      results[key] = fn();
    } catch (const EstimatorError& e) {
      results[key] = {{"error", e.what()}};
    }
  };
  attempt("g2_zero", [&] { return estimate_json(g2_zero(peaks, analysis.g2_min_side_delay)); });
  attempt("side_to_center", [&] { return estimate_json(side_to_center_calibration(peaks)); });
  attempt("blinking", [&] { return blinking_json(blinking_envelope(peaks)); });

  ExperimentResult out;
  out.summary = {{"kind", "analyze"},
                 {"provenance", {{"version", kVersion}, {"rep_period_ps", file.header.rep_period_ps}}},
                 {"results", results}};
  art.summary(out.summary);
  out.files = art.files;
  return out;
}

}  // namespace qdent
