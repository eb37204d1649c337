#include "qdent/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "qdent/error.hpp"
#include "qdent/presets.hpp"

namespace qdent {

using nlohmann::json;

namespace {

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

Species species_from_name(const std::string& s, const std::string& path) {
  if (s == "XX") return Species::XX;
  if (s == "X") return Species::X;
  throw ConfigError("unknown species '" + s + "' (expected XX or X)", path);
}

HomPolarization polarization_from_name(const std::string& s, const std::string& path) {
  if (s == "parallel") return HomPolarization::Parallel;
  if (s == "cross") return HomPolarization::Cross;
  throw ConfigError("unknown polarization '" + s + "' (expected parallel or cross)", path);
}

class Reader {
 public:
  Reader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError("expected an object", path_);
  }

  void skip(const char* name) { used_.insert(name); }

  void field(const char* name, double& x) {
    if (const json* v = find(name)) {
      if (!v->is_number()) throw ConfigError("expected a number", join(path_, name));
      x = v->get<double>();
    }
  }
  void field(const char* name, std::uint64_t& x) {
    if (const json* v = find(name)) {
      if (v->is_number_unsigned()) {
        x = v->get<std::uint64_t>();
      } else if (v->is_number_integer() && v->get<std::int64_t>() >= 0) {
        x = static_cast<std::uint64_t>(v->get<std::int64_t>());
      } else {
        throw ConfigError("expected a non-negative integer", join(path_, name));
      }
    }
  }
  void field(const char* name, int& x) {
    if (const json* v = find(name)) {
      if (!v->is_number_integer()) throw ConfigError("expected an integer", join(path_, name));
      x = v->get<int>();
    }
  }
  void field(const char* name, std::vector<double>& x) {
    if (const json* v = find(name)) {
      if (!v->is_array()) throw ConfigError("expected an array of numbers", join(path_, name));
      std::vector<double> out;
      for (const auto& e : *v) {
        if (!e.is_number()) throw ConfigError("expected an array of numbers", join(path_, name));
        out.push_back(e.get<double>());
      }
      x = std::move(out);
    }
  }
  void field(const char* name, Species& x) {
    if (const json* v = find(name)) x = species_from_name(string_of(*v, name), join(path_, name));
  }
  void field(const char* name, HomPolarization& x) {
    if (const json* v = find(name)) x = polarization_from_name(string_of(*v, name), join(path_, name));
  }
  void field(const char* name, ExperimentKind& x) {
    if (const json* v = find(name)) {
      try {
        x = kind_from_name(string_of(*v, name));
      } catch (const ValidationError& e) {
        throw ConfigError(e.what(), join(path_, name));
      }
    }
  }

  template <typename T>
  void object(const char* name, T& x);

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (!used_.count(it.key())) throw ConfigError("unknown key", join(path_, it.key()));
    }
  }

 private:
  const json* find(const char* name) {
    used_.insert(name);
    auto it = obj_.find(name);
    return it == obj_.end() ? nullptr : &*it;
  }
  std::string string_of(const json& v, const char* name) const {
    if (!v.is_string()) throw ConfigError("expected a string", join(path_, name));
    return v.get<std::string>();
  }

  const json& obj_;
  std::string path_;
  std::set<std::string> used_;
};

class Writer {
 public:
  json out = json::object();

  void field(const char* name, double x) { out[name] = x; }
  void field(const char* name, std::uint64_t x) { out[name] = x; }
  void field(const char* name, int x) { out[name] = x; }
  void field(const char* name, const std::vector<double>& x) { out[name] = x; }
  void field(const char* name, Species x) { out[name] = species_name(x); }
  void field(const char* name, HomPolarization x) { out[name] = polarization_name(x); }
  void field(const char* name, ExperimentKind x) { out[name] = kind_name(x); }

  template <typename T>
  void object(const char* name, T& x);
};

// One field list per struct, shared by parsing and serialization.
template <typename V>
void visit(V& v, NoiseCorrelations& n) {
  v.field("zz", n.zz);
  v.field("xx", n.xx);
  v.field("yy", n.yy);
}

template <typename V>
void visit(V& v, QDotParams& q) {
  v.field("fss", q.fss);
  v.field("tau_xx_bulk", q.tau_xx_bulk);
  v.field("tau_x_bulk", q.tau_x_bulk);
  v.field("lambda_xx", q.lambda_xx);
  v.field("lambda_x", q.lambda_x);
  v.field("gamma_cross", q.gamma_cross);
  v.field("eps_depol", q.eps_depol);
  v.object("noise", q.noise);
}

template <typename V>
void visit(V& v, CavityParams& c) {
  v.field("lambda_c", c.lambda_c);
  v.field("q_factor", c.q_factor);
  v.field("f_max", c.f_max);
  v.field("eta_extr_max", c.eta_extr_max);
}

template <typename V>
void visit(V& v, ExcitationParams& e) {
  v.field("rep_rate", e.rep_rate);
  v.field("p_pi_power", e.p_pi_power);
  v.field("power", e.power);
  v.field("p_reexcite", e.p_reexcite);
  v.field("prep_efficiency", e.prep_efficiency);
}

template <typename V>
void visit(V& v, BlinkingParams& b) {
  v.field("on_fraction", b.on_fraction);
  v.field("t_corr", b.t_corr);
}

template <typename V>
void visit(V& v, SourceParams& s) {
  v.object("qdot", s.qdot);
  v.object("cavity", s.cavity);
  v.object("excitation", s.excitation);
  v.object("blinking", s.blinking);
}

template <typename V>
void visit(V& v, SetupEfficiencies& e) {
  v.field("eta_det", e.eta_det);
  v.field("eta_path", e.eta_path);
  v.field("eta_fiber", e.eta_fiber);
  v.field("eta_extr_xx", e.eta_extr_xx);
  v.field("eta_extr_x", e.eta_extr_x);
}

template <typename V>
void visit(V& v, DetectorParams& d) {
  v.field("jitter_fwhm", d.jitter_fwhm);
  v.field("dark_rate", d.dark_rate);
  v.field("dead_time", d.dead_time);
}

struct DetectionView {
  SetupEfficiencies& eff;
  DetectorParams& det;
};

template <typename V>
void visit(V& v, DetectionView& d) {
  v.object("efficiencies", d.eff);
  v.object("detector", d.det);
}

template <typename V>
void visit(V& v, RunParams& r) {
  v.field("n_pulses", r.n_pulses);
  v.field("seed", r.seed);
  v.field("block_size", r.block_size);
}

template <typename V>
void visit(V& v, AnalysisParams& a) {
  v.field("bin_width", a.bin_width);
  v.field("peak_window", a.peak_window);
  v.field("max_delay", a.max_delay);
  v.field("g2_min_side_delay", a.g2_min_side_delay);
}

template <typename V>
void visit(V& v, RabiParams& r) {
  v.field("power_ratios", r.power_ratios);
}

template <typename V>
void visit(V& v, CalibrateParams& c) {
  v.field("pulse_areas", c.pulse_areas);
}

template <typename V>
void visit(V& v, HomAnalysisParams& h) {
  v.field("pulse_pair_delay", h.config.pulse_pair_delay);
  v.field("species", h.config.species);
  v.field("polarization", h.config.polarization);
  v.field("bs_reflectivity", h.config.bs_reflectivity);
  v.field("classical_visibility", h.config.classical_visibility);
  v.field("dephase_xx", h.config.dephase_xx);
  v.field("dephase_x", h.config.dephase_x);
  v.field("detection_efficiency", h.config.detection_efficiency);
  v.field("filter_window", h.config.filter_window);
  v.field("g2_xx", h.g2_xx);
  v.field("g2_x", h.g2_x);
  v.field("correction_visibility", h.correction_visibility);
  v.field("window_sweep", h.window_sweep);
}

template <typename V>
void visit(V& v, CbgGeometry& g) {
  v.field("disk_radius", g.disk_radius);
  v.field("grating_period", g.grating_period);
  v.field("trench_width", g.trench_width);
  v.field("n_rings", g.n_rings);
}

template <typename V>
void visit(V& v, DesignRules& r) {
  v.field("slope_radius", r.slope_radius);
  v.field("slope_period", r.slope_period);
  v.field("ref_radius", r.ref_radius);
  v.field("ref_period", r.ref_period);
  v.field("ref_lambda", r.ref_lambda);
  v.field("fab_sigma_radius", r.fab_sigma_radius);
  v.field("fab_sigma_period", r.fab_sigma_period);
  v.field("range_min", r.range_min);
  v.field("range_max", r.range_max);
}

template <typename V>
void visit(V& v, DesignParams& d) {
  v.object("geometry", d.geometry);
  v.object("rules", d.rules);
}

template <typename V>
void visit(V& v, ExperimentConfig& c) {
  v.field("kind", c.kind);
  v.object("source", c.source);
  DetectionView det{c.efficiencies, c.detector};
  v.object("detection", det);
  v.object("run", c.run);
  v.object("analysis", c.analysis);
  v.object("rabi", c.rabi);
  v.object("calibrate", c.calibrate);
  v.object("hom", c.hom);
  v.object("design", c.design);
}

template <typename T>
void Reader::object(const char* name, T& x) {
  if (const json* v = find(name)) {
    Reader sub(*v, join(path_, name));
    visit(sub, x);
    sub.finish();
  }
}

template <typename T>
void Writer::object(const char* name, T& x) {
  Writer sub;
  visit(sub, x);
  out[name] = std::move(sub.out);
}

template <typename Fn>
void check(const std::string& path, Fn&& fn) {
  try {
    fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const ValidationError& e) {
    throw ConfigError(e.what(), path);
  }
}

void require(bool ok, const std::string& what, const std::string& path) {
  if (!ok) throw ConfigError(what, path);
}

}  // namespace

const char* kind_name(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::RabiSweep: return "rabi_sweep";
    case ExperimentKind::Hbt: return "hbt";
    case ExperimentKind::Tomography12: return "tomography12";
    case ExperimentKind::Hom: return "hom";
    case ExperimentKind::Calibrate: return "calibrate";
    case ExperimentKind::Design: return "design";
  }
  return "unknown";
}

ExperimentKind kind_from_name(const std::string& name) {
  for (ExperimentKind k : {ExperimentKind::RabiSweep, ExperimentKind::Hbt,
                           ExperimentKind::Tomography12, ExperimentKind::Hom,
                           ExperimentKind::Calibrate, ExperimentKind::Design}) {
    if (name == kind_name(k)) return k;
  }
  throw ValidationError("unknown experiment kind '" + name + "'");
}

void ExperimentConfig::validate() const {
  check("source", [&] { source.validate(); });
  check("detection.efficiencies", [&] { efficiencies.validate(); });
  check("detection.detector", [&] { detector.validate(); });
  require(run.n_pulses > 0, "must be > 0", "run.n_pulses");
  require(run.block_size > 0, "must be > 0", "run.block_size");

  const double rep = source.excitation.rep_period();
  require(analysis.bin_width > 0, "must be > 0", "analysis.bin_width");
  require(analysis.peak_window > 0 && analysis.peak_window <= rep / 2,
          "must be in (0, rep_period/2]", "analysis.peak_window");
  require(analysis.max_delay >= 2 * rep, "must cover at least two repetition periods",
          "analysis.max_delay");
  require(analysis.g2_min_side_delay >= 0 && analysis.g2_min_side_delay < analysis.max_delay - rep,
          "must be >= 0 and leave side peaks inside max_delay", "analysis.g2_min_side_delay");

  require(!rabi.power_ratios.empty(), "must not be empty", "rabi.power_ratios");
  for (double r : rabi.power_ratios) require(r >= 0, "entries must be >= 0", "rabi.power_ratios");
  require(!calibrate.pulse_areas.empty(), "must not be empty", "calibrate.pulse_areas");
  for (double a : calibrate.pulse_areas) {
    require(a > 0, "entries must be > 0", "calibrate.pulse_areas");
  }

  check("hom", [&] { hom.config.validate(); });
  require(hom.config.pulse_pair_delay < rep / 2, "must be below half the repetition period",
          "hom.pulse_pair_delay");
  require(hom.g2_xx >= 0 && hom.g2_x >= 0, "must be >= 0", "hom.g2_xx");
  require(hom.correction_visibility > 0 && hom.correction_visibility <= 1, "must be in (0,1]",
          "hom.correction_visibility");
  for (double w : hom.window_sweep) require(w > 0, "entries must be > 0", "hom.window_sweep");

  check("design.geometry", [&] { design.geometry.validate(); });
  check("design.rules", [&] { design.rules.validate(); });
}

SimConfig ExperimentConfig::sim_config() const {
  SimConfig s;
  s.source = source;
  s.n_pulses = run.n_pulses;
  s.seed = run.seed;
  s.block_size = run.block_size;
  return s;
}

DetectionConfig ExperimentConfig::detection_config() const {
  DetectionConfig d;
  d.efficiencies = efficiencies;
  d.detector = detector;
  return d;
}

ExperimentConfig ExperimentConfig::device() {
  ExperimentConfig c;
  const DeviceTargets targets;
  c.source = device_source(targets);
  c.hom.config = device_hom(c.source, targets);
  c.hom.g2_xx = targets.g2_xx;
  c.hom.g2_x = targets.g2_x;
  c.hom.correction_visibility = device_correction_visibility(targets);
  return c;
}

ExperimentConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object", "");
  ExperimentConfig cfg;
  if (auto it = doc.find("preset"); it != doc.end()) {
    if (!it->is_string()) throw ConfigError("expected a string", "preset");
    const auto name = it->get<std::string>();
    if (name == "device") {
      cfg = ExperimentConfig::device();
    } else if (name != "default") {
      throw ConfigError("unknown preset '" + name + "' (expected default or device)", "preset");
    }
  }
  Reader r(doc, "");
  r.skip("preset");
  visit(r, cfg);
  r.finish();
  cfg.validate();
  return cfg;
}

ExperimentConfig parse_config_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what(), "");
  }
  return parse_config(doc);
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config", path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

json to_json(const ExperimentConfig& cfg) {
  ExperimentConfig copy = cfg;
  Writer w;
  visit(w, copy);
  return w.out;
}

std::string canonical_dump(const ExperimentConfig& cfg) { return to_json(cfg).dump(2); }

std::string config_hash(const ExperimentConfig& cfg) {
  const std::string s = to_json(cfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace qdent
