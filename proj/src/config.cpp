#include "nvsim/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

#include "nvsim/error.hpp"

namespace nvsim {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& what) { throw ConfigError(field + ": " + what); }

// Reads the members of one JSON object, remembering which keys were used so
// that leftovers can be reported as unknown.
class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) fail(path_.empty() ? "config" : path_, "expected an object");
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* find(const std::string& key) {
    used_.insert(key);
    const auto it = node_.find(key);
    return it == node_.end() ? nullptr : &*it;
  }

  void number(const std::string& key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) fail(field(key), "expected a number");
      out = v->get<double>();
      if (!std::isfinite(out)) fail(field(key), "must be finite");
    }
  }

  void optional_number(const std::string& key, std::optional<double>& out) {
    if (const json* v = find(key)) {
      if (v->is_null()) {
        out.reset();
        return;
      }
      double x = 0;
      number(key, x);
      out = x;
    }
  }

  template <typename Int>
  void integer(const std::string& key, Int& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer()) fail(field(key), "expected an integer");
      if (v->is_number_unsigned()) {
        const auto u = v->get<std::uint64_t>();
        if (u > static_cast<std::uint64_t>(std::numeric_limits<Int>::max())) fail(field(key), "out of range");
        out = static_cast<Int>(u);
      } else {
        const auto i = v->get<std::int64_t>();
        if constexpr (std::is_unsigned_v<Int>) {
          if (i < 0) fail(field(key), "must be non-negative");
        } else if (i < std::numeric_limits<Int>::min() || i > std::numeric_limits<Int>::max()) {
          fail(field(key), "out of range");
        }
        out = static_cast<Int>(i);
      }
    }
  }

  void boolean(const std::string& key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) fail(field(key), "expected true or false");
      out = v->get<bool>();
    }
  }

  void string(const std::string& key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) fail(field(key), "expected a string");
      out = v->get<std::string>();
    }
  }

  void finish() const {
    for (const auto& [key, value] : node_.items()) {
      if (!used_.count(key)) fail(field(key), "unknown key");
    }
  }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> used_;
};

SequenceKind parse_kind(const std::string& s, const std::string& field) {
  if (s == "fid") return SequenceKind::Fid;
  if (s == "hahn") return SequenceKind::Hahn;
  if (s == "pdd") return SequenceKind::Pdd;
  fail(field, "expected fid, hahn or pdd, got '" + s + "'");
}

BathMethod parse_method(const std::string& s, const std::string& field) {
  if (s == "cce") return BathMethod::Cce;
  if (s == "exact") return BathMethod::Exact;
  fail(field, "expected cce or exact, got '" + s + "'");
}

OutputFormat parse_format(const std::string& s, const std::string& field) {
  if (s == "csv") return OutputFormat::Csv;
  if (s == "json") return OutputFormat::Json;
  fail(field, "expected csv or json, got '" + s + "'");
}

void read_system(const json& node, SystemParams& p) {
  Section s(node, "system");
  s.number("zero_field_hz", p.zero_field_hz);
  s.number("gamma_e_hz_per_gauss", p.gamma_e_hz_per_gauss);
  s.number("gamma_c_hz_per_gauss", p.gamma_c_hz_per_gauss);
  s.number("b_gauss", p.b_gauss);
  s.number("t2n_star_s", p.t2n_star_s);
  if (const json* a = s.find("ancilla_hyperfine_hz")) {
    const std::string f = s.field("ancilla_hyperfine_hz");
    if (!a->is_array() || a->size() != 3) fail(f, "expected a 3x3 array");
    for (int r = 0; r < 3; ++r) {
      const json& row = (*a)[r];
      if (!row.is_array() || row.size() != 3) fail(f, "expected a 3x3 array");
      for (int c = 0; c < 3; ++c) {
        if (!row[c].is_number()) fail(f, "entries must be numbers");
        p.ancilla_hyperfine_hz[r][c] = row[c].get<double>();
      }
    }
  }
  if (const json* n = s.find("n14")) {
    if (n->is_null()) {
      p.n14.reset();
    } else {
      Section ns(*n, "system.n14");
      N14Coupling c;
      ns.number("a_parallel_hz", c.a_parallel_hz);
      ns.number("a_perp_hz", c.a_perp_hz);
      ns.finish();
      p.n14 = c;
    }
  }
  s.finish();
}

}  // namespace

PreparationSpec default_preparation() {
  // Grid point (i = 200, j = 235) of the default calibration grid.
  return {1.0, -std::numbers::pi / 2 + std::numbers::pi * 235.0 / 360.0};
}

void RunConfig::validate() const {
  try {
    system.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  auto require = [](bool ok, const std::string& field, const std::string& what) {
    if (!ok) fail(field, what);
  };
  require(bath.abundance >= 0.0 && bath.abundance < 1.0, "bath.abundance", "must lie in [0, 1)");
  require(bath.r_min_angstrom > 0.0, "bath.r_min_angstrom", "must be positive");
  require(bath.r_max_angstrom > bath.r_min_angstrom, "bath.r_max_angstrom", "must exceed bath.r_min_angstrom");
  require(bath.max_order >= 1 && bath.max_order <= kMaxClusterOrder, "bath.max_order",
          "must lie in [1, " + std::to_string(kMaxClusterOrder) + "]");
  require(bath.pair_cutoff_hz >= 0.0, "bath.pair_cutoff_hz", "must be non-negative");
  require(bath.ensemble >= 1, "bath.ensemble", "must be at least 1");
  if (sequence.kind == SequenceKind::Pdd) {
    require(sequence.n_pulses >= 1, "sequence.n_pulses", "must be at least 1 for pdd");
  } else {
    require(sequence.n_pulses >= 0, "sequence.n_pulses", "must be non-negative");
  }
  require(sequence.duration_s > 0.0, "sequence.duration_s", "must be positive");
  require(sequence.n_samples >= 2, "sequence.n_samples", "must be at least 2");
  require(preparation.polarization >= 0.0 && preparation.polarization <= 1.0, "preparation.polarization",
          "must lie in [0, 1]");
  require(tomography.shots >= 1, "tomography.shots", "must be at least 1");
  require(tomography.contrast > 0.0 && tomography.contrast <= 1.0, "tomography.contrast", "must lie in (0, 1]");
  require(tomography.n_resamples >= 100, "tomography.n_resamples", "must be at least 100");
  const double t0 = analysis.t0_s.value_or(0.0);
  const double tmax = analysis.tmax_s.value_or(sequence.duration_s);
  require(t0 >= 0.0 && t0 < sequence.duration_s, "analysis.t0_s", "must lie in [0, sequence.duration_s)");
  require(tmax > t0 && tmax <= sequence.duration_s, "analysis.tmax_s", "must lie in (t0, sequence.duration_s]");
  require(!output.path.empty(), "output.path", "must not be empty");
  require(threads >= 1, "threads", "must be at least 1");
}

RunConfig parse_config(const json& doc) {
  RunConfig c;
  Section root(doc, "");
  if (const json* n = root.find("system")) read_system(*n, c.system);
  if (const json* n = root.find("bath")) {
    Section s(*n, "bath");
    s.integer("seed", c.bath.seed);
    s.number("abundance", c.bath.abundance);
    s.number("r_min_angstrom", c.bath.r_min_angstrom);
    s.number("r_max_angstrom", c.bath.r_max_angstrom);
    s.integer("max_order", c.bath.max_order);
    s.number("pair_cutoff_hz", c.bath.pair_cutoff_hz);
    std::string method = to_string(c.bath.method);
    s.string("method", method);
    c.bath.method = parse_method(method, "bath.method");
    s.integer("ensemble", c.bath.ensemble);
    s.finish();
  }
  if (const json* n = root.find("sequence")) {
    Section s(*n, "sequence");
    std::string kind = to_string(c.sequence.kind);
    s.string("kind", kind);
    c.sequence.kind = parse_kind(kind, "sequence.kind");
    s.integer("n_pulses", c.sequence.n_pulses);
    s.number("duration_s", c.sequence.duration_s);
    s.integer("n_samples", c.sequence.n_samples);
    s.finish();
  }
  if (const json* n = root.find("preparation")) {
    Section s(*n, "preparation");
    s.number("polarization", c.preparation.polarization);
    s.number("pulse_angle_error_rad", c.preparation.pulse_angle_error_rad);
    s.finish();
  }
  if (const json* n = root.find("decay")) {
    Section s(*n, "decay");
    std::string profile = to_string(c.decay);
    s.string("profile", profile);
    try {
      c.decay = parse_decay_profile(profile);
    } catch (const InvalidArgument&) {
      fail("decay.profile", "expected gaussian, exponential or none, got '" + profile + "'");
    }
    s.finish();
  }
  if (const json* n = root.find("tomography")) {
    Section s(*n, "tomography");
    s.boolean("enabled", c.tomography.enabled);
    s.integer("shots", c.tomography.shots);
    s.number("contrast", c.tomography.contrast);
    s.integer("n_resamples", c.tomography.n_resamples);
    s.finish();
  }
  if (const json* n = root.find("analysis")) {
    Section s(*n, "analysis");
    s.optional_number("t0_s", c.analysis.t0_s);
    s.optional_number("tmax_s", c.analysis.tmax_s);
    s.finish();
  }
  if (const json* n = root.find("output")) {
    Section s(*n, "output");
    s.string("path", c.output.path);
    std::string format = to_string(c.output.format);
    s.string("format", format);
    c.output.format = parse_format(format, "output.format");
    s.finish();
  }
  root.integer("threads", c.threads);
  root.finish();
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config: " + std::string(e.what()));
  }
  return parse_config(doc);
}

json to_json(const RunConfig& c) {
  json a = json::array();
  for (const auto& row : c.system.ancilla_hyperfine_hz) a.push_back({row[0], row[1], row[2]});
  json n14 = nullptr;
  if (c.system.n14) n14 = {{"a_parallel_hz", c.system.n14->a_parallel_hz}, {"a_perp_hz", c.system.n14->a_perp_hz}};
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  return {
      {"system",
       {{"zero_field_hz", c.system.zero_field_hz},
        {"gamma_e_hz_per_gauss", c.system.gamma_e_hz_per_gauss},
        {"gamma_c_hz_per_gauss", c.system.gamma_c_hz_per_gauss},
        {"b_gauss", c.system.b_gauss},
        {"ancilla_hyperfine_hz", a},
        {"t2n_star_s", c.system.t2n_star_s},
        {"n14", n14}}},
      {"bath",
       {{"seed", c.bath.seed},
        {"abundance", c.bath.abundance},
        {"r_min_angstrom", c.bath.r_min_angstrom},
        {"r_max_angstrom", c.bath.r_max_angstrom},
        {"max_order", c.bath.max_order},
        {"pair_cutoff_hz", c.bath.pair_cutoff_hz},
        {"method", to_string(c.bath.method)},
        {"ensemble", c.bath.ensemble}}},
      {"sequence",
       {{"kind", to_string(c.sequence.kind)},
        {"n_pulses", c.sequence.n_pulses},
        {"duration_s", c.sequence.duration_s},
        {"n_samples", c.sequence.n_samples}}},
      {"preparation",
       {{"polarization", c.preparation.polarization},
        {"pulse_angle_error_rad", c.preparation.pulse_angle_error_rad}}},
      {"decay", {{"profile", to_string(c.decay)}}},
      {"tomography",
       {{"enabled", c.tomography.enabled},
        {"shots", c.tomography.shots},
        {"contrast", c.tomography.contrast},
        {"n_resamples", c.tomography.n_resamples}}},
      {"analysis", {{"t0_s", opt(c.analysis.t0_s)}, {"tmax_s", opt(c.analysis.tmax_s)}}},
      {"output", {{"path", c.output.path}, {"format", to_string(c.output.format)}}},
      {"threads", c.threads},
  };
}

std::string to_string(SequenceKind kind) {
  switch (kind) {
    case SequenceKind::Fid:
      return "fid";
    case SequenceKind::Hahn:
      return "hahn";
    case SequenceKind::Pdd:
      return "pdd";
  }
  return "pdd";
}

std::string to_string(BathMethod method) { return method == BathMethod::Cce ? "cce" : "exact"; }

std::string to_string(OutputFormat format) { return format == OutputFormat::Csv ? "csv" : "json"; }

}  // namespace nvsim
