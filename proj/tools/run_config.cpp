#include "run_config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "boxctl/control.hpp"
#include "boxctl/error.hpp"

namespace boxctl::cli {

namespace {

double number(const json& obj, const char* key) {
  if (!obj.contains(key)) throw UsageError(std::string("config: missing number '") + key + "'");
  if (!obj.at(key).is_number()) throw UsageError(std::string("config: '") + key + "' must be a number");
  return obj.at(key).get<double>();
}

double number_or(const json& obj, const char* key, double fallback) {
  return obj.contains(key) ? number(obj, key) : fallback;
}

Mode mode_from_json(const json& v) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() || !v[1].is_number_integer())
    throw UsageError("config: a mode is written [m, n]");
  const Mode k{v[0].get<int>(), v[1].get<int>()};
  if (!valid(k)) throw UsageError("config: mode indices start at 1");
  return k;
}

struct SampledSide {
  SideLaw law;
  std::optional<double> end;
};

SampledSide side_from_json(json& v, const std::filesystem::path& base_dir) {
  if (v.is_number()) return {SideLaw::constant(v.get<double>()), std::nullopt};
  if (!v.is_string()) throw UsageError("config: a sampled side is a shape CSV path or a length");
  std::filesystem::path file = v.get<std::string>();
  if (file.is_relative()) file = base_dir / file;
  file = std::filesystem::absolute(file).lexically_normal();
  v = file.string();
  std::ifstream in(file);
  if (!in) throw UsageError("cannot open shape file '" + file.string() + "'");
  double T = 0.0;
  SideLaw law = read_shape_csv(in, &T);
  return {std::move(law), T};
}

}  // namespace

Mode parse_mode(const std::string& text) {
  int m = 0, n = 0;
  char comma = 0;
  std::istringstream in(text);
  if (!(in >> m >> comma >> n) || comma != ',' || !(in >> std::ws).eof() || m < 1 || n < 1)
    throw UsageError("'" + text + "' is not a mode; write m,n with m,n >= 1");
  return {m, n};
}

std::vector<Mode> parse_mode_list(const std::string& text) {
  std::string spaced = text;
  std::replace(spaced.begin(), spaced.end(), ';', ' ');
  std::istringstream in(spaced);
  std::vector<Mode> modes;
  std::string token;
  while (in >> token) modes.push_back(parse_mode(token));
  if (modes.empty()) throw UsageError("empty mode list");
  return modes;
}

std::string mode_label(Mode k) { return std::to_string(k.m) + "_" + std::to_string(k.n); }

DeformationPath path_from_json(const json& spec_in, const std::filesystem::path& base_dir) {
  json spec = spec_in;
  if (!spec.is_object() || !spec.contains("type") || !spec["type"].is_string())
    throw UsageError("config: path needs a string 'type'");
  const std::string type = spec["type"];
  DeformationPath path;
  if (type == "stationary") {
    path = DeformationPath::stationary(number(spec, "a"), number(spec, "b"), number_or(spec, "t0", 0.0),
                                       number(spec, "t1"));
  } else if (type == "linear" || type == "smoothstep") {
    const double a0 = number(spec, "a0"), a1 = number(spec, "a1");
    const double b0 = number_or(spec, "b0", 1.0), b1 = number_or(spec, "b1", b0);
    const double t0 = number_or(spec, "t0", 0.0), t1 = number(spec, "t1");
    path = type == "linear" ? DeformationPath::linear(a0, a1, b0, b1, t0, t1)
                            : DeformationPath::smoothstep(a0, a1, b0, b1, t0, t1);
  } else if (type == "samples") {
    if (!spec.contains("horizontal") || !spec.contains("vertical"))
      throw UsageError("config: sampled path needs 'horizontal' and 'vertical'");
    SampledSide h = side_from_json(spec["horizontal"], base_dir);
    SampledSide v = side_from_json(spec["vertical"], base_dir);
    double t1 = std::max(h.end.value_or(0.0), v.end.value_or(0.0));
    if (spec.contains("t1")) t1 = number(spec, "t1");
    if (!(t1 > 0.0)) throw UsageError("config: sampled path with two constant sides needs 't1'");
    path.horizontal = std::move(h.law);
    path.vertical = std::move(v.law);
    path.t_start = 0.0;
    path.t_end = t1;
  } else {
    throw UsageError("config: unknown path type '" + type + "'");
  }
  if (!(path.t_end > path.t_start)) throw UsageError("config: path needs t1 > t0");
  // A sampled side is a C^2 piecewise quintic: differences straddling a knot
  // see the jump of the third derivative, hence the looser check.
  path.validate(64, type == "samples" ? 1e-4 : 1e-6);
  return path;
}

EvolveConfig evolve_config_from_json(const json& config_in, const std::filesystem::path& base_dir) {
  if (!config_in.is_object()) throw UsageError("config: top level must be an object");
  EvolveConfig c;
  json config = config_in;
  if (!config.contains("path")) throw UsageError("config: missing 'path'");
  c.path = path_from_json(config["path"], base_dir);
  // Echo absolute sample paths so the manifest reruns from any directory.
  for (const char* side : {"horizontal", "vertical"}) {
    json& p = config["path"];
    if (p.value("type", "") == "samples" && p.contains(side) && p[side].is_string()) {
      std::filesystem::path f = p[side].get<std::string>();
      if (f.is_relative()) p[side] = std::filesystem::absolute(base_dir / f).lexically_normal().string();
    }
  }

  if (config.contains("basis")) {
    const json& nb = config["basis"];
    if (nb.is_number_integer()) {
      c.n1 = c.n2 = nb.get<int>();
    } else if (nb.is_array() && nb.size() == 2) {
      c.n1 = nb[0].get<int>();
      c.n2 = nb[1].get<int>();
    } else {
      throw UsageError("config: 'basis' is N or [N1, N2]");
    }
  }
  if (c.n1 < 2 || c.n2 < 2) throw UsageError("config: basis sizes must be >= 2");
  c.dt = number_or(config, "dt", c.dt);
  if (!(c.dt > 0.0)) throw UsageError("config: dt must be positive");

  const json initial = config.value("initial", json{{"mode", json::array({1, 1})}});
  if (initial.contains("mode")) {
    c.initial.push_back({mode_from_json(initial["mode"]), 1.0});
  } else if (initial.contains("amplitudes")) {
    for (const auto& row : initial["amplitudes"]) {
      if (!row.is_array() || row.size() != 4) throw UsageError("config: amplitudes rows are [m, n, re, im]");
      c.initial.push_back({mode_from_json(json::array({row[0], row[1]})), {row[2].get<double>(), row[3].get<double>()}});
    }
  } else {
    throw UsageError("config: 'initial' needs 'mode' or 'amplitudes'");
  }
  for (const auto& [k, amp] : c.initial) {
    (void)amp;
    if (k.m > c.n1 || k.n > c.n2) throw UsageError("config: initial mode " + mode_label(k) + " outside the basis");
  }
  const std::string frame = initial.value("frame", "physical");
  if (frame != "physical" && frame != "gauge") throw UsageError("config: initial frame is 'physical' or 'gauge'");
  c.initial_physical = frame == "physical";

  if (config.contains("breaker")) {
    const json& b = config["breaker"];
    c.breaker_strength = number_or(b, "strength", 0.0);
    if (b.contains("seed")) c.seed = b["seed"].get<std::uint64_t>();
    c.envelope = b.value("envelope", "bump");
    if (c.envelope != "bump" && c.envelope != "constant")
      throw UsageError("config: breaker envelope is 'bump' or 'constant'");
  }
  if (config.contains("record")) {
    for (const auto& k : config["record"]) c.record.push_back(mode_from_json(k));
  } else {
    for (int n = 1; n <= std::min(3, c.n2); ++n)
      for (int m = 1; m <= std::min(3, c.n1); ++m) c.record.push_back({m, n});
  }
  for (Mode k : c.record)
    if (k.m > c.n1 || k.n > c.n2) throw UsageError("config: recorded mode " + mode_label(k) + " outside the basis");
  c.observe_every = config.value("observe_every", 0);
  if (c.observe_every < 0) throw UsageError("config: observe_every must be >= 0");
  c.tail_threshold = number_or(config, "tail_threshold", c.tail_threshold);
  if (config.contains("output")) c.output = config["output"].get<std::string>();
  c.echo = config;
  return c;
}

EvolveConfig load_evolve_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw UsageError("cannot open config '" + file.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError("config '" + file.string() + "' is not valid JSON: " + e.what());
  }
  const std::filesystem::path base = std::filesystem::absolute(file).parent_path();
  if (doc.contains("schema_version") && doc.contains("config") && doc.value("command", "") == "evolve")
    return evolve_config_from_json(doc["config"], base);
  return evolve_config_from_json(doc, base);
}

}  // namespace boxctl::cli
