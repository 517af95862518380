#pragma once

// Experiment configuration, read from a JSON document. Unknown keys are
// rejected so typos surface as config errors instead of silent defaults.

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "wasslearn/error.hpp"
#include "wasslearn/hypothesis.hpp"
#include "wasslearn/state_space.hpp"

namespace wasslearn::harness {

using nlohmann::json;

struct TargetSpec {
  std::string family = "identity";  // identity | constant | affine | tent | quadratic
  double slope = 1.0;
  double intercept = 0.0;
  double value = 0.0;  // constant value or quadratic coefficient

  TargetFunction build() const {
    if (family == "identity") return TargetFunction::identity();
    if (family == "constant") return TargetFunction::constant(value);
    if (family == "affine") return TargetFunction::affine(slope, intercept);
    if (family == "tent") return TargetFunction::tent();
    if (family == "quadratic") return TargetFunction::quadratic(value);
    throw ConfigError("unknown target family '" + family + "'");
  }
};

enum class StartPolicy { fixed, uniform, pi_hat };

struct StartSpec {
  StartPolicy policy = StartPolicy::fixed;
  double x0 = 0.0;
};

struct ClassSpec {
  std::string kind = "constants";
  double y_lo = 0.0;
  double y_hi = 1.0;
  double lip = 0.0;
  std::optional<std::pair<double, double>> anchor;

  HypothesisClass build() const {
    HypothesisClass c;
    c.kind = parse_class_kind(kind);
    c.y_lo = y_lo;
    c.y_hi = y_hi;
    c.lip_bound = c.kind == ClassKind::constants ? 0.0 : lip;
    c.anchor = anchor;
    return HypothesisClass::validated(c);
  }
};

struct HolderSpec {
  double C = 1.0;
  int d = 1;
  double gamma = 1.0;
};

struct ContractionSpec {
  int pairs = 10000;
  int n_max = 12;
};

struct PoissonSpec {
  int grid_points = 65;
  double truncation_tol = 1e-3;
  std::size_t rollouts = 10000;
  double h_value = 0.5;  // constant hypothesis h = h_value
};

struct LemmaSpec {
  int probes = 16;
  double tolerance = 1e-9;
  int resolution = 4097;
};

struct BoundsSpec {
  std::vector<double> eps_grid{0.1, 0.2, 0.3};
  std::vector<double> n_grid{1e3, 1e4, 1e5};
  double covering = 1.0;  // explicit covering number for tail bounds
};

struct ExperimentConfig {
  std::string experiment;
  TargetSpec target;
  StartSpec start;
  ClassSpec cls;
  std::string loss = "squared";
  std::string metric = "sup";
  double net_radius = 0.05;
  std::uint64_t seed = 1;
  std::size_t replications = 100;
  int pi_hat_size = 4096;
  int diameter_grid = 1024;
  int opt_refinement = 4;
  std::vector<double> n_grid{10000};
  std::vector<double> eps_grid{0.1};
  double delta = 0.05;
  double alpha = 1.0;
  HolderSpec holder;
  ContractionSpec contraction;
  PoissonSpec poisson;
  LemmaSpec lemma;
  BoundsSpec bounds;
  std::string out_path;
  std::string format = "csv";
};

namespace detail {

inline void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) throw ConfigError("unknown key '" + it.key() + "' in " + where);
  }
}

template <typename T>
void read(const json& obj, const char* key, T& dst) {
  if (!obj.contains(key)) return;
  try {
    dst = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

inline const json& object_at(const json& obj, const char* key) {
  const json& v = obj.at(key);
  if (!v.is_object()) throw ConfigError(std::string("'") + key + "' must be an object");
  return v;
}

}  // namespace detail

inline StartPolicy parse_start_policy(const std::string& s) {
  if (s == "fixed") return StartPolicy::fixed;
  if (s == "uniform") return StartPolicy::uniform;
  if (s == "pi_hat") return StartPolicy::pi_hat;
  throw ConfigError("unknown x0 policy '" + s + "'");
}

inline std::string to_string(StartPolicy p) {
  switch (p) {
    case StartPolicy::fixed: return "fixed";
    case StartPolicy::uniform: return "uniform";
    case StartPolicy::pi_hat: return "pi_hat";
  }
  return "?";
}

/// Checks ranges and that the target, class and metric resolve.
inline void validate(const ExperimentConfig& c) {
  if (c.replications < 1) throw ConfigError("replications must be >= 1");
  if (c.loss != "squared") throw ConfigError("only the squared loss is supported, got '" + c.loss + "'");
  if (c.format != "csv" && c.format != "json") throw ConfigError("format must be csv or json");
  if (c.start.x0 < 0.0 || c.start.x0 > 1.0) throw ConfigError("x0 must lie in [0,1]");
  if (!(c.net_radius > 0.0)) throw ConfigError("net_radius must be > 0");
  if (c.pi_hat_size < 2) throw ConfigError("pi_hat_size must be >= 2");
  if (c.diameter_grid < 2) throw ConfigError("diameter_grid must be >= 2");
  if (c.opt_refinement < 1) throw ConfigError("opt_refinement must be >= 1");
  if (!(c.delta > 0.0 && c.delta < 1.0)) throw ConfigError("delta must lie in (0,1)");
  if (!(c.alpha > 0.0)) throw ConfigError("alpha must be > 0");
  for (double n : c.n_grid) {
    if (!(n >= 1.0) || n != std::floor(n)) throw ConfigError("n_grid entries must be positive integers");
  }
  for (double e : c.eps_grid) {
    if (!(e > 0.0)) throw ConfigError("eps_grid entries must be > 0");
  }
  if (c.contraction.pairs < 1) throw ConfigError("contraction.pairs must be >= 1");
  if (c.contraction.n_max < 1 || c.contraction.n_max > 12) throw ConfigError("contraction.n_max must lie in [1,12]");
  if (c.poisson.grid_points < 2) throw ConfigError("poisson.grid_points must be >= 2");
  if (c.poisson.rollouts < 1) throw ConfigError("poisson.rollouts must be >= 1");
  if (!(c.poisson.truncation_tol > 0.0)) throw ConfigError("poisson.truncation_tol must be > 0");
  if (c.lemma.probes < 1) throw ConfigError("lemma.probes must be >= 1");
  if (c.lemma.resolution < 3) throw ConfigError("lemma.resolution must be >= 3");
  if (!(c.bounds.covering >= 1.0)) throw ConfigError("bounds.covering must be >= 1");
  try {
    (void)c.target.build();
    (void)c.cls.build();
    (void)parse_metric_tag(c.metric);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
}

inline ExperimentConfig parse_config(const json& doc) {
  using detail::read;
  if (!doc.is_object()) throw ConfigError("config root must be an object");
  detail::reject_unknown(doc,
                         {"experiment", "target", "x0", "class", "loss", "metric", "net_radius", "seed",
                          "replications", "pi_hat_size", "diameter_grid", "opt_refinement", "n_grid",
                          "eps_grid", "delta", "alpha", "holder", "contraction", "poisson", "lemma",
                          "bounds", "output"},
                         "config");
  if (!doc.contains("seed")) throw ConfigError("config must provide 'seed'");
  ExperimentConfig c;
  read(doc, "experiment", c.experiment);
  read(doc, "loss", c.loss);
  read(doc, "metric", c.metric);
  read(doc, "net_radius", c.net_radius);
  read(doc, "seed", c.seed);
  read(doc, "replications", c.replications);
  read(doc, "pi_hat_size", c.pi_hat_size);
  read(doc, "diameter_grid", c.diameter_grid);
  read(doc, "opt_refinement", c.opt_refinement);
  read(doc, "n_grid", c.n_grid);
  read(doc, "eps_grid", c.eps_grid);
  read(doc, "delta", c.delta);
  read(doc, "alpha", c.alpha);

  if (doc.contains("target")) {
    const json& t = detail::object_at(doc, "target");
    detail::reject_unknown(t, {"family", "slope", "intercept", "value"}, "target");
    read(t, "family", c.target.family);
    read(t, "slope", c.target.slope);
    read(t, "intercept", c.target.intercept);
    read(t, "value", c.target.value);
  }
  if (doc.contains("x0")) {
    const json& s = detail::object_at(doc, "x0");
    detail::reject_unknown(s, {"policy", "value"}, "x0");
    std::string policy = "fixed";
    read(s, "policy", policy);
    c.start.policy = parse_start_policy(policy);
    read(s, "value", c.start.x0);
  }
  if (doc.contains("class")) {
    const json& k = detail::object_at(doc, "class");
    detail::reject_unknown(k, {"kind", "y_lo", "y_hi", "lip", "anchor"}, "class");
    read(k, "kind", c.cls.kind);
    read(k, "y_lo", c.cls.y_lo);
    read(k, "y_hi", c.cls.y_hi);
    read(k, "lip", c.cls.lip);
    if (k.contains("anchor")) {
      std::vector<double> a;
      read(k, "anchor", a);
      if (a.size() != 2) throw ConfigError("class.anchor must be [x0, y0]");
      c.cls.anchor = std::make_pair(a[0], a[1]);
    }
  }
  if (doc.contains("holder")) {
    const json& h = detail::object_at(doc, "holder");
    detail::reject_unknown(h, {"C", "d", "gamma"}, "holder");
    read(h, "C", c.holder.C);
    read(h, "d", c.holder.d);
    read(h, "gamma", c.holder.gamma);
  }
  if (doc.contains("contraction")) {
    const json& a = detail::object_at(doc, "contraction");
    detail::reject_unknown(a, {"pairs", "n_max"}, "contraction");
    read(a, "pairs", c.contraction.pairs);
    read(a, "n_max", c.contraction.n_max);
  }
  if (doc.contains("poisson")) {
    const json& p = detail::object_at(doc, "poisson");
    detail::reject_unknown(p, {"grid_points", "truncation_tol", "rollouts", "h_value"}, "poisson");
    read(p, "grid_points", c.poisson.grid_points);
    read(p, "truncation_tol", c.poisson.truncation_tol);
    read(p, "rollouts", c.poisson.rollouts);
    read(p, "h_value", c.poisson.h_value);
  }
  if (doc.contains("lemma")) {
    const json& l = detail::object_at(doc, "lemma");
    detail::reject_unknown(l, {"probes", "tolerance", "resolution"}, "lemma");
    read(l, "probes", c.lemma.probes);
    read(l, "tolerance", c.lemma.tolerance);
    read(l, "resolution", c.lemma.resolution);
  }
  if (doc.contains("bounds")) {
    const json& b = detail::object_at(doc, "bounds");
    detail::reject_unknown(b, {"eps_grid", "n_grid", "covering"}, "bounds");
    read(b, "eps_grid", c.bounds.eps_grid);
    read(b, "n_grid", c.bounds.n_grid);
    read(b, "covering", c.bounds.covering);
  }
  if (doc.contains("output")) {
    const json& o = detail::object_at(doc, "output");
    detail::reject_unknown(o, {"path", "format"}, "output");
    read(o, "path", c.out_path);
    read(o, "format", c.format);
  }
  validate(c);
  return c;
}

inline ExperimentConfig parse_config_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(doc);
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

/// Canonical JSON form of the effective configuration (output paths excluded).
inline json to_json(const ExperimentConfig& c) {
  json j;
  j["experiment"] = c.experiment;
  j["target"] = {{"family", c.target.family}, {"slope", c.target.slope}, {"intercept", c.target.intercept},
                 {"value", c.target.value}};
  j["x0"] = {{"policy", to_string(c.start.policy)}, {"value", c.start.x0}};
  j["class"] = {{"kind", c.cls.kind}, {"y_lo", c.cls.y_lo}, {"y_hi", c.cls.y_hi}, {"lip", c.cls.lip}};
  if (c.cls.anchor) j["class"]["anchor"] = {c.cls.anchor->first, c.cls.anchor->second};
  j["loss"] = c.loss;
  j["metric"] = c.metric;
  j["net_radius"] = c.net_radius;
  j["seed"] = c.seed;
  j["replications"] = c.replications;
  j["pi_hat_size"] = c.pi_hat_size;
  j["diameter_grid"] = c.diameter_grid;
  j["opt_refinement"] = c.opt_refinement;
  j["n_grid"] = c.n_grid;
  j["eps_grid"] = c.eps_grid;
  j["delta"] = c.delta;
  j["alpha"] = c.alpha;
  j["holder"] = {{"C", c.holder.C}, {"d", c.holder.d}, {"gamma", c.holder.gamma}};
  j["contraction"] = {{"pairs", c.contraction.pairs}, {"n_max", c.contraction.n_max}};
  j["poisson"] = {{"grid_points", c.poisson.grid_points}, {"truncation_tol", c.poisson.truncation_tol},
                  {"rollouts", c.poisson.rollouts}, {"h_value", c.poisson.h_value}};
  j["lemma"] = {{"probes", c.lemma.probes}, {"tolerance", c.lemma.tolerance}, {"resolution", c.lemma.resolution}};
  j["bounds"] = {{"eps_grid", c.bounds.eps_grid}, {"n_grid", c.bounds.n_grid}, {"covering", c.bounds.covering}};
  return j;
}

/// FNV-1a over the canonical dump, as 16 hex digits.
inline std::string config_hash(const ExperimentConfig& c) {
  const std::string text = to_json(c).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace wasslearn::harness
