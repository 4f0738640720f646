#pragma once

// Run configuration: a nested YAML file with model / grid / sweep / checks /
// output sections, plus the command-line overrides. Every field has a
// default, so an empty file is a valid config.

#include <yaml-cpp/yaml.h>

#include <json.hpp>

#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "magtun/grid_model.hpp"
#include "magtun/mho.hpp"
#include "magtun/tunneling.hpp"

namespace magtun::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline const std::set<std::string> kSuites = {"mho", "landau", "blaschke", "partition"};

struct RunConfig {
  // model
  ModelParams model;
  WellSpec well = WellSpec::radial(0.1);
  std::string well_kind = "radial";
  // grid
  double h = 0.005;
  int grid_n = 0;       // > 0: square grid with this many nodes per side
  double grid_L = 0.0;  // > 0: square grid half width
  // sweep
  std::vector<double> sweep_lambda{20.0}, sweep_b{0.0}, sweep_d1{0.3};
  // spectrum / splitting
  int eigen_count = 4;
  bool quasimodes = false;
  // mho-check
  double mho_lambda = 30.0, mho_k1 = 1.0, mho_k2 = 2.0, mho_B = 0.5;
  int mho_grid_n = 200;
  std::string green_bound_file;
  // partition-check
  double partition_delta = 1e-4, partition_R = 2.0;
  int partition_order = 4;
  // suites the sweep runs after its points; output
  std::vector<std::string> checks;
  std::string out_dir = "results";
  bool write_fields = false;
  // runtime
  unsigned long long seed = 4242;
  int threads = 1;

  void validate() const;
  Grid2D grid_for(const ModelParams& p) const;
  nlohmann::json to_json() const;
};

namespace detail {

template <class T>
T get(const YAML::Node& n, const char* key, T fallback) {
  if (!n || n.IsNull() || !n[key]) return fallback;
  try {
    return n[key].as<T>();
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

inline void reject_unknown(const YAML::Node& n, const std::string& section, const std::set<std::string>& keys) {
  if (!n || n.IsNull()) return;
  if (!n.IsMap()) throw ConfigError("section '" + section + "' must be a mapping");
  for (const auto& kv : n) {
    auto k = kv.first.as<std::string>();
    if (!keys.count(k)) throw ConfigError("unknown key '" + k + "' in section '" + section + "'");
  }
}

inline Eigen::Matrix2d matrix2(const YAML::Node& n, const char* what) {
  auto rows = n.as<std::vector<std::vector<double>>>();
  if (rows.size() != 2 || rows[0].size() != 2 || rows[1].size() != 2)
    throw ConfigError(std::string(what) + " must be a 2x2 matrix");
  Eigen::Matrix2d m;
  m << rows[0][0], rows[0][1], rows[1][0], rows[1][1];
  return m;
}

}  // namespace detail

inline RunConfig parse_config(const YAML::Node& root) {
  using detail::get;
  RunConfig c;
  if (root && !root.IsNull() && !root.IsMap()) throw ConfigError("config root must be a mapping");
  detail::reject_unknown(root, "<root>", {"model", "grid", "sweep", "checks", "output", "spectrum", "mho", "partition"});

  const YAML::Node m = root["model"];
  detail::reject_unknown(m, "model", {"lambda", "b", "d1", "a", "mu", "epsilon", "separation_C", "well"});
  c.model.lambda = get(m, "lambda", c.model.lambda);
  c.model.b = get(m, "b", c.model.b);
  c.model.d1 = get(m, "d1", c.model.d1);
  c.model.a = get(m, "a", c.model.a);
  c.model.epsilon = get(m, "epsilon", c.model.epsilon);
  c.model.separation_C = get(m, "separation_C", c.model.separation_C);
  if (m && m["mu"]) {
    auto mu = get<std::vector<double>>(m, "mu", {});
    if (mu.size() != 2) throw ConfigError("model.mu must be [re, im]");
    c.model.mu = cd(mu[0], mu[1]);
  }
  const YAML::Node w = m ? m["well"] : YAML::Node();
  detail::reject_unknown(w, "model.well", {"kind", "exponent", "shape"});
  c.well_kind = get<std::string>(w, "kind", "radial");
  int p = get(w, "exponent", 4);
  if (c.well_kind == "radial") {
    c.well = WellSpec::radial(c.model.a, p);
  } else if (c.well_kind == "anisotropic") {
    if (!w["shape"]) throw ConfigError("anisotropic well needs model.well.shape");
    c.well = WellSpec::anisotropic(detail::matrix2(w["shape"], "model.well.shape"), p);
  } else {
    throw ConfigError("model.well.kind must be radial or anisotropic");
  }
  c.model.hessian = c.well.hessian();

  const YAML::Node g = root["grid"];
  detail::reject_unknown(g, "grid", {"h", "n", "L"});
  c.h = get(g, "h", c.h);
  c.grid_n = get(g, "n", c.grid_n);
  c.grid_L = get(g, "L", c.grid_L);

  const YAML::Node s = root["sweep"];
  detail::reject_unknown(s, "sweep", {"lambda", "b", "d1"});
  c.sweep_lambda = get(s, "lambda", std::vector<double>{c.model.lambda});
  c.sweep_b = get(s, "b", std::vector<double>{c.model.b});
  c.sweep_d1 = get(s, "d1", std::vector<double>{c.model.d1});

  if (root["checks"]) c.checks = get<std::vector<std::string>>(root, "checks", {});

  const YAML::Node o = root["output"];
  detail::reject_unknown(o, "output", {"dir", "fields"});
  c.out_dir = get(o, "dir", c.out_dir);
  c.write_fields = get(o, "fields", c.write_fields);

  const YAML::Node sp = root["spectrum"];
  detail::reject_unknown(sp, "spectrum", {"count", "quasimodes"});
  c.eigen_count = get(sp, "count", c.eigen_count);
  c.quasimodes = get(sp, "quasimodes", c.quasimodes);

  const YAML::Node mh = root["mho"];
  detail::reject_unknown(mh, "mho", {"lambda", "k1", "k2", "B", "grid_n", "green_bound_file"});
  c.mho_lambda = get(mh, "lambda", c.mho_lambda);
  c.mho_k1 = get(mh, "k1", c.mho_k1);
  c.mho_k2 = get(mh, "k2", c.mho_k2);
  c.mho_B = get(mh, "B", c.mho_B);
  c.mho_grid_n = get(mh, "grid_n", c.mho_grid_n);
  c.green_bound_file = get(mh, "green_bound_file", c.green_bound_file);

  const YAML::Node pa = root["partition"];
  detail::reject_unknown(pa, "partition", {"delta", "R", "order"});
  c.partition_delta = get(pa, "delta", c.partition_delta);
  c.partition_R = get(pa, "R", c.partition_R);
  c.partition_order = get(pa, "order", c.partition_order);
  return c;
}

inline RunConfig load_config(const std::string& path) {
  if (path.empty()) return parse_config(YAML::Node());
  try {
    return parse_config(YAML::LoadFile(path));
  } catch (const YAML::BadFile&) {
    throw ConfigError("cannot read config " + path);
  } catch (const YAML::ParserException& e) {
    throw ConfigError("config " + path + ": " + e.what());
  }
}

inline void RunConfig::validate() const {
  try {
    model.validate();
    well.validate();
  } catch (const ParameterError& e) {
    throw ConfigError(e.what());
  }
  if (!(h > 0.0)) throw ConfigError("grid.h must be positive");
  if (grid_n != 0 && grid_n < 3) throw ConfigError("grid.n must be >= 3");
  if (grid_L < 0.0) throw ConfigError("grid.L must be nonnegative");
  if (sweep_lambda.empty() || sweep_b.empty() || sweep_d1.empty()) throw ConfigError("sweep lists must be nonempty");
  for (const auto& s : checks)
    if (!kSuites.count(s)) throw ConfigError("unknown check suite '" + s + "'");
  if (eigen_count < 1) throw ConfigError("spectrum.count must be >= 1");
  if (threads < 1) throw ConfigError("threads must be >= 1");
  if (mho_grid_n < 3) throw ConfigError("mho.grid_n must be >= 3");
}

// Double-well grid with spacing h, or a square grid when n or L is overridden.
inline Grid2D RunConfig::grid_for(const ModelParams& p) const {
  Grid2D g = double_well_grid(p, h);
  if (grid_n <= 0 && grid_L <= 0.0) return g;
  double L = grid_L > 0.0 ? grid_L : g.L1;
  int n = grid_n > 0 ? grid_n : 2 * int(std::lround(L / h)) + 1;
  return Grid2D::square(L, n);
}

inline nlohmann::json RunConfig::to_json() const {
  nlohmann::json j;
  j["model"] = {{"lambda", model.lambda}, {"b", model.b}, {"d1", model.d1}, {"a", model.a},
                {"mu", {model.mu.real(), model.mu.imag()}}, {"epsilon", model.epsilon},
                {"separation_C", model.separation_C},
                {"well", {{"kind", well_kind}, {"exponent", well.exponent},
                          {"shape", {{well.shape(0, 0), well.shape(0, 1)}, {well.shape(1, 0), well.shape(1, 1)}}}}}};
  j["grid"] = {{"h", h}, {"n", grid_n}, {"L", grid_L}};
  j["sweep"] = {{"lambda", sweep_lambda}, {"b", sweep_b}, {"d1", sweep_d1}};
  j["checks"] = checks;
  j["spectrum"] = {{"count", eigen_count}, {"quasimodes", quasimodes}};
  j["mho"] = {{"lambda", mho_lambda}, {"k1", mho_k1}, {"k2", mho_k2}, {"B", mho_B}, {"grid_n", mho_grid_n}};
  j["partition"] = {{"delta", partition_delta}, {"R", partition_R}, {"order", partition_order}};
  j["seed"] = seed;
  return j;
}

}  // namespace magtun::cli
