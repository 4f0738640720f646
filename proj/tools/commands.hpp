#pragma once

// Subcommand implementations. Each returns the process exit code: 0 success,
// 2 configuration or input error, 3 numerical failure.

#include <openssl/evp.h>
#include <spdlog/spdlog.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "magtun/io.hpp"
#include "magtun/parallel.hpp"
#include "magtun/suites.hpp"
#include "magtun/svg.hpp"
#include "magtun/version.hpp"
#include "run_config.hpp"

namespace magtun::cli {

namespace fs = std::filesystem;
using nlohmann::json;

enum Exit { kOk = 0, kConfigError = 2, kNumericalFailure = 3 };

inline std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  std::ostringstream ss;
  for (unsigned i = 0; i < len; ++i) ss << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return ss.str();
}

// Maps library exceptions onto exit codes.
template <class F>
int guarded(F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    spdlog::error("config: {}", e.what());
    return kConfigError;
  } catch (const SchemaError& e) {
    spdlog::error("schema: {}", e.what());
    return kConfigError;
  } catch (const YAML::Exception& e) {
    spdlog::error("config: {}", e.what());
    return kConfigError;
  } catch (const ParameterError& e) {
    spdlog::error("parameters: {}", e.what());
    return kConfigError;
  } catch (const CommensurabilityError& e) {
    spdlog::error("grid: {}", e.what());
    return kConfigError;
  } catch (const GridError& e) {
    spdlog::error("grid: {}", e.what());
    return kConfigError;
  } catch (const std::exception& e) {
    spdlog::error("numerical failure: {}", e.what());
    return kNumericalFailure;
  }
}

inline EigOptions eig_options(const RunConfig& c) {
  EigOptions o;
  o.seed = c.seed;
  return o;
}

inline std::vector<std::pair<WellSpec, Vec2>> wells_of(const RunConfig& c) {
  if (c.model.d1 == 0.0) return {{c.well, Vec2::Zero()}};
  return double_well(c.model, c.well);
}

inline json run_header(const RunConfig& c, const std::string& command) {
  return {{"command", command}, {"code_version", kVersion}, {"config", c.to_json()},
          {"config_hash", sha256_hex(c.to_json().dump())}};
}

// ------------------------------------------------------------ spectrum

inline int cmd_spectrum(const RunConfig& c, std::ostream& out) {
  Grid2D g = c.grid_for(c.model);
  auto H = build_operator(c.model, g, wells_of(c));
  spdlog::info("spectrum: {} nodes, {} eigenpairs", g.size(), c.eigen_count);
  SpectralResult r = lowest_eigs(H, c.eigen_count, eig_options(c));
  json j = run_header(c, "spectrum");
  j["grid"] = g;
  j["result"] = r;
  fs::path dir = c.out_dir;
  atomic_write_json(dir / "spectrum.json", j);
  if (c.write_fields) atomic_write(dir / "spectrum_fields.bin", encode_fields(r.eigenvectors));
  out << std::setprecision(12);
  for (size_t k = 0; k < r.eigenvalues.size(); ++k)
    out << "E" << k << " = " << r.eigenvalues[k] << "   residual " << r.residuals[k] << "\n";
  return kOk;
}

// ------------------------------------------------------------- hopping

inline int cmd_hopping(const RunConfig& c, std::ostream& out) {
  c.model.validate_double_well();
  Grid2D g = c.grid_for(c.model);
  GroundState gs = single_well_ground_state(c.model, c.well, g, 1e-10, eig_options(c));
  if (!gs.verified) {
    spdlog::error("single-well ground state residual {} above tolerance", gs.residual);
    return kNumericalFailure;
  }
  HoppingResult h = hopping_coefficient(c.model, c.well, gs);
  json j = run_header(c, "hopping");
  j["grid"] = g;
  j["ground_energy"] = gs.energy;
  j["ground_residual"] = gs.residual;
  j["hopping"] = h;
  atomic_write_json(fs::path(c.out_dir) / "hopping.json", j);
  out << std::setprecision(12) << "rho0 = " << h.rho.real() << " + " << h.rho.imag() << "i   |rho0| = " << h.abs_rho
      << "   quadrature error " << h.quadrature_error << "\n";
  return kOk;
}

// ----------------------------------------------------------- splitting

inline int cmd_splitting(const RunConfig& c, std::ostream& out) {
  c.model.validate_double_well();
  Grid2D g = c.grid_for(c.model);
  auto H = build_operator(c.model, g, double_well(c.model, c.well));
  PhysicalMHO m = physical_mho(c.model.hessian, c.model.b, c.model.lambda);
  Contour ct = contour_for_ground(c.model, m.e0(), m.e1());
  SplittingResult s = splitting_direct(H, ct, eig_options(c));
  json j = run_header(c, "splitting");
  j["grid"] = g;
  j["direct"] = s;
  if (s.warning)
    spdlog::warn("ground pair not cleanly inside the oscillator contour (clearance {:.3g})", s.clearance);
  out << std::setprecision(12) << "E0 = " << s.E0 << "  E1 = " << s.E1 << "  Delta = " << s.delta << "\n";
  if (c.quasimodes) {
    Quasimodes q = quasimodes(c.model, H, ct, {}, c.seed);
    auto red = gram_and_m(q.minus, q.plus, H);
    double oracle = generalized_gap(red.G, red.M);
    j["reduction"] = {{"splitting", red.splitting()}, {"generalized_eig", oracle}, {"sigma", {red.sigma.real(), red.sigma.imag()}},
                      {"gamma", {red.gamma.real(), red.gamma.imag()}}, {"rank", q.rank}, {"nodes", q.nodes},
                      {"norm_defect", q.norm_defect}, {"overlap", q.overlap}};
    out << "2x2 reduction: " << red.splitting() << "  (generalized eigenproblem " << oracle << ", rank " << q.rank
        << ")\n";
  }
  atomic_write_json(fs::path(c.out_dir) / "splitting.json", j);
  return kOk;
}

// -------------------------------------------------------------- checks

inline void print_table(const std::vector<suites::Check>& cs, std::ostream& out) {
  out << std::left << std::setw(40) << "check" << std::setw(13) << "value" << std::setw(13) << "limit" << std::setw(7)
      << "status"
      << "time\n";
  for (const auto& c : cs) {
    std::ostringstream t;
    t << std::fixed << std::setprecision(1) << c.seconds << "s";
    out << std::left << std::setw(40) << c.name << std::setw(13) << suites::fmt(c.value) << std::setw(13)
        << suites::fmt(c.limit) << std::setw(7) << (c.pass ? "PASS" : "FAIL") << t.str();
    if (!c.detail.empty()) out << "  " << c.detail;
    out << "\n";
  }
}

inline json checks_json(const std::vector<suites::Check>& cs) {
  json a = json::array();
  for (const auto& c : cs)
    a.push_back({{"name", c.name}, {"pass", c.pass}, {"value", c.value}, {"limit", c.limit}, {"detail", c.detail},
                 {"seconds", c.seconds}});
  return a;
}

inline int finish_suite(const RunConfig& c, const std::string& name, const std::vector<suites::Check>& cs,
                        std::ostream& out, json extra = json::object()) {
  print_table(cs, out);
  json j = run_header(c, name);
  j["checks"] = checks_json(cs);
  j["all_pass"] = suites::all_pass(cs);
  for (auto& [k, v] : extra.items()) j[k] = v;
  atomic_write_json(fs::path(c.out_dir) / (name + ".json"), j);
  return suites::all_pass(cs) ? kOk : kNumericalFailure;
}

inline std::string green_bound_path(const RunConfig& c) {
  if (!c.green_bound_file.empty()) return c.green_bound_file;
#ifdef MAGTUN_DATA_DIR
  return std::string(MAGTUN_DATA_DIR) + "/green_bound.json";
#else
  throw ConfigError("mho.green_bound_file not set");
#endif
}

inline int cmd_mho_check(const RunConfig& c, std::ostream& out) {
  suites::MhoSuiteConfig mc;
  mc.lambda = c.mho_lambda;
  mc.k1 = c.mho_k1;
  mc.k2 = c.mho_k2;
  mc.B = c.mho_B;
  mc.grid_n = c.grid_n > 0 ? c.grid_n : c.mho_grid_n;
  mc.grid_L = c.grid_L;
  try {
    mc.green = load_green_bound_constants(green_bound_path(c));
  } catch (const std::runtime_error& e) {
    throw ConfigError(e.what());
  }
  return finish_suite(c, "mho-check", suites::mho_suite(mc), out);
}

inline int cmd_landau_check(const RunConfig& c, std::ostream& out) {
  std::vector<DecayFit> fits;
  suites::LandauSuiteConfig lc;
  lc.seed = unsigned(c.seed);
  lc.threads = c.threads;
  lc.fits = &fits;
  auto cs = suites::landau_suite(lc);
  for (size_t k = 0; k < fits.size() && k < lc.decay_lambdas.size(); ++k) {
    std::ostringstream name;
    name << "decay_lambda" << lc.decay_lambdas[k] << ".csv";
    fs::create_directories(c.out_dir);
    write_decay_csv(fits[k], (fs::path(c.out_dir) / name.str()).string());
  }
  return finish_suite(c, "landau-check", cs, out);
}

inline int cmd_blaschke_check(const RunConfig& c, std::ostream& out) {
  std::vector<LowerBoundCertificate> certs;
  suites::BlaschkeSuiteConfig bc;
  bc.seed = c.seed;
  bc.certificates = &certs;
  auto cs = suites::blaschke_suite(bc);
  atomic_write_json(fs::path(c.out_dir) / "certificates.json", json(certs));
  return finish_suite(c, "blaschke-check", cs, out);
}

inline int cmd_partition_check(const RunConfig& c, std::ostream& out) {
  PartitionReport rep;
  suites::PartitionSuiteConfig pc{c.partition_delta, c.partition_R, c.partition_order, &rep};
  auto cs = suites::partition_suite(pc);
  return finish_suite(c, "partition-check", cs, out, {{"report", rep}});
}

// --------------------------------------------------------------- sweep

struct SweepPoint {
  double lambda, b, d1;
  std::string hash;
  json key;
};

inline std::vector<SweepPoint> sweep_points(const RunConfig& c) {
  std::vector<SweepPoint> pts;
  for (double b : c.sweep_b)
    for (double d1 : c.sweep_d1)
      for (double lam : c.sweep_lambda) {
        SweepPoint p{lam, b, d1, "", json()};
        ModelParams m = c.model;
        m.lambda = lam;
        m.b = b;
        m.d1 = d1;
        p.key = {{"model", m}, {"well", c.to_json()["model"]["well"]}, {"grid", c.to_json()["grid"]},
                 {"seed", c.seed}, {"code_version", kVersion}, {"csv_schema", kRatioCsvSchemaVersion}};
        p.hash = sha256_hex(p.key.dump());
        pts.push_back(std::move(p));
      }
  return pts;
}

inline std::optional<RatioRow> cached_row(const fs::path& file, const json& key) {
  if (!fs::exists(file)) return std::nullopt;
  try {
    json j = json::parse(read_file(file));
    if (j.at("status") != "ok" || j.at("key") != key) return std::nullopt;
    return j.at("row").get<RatioRow>();
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

inline int cmd_sweep(const RunConfig& c, std::ostream& out) {
  if (c.grid_n > 0 || c.grid_L > 0.0)
    throw ConfigError("sweep points use the double-well grid rule; drop the grid n/L overrides");
  const fs::path dir = c.out_dir, pdir = dir / "points";
  fs::create_directories(pdir);
  auto pts = sweep_points(c);
  const int n = int(pts.size());
  std::vector<std::optional<RatioRow>> rows(n);
  std::vector<std::string> errors(n);
  std::vector<char> cached(n, 0);
  for (int k = 0; k < n; ++k) {
    rows[k] = cached_row(pdir / (pts[k].hash + ".json"), pts[k].key);
    cached[k] = rows[k].has_value();
  }
  int todo = int(std::count(cached.begin(), cached.end(), 0));
  spdlog::info("sweep: {} points, {} cached, {} to compute on {} threads", n, n - todo, todo, c.threads);
  parallel_for(n, c.threads, [&](int k) {
    if (cached[k]) return;
    const SweepPoint& p = pts[k];
    json bundle = {{"key", p.key}};
    try {
      ModelParams m = c.model;
      m.lambda = p.lambda;
      m.b = p.b;
      m.d1 = p.d1;
      RatioOptions o;
      o.h = c.h;
      o.eig = eig_options(c);
      RatioRow r = ratio_point(m, c.well, o);
      rows[k] = r;
      bundle["status"] = "ok";
      bundle["row"] = r;
    } catch (const std::exception& e) {
      errors[k] = e.what();
      bundle["status"] = "failed";
      bundle["error"] = e.what();
    }
    atomic_write_json(pdir / (p.hash + ".json"), bundle);
    spdlog::info("point lambda={} b={} d1={}: {}", p.lambda, p.b, p.d1, errors[k].empty() ? "ok" : errors[k]);
  });

  std::vector<RatioRow> ok_rows;
  json entries = json::array();
  int failed = 0;
  for (int k = 0; k < n; ++k) {
    json e = {{"hash", pts[k].hash}, {"lambda", pts[k].lambda}, {"b", pts[k].b}, {"d1", pts[k].d1},
              {"file", "points/" + pts[k].hash + ".json"}, {"cached", bool(cached[k])}};
    if (rows[k]) {
      ok_rows.push_back(*rows[k]);
      e["status"] = "ok";
    } else {
      e["status"] = "failed";
      e["error"] = errors[k];
      ++failed;
    }
    entries.push_back(e);
  }
  std::ostringstream csv;
  write_ratio_csv(ok_rows, csv);
  atomic_write(dir / "ratio.csv", csv.str());
  json manifest = {{"code_version", kVersion},
                   {"config_hash", sha256_hex(c.to_json().dump())},
                   {"seed", c.seed},
                   {"csv", {{"file", "ratio.csv"}, {"schema_version", kRatioCsvSchemaVersion}, {"columns", kRatioCsvHeader}}},
                   {"points", n},
                   {"computed", todo},
                   {"cached", n - todo},
                   {"failed", failed},
                   {"entries", entries}};
  atomic_write_json(dir / "manifest.json", manifest);
  out << std::setprecision(8);
  for (const auto& r : ok_rows)
    out << "lambda=" << r.lambda << " b=" << r.b << " d1=" << r.d1 << "  Delta=" << r.Delta << "  2|rho|=" << 2 * r.abs_rho
        << "  ratio=" << r.ratio << "\n";
  out << n << " points, " << todo << " computed, " << n - todo << " cached, " << failed << " failed\n";
  int rc = failed ? kNumericalFailure : kOk;
  for (const auto& s : c.checks) {
    int r = s == "mho" ? cmd_mho_check(c, out)
            : s == "landau" ? cmd_landau_check(c, out)
            : s == "blaschke" ? cmd_blaschke_check(c, out)
                              : cmd_partition_check(c, out);
    rc = std::max(rc, r);
  }
  return rc;
}

// ---------------------------------------------------------------- plot

inline void write_plot(const fs::path& dir, const std::string& name, const svg::Plot& p, const std::string& data) {
  atomic_write(dir / (name + ".svg"), svg::render(p));
  atomic_write(dir / (name + ".data.csv"), data);
}

// Groups ratio rows by (b, d1), each group sorted by lambda.
inline std::map<std::pair<double, double>, std::vector<RatioRow>> group_rows(const std::vector<RatioRow>& rows) {
  std::map<std::pair<double, double>, std::vector<RatioRow>> g;
  for (const auto& r : rows) g[{r.b, r.d1}].push_back(r);
  for (auto& [k, v] : g) std::sort(v.begin(), v.end(), [](auto& a, auto& b) { return a.lambda < b.lambda; });
  return g;
}

inline int cmd_plot(const RunConfig& c, std::ostream& out) {
  const fs::path dir = c.out_dir;
  if (!fs::is_directory(dir)) throw ConfigError("results directory " + dir.string() + " does not exist");
  int written = 0;

  if (fs::exists(dir / "ratio.csv")) {
    std::ifstream in(dir / "ratio.csv");
    auto rows = read_ratio_csv(in);
    if (!rows.empty()) {
      svg::Plot dp{"Delta0 and 2|rho0| against lambda", "lambda", "energy", false, true, {}, {}, 640, 420};
      svg::Plot rp{"Delta0 / (2|rho0|)", "lambda", "ratio", false, false, {}, {1.0, 0.8, 1.2}, 640, 420};
      std::ostringstream data;
      data << "lambda,b,d1,Delta,two_abs_rho,ratio\n" << std::setprecision(17);
      for (const auto& [key, grp] : group_rows(rows)) {
        std::string tag = "b=" + suites::fmt(key.first) + " d1=" + suites::fmt(key.second);
        svg::Series sd{"Delta0 " + tag, {}, {}, true}, sr{"2|rho0| " + tag, {}, {}, true}, st{tag, {}, {}, true};
        for (const auto& r : grp) {
          sd.x.push_back(r.lambda), sd.y.push_back(r.Delta);
          sr.x.push_back(r.lambda), sr.y.push_back(2 * r.abs_rho);
          st.x.push_back(r.lambda), st.y.push_back(r.ratio);
          data << r.lambda << ',' << r.b << ',' << r.d1 << ',' << r.Delta << ',' << 2 * r.abs_rho << ',' << r.ratio
               << '\n';
        }
        dp.series.push_back(sd);
        dp.series.push_back(sr);
        rp.series.push_back(st);
      }
      write_plot(dir, "delta_rho", dp, data.str());
      std::ostringstream rdata;
      write_ratio_csv(rows, rdata);
      write_plot(dir, "ratio", rp, rdata.str());
      written += 2;
    }
  }

  std::vector<fs::path> decay;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().filename().string().rfind("decay_", 0) == 0 && e.path().extension() == ".csv") decay.push_back(e.path());
  std::sort(decay.begin(), decay.end());
  if (!decay.empty()) {
    svg::Plot p{"Off-diagonal decay of the Landau resolvent", "distance", "log norm", false, false, {}, {}, 640, 420};
    std::ostringstream data;
    data << "file,distance,log_norm,fitted_rate\n" << std::setprecision(17);
    for (const auto& f : decay) {
      std::ifstream in(f);
      CsvTable t = parse_csv(in);
      svg::Series s{f.stem().string(), t.values("distance"), t.values("log_norm"), true};
      auto rate = t.values("fitted_rate");
      if (!rate.empty()) s.name += " rate " + suites::fmt(rate.front());
      for (size_t k = 0; k < s.x.size(); ++k)
        data << f.filename().string() << ',' << s.x[k] << ',' << s.y[k] << ',' << rate[k] << '\n';
      p.series.push_back(s);
    }
    write_plot(dir, "decay", p, data.str());
    ++written;
  }

  if (fs::exists(dir / "certificates.json")) {
    json certs = json::parse(read_file(dir / "certificates.json"));
    if (!certs.empty()) {
      svg::Plot p{"Certificate margins", "delta", "margin / bound", true, false, {}, {0.0}, 640, 420};
      svg::Series s{"half-plane", {}, {}, false};
      std::ostringstream data;
      data << "delta_or_R,margin,theorem_bound\n" << std::setprecision(17);
      for (const auto& cj : certs) {
        for (const char* k : {"delta_or_R", "margin", "theorem_bound"})
          if (!cj.contains(k)) throw SchemaError(std::string("certificates.json: missing field '") + k + "'");
        double d = cj["delta_or_R"], m = cj["margin"], tb = cj["theorem_bound"];
        s.x.push_back(d);
        s.y.push_back(tb > 0 ? m / tb : m);
        data << d << ',' << m << ',' << tb << '\n';
      }
      p.series.push_back(s);
      write_plot(dir, "margins", p, data.str());
      ++written;
    }
  }

  if (written == 0) spdlog::warn("plot: nothing to plot in {}", dir.string());
  out << written << " plots written to " << dir.string() << "\n";
  return kOk;
}

}  // namespace magtun::cli
