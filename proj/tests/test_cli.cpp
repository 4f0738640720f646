#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "commands.hpp"

using namespace magtun;
using namespace magtun::cli;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("magtun_cli_" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

RunConfig from_yaml(const std::string& text) { return parse_config(YAML::Load(text)); }

// Wide wells so a coarse grid resolves the pair in a second or two.
RunConfig small_sweep(const fs::path& out) {
  RunConfig c = from_yaml(R"(
model: {lambda: 10, b: 0.0, d1: 0.6, a: 0.5}
grid: {h: 0.06}
sweep: {lambda: [10], b: [0.0], d1: [0.6]}
)");
  c.out_dir = out.string();
  c.validate();
  return c;
}

int count(const std::string& s, const std::string& needle) {
  int n = 0;
  for (size_t p = s.find(needle); p != std::string::npos; p = s.find(needle, p + 1)) ++n;
  return n;
}

}  // namespace

TEST(Config, EmptyFileGivesValidDefaults) {
  RunConfig c = from_yaml("");
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.model.hessian, WellSpec::radial(0.1).hessian());
  EXPECT_EQ(c.sweep_lambda, std::vector<double>{c.model.lambda});
}

TEST(Config, RejectsUnknownKeysSuitesAndEmptySweeps) {
  EXPECT_THROW(from_yaml("model: {lamda: 3}"), ConfigError);
  EXPECT_THROW(from_yaml("colour: red"), ConfigError);
  EXPECT_THROW(from_yaml("model: {lambda: [1, 2]}"), ConfigError);
  EXPECT_THROW(from_yaml("model: {well: {kind: anisotropic}}"), ConfigError);
  EXPECT_THROW(from_yaml("checks: [mho, spin]").validate(), ConfigError);
  EXPECT_THROW(from_yaml("sweep: {lambda: []}").validate(), ConfigError);
  EXPECT_THROW(from_yaml("model: {lambda: -1}").validate(), ConfigError);
}

TEST(Config, AnisotropicWellSetsHessian) {
  RunConfig c = from_yaml("model: {a: 0.5, well: {kind: anisotropic, exponent: 4, shape: [[4, 0], [0, 9]]}}");
  c.validate();
  Eigen::Matrix2d H;
  H << 32, 0, 0, 72;
  EXPECT_EQ(c.model.hessian, H);
}

TEST(Config, GridOverridesGiveSquareGrid) {
  RunConfig c = from_yaml("grid: {h: 0.01}");
  Grid2D dw = c.grid_for(c.model);
  EXPECT_EQ(dw.h, 0.01);
  c.grid_n = 101;
  Grid2D sq = c.grid_for(c.model);
  EXPECT_EQ(sq.n1, 101);
  EXPECT_EQ(sq.n2, 101);
  EXPECT_EQ(sq.L1, dw.L1);
}

TEST(Hash, Sha256KnownVectors) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST(Exit, ExceptionsMapToCodes) {
  EXPECT_EQ(guarded([]() -> int { throw ConfigError("x"); }), 2);
  EXPECT_EQ(guarded([]() -> int { throw ParameterError("x"); }), 2);
  EXPECT_EQ(guarded([]() -> int { throw CommensurabilityError("x"); }), 2);
  EXPECT_EQ(guarded([]() -> int { throw SchemaError("x"); }), 2);
  EXPECT_EQ(guarded([]() -> int { throw ConvergenceError("x", {}); }), 3);
  EXPECT_EQ(guarded([]() -> int { throw ClusterError("x", 3); }), 3);
  EXPECT_EQ(guarded([] { return 0; }), 0);
}

TEST(Io, FieldFileRoundTrip) {
  Grid2D g = Grid2D::rect(0.3, 0.2, 0.1);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd;
  std::vector<Field> fs_(2, Field(g));
  for (auto& f : fs_)
    for (int k = 0; k < g.size(); ++k) f.values(k) = cd(nd(rng), nd(rng));
  std::string bytes = encode_fields(fs_);
  EXPECT_EQ(bytes.size(), 8 + 4 * 4 + 3 * 8 + 2 * size_t(g.size()) * 16);
  // first value stored little-endian right after the header
  double re;
  std::memcpy(&re, bytes.data() + 48, 8);
  if constexpr (std::endian::native == std::endian::little) { EXPECT_EQ(re, fs_[0].values(0).real()); }
  auto back = decode_fields(bytes);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_TRUE(back[1].grid == g);
  EXPECT_EQ(back[1].values, fs_[1].values);
  EXPECT_THROW(decode_fields(bytes.substr(0, bytes.size() - 1)), SchemaError);
  EXPECT_THROW(decode_fields("garbage!"), SchemaError);
}

TEST(Io, RatioCsvRoundTripIsExact) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<RatioRow> rows;
  for (int k = 0; k < 5; ++k)
    rows.push_back({20 + u(rng), u(rng), u(rng), -u(rng) * 1e3, -u(rng) * 1e3, u(rng) * 1e-7, u(rng) * 1e-7,
                    1 + 0.01 * u(rng), 1e-12 * u(rng), 1000 + k, 0.7 + u(rng)});
  std::stringstream ss;
  write_ratio_csv(rows, ss);
  auto back = read_ratio_csv(ss);
  ASSERT_EQ(back.size(), rows.size());
  for (size_t k = 0; k < rows.size(); ++k) {
    EXPECT_EQ(back[k].Delta, rows[k].Delta);
    EXPECT_EQ(back[k].abs_rho, rows[k].abs_rho);
    EXPECT_EQ(back[k].ratio, rows[k].ratio);
    EXPECT_EQ(back[k].grid_n, rows[k].grid_n);
  }
}

TEST(Io, MissingColumnIsNamed) {
  std::stringstream ss("lambda,b,d1,E0,E1,Delta,ratio,quad_err,grid_n,grid_L\n1,2,3,4,5,6,7,8,9,10\n");
  try {
    read_ratio_csv(ss);
    FAIL() << "expected SchemaError";
  } catch (const SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find("abs_rho"), std::string::npos) << e.what();
  }
}

TEST(Sweep, SinglePointThenCachedRerun) {
  TempDir tmp;
  RunConfig c = small_sweep(tmp.path());
  std::ostringstream out;
  ASSERT_EQ(cmd_sweep(c, out), 0) << out.str();
  std::ifstream csv(tmp.path() / "ratio.csv");
  auto rows = read_ratio_csv(csv);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_NEAR(rows[0].ratio, 1.0, 0.05);
  json m = json::parse(read_file(tmp.path() / "manifest.json"));
  EXPECT_EQ(m["entries"].size(), 1u);
  EXPECT_EQ(m["computed"], 1);
  EXPECT_EQ(m["csv"]["columns"], kRatioCsvHeader);
  const std::string hash1 = m["config_hash"], point1 = m["entries"][0]["hash"];

  std::ostringstream out2;
  ASSERT_EQ(cmd_sweep(c, out2), 0);
  json m2 = json::parse(read_file(tmp.path() / "manifest.json"));
  EXPECT_EQ(m2["computed"], 0);
  EXPECT_EQ(m2["cached"], 1);
  EXPECT_EQ(m2["config_hash"], hash1);
  EXPECT_EQ(m2["entries"][0]["hash"], point1);
  std::ifstream csv2(tmp.path() / "ratio.csv");
  EXPECT_EQ(read_ratio_csv(csv2)[0].ratio, rows[0].ratio);
}

TEST(Sweep, ThreeLambdasGiveThreeRowsAndReuseCache) {
  TempDir tmp;
  RunConfig c = small_sweep(tmp.path());
  std::ostringstream out;
  ASSERT_EQ(cmd_sweep(c, out), 0);
  c.sweep_lambda = {8.0, 10.0, 12.0};
  ASSERT_EQ(cmd_sweep(c, out), 0);
  json m = json::parse(read_file(tmp.path() / "manifest.json"));
  EXPECT_EQ(m["computed"], 2);
  EXPECT_EQ(m["cached"], 1);
  std::ifstream csv(tmp.path() / "ratio.csv");
  auto rows = read_ratio_csv(csv);
  ASSERT_EQ(rows.size(), 3u);
  for (const auto& r : rows) EXPECT_NEAR(r.ratio, 1.0, 0.05) << r.lambda;
}

TEST(Sweep, FailedPointRecordedAndNonzeroExit) {
  TempDir tmp;
  RunConfig c = small_sweep(tmp.path());
  c.sweep_d1 = {0.6, 0.61};  // 0.61 is not a lattice vector at h = 0.06
  std::ostringstream out;
  EXPECT_EQ(cmd_sweep(c, out), 3);
  json m = json::parse(read_file(tmp.path() / "manifest.json"));
  EXPECT_EQ(m["failed"], 1);
  EXPECT_EQ(m["entries"][1]["status"], "failed");
  std::ifstream csv(tmp.path() / "ratio.csv");
  EXPECT_EQ(read_ratio_csv(csv).size(), 1u);
  // failed points are retried, not cached
  EXPECT_EQ(cmd_sweep(c, out), 3);
  EXPECT_EQ(json::parse(read_file(tmp.path() / "manifest.json"))["computed"], 1);
}

TEST(Plot, EmptyResultsWriteNothing) {
  TempDir tmp;
  RunConfig c;
  c.out_dir = tmp.path().string();
  std::ostringstream out;
  EXPECT_EQ(cmd_plot(c, out), 0);
  EXPECT_TRUE(fs::is_empty(tmp.path()));
  c.out_dir = (tmp.path() / "absent").string();
  EXPECT_EQ(guarded([&] { return cmd_plot(c, out); }), 2);
}

TEST(Plot, TunnelingCsvGivesTwoCurvesAndExactPlotData) {
  TempDir tmp;
  std::vector<RatioRow> rows = {{20, 0, 0.3, -1e3, -1e3 + 1e-5, 1.2345678901234567e-5, 6.1e-6, 1.0119, 1e-12, 100, 1.0},
                                {30, 0, 0.3, -2e3, -2e3 + 1e-8, 1.0000000000000002e-8, 5e-9, 1.0000000000000002, 1e-14, 100, 1.0},
                                {45, 0, 0.3, -3e3, -3e3 + 1e-12, 3.3e-12, 1.6e-12, 1.03125, 1e-16, 100, 1.0}};
  std::ostringstream csv;
  write_ratio_csv(rows, csv);
  atomic_write(tmp.path() / "ratio.csv", csv.str());
  RunConfig c;
  c.out_dir = tmp.path().string();
  std::ostringstream out;
  ASSERT_EQ(cmd_plot(c, out), 0);
  std::string svg = read_file(tmp.path() / "delta_rho.svg");
  EXPECT_EQ(count(svg, "<polyline"), 2);
  std::ifstream data(tmp.path() / "delta_rho.data.csv");
  CsvTable t = parse_csv(data);
  auto delta = t.values("Delta"), two_rho = t.values("two_abs_rho");
  for (size_t k = 0; k < rows.size(); ++k) {
    EXPECT_EQ(delta[k], rows[k].Delta);
    EXPECT_EQ(two_rho[k], 2 * rows[k].abs_rho);
  }
  std::ifstream rdata(tmp.path() / "ratio.data.csv");
  auto back = read_ratio_csv(rdata);
  for (size_t k = 0; k < rows.size(); ++k) EXPECT_EQ(back[k].ratio, rows[k].ratio);
}

TEST(Plot, SchemaErrorNamesColumn) {
  TempDir tmp;
  atomic_write(tmp.path() / "ratio.csv", "lambda,b,d1\n1,2,3\n");
  RunConfig c;
  c.out_dir = tmp.path().string();
  std::ostringstream out;
  EXPECT_EQ(guarded([&] { return cmd_plot(c, out); }), 2);
}

TEST(Checks, BlaschkeTableAndCertificates) {
  TempDir tmp;
  RunConfig c;
  c.out_dir = tmp.path().string();
  std::ostringstream out;
  EXPECT_EQ(cmd_blaschke_check(c, out), 0) << out.str();
  EXPECT_EQ(count(out.str(), "PASS"), 5) << out.str();
  json certs = json::parse(read_file(tmp.path() / "certificates.json"));
  EXPECT_EQ(certs.size(), 250u);
  for (const auto& cj : certs) EXPECT_GE(cj["margin"].get<double>(), 0.0);
  json rep = json::parse(read_file(tmp.path() / "blaschke-check.json"));
  EXPECT_TRUE(rep["all_pass"].get<bool>());
}

TEST(Checks, PartitionReport) {
  TempDir tmp;
  RunConfig c;
  c.out_dir = tmp.path().string();
  std::ostringstream out;
  EXPECT_EQ(cmd_partition_check(c, out), 0) << out.str();
  json rep = json::parse(read_file(tmp.path() / "partition-check.json"));
  EXPECT_LE(rep["report"]["max_overlap"].get<int>(), 4);
  EXPECT_EQ(rep["report"]["derivatives"].size(), 3u);
}

TEST(Spectrum, BundleAndFieldFile) {
  TempDir tmp;
  RunConfig c = small_sweep(tmp.path());
  c.write_fields = true;
  c.eigen_count = 2;
  std::ostringstream out;
  ASSERT_EQ(cmd_spectrum(c, out), 0);
  json j = json::parse(read_file(tmp.path() / "spectrum.json"));
  auto ev = j["result"]["eigenvalues"].get<std::vector<double>>();
  ASSERT_EQ(ev.size(), 2u);
  EXPECT_LT(ev[0], ev[1]);
  auto fields = decode_fields(read_file(tmp.path() / "spectrum_fields.bin"));
  ASSERT_EQ(fields.size(), 2u);
  EXPECT_NEAR(fields[0].norm(), 1.0, 1e-10);
  EXPECT_EQ(fields[0].grid.n1, j["grid"]["n1"].get<int>());
}
