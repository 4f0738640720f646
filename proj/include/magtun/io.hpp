#pragma once

// Result persistence: JSON bundles, the ratio and kernel CSV tables, and a
// little-endian binary container for eigenvector fields. Files are written
// to a temporary sibling and renamed so readers never see partial output.

#include <json.hpp>

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unistd.h>
#include <vector>

#include "magtun/blaschke.hpp"
#include "magtun/landau.hpp"
#include "magtun/partition.hpp"
#include "magtun/spectral.hpp"
#include "magtun/tunneling.hpp"

namespace magtun {

namespace fs = std::filesystem;
using nlohmann::json;

class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void atomic_write(const fs::path& path, const std::string& bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + tmp.string());
    os.write(bytes.data(), std::streamsize(bytes.size()));
    if (!os) throw std::runtime_error("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

inline void atomic_write_json(const fs::path& path, const json& j) { atomic_write(path, j.dump(2) + "\n"); }

inline std::string read_file(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

// ------------------------------------------------------------------- JSON

inline void to_json(json& j, const Grid2D& g) {
  j = {{"n1", g.n1}, {"n2", g.n2}, {"h", g.h}, {"L1", g.L1}, {"L2", g.L2}};
}

inline void to_json(json& j, const ModelParams& p) {
  j = {{"lambda", p.lambda}, {"b", p.b}, {"d1", p.d1}, {"a", p.a},
       {"hessian", {{p.hessian(0, 0), p.hessian(0, 1)}, {p.hessian(1, 0), p.hessian(1, 1)}}},
       {"mu", {p.mu.real(), p.mu.imag()}}, {"epsilon", p.epsilon}, {"separation_C", p.separation_C}};
}

inline void to_json(json& j, const SpectralResult& r) {
  j = {{"eigenvalues", r.eigenvalues},
       {"residuals", r.residuals},
       {"orthogonality_defect", r.orthogonality_defect},
       {"method", r.method},
       {"iterations", r.iterations}};
  if (!r.eigenvectors.empty()) j["grid"] = r.eigenvectors.front().grid;
}

inline void to_json(json& j, const HoppingResult& h) {
  j = {{"rho", {h.rho.real(), h.rho.imag()}},
       {"abs_rho", h.abs_rho},
       {"quadrature_error", h.quadrature_error},
       {"phase_convention", h.phase_convention}};
}

inline void to_json(json& j, const SplittingResult& s) {
  j = {{"E0", s.E0}, {"E1", s.E1}, {"E2", s.E2}, {"Delta", s.delta},
       {"clearance", s.clearance}, {"warning", s.warning}, {"spectrum", s.spectrum}};
}

inline void to_json(json& j, const RatioRow& r) {
  j = {{"lambda", r.lambda}, {"b", r.b}, {"d1", r.d1}, {"E0", r.E0}, {"E1", r.E1}, {"Delta", r.Delta},
       {"abs_rho", r.abs_rho}, {"ratio", r.ratio}, {"quad_err", r.quad_err}, {"grid_n", r.grid_n},
       {"grid_L", r.grid_L}};
}

inline void from_json(const json& j, RatioRow& r) {
  r.lambda = j.at("lambda");
  r.b = j.at("b");
  r.d1 = j.at("d1");
  r.E0 = j.at("E0");
  r.E1 = j.at("E1");
  r.Delta = j.at("Delta");
  r.abs_rho = j.at("abs_rho");
  r.ratio = j.at("ratio");
  r.quad_err = j.at("quad_err");
  r.grid_n = j.at("grid_n");
  r.grid_L = j.at("grid_L");
}

inline void to_json(json& j, const LowerBoundCertificate& c) {
  j = {{"mode", c.mode}, {"delta_or_R", c.delta_or_R}, {"alpha", c.alpha}, {"beta", c.beta},
       {"measured_avg", c.measured_avg}, {"quad_err", c.quad_err}, {"theorem_bound", c.theorem_bound},
       {"margin", c.margin}, {"mu0_estimate", c.mu0_estimate}};
}

inline void to_json(json& j, const PartitionReport& r) {
  j = {{"max_sum_defect", r.max_sum_defect}, {"max_overlap", r.max_overlap}, {"max_chi", r.max_chi},
       {"psi_covers_chi", r.psi_covers_chi}, {"supports_ok", r.supports_ok}, {"derivatives", json::array()}};
  for (const auto& d : r.derivatives)
    j["derivatives"].push_back({{"order", d.order}, {"exponent", d.exponent}, {"scales", d.scales}, {"maxima", d.maxima}});
}

inline void to_json(json& j, const DecayFit& f) {
  j = {{"rate", f.rate}, {"band", f.band}, {"decades", f.decades}, {"low_dynamic_range", f.low_dynamic_range},
       {"distances", f.distances}, {"log_norms", f.log_norms}};
}

// -------------------------------------------------------------------- CSV

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  int column(const std::string& name) const {
    for (size_t k = 0; k < header.size(); ++k)
      if (header[k] == name) return int(k);
    throw SchemaError("missing column '" + name + "'");
  }
  std::vector<double> values(const std::string& name) const {
    int c = column(name);
    std::vector<double> v;
    for (const auto& r : rows) v.push_back(r[c]);
    return v;
  }
};

inline CsvTable parse_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) return t;
  t.header = split_csv_line(line);
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != t.header.size())
      throw SchemaError("line " + std::to_string(lineno) + ": expected " + std::to_string(t.header.size()) +
                        " cells, got " + std::to_string(cells.size()));
    std::vector<double> r;
    for (size_t k = 0; k < cells.size(); ++k) {
      try {
        size_t used = 0;
        r.push_back(std::stod(cells[k], &used));
        if (used != cells[k].size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw SchemaError("line " + std::to_string(lineno) + ": column '" + t.header[k] + "' is not numeric");
      }
    }
    t.rows.push_back(std::move(r));
  }
  return t;
}

inline std::vector<RatioRow> read_ratio_csv(std::istream& in) {
  CsvTable t = parse_csv(in);
  std::vector<RatioRow> out(t.rows.size());
  const char* names[] = {"lambda", "b", "d1", "E0", "E1", "Delta", "abs_rho", "ratio", "quad_err", "grid_n", "grid_L"};
  std::vector<int> col;
  for (const char* n : names) col.push_back(t.column(n));
  for (size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    out[i] = {r[col[0]], r[col[1]], r[col[2]], r[col[3]], r[col[4]], r[col[5]],
              r[col[6]], r[col[7]], r[col[8]], int(r[col[9]]), r[col[10]]};
  }
  return out;
}

struct KernelSample {
  Vec2 x, y;
  double s_or_mu;
  cd value;
  double abs_err;
};

inline constexpr const char* kKernelCsvHeader = "x1,x2,y1,y2,s_or_mu,re,im,abs_err";

inline void write_kernel_csv(const std::vector<KernelSample>& rows, std::ostream& out) {
  out << kKernelCsvHeader << '\n';
  out.precision(17);
  for (const auto& r : rows)
    out << r.x(0) << ',' << r.x(1) << ',' << r.y(0) << ',' << r.y(1) << ',' << r.s_or_mu << ',' << r.value.real()
        << ',' << r.value.imag() << ',' << r.abs_err << '\n';
}

// ------------------------------------------------------- binary field file
//
// header (little-endian): magic "MAGTUNF\0", u32 version = 1, u32 count,
// u32 n1, u32 n2, f64 h, f64 L1, f64 L2; then count * n1 * n2 complex
// values as (re, im) f64 pairs, row index i1 major.

inline constexpr char kFieldMagic[8] = {'M', 'A', 'G', 'T', 'U', 'N', 'F', '\0'};

namespace detail {

template <class T>
void put_le(std::string& out, T v) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  out.append(reinterpret_cast<const char*>(b), sizeof(T));
}

template <class T>
T get_le(const std::string& in, size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw SchemaError("field file truncated");
  unsigned char b[sizeof(T)];
  std::memcpy(b, in.data() + pos, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  pos += sizeof(T);
  T v;
  std::memcpy(&v, b, sizeof(T));
  return v;
}

}  // namespace detail

inline std::string encode_fields(const std::vector<Field>& fields) {
  if (fields.empty()) throw SchemaError("no fields to encode");
  const Grid2D& g = fields.front().grid;
  std::string out(kFieldMagic, 8);
  detail::put_le<uint32_t>(out, 1);
  detail::put_le<uint32_t>(out, uint32_t(fields.size()));
  detail::put_le<uint32_t>(out, uint32_t(g.n1));
  detail::put_le<uint32_t>(out, uint32_t(g.n2));
  detail::put_le<double>(out, g.h);
  detail::put_le<double>(out, g.L1);
  detail::put_le<double>(out, g.L2);
  for (const Field& f : fields) {
    if (!(f.grid == g)) throw SchemaError("fields live on different grids");
    for (int k = 0; k < f.values.size(); ++k) {
      detail::put_le<double>(out, f.values(k).real());
      detail::put_le<double>(out, f.values(k).imag());
    }
  }
  return out;
}

inline std::vector<Field> decode_fields(const std::string& in) {
  if (in.size() < 8 || std::memcmp(in.data(), kFieldMagic, 8) != 0) throw SchemaError("not a field file");
  size_t pos = 8;
  if (detail::get_le<uint32_t>(in, pos) != 1) throw SchemaError("unsupported field file version");
  uint32_t count = detail::get_le<uint32_t>(in, pos);
  Grid2D g;
  g.n1 = int(detail::get_le<uint32_t>(in, pos));
  g.n2 = int(detail::get_le<uint32_t>(in, pos));
  g.h = detail::get_le<double>(in, pos);
  g.L1 = detail::get_le<double>(in, pos);
  g.L2 = detail::get_le<double>(in, pos);
  std::vector<Field> out;
  for (uint32_t c = 0; c < count; ++c) {
    Field f(g);
    for (int k = 0; k < g.size(); ++k) {
      double re = detail::get_le<double>(in, pos);
      f.values(k) = cd(re, detail::get_le<double>(in, pos));
    }
    out.push_back(std::move(f));
  }
  if (pos != in.size()) throw SchemaError("trailing bytes in field file");
  return out;
}

}  // namespace magtun
