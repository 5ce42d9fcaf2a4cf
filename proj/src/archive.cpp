#include "lrsdl/archive.hpp"

#include "lrsdl/errors.hpp"
#include "lrsdl/matrix_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace lrsdl {

namespace fs = std::filesystem;

namespace {

template <class T>
T meta_number(const std::map<std::string, std::string>& meta, const std::string& key) {
  const auto it = meta.find(key);
  if (it == meta.end()) throw FormatError("meta: missing key '" + key + "'");
  const std::string& s = it->second;
  T v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw FormatError("meta: bad value for '" + key + "': " + s);
  }
  return v;
}

void expect_shape(const std::string& name, const Matrix& M, Index rows, Index cols) {
  if (M.rows() != rows || M.cols() != cols) {
    detail::throw_dimension("archive " + name, rows, cols, M.rows(), M.cols());
  }
}

}  // namespace

std::map<std::string, std::string> read_meta(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::map<std::string, std::string> meta;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos || eq == 0) throw FormatError("meta: malformed line '" + line + "'");
    meta[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return meta;
}

void save_model(const LearnedModel& model, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  const auto& h = model.hyper;
  std::ostringstream meta;
  meta << "format_version=" << kArchiveFormatVersion << '\n'
       << "c=" << model.dicts.num_classes << '\n'
       << "d=" << model.dicts.dim() << '\n'
       << "k_c=" << model.dicts.atoms_per_class << '\n'
       << "k0=" << model.dicts.shared_atoms() << '\n'
       << "lambda1=" << format_double(h.lambda1) << '\n'
       << "lambda2=" << format_double(h.lambda2) << '\n'
       << "eta=" << format_double(h.eta) << '\n'
       << "w=" << format_double(h.w) << '\n'
       << "seed=" << h.seed << '\n'
       << "outer_iters=" << h.outer_iters << '\n'
       << "fista_iters=" << h.fista_iters << '\n'
       << "test_fista_iters=" << h.test_fista_iters << '\n'
       << "admm_iters=" << h.admm_iters << '\n'
       << "odl_sweeps=" << h.odl_sweeps << '\n'
       << "fista_tol=" << format_double(h.fista_tol) << '\n'
       << "admm_rho=" << format_double(h.admm_rho) << '\n'
       << "status=" << (model.aborted ? "aborted" : "ok") << '\n';
  {
    std::ofstream out(dir / "meta", std::ios::trunc);
    if (!out) throw IoError("cannot write " + (dir / "meta").string());
    out << meta.str();
  }
  save_matrix(model.dicts.D, dir / "D.lmx");
  save_matrix(model.dicts.D0, dir / "D0.lmx");
  save_matrix(model.means.mc, dir / "means_mc.lmx");
  save_matrix(Matrix(model.means.m0), dir / "mean_m0.lmx");
  std::ofstream trace(dir / "trace.csv", std::ios::trunc);
  if (!trace) throw IoError("cannot write " + (dir / "trace.csv").string());
  trace << format_trace_csv(model.trace);
}

LearnedModel load_model(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("model directory not found: " + dir.string());
  const auto meta = read_meta(dir / "meta");
  const int version = meta_number<int>(meta, "format_version");
  if (version != kArchiveFormatVersion) {
    throw FormatError("meta: unsupported format_version " + std::to_string(version));
  }
  LearnedModel model;
  const int C = meta_number<int>(meta, "c");
  const Index d = meta_number<Index>(meta, "d");
  const Index k = meta_number<Index>(meta, "k_c");
  const Index k0 = meta_number<Index>(meta, "k0");
  auto& h = model.hyper;
  h.lambda1 = meta_number<double>(meta, "lambda1");
  h.lambda2 = meta_number<double>(meta, "lambda2");
  h.eta = meta_number<double>(meta, "eta");
  h.w = meta_number<double>(meta, "w");
  h.seed = meta_number<std::uint64_t>(meta, "seed");
  h.outer_iters = meta_number<int>(meta, "outer_iters");
  h.fista_iters = meta_number<int>(meta, "fista_iters");
  h.test_fista_iters = meta_number<int>(meta, "test_fista_iters");
  h.admm_iters = meta_number<int>(meta, "admm_iters");
  h.odl_sweeps = meta_number<int>(meta, "odl_sweeps");
  h.fista_tol = meta_number<double>(meta, "fista_tol");
  h.admm_rho = meta_number<double>(meta, "admm_rho");
  h.validate();
  const auto status = meta.find("status");
  model.aborted = status != meta.end() && status->second == "aborted";

  model.dicts.num_classes = C;
  model.dicts.atoms_per_class = k;
  model.dicts.D = load_matrix(dir / "D.lmx");
  model.dicts.D0 = load_matrix(dir / "D0.lmx");
  model.means.mc = load_matrix(dir / "means_mc.lmx");
  const Matrix m0 = load_matrix(dir / "mean_m0.lmx");
  expect_shape("D.lmx", model.dicts.D, d, C * k);
  expect_shape("D0.lmx", model.dicts.D0, d, k0);
  expect_shape("means_mc.lmx", model.means.mc, C * k, C);
  expect_shape("mean_m0.lmx", m0, k0, k0 > 0 ? 1 : m0.cols());
  model.means.m0 = k0 > 0 ? Vector(m0.col(0)) : Vector(0);
  model.means.m = model.means.mc.rowwise().mean();
  return model;
}

}  // namespace lrsdl
