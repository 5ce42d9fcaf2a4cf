#include "lrsdl/cli.hpp"

#include "lrsdl/archive.hpp"
#include "lrsdl/classifier.hpp"
#include "lrsdl/errors.hpp"
#include "lrsdl/learner.hpp"
#include "lrsdl/matrix_io.hpp"
#include "lrsdl/synthetic.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>

namespace lrsdl {

namespace fs = std::filesystem;

namespace {

struct SynthArgs {
  SyntheticConfig cfg;
  std::string out;
};

struct TrainArgs {
  std::string data, labels, out;
  Index kc = 0;
  Index k0 = 0;
  HyperParams hyper;
  MeanMode mean_mode = MeanMode::through;
  SweepMode sweep = SweepMode::sequential;
  CoderKind coder = CoderKind::joint;
};

struct ClassifyArgs {
  std::string model, data, labels, out;
  double w = -1.0;
};

struct BenchArgs {
  std::string data, labels, out;
  Index kc = 0;
  HyperParams hyper;
  bool identical_coders = false;
};

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

/// Loads data + labels, sorts columns by class and unit-normalizes them.
Dataset load_training(const std::string& data_path, const std::string& labels_path) {
  const Matrix Y = load_matrix(data_path);
  const auto labels = load_labels(labels_path);
  Dataset sorted = Dataset::from_unsorted(Y, labels).first;
  Matrix Yn = sorted.Y();
  normalize_columns(Yn);
  return Dataset(std::move(Yn), sorted.labels());
}

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  const SyntheticData s = generate_synthetic(a.cfg);
  const fs::path dir(a.out);
  ensure_dir(dir);
  save_matrix(s.data.Y(), dir / "Y.lmx");
  save_labels(s.data.labels(), dir / "labels.csv");
  save_matrix(s.truth.D, dir / "D.lmx");
  save_matrix(s.truth.D0, dir / "D0.lmx");
  out << "wrote " << s.data.dim() << "x" << s.data.size() << " samples to " << dir.string() << '\n';
  return kExitOk;
}

int cmd_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  const Dataset data = load_training(a.data, a.labels);
  TrainConfig cfg;
  cfg.hyper = a.hyper;
  cfg.atoms_per_class = a.kc;
  cfg.shared_atoms = a.k0;
  cfg.mean_mode = a.mean_mode;
  cfg.dict_sweep_mode = a.sweep;
  cfg.coder = a.coder;
  const LearnedModel model = fit(data, cfg);
  save_model(model, a.out);
  if (model.aborted) {
    err << "training aborted: " << model.abort_reason << '\n';
    return kExitNumerical;
  }
  const double final_obj = model.trace.empty() ? model.initial_objective : model.trace.back().objective;
  out << "objective=" << format_double(final_obj) << " iterations=" << model.trace.size() << '\n';
  return kExitOk;
}

int cmd_classify(const ClassifyArgs& a, std::ostream& out) {
  const LearnedModel model = load_model(a.model);
  const Matrix Y = load_matrix(a.data);
  if (Y.rows() != model.dim()) {
    throw DimensionError("data dimension " + std::to_string(Y.rows()) +
                         " differs from model dimension " + std::to_string(model.dim()));
  }
  std::vector<int> labels;
  if (!a.labels.empty()) {
    labels = load_labels(a.labels);
    if (static_cast<Index>(labels.size()) != Y.cols()) {
      throw DimensionError("labels: " + std::to_string(labels.size()) + " entries for " +
                           std::to_string(Y.cols()) + " samples");
    }
    for (int l : labels) {
      if (l > model.num_classes()) throw DataError("label " + std::to_string(l) + " exceeds C");
    }
  }
  const double w = a.w >= 0.0 ? a.w : model.hyper.w;
  const Classifier clf(model);
  const int C = model.num_classes();
  Eigen::MatrixXi confusion = Eigen::MatrixXi::Zero(C, C);
  Index correct = 0;
  std::string csv = "index,true_label,pred_label,score_pred\n";
  for (Index j = 0; j < Y.cols(); ++j) {
    const Prediction p = clf.classify(Y.col(j), w);
    const int truth = labels.empty() ? 0 : labels[j];
    csv += std::to_string(j) + ',' + std::to_string(truth) + ',' + std::to_string(p.label) + ',' +
           format_double(p.per_class_scores(p.label - 1)) + '\n';
    if (truth > 0) {
      ++confusion(truth - 1, p.label - 1);
      if (truth == p.label) ++correct;
    }
  }
  const fs::path pred_path(a.out);
  if (pred_path.has_parent_path()) ensure_dir(pred_path.parent_path());
  write_text(pred_path, csv);
  if (!labels.empty()) {
    const double acc = Y.cols() > 0 ? static_cast<double>(correct) / static_cast<double>(Y.cols()) : 0.0;
    out << "accuracy=" << fixed(acc, 4) << '\n';
    std::string grid;
    for (int i = 0; i < C; ++i) {
      for (int j = 0; j < C; ++j) {
        if (j > 0) grid += ',';
        grid += std::to_string(confusion(i, j));
      }
      grid += '\n';
    }
    write_text(pred_path.parent_path() / "confusion.csv", grid);
  }
  return kExitOk;
}

int cmd_bench(const BenchArgs& a, std::ostream& out, std::ostream& err) {
  const Dataset data = load_training(a.data, a.labels);
  TrainConfig cfg;
  cfg.hyper = a.hyper;
  cfg.atoms_per_class = a.kc > 0 ? a.kc : data.per_class();
  cfg.shared_atoms = 0;
  const BenchResult r = bench_joint_vs_sequential(data, cfg, a.identical_coders);
  const fs::path dir(a.out);
  ensure_dir(dir);
  write_text(dir / "joint.csv", format_trace_csv(r.joint.trace));
  write_text(dir / "sequential.csv", format_trace_csv(r.sequential.trace));
  if (r.joint.aborted || r.sequential.aborted || r.joint.trace.empty() ||
      r.sequential.trace.empty()) {
    err << "bench aborted: " << r.joint.abort_reason << r.sequential.abort_reason << '\n';
    return kExitNumerical;
  }
  const auto& jl = r.joint.trace.back();
  const auto& sl = r.sequential.trace.back();
  out << "joint_final=" << format_double(jl.objective) << " seq_final=" << format_double(sl.objective)
      << " joint_time=" << format_double(jl.elapsed_seconds)
      << " seq_time=" << format_double(sl.elapsed_seconds) << '\n';
  const double ja = evaluate(data, r.joint, cfg.hyper.w).accuracy;
  const double sa = evaluate(data, r.sequential, cfg.hyper.w).accuracy;
  out << "joint_train_accuracy=" << fixed(ja, 4) << " seq_train_accuracy=" << fixed(sa, 4) << '\n';
  return kExitOk;
}

void add_hyper_flags(CLI::App* cmd, HyperParams& h) {
  cmd->add_option("--lambda1", h.lambda1, "l1 weight")->capture_default_str();
  cmd->add_option("--lambda2", h.lambda2, "Fisher weight")->capture_default_str();
  cmd->add_option("--iters", h.outer_iters, "outer iterations")->capture_default_str();
  cmd->add_option("--seed", h.seed, "random seed")->capture_default_str();
  cmd->add_option("--fista-iters", h.fista_iters, "FISTA iterations per training solve")
      ->capture_default_str();
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Low-rank shared dictionary learning"};
  app.require_subcommand(1);

  SynthArgs sa;
  auto* synth = app.add_subcommand("synth", "generate a synthetic labelled dataset");
  synth->add_option("--classes", sa.cfg.num_classes)->required();
  synth->add_option("--dim", sa.cfg.dim)->required();
  synth->add_option("--per-class", sa.cfg.per_class)->required();
  synth->add_option("--kc", sa.cfg.atoms_per_class, "atoms per class dictionary")->capture_default_str();
  synth->add_option("--k0", sa.cfg.shared_atoms, "shared atoms")->capture_default_str();
  synth->add_option("--shared-rank", sa.cfg.shared_rank)->capture_default_str();
  synth->add_option("--noise", sa.cfg.noise_sigma, "noise standard deviation")->capture_default_str();
  synth->add_option("--seed", sa.cfg.seed)->capture_default_str();
  synth->add_option("--class-nnz", sa.cfg.class_nnz)->capture_default_str();
  synth->add_option("--shared-nnz", sa.cfg.shared_nnz)->capture_default_str();
  synth->add_option("--class-scale", sa.cfg.class_scale)->capture_default_str();
  synth->add_option("--shared-scale", sa.cfg.shared_scale)->capture_default_str();
  synth->add_option("--out", sa.out, "output directory")->required();

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "learn class and shared dictionaries");
  train->add_option("--data", ta.data, "sample matrix (d x N), LMX or CSV")->required();
  train->add_option("--labels", ta.labels, "labels file")->required();
  train->add_option("--kc", ta.kc, "atoms per class dictionary")->required();
  train->add_option("--k0", ta.k0, "shared atoms")->capture_default_str();
  add_hyper_flags(train, ta.hyper);
  train->add_option("--eta", ta.hyper.eta, "nuclear-norm weight")->capture_default_str();
  train->add_option("--w", ta.hyper.w, "classification balance stored in the model")->capture_default_str();
  train->add_option("--test-fista-iters", ta.hyper.test_fista_iters)->capture_default_str();
  train->add_option("--admm-iters", ta.hyper.admm_iters)->capture_default_str();
  train->add_option("--admm-rho", ta.hyper.admm_rho)->capture_default_str();
  train->add_option("--mean-mode", ta.mean_mode)
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, MeanMode>{{"through", MeanMode::through}, {"frozen", MeanMode::frozen}}));
  train->add_option("--dict-sweep", ta.sweep)
      ->transform(CLI::CheckedTransformer(std::map<std::string, SweepMode>{
          {"sequential", SweepMode::sequential}, {"jacobi", SweepMode::jacobi}}));
  train->add_option("--coder", ta.coder)
      ->transform(CLI::CheckedTransformer(std::map<std::string, CoderKind>{
          {"joint", CoderKind::joint}, {"sequential", CoderKind::sequential}}));
  train->add_option("--out", ta.out, "model directory")->required();

  ClassifyArgs ca;
  auto* cls = app.add_subcommand("classify", "label samples with a trained model");
  cls->add_option("--model", ca.model, "model directory")->required();
  cls->add_option("--data", ca.data, "sample matrix (d x N)")->required();
  cls->add_option("--labels", ca.labels, "true labels; enables accuracy and confusion.csv");
  cls->add_option("--w", ca.w, "balance between residual and coefficient terms (default: model's)");
  cls->add_option("--out", ca.out, "predictions CSV")->required();

  BenchArgs ba;
  auto* bench = app.add_subcommand("bench", "joint vs per-class sequential sparse coding");
  bench->add_option("--data", ba.data)->required();
  bench->add_option("--labels", ba.labels)->required();
  bench->add_option("--kc", ba.kc, "atoms per class (default: samples per class)");
  add_hyper_flags(bench, ba.hyper);
  bench->add_option("--out", ba.out, "output directory")->required();
  bench->add_flag("--identical-coders", ba.identical_coders)->group("");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*synth) return cmd_synth(sa, out);
    if (*train) {
      if (ta.hyper.outer_iters < 1) throw ParameterError("--iters must be >= 1");
      return cmd_train(ta, out, err);
    }
    if (*cls) {
      if (cls->count("--w") > 0 && (ca.w < 0.0 || ca.w > 1.0)) {
        throw ParameterError("--w must lie in [0, 1]");
      }
      return cmd_classify(ca, out);
    }
    if (*bench) return cmd_bench(ba, out, err);
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace lrsdl
