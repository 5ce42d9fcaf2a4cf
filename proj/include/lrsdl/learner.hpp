#pragma once

#include "lrsdl/gradients.hpp"
#include "lrsdl/types.hpp"

#include <string>
#include <vector>

namespace lrsdl {

/// How the class means inside the Fisher term are treated during an X solve.
enum class MeanMode {
  frozen,   ///< means fixed at the start of the solve (majorize-minimize)
  through,  ///< means differentiated along with X
};

/// Order of the class-dictionary updates within one outer iteration.
enum class SweepMode {
  sequential,  ///< Gauss-Seidel: each D_c sees the already-updated D_1..D_{c-1}
  jacobi,      ///< all subproblems assembled from one snapshot, written back together
};

/// Sparse coder for the X step.
enum class CoderKind {
  joint,       ///< all classes at once through the stacked structure
  sequential,  ///< one class block at a time, cycling (FDDL-style)
};

struct TrainConfig {
  HyperParams hyper;
  Index atoms_per_class = 1;
  Index shared_atoms = 0;
  MeanMode mean_mode = MeanMode::through;
  SweepMode dict_sweep_mode = SweepMode::sequential;
  CoderKind coder = CoderKind::joint;
  /// Passes over the classes for CoderKind::sequential; each class solve gets
  /// ceil(fista_iters / passes) iterations.
  int sequential_passes = 3;
  int trace_every = 1;
  int power_iters = 200;

  void validate() const;
};

struct IterationRecord {
  int iter = 0;
  double objective = 0.0;
  double elapsed_seconds = 0.0;
  ObjectiveTerms terms;
};

struct TrainState {
  DictionaryBundle dicts;
  CoefBundle coefs;
};

struct LearnedModel {
  DictionaryBundle dicts;
  MeanStats means;
  HyperParams hyper;
  std::vector<IterationRecord> trace;
  double initial_objective = 0.0;
  bool aborted = false;
  std::string abort_reason;
  /// Outer iterations whose objective rose by more than 1e-6 relative.
  int objective_increases = 0;
  Index dead_atoms = 0;
  Index shared_rejections = 0;

  int num_classes() const { return dicts.num_classes; }
  Index dim() const { return dicts.dim(); }
};

/// D_c from k_c randomly chosen (unit-normalized) class-c samples, D0 from the
/// leading k0 left singular vectors of Y, zero coefficients.
/// Throws ParameterError when k0 > min(d, N).
TrainState initialize(const Dataset& data, const TrainConfig& config, std::uint64_t seed);

/// X step then X0 step, each by FISTA, warm-started from `coefs`.
CoefBundle sparse_code_train(const Dataset& data, const DictionaryBundle& dicts,
                             const CoefBundle& coefs, const HyperParams& hyper,
                             MeanMode mean_mode = MeanMode::through, int power_iters = 200);

/// X step one class block at a time (each X_c solved with all others fixed,
/// `passes` cycles over the classes), then the same X0 step.
CoefBundle sparse_code_train_sequential(const Dataset& data, const DictionaryBundle& dicts,
                                        const CoefBundle& coefs, const HyperParams& hyper,
                                        int passes = 3, int power_iters = 200);

/// ODL update of every D_c. Returns the number of dead atoms seen.
Index update_class_dicts(const Dataset& data, DictionaryBundle& dicts, const CoefBundle& coefs,
                         const HyperParams& hyper, SweepMode mode = SweepMode::sequential);

/// D0 step. Returns false when the ADMM proposal was rejected.
bool update_shared(const Dataset& data, DictionaryBundle& dicts, const CoefBundle& coefs,
                   const HyperParams& hyper);

/// Alternates X -> X0 -> D_1..D_C -> D0 for hyper.outer_iters iterations.
/// A numerical failure stops training and returns the last good model with
/// `aborted` set.
LearnedModel fit(const Dataset& data, const TrainConfig& config);

struct BenchResult {
  LearnedModel joint;
  LearnedModel sequential;
};

/// Trains twice from the same initialization, once with the joint coder and
/// once with the sequential one. Requires shared_atoms == 0. With
/// identical_coders both runs use the joint coder.
BenchResult bench_joint_vs_sequential(const Dataset& data, const TrainConfig& config,
                                      bool identical_coders = false);

/// "iter,objective,fidelity,l1,fisher,nuclear,seconds" plus one row per record.
std::string format_trace_csv(const std::vector<IterationRecord>& trace);

}  // namespace lrsdl
