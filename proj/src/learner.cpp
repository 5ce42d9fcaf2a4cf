#include "lrsdl/learner.hpp"

#include "lrsdl/dictupdate.hpp"
#include "lrsdl/errors.hpp"
#include "lrsdl/matrix_io.hpp"
#include "lrsdl/prox.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

namespace lrsdl {

namespace {

constexpr std::uint64_t kPowerSeed = 0x5eed;
constexpr double kIncreaseSlack = 1e-6;

/// Class-wise sufficient statistics of X for evaluating f without touching
/// the other class blocks.
struct ClassStats {
  Vector sum;
  double within = 0.0;
  double sq = 0.0;
};

ClassStats class_stats(const Eigen::Ref<const Matrix>& Xc) {
  ClassStats s;
  s.sum = Xc.rowwise().sum();
  const Vector mean = s.sum / static_cast<double>(Xc.cols());
  s.within = (Xc.colwise() - mean).squaredNorm();
  s.sq = Xc.squaredNorm();
  return s;
}

double fisher_from_stats(const std::vector<ClassStats>& stats, Index per_class) {
  const double n = static_cast<double>(per_class);
  Vector total = Vector::Zero(stats.front().sum.size());
  for (const auto& s : stats) total += s.sum;
  const Vector m = total / (n * static_cast<double>(stats.size()));
  double f = 0.0;
  for (const auto& s : stats) f += s.within + s.sq - n * (s.sum / n - m).squaredNorm();
  return f;
}

Matrix solve_shared_codes(const Dataset& data, const DictionaryBundle& dicts,
                          const CoefBundle& coefs, const HyperParams& hyper, int power_iters) {
  const auto [Ybar, Ytilde] = residual_matrices(data, dicts, coefs);
  const Matrix Ysum = Ybar + Ytilde;
  const Matrix V = 0.5 * Ysum;
  const Matrix& D0 = dicts.D0;
  const Matrix M0 = coefs.X0.rowwise().mean().replicate(1, coefs.X0.cols());
  const double lambda2 = hyper.lambda2;

  // 2 D0^T D0 X0 - D0^T Ysum + lambda2 (X0 - M0) with M0 held fixed.
  const Matrix DtD0 = 2.0 * D0.transpose() * D0;
  QuadraticObjective q;
  q.hessian = [&](const Matrix& X0) { return Matrix(DtD0 * X0 + lambda2 * X0); };
  q.linear = D0.transpose() * Ysum + lambda2 * M0;
  q.constant = V.squaredNorm() + 0.5 * lambda2 * M0.squaredNorm();
  q.lipschitz = power_iteration_lipschitz(DtD0, power_iters, kPowerSeed) + lambda2;
  return fista(q, hyper.lambda1, coefs.X0, hyper.fista_iters, hyper.fista_tol).W;
}

Matrix solve_joint_codes(const Dataset& data, const DictionaryBundle& dicts,
                         const CoefBundle& coefs, const HyperParams& hyper, MeanMode mean_mode,
                         int power_iters) {
  const HatProducts hat =
      build_hat_products(dicts, shared_shifted(data, dicts, coefs), data.per_class());
  const auto& labels = data.labels();
  const int C = data.num_classes();
  const double half_l2 = 0.5 * hyper.lambda2;

  // Fisher gradient has Lipschitz constant 4, scaled by lambda2 / 2.
  const double lipschitz =
      power_iteration_lipschitz(hat.gram(), power_iters, kPowerSeed) + 2.0 * hyper.lambda2;

  if (hyper.lambda2 == 0.0 || mean_mode == MeanMode::through) {
    // f is a homogeneous quadratic whose gradient 4X + 2M - 4M_c is linear in X.
    QuadraticObjective q;
    q.hessian = [&](const Matrix& X) {
      Matrix HX = hat.apply_gram(X);
      if (hyper.lambda2 > 0.0) HX += half_l2 * grad_fisher_X(X, labels, C);
      return HX;
    };
    q.linear = hat.DtYbar;
    q.constant = 0.5 * hat.yhat_sq;
    q.lipschitz = lipschitz;
    return fista(q, hyper.lambda1, coefs.X, hyper.fista_iters, hyper.fista_tol).W;
  }

  const Matrix anchor = coefs.X;
  const MeanStats frozen = mean_stats(anchor, Matrix(0, anchor.cols()), labels, C);
  SmoothObjective obj;
  obj.lipschitz = lipschitz;
  obj.grad = [&](const Matrix& X) {
    return Matrix(grad_fidelity_X(hat, X) + half_l2 * grad_fisher_X(X, labels, frozen));
  };
  obj.value = [&](const Matrix& X) {
    return hat.half_fidelity(X) + half_l2 * fisher_surrogate_value(X, anchor, labels, frozen);
  };
  return fista(obj, hyper.lambda1, coefs.X, hyper.fista_iters, hyper.fista_tol).W;
}

Matrix random_unit(Index d, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(d);
  for (Index i = 0; i < d; ++i) v(i) = normal(rng);
  return v / v.norm();
}

}  // namespace

void TrainConfig::validate() const {
  hyper.validate();
  if (atoms_per_class < 1) throw ParameterError("k_c must be >= 1");
  if (shared_atoms < 0) throw ParameterError("k0 must be >= 0");
  if (sequential_passes < 1) throw ParameterError("sequential_passes must be >= 1");
  if (trace_every < 1) throw ParameterError("trace_every must be >= 1");
  if (power_iters < 1) throw ParameterError("power_iters must be >= 1");
}

TrainState initialize(const Dataset& data, const TrainConfig& config, std::uint64_t seed) {
  config.validate();
  const Index d = data.dim();
  const Index N = data.size();
  const Index n = data.per_class();
  const Index k = config.atoms_per_class;
  const Index k0 = config.shared_atoms;
  const int C = data.num_classes();
  if (k0 > std::min(d, N)) {
    throw ParameterError("k0 = " + std::to_string(k0) + " exceeds min(d, N) = " +
                         std::to_string(std::min(d, N)));
  }
  if (k > n) {
    warn("k_c = " + std::to_string(k) + " exceeds samples per class " + std::to_string(n) +
         "; some atoms repeat samples");
  }

  std::mt19937_64 rng(seed);
  TrainState st;
  st.dicts.num_classes = C;
  st.dicts.atoms_per_class = k;
  st.dicts.D.resize(d, C * k);
  for (int c = 0; c < C; ++c) {
    std::vector<Index> order(n);
    std::iota(order.begin(), order.end(), Index{0});
    std::shuffle(order.begin(), order.end(), rng);
    std::uniform_int_distribution<Index> pick(0, n - 1);
    auto block = data.class_block(c);
    for (Index j = 0; j < k; ++j) {
      const Index src = j < n ? order[j] : pick(rng);
      st.dicts.D.col(c * k + j) = block.col(src);
    }
  }
  normalize_columns(st.dicts.D);
  for (Index j = 0; j < st.dicts.D.cols(); ++j) {
    if (st.dicts.D.col(j).norm() == 0.0) st.dicts.D.col(j) = random_unit(d, rng);
  }

  if (k0 > 0) {
    Eigen::BDCSVD<Matrix> svd(data.Y(), Eigen::ComputeThinU);
    if (svd.info() != Eigen::Success) throw NumericalError("initialize: SVD of Y failed");
    st.dicts.D0 = svd.matrixU().leftCols(k0);
  } else {
    st.dicts.D0 = Matrix::Zero(d, 0);
  }
  st.coefs = CoefBundle::zeros(st.dicts, n);
  return st;
}

CoefBundle sparse_code_train(const Dataset& data, const DictionaryBundle& dicts,
                             const CoefBundle& coefs, const HyperParams& hyper,
                             MeanMode mean_mode, int power_iters) {
  CoefBundle out = coefs;
  out.X = solve_joint_codes(data, dicts, coefs, hyper, mean_mode, power_iters);
  if (dicts.shared_atoms() > 0) out.X0 = solve_shared_codes(data, dicts, out, hyper, power_iters);
  return out;
}

CoefBundle sparse_code_train_sequential(const Dataset& data, const DictionaryBundle& dicts,
                                        const CoefBundle& coefs, const HyperParams& hyper,
                                        int passes, int power_iters) {
  if (passes < 1) throw ParameterError("sequential coder: passes must be >= 1");
  const int C = data.num_classes();
  const Index n = data.per_class();
  const Index k = dicts.atoms_per_class;
  const Index N = data.size();
  const double half_l2 = 0.5 * hyper.lambda2;
  const int iters_per_solve = (hyper.fista_iters + passes - 1) / passes;
  const Matrix Ys = shared_shifted(data, dicts, coefs);

  CoefBundle out = coefs;
  std::vector<ClassStats> stats(C);
  for (int c = 0; c < C; ++c) stats[c] = class_stats(out.class_cols(c));

  for (int p = 0; p < passes; ++p) {
    for (int c = 0; c < C; ++c) {
      // Each class subproblem is set up from scratch: its own Gram, linear
      // term and step size.
      const auto Yc = Ys.middleCols(c * n, n);
      const auto Dc = dicts.class_dict(c);
      Matrix G = dicts.D.transpose() * dicts.D;
      for (int i = 0; i < C; ++i) {
        const auto Di = dicts.class_dict(i);
        G.block(i * k, i * k, k, k) += Di.transpose() * Di;
      }
      Matrix B = dicts.D.transpose() * Yc;
      B.middleRows(c * k, k) += Dc.transpose() * Yc;
      const double yc_sq = Yc.squaredNorm();

      Vector others = Vector::Zero(dicts.total_class_atoms());
      for (int i = 0; i < C; ++i) {
        if (i != c) others += stats[i].sum;
      }

      // With the other blocks fixed the class objective is quadratic in X_c:
      // the Fisher gradient 4X_c + 2m - 4m_c is affine, its constant part
      // coming from the other classes' sums.
      QuadraticObjective q;
      q.lipschitz = power_iteration_lipschitz(G, power_iters, kPowerSeed) + 2.0 * hyper.lambda2;
      q.hessian = [&](const Matrix& Xc) {
        Matrix HX = G * Xc;
        if (hyper.lambda2 > 0.0) {
          const Vector shift = 2.0 * Xc.rowwise().sum() / static_cast<double>(N) -
                               4.0 * Xc.rowwise().mean();
          HX += half_l2 * ((4.0 * Xc).colwise() + shift);
        }
        return HX;
      };
      q.linear = B;
      q.constant = yc_sq;
      if (hyper.lambda2 > 0.0) {
        q.linear.colwise() -= (hyper.lambda2 / static_cast<double>(N)) * others;
        std::vector<ClassStats> without = stats;
        without[c] = ClassStats{Vector::Zero(others.size()), 0.0, 0.0};
        q.constant += half_l2 * fisher_from_stats(without, n);
      }
      const Matrix Xc0 = out.class_cols(c);
      out.class_cols(c) = fista(q, hyper.lambda1, Xc0, iters_per_solve, hyper.fista_tol).W;
      stats[c] = class_stats(out.class_cols(c));
    }
  }
  if (dicts.shared_atoms() > 0) out.X0 = solve_shared_codes(data, dicts, out, hyper, power_iters);
  return out;
}

Index update_class_dicts(const Dataset& data, DictionaryBundle& dicts, const CoefBundle& coefs,
                         const HyperParams& hyper, SweepMode mode) {
  Index dead = 0;
  const int C = dicts.num_classes;
  if (mode == SweepMode::sequential) {
    for (int c = 0; c < C; ++c) {
      const QuadDictProblem p = assemble_class_problem(c, data, dicts, coefs);
      OdlStats st;
      dicts.class_dict(c) = odl_update(p, dicts.class_dict(c), hyper.odl_sweeps, &st);
      dead += st.dead_atoms;
    }
    return dead;
  }
  const DictionaryBundle snapshot = dicts;
  for (int c = 0; c < C; ++c) {
    const QuadDictProblem p = assemble_class_problem(c, data, snapshot, coefs);
    OdlStats st;
    dicts.class_dict(c) = odl_update(p, snapshot.class_dict(c), hyper.odl_sweeps, &st);
    dead += st.dead_atoms;
  }
  return dead;
}

bool update_shared(const Dataset& data, DictionaryBundle& dicts, const CoefBundle& coefs,
                   const HyperParams& hyper) {
  if (dicts.shared_atoms() == 0) return true;
  const auto [Ybar, Ytilde] = residual_matrices(data, dicts, coefs);
  SharedUpdateStats st;
  dicts.D0 = update_shared_dict(Ybar, Ytilde, coefs.X0, dicts.D0, hyper.eta, hyper.admm_rho,
                                hyper.admm_iters, &st);
  return st.accepted;
}

LearnedModel fit(const Dataset& data, const TrainConfig& config) {
  config.validate();
  const HyperParams& hyper = config.hyper;
  for (Index j = 0; j < data.size(); ++j) {
    if (std::abs(data.Y().col(j).norm() - 1.0) > 1e-6) {
      warn("training samples are not unit-normalized; test samples will be");
      break;
    }
  }

  TrainState state = initialize(data, config, hyper.seed);
  LearnedModel model;
  model.hyper = hyper;
  try {
    model.initial_objective = objective_lrsdl(data, state.dicts, state.coefs, hyper).total();
  } catch (const NumericalError& e) {
    model.aborted = true;
    model.abort_reason = std::string("initialization: ") + e.what();
    warn("training aborted at " + model.abort_reason);
    model.dicts = std::move(state.dicts);
    model.means = mean_stats(state.coefs, data.labels());
    return model;
  }

  using clock = std::chrono::steady_clock;
  double elapsed = 0.0;
  double previous = model.initial_objective;
  TrainState good = state;
  for (int it = 1; it <= hyper.outer_iters; ++it) {
    ObjectiveTerms terms;
    try {
      const auto start = clock::now();
      if (config.coder == CoderKind::joint) {
        state.coefs = sparse_code_train(data, state.dicts, state.coefs, hyper, config.mean_mode,
                                        config.power_iters);
      } else {
        state.coefs = sparse_code_train_sequential(data, state.dicts, state.coefs, hyper,
                                                   config.sequential_passes, config.power_iters);
      }
      model.dead_atoms = update_class_dicts(data, state.dicts, state.coefs, hyper,
                                            config.dict_sweep_mode);
      if (!update_shared(data, state.dicts, state.coefs, hyper)) ++model.shared_rejections;
      elapsed += std::chrono::duration<double>(clock::now() - start).count();
      terms = objective_lrsdl(data, state.dicts, state.coefs, hyper);
    } catch (const NumericalError& e) {
      model.aborted = true;
      model.abort_reason = "iteration " + std::to_string(it) + ": " + e.what();
      warn("training aborted at " + model.abort_reason);
      break;
    }
    const double obj = terms.total();
    if (obj > previous + kIncreaseSlack * std::abs(previous)) {
      ++model.objective_increases;
      warn("objective increased at iteration " + std::to_string(it) + ": " +
           format_double(previous) + " -> " + format_double(obj));
    }
    previous = obj;
    good = state;
    if (it % config.trace_every == 0 || it == hyper.outer_iters) {
      model.trace.push_back({it, obj, elapsed, terms});
    }
  }

  model.dicts = std::move(good.dicts);
  model.means = mean_stats(good.coefs, data.labels());
  return model;
}

BenchResult bench_joint_vs_sequential(const Dataset& data, const TrainConfig& config,
                                      bool identical_coders) {
  if (config.shared_atoms != 0) throw ParameterError("bench requires k0 = 0");
  TrainConfig joint = config;
  joint.coder = CoderKind::joint;
  TrainConfig seq = config;
  seq.coder = identical_coders ? CoderKind::joint : CoderKind::sequential;
  BenchResult r;
  r.joint = fit(data, joint);
  r.sequential = fit(data, seq);
  return r;
}

std::string format_trace_csv(const std::vector<IterationRecord>& trace) {
  std::string out = "iter,objective,fidelity,l1,fisher,nuclear,seconds\n";
  for (const auto& r : trace) {
    out += std::to_string(r.iter) + ',' + format_double(r.objective) + ',' +
           format_double(r.terms.fidelity) + ',' + format_double(r.terms.l1) + ',' +
           format_double(r.terms.fisher) + ',' + format_double(r.terms.nuclear) + ',' +
           format_double(r.elapsed_seconds) + '\n';
  }
  return out;
}

}  // namespace lrsdl
