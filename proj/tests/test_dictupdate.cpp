#include "oracles.hpp"

#include "lrsdl/dictupdate.hpp"
#include "lrsdl/errors.hpp"
#include "lrsdl/gradients.hpp"
#include "lrsdl/prox.hpp"
#include "lrsdl/synthetic.hpp"

#include <gtest/gtest.h>

#include <limits>

using namespace lrsdl;

TEST(AssembleClassProblem, ZeroCodes) {
  std::mt19937_64 rng(1);
  oracle::Instance s = oracle::random_instance(rng, 2, 5, 2, 3, 1);
  s.coefs.X.setZero();
  s.coefs.X0.setZero();
  for (int c = 0; c < 2; ++c) {
    const QuadDictProblem p = assemble_class_problem(c, s.data, s.dicts, s.coefs);
    EXPECT_EQ(p.A, Matrix::Zero(2, 2));
    EXPECT_EQ(p.B, Matrix::Zero(5, 2));
  }
}

TEST(AssembleClassProblem, SingleClassDoubles) {
  std::mt19937_64 rng(2);
  const oracle::Instance s = oracle::random_instance(rng, 1, 5, 3, 4, 2);
  const QuadDictProblem p = assemble_class_problem(0, s.data, s.dicts, s.coefs);
  const Matrix& X = s.coefs.X;
  const Matrix Ys = s.data.Y() - s.dicts.D0 * s.coefs.X0;
  EXPECT_LT((p.A - 2.0 * X * X.transpose()).norm(), 1e-12);
  EXPECT_LT((p.B - 2.0 * Ys * X.transpose()).norm(), 1e-12);
}

TEST(AssembleClassProblem, GradientMatchesFiniteDifferencesOfFidelity) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const oracle::Instance s = oracle::random_instance(rng, 2, 5, 2, 3, trial % 3);
    for (int c = 0; c < 2; ++c) {
      const QuadDictProblem p = assemble_class_problem(c, s.data, s.dicts, s.coefs);
      const Matrix Dc = s.dicts.class_dict(c);
      auto f = [&](const Matrix& Z) {
        Matrix D = s.dicts.D;
        D.middleCols(c * 2, 2) = Z;
        return 2.0 * oracle::fidelity_loop(s.data.Y(), D, s.dicts.D0, s.coefs.X, s.coefs.X0, 2,
                                           2, 3);
      };
      const Matrix analytic = 2.0 * (Dc * p.A - p.B);
      EXPECT_LE(oracle::relative_error(analytic, oracle::finite_difference(f, Dc)), 1e-4);
    }
  }
}

TEST(AssembleClassProblem, GramIsSymmetricPsd) {
  std::mt19937_64 rng(4);
  const oracle::Instance s = oracle::random_instance(rng, 3, 6, 3, 2, 1);
  const QuadDictProblem p = assemble_class_problem(1, s.data, s.dicts, s.coefs);
  EXPECT_LT((p.A - p.A.transpose()).norm(), 1e-12);
  EXPECT_GE(Eigen::SelfAdjointEigenSolver<Matrix>(p.A).eigenvalues().minCoeff(), -1e-10);
}

TEST(AssembleClassProblem, BadClassIndexIsDimensionError) {
  std::mt19937_64 rng(5);
  const oracle::Instance s = oracle::random_instance(rng, 2, 5, 2, 3, 0);
  EXPECT_THROW(assemble_class_problem(2, s.data, s.dicts, s.coefs), DimensionError);
}

TEST(OdlUpdate, SingleColumnInsideBall) {
  QuadDictProblem p{Matrix::Ones(1, 1), Matrix(3, 1)};
  p.B << 0.2, -0.4, 0.5;
  const Matrix D = odl_update(p, Matrix::Zero(3, 1));
  EXPECT_LT((D - p.B).norm(), 1e-15);
}

TEST(OdlUpdate, SingleColumnProjected) {
  QuadDictProblem p{Matrix::Ones(1, 1), Matrix::Zero(3, 1)};
  p.B(0, 0) = 2.0;
  Matrix e1 = Matrix::Zero(3, 1);
  e1(0, 0) = 1.0;
  EXPECT_LT((odl_update(p, Matrix::Zero(3, 1)) - e1).norm(), 1e-15);
}

TEST(OdlUpdate, DecreasesAndApproachesProjectedGradient) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix F = oracle::random_matrix(3, 10, rng);
    const QuadDictProblem p{F * F.transpose(), oracle::random_matrix(6, 3, rng)};
    const Matrix D0 = oracle::unit_columns(oracle::random_matrix(6, 3, rng));
    const double before = quad_dict_objective(p, D0);
    EXPECT_LE(quad_dict_objective(p, odl_update(p, D0)), before + 1e-10);
    const double pg = quad_dict_objective(p, oracle::odl_projected_gradient(p.A, p.B, D0, 500));
    const double ours = quad_dict_objective(p, odl_update(p, D0, 200));
    EXPECT_LE(ours, pg + 1e-6) << "trial " << trial;
  }
}

TEST(OdlUpdate, SweepObjectivesNeverRise) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix F = oracle::random_matrix(4, 8, rng);
    const QuadDictProblem p{F * F.transpose(), 3.0 * oracle::random_matrix(7, 4, rng)};
    OdlStats stats;
    odl_update(p, oracle::unit_columns(oracle::random_matrix(7, 4, rng)), 10, &stats);
    ASSERT_EQ(stats.sweep_objectives.size(), 11u);
    for (std::size_t s = 1; s < stats.sweep_objectives.size(); ++s) {
      const double prev = stats.sweep_objectives[s - 1];
      EXPECT_LE(stats.sweep_objectives[s], prev + 1e-10 * std::max(1.0, std::abs(prev)));
    }
  }
}

TEST(OdlUpdate, ColumnsStayInUnitBallAndDeadAtomsAreUntouched) {
  std::mt19937_64 rng(8);
  Matrix F = oracle::random_matrix(3, 6, rng);
  F.row(1).setZero();
  const QuadDictProblem p{F * F.transpose(), 5.0 * oracle::random_matrix(5, 3, rng)};
  const Matrix init = oracle::unit_columns(oracle::random_matrix(5, 3, rng));
  OdlStats stats;
  const Matrix D = odl_update(p, init, 2, &stats);
  EXPECT_EQ(stats.dead_atoms, 1);
  EXPECT_EQ(D.col(1), init.col(1));
  // Large targets push the unconstrained minimizer outside the ball, so the
  // active columns land on the sphere.
  EXPECT_NEAR(D.col(0).norm(), 1.0, 1e-12);
  EXPECT_NEAR(D.col(2).norm(), 1.0, 1e-12);
}

TEST(OdlUpdate, NonFiniteInputIsNumericalError) {
  QuadDictProblem p{Matrix::Ones(1, 1), Matrix::Zero(2, 1)};
  p.B(0, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(odl_update(p, Matrix::Zero(2, 1)), NumericalError);
}

TEST(UpdateSharedDict, UnregularizedLimitIsLeastSquares) {
  std::mt19937_64 rng(9);
  const Matrix X0 = 3.0 * oracle::random_matrix(3, 15, rng);
  const Matrix target = 0.4 * oracle::unit_columns(oracle::random_matrix(6, 3, rng));
  const Matrix Ybar = target * X0 + 0.01 * oracle::random_matrix(6, 15, rng);
  const Matrix Ytilde = target * X0 + 0.01 * oracle::random_matrix(6, 15, rng);
  const Matrix V = 0.5 * (Ybar + Ytilde);
  const Matrix ls = V * X0.transpose() * (X0 * X0.transpose()).inverse();
  ASSERT_LT(ls.colwise().norm().maxCoeff(), 1.0);
  const Matrix D0 = update_shared_dict(Ybar, Ytilde, X0, Matrix::Zero(6, 3), 0.0, 1.0, 300);
  EXPECT_LT((D0 - ls).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(UpdateSharedDict, ZeroCodesGiveZeroDictionary) {
  std::mt19937_64 rng(10);
  const Matrix Ybar = oracle::random_matrix(5, 8, rng);
  const Matrix Ytilde = oracle::random_matrix(5, 8, rng);
  const Matrix current = oracle::unit_columns(oracle::random_matrix(5, 3, rng));
  const Matrix D0 = update_shared_dict(Ybar, Ytilde, Matrix::Zero(3, 8), current, 0.2, 1.0, 100);
  EXPECT_LT(D0.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(UpdateSharedDict, ObjectiveDoesNotRise) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix Ybar = oracle::random_matrix(8, 12, rng);
    const Matrix Ytilde = oracle::random_matrix(8, 12, rng);
    const Matrix X0 = oracle::random_matrix(4, 12, rng);
    const Matrix current = oracle::unit_columns(oracle::random_matrix(8, 4, rng));
    const double eta = 0.05 * (trial + 1);
    SharedUpdateStats stats;
    const Matrix D0 = update_shared_dict(Ybar, Ytilde, X0, current, eta, 1.0, 100, &stats);
    const Matrix V = 0.5 * (Ybar + Ytilde);
    EXPECT_LE(shared_dict_objective(V, X0, D0, eta),
              shared_dict_objective(V, X0, current, eta) + 1e-8);
    EXPECT_LE(D0.colwise().norm().maxCoeff(), 1.0 + 1e-12);
  }
}

TEST(UpdateSharedDict, RankFallsWithEta) {
  SyntheticConfig cfg;
  cfg.dim = 20;
  cfg.per_class = 15;
  cfg.shared_atoms = 8;
  cfg.shared_rank = 2;
  cfg.seed = 12;
  const auto syn = generate_synthetic(cfg);
  std::mt19937_64 rng(12);
  const Matrix X0 = oracle::random_matrix(8, syn.data.size(), rng);
  const Matrix Ybar = syn.data.Y() + 0.1 * oracle::random_matrix(20, syn.data.size(), rng);
  const Matrix Ytilde = syn.data.Y() + 0.1 * oracle::random_matrix(20, syn.data.size(), rng);
  Index previous = std::numeric_limits<Index>::max();
  for (double eta : {0.01, 0.1, 1.0, 10.0}) {
    const Matrix D0 = update_shared_dict(Ybar, Ytilde, X0, Matrix::Zero(20, 8), eta, 1.0, 100);
    const Index rank = numerical_rank(D0, 1e-8);
    EXPECT_LE(rank, previous) << "eta " << eta;
    previous = rank;
  }
}

TEST(UpdateSharedDict, ColumnCappingDoesNotRaiseNuclearNorm) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix Ybar = 5.0 * oracle::random_matrix(6, 10, rng);
    const Matrix Ytilde = 5.0 * oracle::random_matrix(6, 10, rng);
    const Matrix X0 = 0.3 * oracle::random_matrix(3, 10, rng);
    const Matrix start = Matrix::Zero(6, 3);
    const Matrix raw = admm_nuclear(0.5 * (Ybar + Ytilde), X0, 0.1, 1.0, 100, start).Z;
    const Matrix capped = update_shared_dict(Ybar, Ytilde, X0, start, 0.1, 1.0, 100);
    ASSERT_GT(raw.colwise().norm().maxCoeff(), 1.0);
    const Vector s_raw = Eigen::JacobiSVD<Matrix>(raw).singularValues();
    const Vector s_cap = Eigen::JacobiSVD<Matrix>(capped).singularValues();
    EXPECT_LE(s_cap(0), s_raw(0) + 1e-10);
    EXPECT_LE(s_cap.sum(), s_raw.sum() + 1e-10);
  }
}

TEST(UpdateSharedDict, NoSharedAtomsIsNoOp) {
  const Matrix D0 = update_shared_dict(Matrix::Ones(4, 6), Matrix::Ones(4, 6), Matrix(0, 6),
                                       Matrix(4, 0), 0.1, 1.0, 10);
  EXPECT_EQ(D0.rows(), 4);
  EXPECT_EQ(D0.cols(), 0);
}
