#include "lrsdl/classifier.hpp"

#include "lrsdl/errors.hpp"
#include "lrsdl/prox.hpp"

namespace lrsdl {

namespace {
constexpr std::uint64_t kPowerSeed = 0x7e57;
}

Classifier::Classifier(const LearnedModel& model, int power_iters)
    : model_(model), Dbar_(model.dicts.total()) {
  gram_ = Dbar_.transpose() * Dbar_;
  const double l2 = model_.dicts.shared_atoms() > 0 ? model_.hyper.lambda2 : 0.0;
  lipschitz_ = power_iteration_lipschitz(gram_, power_iters, kPowerSeed) + l2;
}

Vector Classifier::encode(const Vector& y) const {
  if (y.size() != Dbar_.rows()) {
    throw DimensionError("encode: sample has dimension " + std::to_string(y.size()) +
                         ", model expects " + std::to_string(Dbar_.rows()));
  }
  const Index k0 = model_.dicts.shared_atoms();
  const Index K = model_.dicts.total_class_atoms();
  const double lambda2 = model_.hyper.lambda2;
  const Vector Dty = Dbar_.transpose() * y;
  const Vector& m0 = model_.means.m0;
  const double half_y_sq = 0.5 * y.squaredNorm();

  SmoothObjective obj;
  obj.lipschitz = lipschitz_;
  obj.grad = [&](const Matrix& x) {
    Matrix g = gram_ * x - Dty;
    if (k0 > 0) g.bottomRows(k0) += lambda2 * (x.bottomRows(k0) - m0);
    return g;
  };
  obj.value = [&](const Matrix& x) {
    double v = half_y_sq - x.col(0).dot(Dty) + 0.5 * x.col(0).dot(gram_ * x.col(0));
    if (k0 > 0) v += 0.5 * lambda2 * (x.col(0).tail(k0) - m0).squaredNorm();
    return v;
  };
  const Matrix x0 = Matrix::Zero(K + k0, 1);
  return fista(obj, model_.hyper.lambda1, x0, model_.hyper.test_fista_iters,
               model_.hyper.fista_tol)
      .W.col(0);
}

Vector Classifier::scores(const Vector& y, const Vector& code, double w) const {
  const auto& dicts = model_.dicts;
  const Index K = dicts.total_class_atoms();
  const Index k0 = dicts.shared_atoms();
  const Index k = dicts.atoms_per_class;
  Vector ybar = y;
  if (k0 > 0) ybar -= dicts.D0 * code.tail(k0);
  const Vector x = code.head(K);
  Vector s(dicts.num_classes);
  for (int c = 0; c < dicts.num_classes; ++c) {
    const double residual = (ybar - dicts.class_dict(c) * x.segment(c * k, k)).squaredNorm();
    const double distance = (x - model_.means.mc.col(c)).squaredNorm();
    s(c) = w * residual + (1.0 - w) * distance;
  }
  return s;
}

Prediction Classifier::classify(const Vector& y, double w) const {
  if (!(w >= 0.0 && w <= 1.0)) throw ParameterError("classify: w must lie in [0, 1]");
  Vector yn = y;
  const double n = yn.stableNorm();
  if (n > 0.0) yn /= n;
  Prediction p;
  p.code = encode(yn);
  p.per_class_scores = scores(yn, p.code, w);
  p.label = argmin_label(p.per_class_scores);
  return p;
}

int argmin_label(const Vector& scores) {
  Index best = 0;
  for (Index c = 1; c < scores.size(); ++c) {
    if (scores(c) < scores(best)) best = c;
  }
  return static_cast<int>(best) + 1;
}

Vector encode_test(const Vector& y, const LearnedModel& model) {
  return Classifier(model).encode(y);
}

Prediction classify(const Vector& y, const LearnedModel& model, double w) {
  return Classifier(model).classify(y, w);
}

Evaluation evaluate(const Dataset& test, const LearnedModel& model, double w) {
  if (test.dim() != model.dim()) {
    throw DimensionError("evaluate: test dimension " + std::to_string(test.dim()) +
                         " differs from model dimension " + std::to_string(model.dim()));
  }
  const int C = model.num_classes();
  if (test.num_classes() > C) throw DataError("evaluate: test labels exceed model classes");
  const Classifier clf(model);
  Evaluation ev;
  ev.confusion = Eigen::MatrixXi::Zero(C, C);
  ev.predictions.reserve(test.size());
  Index correct = 0;
  for (Index j = 0; j < test.size(); ++j) {
    Prediction p = clf.classify(test.Y().col(j), w);
    const int truth = test.labels()[j];
    ++ev.confusion(truth - 1, p.label - 1);
    if (p.label == truth) ++correct;
    ev.predictions.push_back(std::move(p));
  }
  ev.accuracy = test.size() > 0 ? static_cast<double>(correct) / static_cast<double>(test.size())
                                : 0.0;
  return ev;
}

}  // namespace lrsdl
