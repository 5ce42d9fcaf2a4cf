#pragma once

#include "lrsdl/learner.hpp"
#include "lrsdl/types.hpp"

#include <vector>

namespace lrsdl {

struct Prediction {
  int label = 0;  ///< 1-based
  Vector per_class_scores;
  Vector code;  ///< [x; x0]
};

/// Codes and labels test samples against a trained model. Holds the Gram of
/// [D, D0] and the FISTA step so a batch pays for them once.
class Classifier {
 public:
  explicit Classifier(const LearnedModel& model, int power_iters = 200);

  /// argmin 1/2 |y - Dbar xbar|^2 + lambda2/2 |x0 - m0|^2 + lambda1 |xbar|_1, y used as given.
  Vector encode(const Vector& y) const;

  /// Normalizes y, codes it, and scores every class by
  /// w |y - D0 x0 - D_c x^c|^2 + (1 - w) |x - m_c|^2. Ties go to the smallest class.
  Prediction classify(const Vector& y, double w) const;

  /// Per-class scores for an already computed code of the (normalized) sample y.
  Vector scores(const Vector& y, const Vector& code, double w) const;

  const LearnedModel& model() const { return model_; }

 private:
  LearnedModel model_;
  Matrix Dbar_;
  Matrix gram_;
  double lipschitz_ = 1.0;
};

/// Index of the smallest score; ties resolve to the lowest index. Returns a 1-based label.
int argmin_label(const Vector& scores);

Vector encode_test(const Vector& y, const LearnedModel& model);
Prediction classify(const Vector& y, const LearnedModel& model, double w);

struct Evaluation {
  double accuracy = 0.0;
  Eigen::MatrixXi confusion;  ///< confusion(i, j): true class i+1 predicted as j+1
  std::vector<Prediction> predictions;
};

/// Throws DimensionError when the test dimension differs from the model's.
Evaluation evaluate(const Dataset& test, const LearnedModel& model, double w);

}  // namespace lrsdl
