// Loss functions used for candidate weighting: squared error, asymmetric
// squared error, and clipped cross-entropy.
#pragma once

#include <cmath>

#include "art/common.hpp"

namespace art {

struct Loss {
  enum class Kind { Squared, AsymmetricSquared, CrossEntropy };

  Kind kind = Kind::Squared;
  double tau = 0.5;        // AsymmetricSquared only
  double eps_clip = kProbClip;  // CrossEntropy only

  static Loss squared() { return Loss{Kind::Squared, 0.5, kProbClip}; }

  static Loss asymmetric_squared(double tau) {
    if (!(tau > 0.0 && tau < 1.0)) throw config_error("asymmetric loss needs tau in (0, 1)");
    return Loss{Kind::AsymmetricSquared, tau, kProbClip};
  }

  static Loss cross_entropy(double eps_clip = kProbClip) {
    if (!(eps_clip > 0.0 && eps_clip < 0.5)) {
      throw config_error("cross-entropy clip must lie in (0, 0.5)");
    }
    return Loss{Kind::CrossEntropy, 0.5, eps_clip};
  }
};

inline double evaluate_loss(const Loss& loss, double y, double pred) {
  if (!std::isfinite(y) || !std::isfinite(pred)) {
    throw data_error("evaluate_loss: non-finite input");
  }
  switch (loss.kind) {
    case Loss::Kind::Squared: {
      const double d = y - pred;
      return d * d;
    }
    case Loss::Kind::AsymmetricSquared: {
      const double d = y - pred;
      const double w = std::abs(loss.tau - (d < 0.0 ? 1.0 : 0.0));
      return w * d * d;
    }
    case Loss::Kind::CrossEntropy: {
      const double g = clip_prob(pred, loss.eps_clip);
      return -y * std::log(g) - (1.0 - y) * std::log(1.0 - g);
    }
  }
  throw numeric_error("evaluate_loss: unknown loss kind");
}

inline Vector evaluate_losses(const Loss& loss, const Vector& y, const Vector& pred) {
  if (y.size() != pred.size()) throw data_error("evaluate_losses: length mismatch");
  Vector out(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) out[i] = evaluate_loss(loss, y[i], pred[i]);
  return out;
}

}  // namespace art
