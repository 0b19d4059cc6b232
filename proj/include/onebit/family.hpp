#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace onebit {

/// Known problem parameters of the family D(k, lambda, sigma): mean in
/// [-lambda, lambda] and E|X - mu|^k <= sigma^k.
struct FamilyParams {
  double k = 2.0;
  double lambda = 1.0;
  double sigma = 1.0;

  /// Moment order used inside every formula. Orders above 3 collapse to 3
  /// (Lyapunov: a bounded k-th moment bounds the third).
  [[nodiscard]] double operative_k() const noexcept { return std::min(k, 3.0); }

  void validate() const {
    if (!(k > 1.0)) throw std::invalid_argument("moment order k must exceed 1");
    if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
    if (!(lambda >= sigma)) throw std::invalid_argument("lambda must be at least sigma");
    if (!std::isfinite(lambda)) throw std::invalid_argument("lambda must be finite");
  }
};

/// Accuracy goal: |mu_hat - mu| <= eps with probability >= 1 - delta.
struct TargetSpec {
  double eps = 0.1;
  double delta = 0.1;

  void validate() const {
    if (!(eps > 0.0) || !std::isfinite(eps)) throw std::invalid_argument("eps must be positive");
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
  }
};

}  // namespace onebit
