#pragma once

#include <cmath>

#include "error.hpp"

namespace cbm {

/// Degradation levels that trigger preventive and failure replacement.
struct Thresholds {
  double x_pc = 2.0;   ///< preventive replacement level
  double x_fc = 3.09;  ///< failure level

  void validate() const {
    detail::require(std::isfinite(x_pc) && x_pc > 0, "thresholds: x_pc must be > 0");
    detail::require(std::isfinite(x_fc) && x_pc < x_fc,
                    "thresholds: x_pc must be < x_fc");
  }
};

/// Normalized costs and the continuous discount rate applied as exp(-rate*t).
struct CostParams {
  double c_inspect = 0.1;
  double c_prevent = 1.0;
  double c_fail = 10.0;
  double discount_rate = 0.0;

  void validate() const {
    detail::require(c_inspect >= 0 && c_prevent >= 0 && c_fail >= 0,
                    "costs must be >= 0");
    detail::require(discount_rate >= 0 && std::isfinite(discount_rate),
                    "discount rate must be >= 0");
  }

  /// Failure should cost at least as much as prevention, which should cost at
  /// least an inspection. Violations are allowed but reported.
  bool ordered() const noexcept {
    return c_fail >= c_prevent && c_prevent >= c_inspect;
  }
};

}  // namespace cbm
