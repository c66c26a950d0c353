// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace edgegnn::ad {

struct GradCheckOptions {
  double step = 1e-5;
  double tolerance = 1e-3;
  /// Gradients smaller than this on both sides count as agreeing.
  double abs_floor = 1e-8;
  /// Coordinates to probe; all when empty.
  std::vector<std::size_t> coordinates;
};

struct GradCheckReport {
  std::vector<std::size_t> coordinates;
  std::vector<double> analytic;
  std::vector<double> numeric;
  std::vector<double> rel_error;
  /// Coordinates whose stencil straddles a kink (one-sided slopes disagree).
  std::vector<bool> excluded;
  std::size_t passed = 0;
  std::size_t failed = 0;
  std::size_t excluded_count = 0;
  double max_rel_error = 0.0;  ///< over non-excluded coordinates
  double tolerance = 0.0;

  bool ok() const { return failed == 0; }
  /// Fraction of non-excluded coordinates within tolerance.
  double pass_fraction() const;
};

/// Compares an analytic gradient against central finite differences of `f`.
/// A coordinate that misses the tolerance is reported as excluded, not failed,
/// when its forward and backward one-sided slopes disagree, which marks a
/// ReLU kink or a max tie inside the stencil.
GradCheckReport grad_check(const std::function<double(std::span<const double>)>& f,
                           std::span<const double> point, std::span<const double> analytic,
                           const GradCheckOptions& options = {});

}  // namespace edgegnn::ad
