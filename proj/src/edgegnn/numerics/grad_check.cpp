// SPDX-License-Identifier: Apache-2.0
#include "edgegnn/numerics/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "edgegnn/errors.hpp"

namespace edgegnn::ad {

double GradCheckReport::pass_fraction() const {
  const std::size_t considered = passed + failed;
  return considered == 0 ? 1.0 : static_cast<double>(passed) / static_cast<double>(considered);
}

GradCheckReport grad_check(const std::function<double(std::span<const double>)>& f,
                           std::span<const double> point, std::span<const double> analytic,
                           const GradCheckOptions& options) {
  if (point.size() != analytic.size()) throw DimensionError("grad_check: gradient size differs from point size");
  if (!(options.step > 0.0)) throw ArgumentError("grad_check: step must be positive");

  GradCheckReport report;
  report.tolerance = options.tolerance;
  if (options.coordinates.empty()) {
    report.coordinates.resize(point.size());
    for (std::size_t i = 0; i < point.size(); ++i) report.coordinates[i] = i;
  } else {
    report.coordinates = options.coordinates;
  }

  std::vector<double> x(point.begin(), point.end());
  const double f0 = f(x);
  const double h = options.step;
  for (std::size_t c : report.coordinates) {
    if (c >= x.size()) throw ArgumentError("grad_check: coordinate out of range");
    const double saved = x[c];
    x[c] = saved + h;
    const double fp = f(x);
    x[c] = saved - h;
    const double fm = f(x);
    x[c] = saved;

    const double numeric = (fp - fm) / (2.0 * h);
    const double g = analytic[c];
    const double denom = std::max({std::abs(g), std::abs(numeric), options.abs_floor});
    const double rel = std::abs(g - numeric) / denom;

    report.analytic.push_back(g);
    report.numeric.push_back(numeric);
    report.rel_error.push_back(rel);

    bool excluded = false;
    if (rel <= options.tolerance) {
      ++report.passed;
    } else {
      const double forward = (fp - f0) / h;
      const double backward = (f0 - fm) / h;
      const double scale = std::max({std::abs(forward), std::abs(backward), options.abs_floor});
      if (std::abs(forward - backward) > options.tolerance * scale) {
        excluded = true;
        ++report.excluded_count;
      } else {
        ++report.failed;
      }
    }
    report.excluded.push_back(excluded);
    if (!excluded) report.max_rel_error = std::max(report.max_rel_error, rel);
  }
  return report;
}

}  // namespace edgegnn::ad
