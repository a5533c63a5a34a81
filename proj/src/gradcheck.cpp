#include "multilstm/gradcheck.hpp"

#include <cmath>

#include "multilstm/error.hpp"

namespace multilstm {

Vec finite_diff_gradient(const std::function<double(std::span<const double>)>& f,
                         std::span<const double> theta, double eps) {
  if (eps <= 0.0) throw ArgumentError("finite_diff_gradient: eps must be > 0");
  Vec point(theta.begin(), theta.end());
  Vec grad(point.size(), 0.0);
  for (std::size_t i = 0; i < point.size(); ++i) {
    const double saved = point[i];
    point[i] = saved + eps;
    const double fp = f(point);
    point[i] = saved - eps;
    const double fm = f(point);
    point[i] = saved;
    if (!std::isfinite(fp) || !std::isfinite(fm))
      throw NumericError("finite_diff_gradient: non-finite f at coordinate " +
                         std::to_string(i));
    grad[i] = (fp - fm) / (2.0 * eps);
  }
  return grad;
}

double max_relative_error(std::span<const double> analytic,
                          std::span<const double> numeric) {
  if (analytic.size() != numeric.size())
    throw ShapeError("max_relative_error: lengths " +
                     std::to_string(analytic.size()) + " and " +
                     std::to_string(numeric.size()));
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double denom =
        std::max({1.0, std::abs(analytic[i]), std::abs(numeric[i])});
    worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / denom);
  }
  return worst;
}

}  // namespace multilstm
