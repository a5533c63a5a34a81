#pragma once

#include <functional>
#include <span>

#include "multilstm/matrix.hpp"

namespace multilstm {

// Central-difference gradient oracle: (f(x+eps*e_i) - f(x-eps*e_i)) / (2 eps)
// per coordinate. Every learned backward pass is verified against it.
// A non-finite f value raises NumericError naming the coordinate.
Vec finite_diff_gradient(const std::function<double(std::span<const double>)>& f,
                         std::span<const double> theta, double eps = 1e-5);

// Per-coordinate relative error |ga - gn| / max(1, |ga|, |gn|), maximized
// over coordinates. The gradient-check tolerance is on this quantity.
double max_relative_error(std::span<const double> analytic,
                          std::span<const double> numeric);

}  // namespace multilstm
