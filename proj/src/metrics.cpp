#include "pebk/metrics.hpp"

#include "pebk/error.hpp"

#include <cmath>

namespace pebk {

double relative_error(const Vector& u_num, const Vector& u_exact) {
  if (u_num.size() != u_exact.size()) throw InvalidArgument("relative_error: length mismatch");
  const double ref = u_exact.norm();
  if (!(ref > 0.0)) throw InvalidArgument("relative_error: reference has zero norm");
  return (u_num - u_exact).norm() / ref;
}

double fit_convergence_order(std::span<const double> h, std::span<const double> errors) {
  if (h.size() != errors.size()) throw InvalidArgument("fit_convergence_order: length mismatch");
  if (h.size() < 3) throw InvalidArgument("fit_convergence_order: need at least three points");
  const auto n = static_cast<double>(h.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (!(h[i] > 0.0) || !(errors[i] > 0.0)) {
      throw InvalidArgument("fit_convergence_order: spacings and errors must be positive");
    }
    const double x = std::log(h[i]);
    const double y = std::log(errors[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw InvalidArgument("fit_convergence_order: spacings must differ");
  return (n * sxy - sx * sy) / denom;
}

}  // namespace pebk
