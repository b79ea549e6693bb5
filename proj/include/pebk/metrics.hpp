#pragma once

#include "pebk/linalg.hpp"

#include <span>

namespace pebk {

/// ||u_num - u_exact||_2 / ||u_exact||_2; throws when the reference is zero.
double relative_error(const Vector& u_num, const Vector& u_exact);

/// Least-squares slope of log(error) against log(h); needs at least three
/// points, all positive.
double fit_convergence_order(std::span<const double> h, std::span<const double> errors);

}  // namespace pebk
