#pragma once

#include <functional>

#include "srr/instance.hpp"

namespace srr {

// Independent derivative oracles. These deliberately know nothing about the
// closed forms they are used to check.

// Central differences, (func(x + h e_i) - func(x - h e_i)) / (2h) per
// coordinate. Default step 1e-5 balances truncation against cancellation
// for double-precision losses of order one.
Vec fd_gradient(const std::function<double(const Vec&)>& func, const Vec& x,
                double h = 1e-5);

// Central differences of a gradient field, symmetrized as (A + A^T)/2 so the
// result is usable as a Hessian estimate. Default step 1e-4.
Mat fd_hessian(const std::function<Vec(const Vec&)>& grad, const Vec& x,
               double h = 1e-4);

// min_i |(A1 x)_i|: how close x sits to a relu kink. Finite-difference
// agreement claims only hold when this exceeds ~10x the FD step, since a
// central stencil would otherwise straddle the kink.
double kink_distance(const ProblemInstance& inst, const Vec& x);

} // namespace srr
