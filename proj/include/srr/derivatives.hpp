#pragma once

#include "srr/forward.hpp"

namespace srr {

// Gradient of the unregularized loss, vectorized form
//
//     g = C^T (f o c - <c, f> f)
//
// with f the softmax, c the residual, o the Hadamard product.
// The cache must come from eval on the same (inst, x).
Vec grad_L(const ProblemInstance& inst, const EvalCache& cache);

// Single coordinate of the same gradient computed from the literal
// per-coordinate formula
//
//     dL/dx_i = <c, f o (A2 (ind o A1_col_i))> - <c, f> <f, A2 (ind o A1_col_i)>
//
// Kept as a separate code path so tests can check the vectorized form
// against it coordinate by coordinate.
double grad_L_entry(const ProblemInstance& inst, const EvalCache& cache, int i);

// Gradient of the regularized loss: grad_L + C^T W^2 C x.
Vec grad_L_reg(const ProblemInstance& inst, const EvalCache& cache);

} // namespace srr
