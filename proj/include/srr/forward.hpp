#pragma once

#include "srr/instance.hpp"

namespace srr {

// Everything the derivative and verification code needs at one point x,
// computed in a single pass.
struct EvalCache {
    Vec x;          // length d
    Vec hidden;     // length n, relu(A1 x)
    Vec indicator;  // length n, 1.0 where (A1 x)_i > 0, else 0.0
    Vec logits;     // length m, A2 * hidden
    Vec u;          // length m, exp(logits); see overflow_suppressed
    double alpha = 0.0;   // sum of u
    Vec softmax;    // length m, stable softmax of logits
    Vec residual;   // length m, softmax - b
    double loss = 0.0;     // 1/2 ||residual||^2
    double reg = 0.0;      // 1/2 ||W C x||^2
    double loss_reg = 0.0; // loss + reg

    // True when max|logit| > 500: u and alpha then hold the max-subtracted
    // values exp(logit - max) and their sum, which are off the exact scale
    // by the factor exp(max). softmax, residual and the losses stay valid.
    bool overflow_suppressed = false;
};

// Evaluates the model at x. Softmax uses max-subtraction, so it is finite
// for any finite logits; u and alpha keep the exact scale only while
// max|logit| <= 500 (exp(500) sits near the double ceiling).
// Throws DimensionError when x does not have length d.
EvalCache eval(const ProblemInstance& inst, const Vec& x);

// C = A2 * diag(indicator(A1 x)) * A1, the effective linear map through the
// active relu mask. The middle factor is applied as a row mask on A1, not as
// an assembled n x n diagonal.
Mat eval_c_matrix(const ProblemInstance& inst, const Vec& x);

// Same C built from an already-computed indicator, so derivative code stays
// on the exact mask of its cache instead of re-deciding ties at A1 x = 0.
Mat c_matrix_from_indicator(const ProblemInstance& inst, const Vec& indicator);

} // namespace srr
