#pragma once

#include "srr/forward.hpp"

namespace srr {

// The m x m core of the loss Hessian and the assembled d x d forms.
//
//     hess_L     = C^T B C          B = B1 - B2 - B3 + B4 - B5
//     hess_reg   = C^T W^2 C
//     hess_L_reg = C^T (B + W^2) C
//
// with (f softmax, c residual):
//     B1 = diag(f o (f + c))
//     B2 = diag(f) (c + f) f^T
//     B3 = f (c + f)^T diag(f)          (= B2^T)
//     B4 = <2c + f, f> f f^T
//     B5 = <c, f> diag(f)
struct HessianParts {
    Mat c_matrix;            // m x d
    Mat b1, b2, b3, b4, b5;  // m x m
    Mat b_total;             // m x m, B
    Mat d_matrix;            // m x m, B + W^2
    Mat hess_L;              // d x d
    Mat hess_reg;            // d x d
    Mat hess_L_reg;          // d x d
};

HessianParts build_hessian(const ProblemInstance& inst, const EvalCache& cache);

// Entry (i, j) of the loss Hessian as the literal quadratic form
//
//     A1_col_i^T diag(ind) A2^T B A2 diag(ind) A1_col_j
//
// with no d x d assembly. Throws std::out_of_range on a bad index.
double hessian_entry(const ProblemInstance& inst, const EvalCache& cache,
                     int i, int j);

// The same entry computed term by term from the six-inner-product expansion,
// before any matrix decomposition. With v_k = A2 (ind o A1_col_k):
//
//       <f o v_i, f o v_j>
//     + <c, f o v_j o v_i>
//     - <c + f, f o v_i> <f, v_j>
//     - <c + f, f o v_j> <f, v_i>
//     + <2c + f, f> <f, v_j> <f, v_i>
//     - <c, f> <f o v_j, v_i>
//
// Agreement with hessian_entry is the numerical proof of the decomposition.
double hessian_six_term(const ProblemInstance& inst, const EvalCache& cache,
                        int i, int j);

} // namespace srr
