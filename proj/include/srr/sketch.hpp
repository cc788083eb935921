#pragma once

#include <cstdint>

#include "srr/instance.hpp"

namespace srr {

struct SketchConfig {
    double epsilon0 = 0.01;  // target spectral accuracy, in (0, 1)
    double delta = 0.05;     // failure probability, in (0, 1)
    double oversample = 1.0; // multiplier on the sample-count formula, >= 1
    std::uint64_t seed = 0;

    // Deterministic path: take every row of D^{1/2} C once with weight 1,
    // reproducing the exact form. No randomness is consumed.
    bool all_rows = false;
};

struct SketchResult {
    Mat h_tilde;             // d x d, symmetric PSD
    int rows_sampled = 0;
    double sandwich_lo = 0;  // lambda_min of H^{-1/2} h_tilde H^{-1/2}
    double sandwich_hi = 0;  // lambda_max of the same
    bool sandwich_ok = false; // lo >= 1 - eps0 and hi <= 1 + eps0
};

// Spectral approximation of H = C^T D C for a symmetric PD d_matrix.
//
// Forms E = D^{1/2} C via symmetric eigendecomposition, computes the exact
// leverage scores of E's rows, and draws
//     s = ceil(oversample * d * ln(m/delta) / epsilon0^2)
// rows i.i.d. with replacement proportional to the scores, each rescaled by
// 1/(s p_i), so h_tilde = sum e_i e_i^T / (s p_i) is unbiased for H. The
// sandwich diagnostics come from an eigendecomposition of
// H^{-1/2} h_tilde H^{-1/2} against the exactly assembled H.
//
// Throws NotPD when lambda_min(D) <= 0 (floor: 1e-12 * lambda_max), and
// DegenerateC when the leverage mass is zero or H itself is numerically
// singular, since the sandwich is undefined there. Requires m >= d.
SketchResult sketch_pd_form(const Mat& c_matrix, const Mat& d_matrix,
                            const SketchConfig& cfg);

} // namespace srr
