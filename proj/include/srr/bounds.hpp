#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "srr/instance.hpp"

namespace srr {

// Every constant the analysis promises, computed from actual operator norms.
// r_eff = max(||A1||, ||A2||, probe radius) replaces the nominal ball radius
// in all formulas; the constants are monotone in it, so the guarantees hold
// verbatim for the actual norms while staying finite at desk scale.
struct TheoreticalBounds {
    double r_eff = 0;
    double h_bound = 0;       // r_eff^2, cap on ||hidden||_2
    double u_bound = 0;       // sqrt(m) exp(r_eff^3), cap on ||u||_2
    double beta_bound = 0;    // exp(-r_eff^3), floor on alpha
    double f_bound = 1.0;     // cap on ||softmax||_2
    double c_bound = 2.0;     // cap on ||residual||_2 while ||b||_2 <= 1
    double b_norm_bound = 16.0; // cap on ||B||
    double b_psd_bound = 20.0;  // eigenvalues of B lie in [-20, 20]
    double lipschitz_m = 0;   // m^1.5 sqrt(nd) exp(5 r_eff^3), Hessian Lipschitz
    double pd_l = 0;          // configured floor on lambda_min of the reg Hessian
    double w_sq_max = 0;      // max_i w_i^2
    double n_const = 0;       // (1/pd_l) r_eff^4 (16 + w_sq_max)
    double f_lip = 0;         // 2 r_eff^2 m^1.5 sqrt(nd) exp(4 r_eff^3)

    // True when an exp(..) above would overflow a double; the affected
    // fields then hold the largest finite double instead of inf.
    bool saturated = false;
};

TheoreticalBounds compute_bounds(const ProblemInstance& inst, double l,
                                 double probe_radius);

// One verified inequality. A sample counts only when the inequality's
// premise held there (e.g. full-rank C for the PD floor); premise failures
// are tallied separately and are not violations.
struct BoundCheck {
    std::string name;
    long samples = 0;
    long passes = 0;
    long premise_failures = 0;
    double worst_margin = 0;   // min over samples of (slack to the constant);
                               // negative means a violation was observed
    double worst_ratio = 0;    // max over samples of empirical / theoretical
    double theoretical_constant = 0;
};

struct BoundsReport {
    TheoreticalBounds bounds;
    std::vector<BoundCheck> checks; // sorted by name
    long samples = 0;
    std::uint64_t seed = 0;
    bool all_passed = false;
};

// Draws `samples` points uniformly from the ball of the instance radius
// (Gaussian direction, radius * u^(1/d) scaling) and checks every proven
// inequality at each: ||hidden|| <= h_bound, alpha >= beta_bound,
// ||softmax|| <= 1, ||residual|| <= 2, ||B|| <= 16, eig(B) within +-20, and
// lambda_min of the regularized Hessian >= pd_l (1 - 1e-8) where the weight
// premise holds at the sample. Same-indicator pairs feed the two Lipschitz
// checks; arbitrary pairs feed ||H(x)^-1 H(y)|| <= n_const. Violations are
// report entries, never exceptions.
BoundsReport verify_bounds(const ProblemInstance& inst, int samples,
                           std::uint64_t seed, double l);

std::string bounds_report_to_json(const BoundsReport& report);

// Uniform draw from the radius-r ball in dimension dim.
Vec sample_ball(int dim, double r, std::mt19937_64& rng);

} // namespace srr
