#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "srr/errors.hpp"

namespace srr {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// One regression problem: minimize over x in the ball of the given radius
//
//     L_reg(x) = 1/2 ||f(x) - b||_2^2 + 1/2 ||W C x||_2^2
//
// where f is the softmax of A2 * relu(A1 * x), C = A2 * diag(ind) * A1 with
// ind the 0/1 vector of strictly positive entries of A1 * x, and W = diag(w).
//
// Shape contract: a1 is n x d, a2 is m x n, b and w have length m.
// A conforming instance additionally has ||a1||, ||a2|| <= radius (spectral
// norm), ||b||_2 <= 1, and all w_i > 0; loading does not enforce these so a
// nonconforming file can still be fed to the verification harness.
struct ProblemInstance {
    Mat a1;         // n x d
    Mat a2;         // m x n
    Vec b;          // length m, target distribution
    Vec w;          // length m, regularization weights
    double radius = 1.0;
    int n = 0, m = 0, d = 0;
    std::uint64_t seed = 0;

    // The theta-active probe point accepted at generation time. In-memory
    // only, never serialized; size 0 when the instance was loaded from disk.
    Vec ref_point;
};

// What the model assumptions look like on a concrete instance.
// xi > 1 and theta > 1/xi are required for the overparameterization
// condition; w_i^2 >= w_threshold_i is required for the PD lower bound.
struct AssumptionReport {
    bool a1_full_rank = false;
    bool a2_full_rank = false;
    double xi = 0.0;             // n / max(m, d)
    double theta = 0.0;          // active fraction of relu units at the first probe
    double sigma_min_c = 0.0;    // smallest singular value of C at the first probe
    Vec w_threshold;             // per coordinate: 20 + l / sigma_min_c^2
    bool fixed_relu_state = false; // same indicator vector at every probe
    double pd_lower_bound_l = 0.0; // the configured l
};

// Dense full-rank generator. a1 and a2 are drawn i.i.d. standard normal and
// rescaled so their spectral norms equal 0.9*radius; ||b||_2 = 0.9; w = 1.
// Retries (bounded) until a probe point strictly inside the ball activates at
// least ceil(target_theta * n) relu coordinates; that probe becomes
// ref_point. Deterministic: a fixed seed gives bit-identical matrices.
// Throws DimensionError if n < 2*max(m, d), GenerationFailed if the activity
// target is unreachable within the retry budget.
ProblemInstance generate_instance(int n, int m, int d, double radius,
                                  std::uint64_t seed, double target_theta);

// Checks the instance against the model assumptions on a finite probe set.
// sigma_min(C) comes from a full SVD at the first probe. The fixed-relu-state
// property over the whole ball cannot be decided from finitely many probes;
// the report only says whether the supplied probes share one indicator.
// Throws EmptyProbeSet, and DimensionError if a probe has the wrong length
// or leaves the ball.
AssumptionReport validate_assumptions(const ProblemInstance& inst,
                                      const std::vector<Vec>& probe_points,
                                      double l);

// Returns a copy with w_i = sqrt(20 + l/sigma_min(C)^2 + margin) for all i,
// sigma_min taken at the instance's reference point. f_w = max_i w_i^2 is
// recoverable from the result. Throws RankDeficient when sigma_min(C) = 0
// and invalid_argument when the instance has no reference point (instances
// loaded from disk already carry their weights).
ProblemInstance choose_weights(const ProblemInstance& inst, double l,
                               double margin);

// JSON serialization. Fields: n, m, d, radius, a1 (row-major array of
// arrays), a2, b, w, seed. Doubles are written in shortest-round-trip
// decimal so write -> read reproduces every matrix bit-exactly.
std::string instance_to_json(const ProblemInstance& inst);
ProblemInstance instance_from_json(const std::string& text);
void save_instance(const ProblemInstance& inst, const std::string& path);
ProblemInstance load_instance(const std::string& path);

std::string report_to_json(const AssumptionReport& report);

// Spectral norm (largest singular value) of a dense matrix.
double spectral_norm(const Mat& a);

// Numerical rank with the standard tolerance 1e-10 * sigma_max.
int numerical_rank(const Mat& a);

} // namespace srr
