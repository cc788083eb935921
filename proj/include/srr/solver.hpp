#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "srr/instance.hpp"
#include "srr/sketch.hpp"

namespace srr {

enum class SolveMode { ApproxNewton, LossNewton };
enum class StepKind { Exact, Sketched };

struct SolverConfig {
    SolveMode mode = SolveMode::ApproxNewton;

    // Step size. Unset means 1 for ApproxNewton; LossNewton has no
    // instance-free default (the canonical choice is 1/N with N from
    // compute_bounds) and requires an explicit value.
    std::optional<double> eta;

    int max_iters = 100;
    double grad_tol = 1e-10;  // stop when ||grad||_2 <= grad_tol
    double eps = 1e-10;       // target accuracy for the loss gap
    std::optional<SketchConfig> sketch; // ApproxNewton only
    std::uint64_t seed = 0;

    // Optional references: with ref_optimum set, every iterate records
    // dist_to_opt; with ref_loss_min set, every iterate records loss_gap and
    // LossNewton additionally stops once loss_gap <= eps.
    std::optional<Vec> ref_optimum;
    std::optional<double> ref_loss_min;
};

struct IterateRecord {
    int t = 0;
    Vec x;
    double loss_reg = 0;
    double grad_norm = 0;
    std::optional<double> dist_to_opt;
    std::optional<double> loss_gap;
    StepKind step_kind = StepKind::Exact;
};

struct ConvergenceTrace {
    std::vector<IterateRecord> iterates; // entry 0 is the start point
    bool converged = false;
    int iterations_used = 0;
    // Some iterate left the ball ||x|| <= radius. Non-fatal: the update is
    // never projected, projection would change the analyzed dynamics.
    bool ball_exit = false;
};

// Undamped (eta = 1 by default) Newton on the regularized loss, with an
// optional sketched Hessian: x <- x - eta * H~^{-1} g. The linear solve is a
// symmetric PD factorization; a failed factorization throws NotPD rather
// than falling back to a pseudo-inverse, because it is diagnostic of a
// violated weight condition or a bad sketch draw. The gradient stopping rule
// is checked before any factorization, so a start at a stationary point
// returns a 0-iteration trace.
ConvergenceTrace approx_newton_solve(const ProblemInstance& inst, const Vec& x0,
                                     const SolverConfig& cfg);

// Damped Newton with the exact Hessian, measured in loss value. cfg.eta is
// required (canonically 1/N). Stops on grad_tol, max_iters, or
// loss_gap <= eps when a reference minimum is supplied.
ConvergenceTrace loss_newton_solve(const ProblemInstance& inst, const Vec& x0,
                                   const SolverConfig& cfg);

// Iteration budget the convergence guarantees promise.
//   ApproxNewton: ceil(log(dist0/eps) / log 2.5)   from the 0.4 contraction
//   LossNewton:   ceil(N^2 ln(gap0/eps))           from the 1 - 1/N^2 rate
// `start` is dist0 or gap0. Distance mode throws InvalidRange when
// eps >= dist0; gap mode allows equality (0 iterations) and throws only when
// eps > gap0. n_const is ignored in distance mode.
int predict_iterations(SolveMode mode, double start, double eps,
                       double n_const = 1.0);

// CSV export, header t,loss_reg,grad_norm,dist_to_opt,loss_gap,step_kind.
// Reals in shortest-round-trip decimal; absent optionals become empty fields.
std::string trace_to_csv(const ConvergenceTrace& trace);

} // namespace srr
