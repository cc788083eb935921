#include "srr/solver.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>
#include <string>

#include "srr/derivatives.hpp"
#include "srr/forward.hpp"
#include "srr/hessian.hpp"

namespace srr {

namespace {

// splitmix64-style mixing: decorrelates per-iteration sketch draws from one
// base seed without the iterations sharing a stream.
std::uint64_t mix_seed(std::uint64_t base, int t) {
    std::uint64_t z =
        base + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(t + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

void check_start(const ProblemInstance& inst, const Vec& x0,
                 const SolverConfig& cfg) {
    if (x0.size() != inst.d)
        throw DimensionError("solve: start point has length " +
                             std::to_string(x0.size()) + ", expected " +
                             std::to_string(inst.d));
    if (x0.norm() > inst.radius * (1.0 + 1e-12))
        throw std::invalid_argument("solve: start point lies outside the ball");
    if (cfg.max_iters < 1)
        throw std::invalid_argument("solve: max_iters must be positive");
    if (!(cfg.grad_tol > 0.0))
        throw std::invalid_argument("solve: grad_tol must be positive");
    if (!(cfg.eps > 0.0))
        throw std::invalid_argument("solve: eps must be positive");
}

ConvergenceTrace newton_loop(const ProblemInstance& inst, const Vec& x0,
                             const SolverConfig& cfg, double eta,
                             bool use_sketch, bool gap_stop) {
    ConvergenceTrace trace;
    trace.converged = false;
    trace.ball_exit = false;

    Vec x = x0;
    for (int t = 0;; ++t) {
        const EvalCache cache = eval(inst, x);
        const Vec g = grad_L_reg(inst, cache);

        IterateRecord rec;
        rec.t = t;
        rec.x = x;
        rec.loss_reg = cache.loss_reg;
        rec.grad_norm = g.norm();
        rec.step_kind = use_sketch ? StepKind::Sketched : StepKind::Exact;
        if (cfg.ref_optimum) rec.dist_to_opt = (x - *cfg.ref_optimum).norm();
        if (cfg.ref_loss_min) rec.loss_gap = cache.loss_reg - *cfg.ref_loss_min;
        trace.iterates.push_back(rec);

        if (x.norm() > inst.radius * (1.0 + 1e-9)) trace.ball_exit = true;

        // Stop checks come before any factorization so a dead stationary
        // point (zero gradient, zero Hessian) converges instead of failing.
        if (rec.grad_norm <= cfg.grad_tol) {
            trace.converged = true;
            break;
        }
        if (gap_stop && rec.loss_gap && *rec.loss_gap <= cfg.eps) {
            trace.converged = true;
            break;
        }
        if (t >= cfg.max_iters) break;

        const HessianParts parts = build_hessian(inst, cache);
        Mat h = parts.hess_L_reg;
        if (use_sketch) {
            SketchConfig sc = *cfg.sketch;
            sc.seed = mix_seed(sc.seed, t);
            h = sketch_pd_form(parts.c_matrix, parts.d_matrix, sc).h_tilde;
        }
        Eigen::LLT<Mat> llt(h);
        if (llt.info() != Eigen::Success)
            throw NotPD("solve: step system is not positive definite");
        x -= eta * llt.solve(g);
    }
    trace.iterations_used = static_cast<int>(trace.iterates.size()) - 1;
    return trace;
}

} // namespace

ConvergenceTrace approx_newton_solve(const ProblemInstance& inst,
                                     const Vec& x0, const SolverConfig& cfg) {
    check_start(inst, x0, cfg);
    const double eta = cfg.eta.value_or(1.0);
    if (!(eta > 0.0))
        throw std::invalid_argument("approx_newton_solve: eta must be positive");
    return newton_loop(inst, x0, cfg, eta, cfg.sketch.has_value(),
                       /*gap_stop=*/false);
}

ConvergenceTrace loss_newton_solve(const ProblemInstance& inst, const Vec& x0,
                                   const SolverConfig& cfg) {
    check_start(inst, x0, cfg);
    if (cfg.sketch.has_value())
        throw std::invalid_argument(
            "loss_newton_solve: sketched steps apply to the distance-tracking "
            "mode only");
    if (!cfg.eta.has_value())
        throw std::invalid_argument(
            "loss_newton_solve: eta is required (1/n_const is the guaranteed "
            "choice)");
    const double eta = *cfg.eta;
    if (!(eta > 0.0 && eta <= 1.0))
        throw std::invalid_argument("loss_newton_solve: eta must lie in (0, 1]");
    return newton_loop(inst, x0, cfg, eta, /*use_sketch=*/false,
                       /*gap_stop=*/true);
}

int predict_iterations(SolveMode mode, double start, double eps,
                       double n_const) {
    if (!(start > 0.0) || !(eps > 0.0))
        throw InvalidRange("predict_iterations: start and eps must be positive");
    if (mode == SolveMode::ApproxNewton) {
        // Each step contracts the distance by at least 1/2.5.
        if (eps >= start)
            throw InvalidRange(
                "predict_iterations: eps must be below the starting distance");
        return static_cast<int>(
            std::ceil(std::log(start / eps) / std::log(2.5)));
    }
    if (eps > start)
        throw InvalidRange("predict_iterations: eps exceeds the starting gap");
    if (eps == start) return 0;
    if (!(n_const >= 1.0))
        throw InvalidRange("predict_iterations: n_const must be >= 1");
    // The gap shrinks by a factor 1 - 1/n_const^2 per step.
    return static_cast<int>(
        std::ceil(n_const * n_const * std::log(start / eps)));
}

namespace {

std::string fmt_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

} // namespace

std::string trace_to_csv(const ConvergenceTrace& trace) {
    std::string out = "t,loss_reg,grad_norm,dist_to_opt,loss_gap,step_kind\n";
    for (const IterateRecord& rec : trace.iterates) {
        out += std::to_string(rec.t);
        out += ',';
        out += fmt_double(rec.loss_reg);
        out += ',';
        out += fmt_double(rec.grad_norm);
        out += ',';
        if (rec.dist_to_opt) out += fmt_double(*rec.dist_to_opt);
        out += ',';
        if (rec.loss_gap) out += fmt_double(*rec.loss_gap);
        out += ',';
        out += rec.step_kind == StepKind::Sketched ? "sketched" : "exact";
        out += '\n';
    }
    return out;
}

} // namespace srr
