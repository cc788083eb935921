#include "srr/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "srr/bounds.hpp"
#include "srr/derivatives.hpp"
#include "srr/forward.hpp"
#include "srr/hessian.hpp"
#include "srr/instance.hpp"
#include "srr/oracle.hpp"
#include "srr/sketch.hpp"
#include "srr/solver.hpp"

namespace srr {

namespace {

Vec read_vector_json(const std::string& path, int want_len, const char* who) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(std::string(who) + ": cannot open: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(buf.str());
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string(who) + ": parse failed: " + e.what());
    }
    if (!j.is_array() || static_cast<int>(j.size()) != want_len)
        throw DimensionError(std::string(who) + ": expected a JSON array of length " +
                             std::to_string(want_len));
    Vec v(want_len);
    for (int i = 0; i < want_len; ++i) v(i) = j.at(i).get<double>();
    return v;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path);
}

Vec parse_start_point(const ProblemInstance& inst, const std::string& format) {
    if (format == "zero") return Vec::Zero(inst.d);
    if (format.rfind("random:", 0) == 0) {
        const std::uint64_t s = std::stoull(format.substr(7));
        std::mt19937_64 rng(s);
        return sample_ball(inst.d, inst.radius, rng);
    }
    if (format.rfind("file:", 0) == 0)
        return read_vector_json(format.substr(5), inst.d, "start point");
    throw std::invalid_argument(
        "start point must be 'zero', 'random:<seed>' or 'file:<path>'");
}

// Cross-checks folded into the verification report: the assembled Hessian
// against its literal entrywise expansion, and both analytic derivatives
// against central finite differences (skipped near a ReLU kink, where the
// finite-difference stencil straddles non-smooth points).
void append_cross_checks(const ProblemInstance& inst, int samples,
                         std::uint64_t seed, BoundsReport& report) {
    const int rounds = std::max(1, std::min(samples, 8));
    std::mt19937_64 rng(seed ^ 0x517cc1b727220a95ULL);

    BoundCheck decomp{"hessian_decomposition_identity", 0, 0, 0, 0.0, 0.0, 1e-10};
    BoundCheck grad_fd{"gradient_matches_fd", 0, 0, 0, 0.0, 0.0, 1e-6};
    BoundCheck hess_fd{"hessian_matches_fd", 0, 0, 0, 0.0, 0.0, 1e-5};
    double decomp_worst = 0.0, grad_worst = 0.0, hess_worst = 0.0;

    for (int r = 0; r < rounds; ++r) {
        const Vec x = sample_ball(inst.d, inst.radius, rng);
        const EvalCache cache = eval(inst, x);
        const HessianParts parts = build_hessian(inst, cache);

        double rel = 0.0;
        for (int i = 0; i < inst.d; ++i) {
            for (int j = 0; j < inst.d; ++j) {
                const double assembled = parts.hess_L(i, j);
                const double denom = 1.0 + std::abs(assembled);
                rel = std::max(rel, std::abs(hessian_six_term(inst, cache, i, j) -
                                             assembled) / denom);
                rel = std::max(rel, std::abs(hessian_entry(inst, cache, i, j) -
                                             assembled) / denom);
            }
        }
        ++decomp.samples;
        if (rel <= decomp.theoretical_constant) ++decomp.passes;
        decomp_worst = std::max(decomp_worst, rel);

        const double kink = kink_distance(inst, x);
        if (kink > 1e-3) {
            const Vec fd = fd_gradient(
                [&](const Vec& p) { return eval(inst, p).loss_reg; }, x, 1e-5);
            const double gr =
                (grad_L_reg(inst, cache) - fd).norm() / (1.0 + fd.norm());
            ++grad_fd.samples;
            if (gr <= grad_fd.theoretical_constant) ++grad_fd.passes;
            grad_worst = std::max(grad_worst, gr);
        } else {
            ++grad_fd.premise_failures;
        }
        if (kink > 1e-2) {
            const Mat fdh = fd_hessian(
                [&](const Vec& p) { return grad_L_reg(inst, eval(inst, p)); },
                x, 1e-4);
            const double hr = (parts.hess_L_reg - fdh).cwiseAbs().maxCoeff() /
                              (1.0 + parts.hess_L_reg.cwiseAbs().maxCoeff());
            ++hess_fd.samples;
            if (hr <= hess_fd.theoretical_constant) ++hess_fd.passes;
            hess_worst = std::max(hess_worst, hr);
        } else {
            ++hess_fd.premise_failures;
        }
    }

    // For these residual-style checks the margin is tolerance minus the worst
    // relative error and the ratio is how much of the tolerance was used.
    decomp.worst_margin = decomp.theoretical_constant - decomp_worst;
    decomp.worst_ratio = decomp_worst / decomp.theoretical_constant;
    grad_fd.worst_margin = grad_fd.theoretical_constant - grad_worst;
    grad_fd.worst_ratio = grad_worst / grad_fd.theoretical_constant;
    hess_fd.worst_margin = hess_fd.theoretical_constant - hess_worst;
    hess_fd.worst_ratio = hess_worst / hess_fd.theoretical_constant;

    report.checks.push_back(decomp);
    report.checks.push_back(grad_fd);
    report.checks.push_back(hess_fd);
    std::sort(report.checks.begin(), report.checks.end(),
              [](const BoundCheck& a, const BoundCheck& b) { return a.name < b.name; });
    report.all_passed = true;
    for (const BoundCheck& c : report.checks)
        if (c.passes != c.samples) report.all_passed = false;
}

struct GenArgs {
    int n = 0, m = 0, d = 0;
    double radius = 1.0, l = 1.0, theta = 0.6, margin = 0.0;
    std::uint64_t seed = 0;
    std::string out;
};

int cmd_gen(const GenArgs& a) {
    ProblemInstance inst =
        generate_instance(a.n, a.m, a.d, a.radius, a.seed, a.theta);
    inst = choose_weights(inst, a.l, a.margin);
    const AssumptionReport rep =
        validate_assumptions(inst, {inst.ref_point}, a.l);
    save_instance(inst, a.out);
    std::cout << report_to_json(rep);
    return 0;
}

struct SolveArgs {
    std::string instance_path;
    std::string mode = "approx";
    std::string x0 = "zero";
    std::optional<double> eta;
    double l = 1.0;
    double eps = 1e-10;
    double grad_tol = 1e-10;
    int max_iters = 100;
    std::optional<double> sketch_eps0;
    double sketch_delta = 0.05;
    double sketch_oversample = 1.0;
    bool sketch_all_rows = false;
    std::uint64_t seed = 0;
    std::optional<std::string> ref_optimum;
    std::string out;
};

int cmd_solve(const SolveArgs& a) {
    const ProblemInstance inst = load_instance(a.instance_path);
    const Vec x0 = parse_start_point(inst, a.x0);

    SolverConfig cfg;
    cfg.eta = a.eta;
    cfg.max_iters = a.max_iters;
    cfg.grad_tol = a.grad_tol;
    cfg.eps = a.eps;
    cfg.seed = a.seed;
    if (a.sketch_eps0) {
        SketchConfig sc;
        sc.epsilon0 = *a.sketch_eps0;
        sc.delta = a.sketch_delta;
        sc.oversample = a.sketch_oversample;
        sc.all_rows = a.sketch_all_rows;
        sc.seed = a.seed;
        cfg.sketch = sc;
    }
    if (a.ref_optimum) {
        const Vec opt = read_vector_json(*a.ref_optimum, inst.d, "reference optimum");
        cfg.ref_optimum = opt;
        cfg.ref_loss_min = eval(inst, opt).loss_reg;
    }

    ConvergenceTrace trace;
    if (a.mode == "approx") {
        cfg.mode = SolveMode::ApproxNewton;
        trace = approx_newton_solve(inst, x0, cfg);
    } else if (a.mode == "loss") {
        cfg.mode = SolveMode::LossNewton;
        if (!cfg.eta) {
            // Default to the guaranteed damping 1/n_const for this instance.
            const TheoreticalBounds tb = compute_bounds(inst, a.l, inst.radius);
            cfg.eta = 1.0 / tb.n_const;
        }
        trace = loss_newton_solve(inst, x0, cfg);
    } else {
        throw std::invalid_argument("solve: --mode must be 'approx' or 'loss'");
    }

    const std::string csv = trace_to_csv(trace);
    if (a.out.empty()) {
        std::cout << csv;
    } else {
        write_text(a.out, csv);
        std::cout << "converged=" << (trace.converged ? "true" : "false")
                  << " iterations=" << trace.iterations_used << " grad_norm="
                  << trace.iterates.back().grad_norm
                  << (trace.ball_exit ? " ball_exit=true" : "") << "\n";
    }
    return 0;
}

struct VerifyArgs {
    std::string instance_path;
    int samples = 100;
    std::uint64_t seed = 0;
    double l = 1.0;
    std::string out;
};

int cmd_verify(const VerifyArgs& a) {
    const ProblemInstance inst = load_instance(a.instance_path);
    BoundsReport report = verify_bounds(inst, a.samples, a.seed, a.l);
    append_cross_checks(inst, a.samples, a.seed, report);
    const std::string text = bounds_report_to_json(report);
    if (a.out.empty()) {
        std::cout << text;
    } else {
        write_text(a.out, text);
        std::cout << (report.all_passed ? "all checks passed"
                                        : "some checks FAILED")
                  << "\n";
    }
    return report.all_passed ? 0 : 1;
}

} // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"two-layer softmax-relu regression toolkit"};
    app.require_subcommand(1);

    GenArgs ga;
    CLI::App* gen = app.add_subcommand(
        "gen", "generate an instance, choose weights, write it to disk");
    gen->add_option("--n", ga.n, "hidden width")->required();
    gen->add_option("--m", ga.m, "output dimension")->required();
    gen->add_option("--d", ga.d, "input dimension")->required();
    gen->add_option("--radius", ga.radius, "ball radius (default 1)");
    gen->add_option("--l", ga.l, "curvature floor the weights must certify");
    gen->add_option("--theta", ga.theta,
                    "target fraction of active hidden units (default 0.6)");
    gen->add_option("--margin", ga.margin,
                    "extra slack added to the squared weights");
    gen->add_option("--seed", ga.seed, "generator seed");
    gen->add_option("-o,--out", ga.out, "instance JSON path")->required();

    SolveArgs sa;
    CLI::App* solve =
        app.add_subcommand("solve", "run a Newton-type solver on an instance");
    solve->add_option("instance", sa.instance_path, "instance JSON path")
        ->required();
    solve->add_option("--mode", sa.mode, "'approx' or 'loss'");
    solve->add_option("--x0", sa.x0, "zero | random:<seed> | file:<path>");
    solve->add_option("--eta", sa.eta, "step size (loss mode defaults to 1/n_const)");
    solve->add_option("--l", sa.l, "curvature floor used for the default step size");
    solve->add_option("--eps", sa.eps, "loss-gap stopping threshold");
    solve->add_option("--grad-tol", sa.grad_tol, "gradient-norm stopping threshold");
    solve->add_option("--max-iters", sa.max_iters, "iteration budget");
    solve->add_option("--sketch-eps0", sa.sketch_eps0,
                      "enable sketched steps with this spectral tolerance");
    solve->add_option("--sketch-delta", sa.sketch_delta,
                      "sketch failure probability (default 0.05)");
    solve->add_option("--sketch-oversample", sa.sketch_oversample,
                      "sketch sample-count multiplier (default 1)");
    solve->add_flag("--sketch-all-rows", sa.sketch_all_rows,
                    "deterministic sketch: every row once, unit weight");
    solve->add_option("--seed", sa.seed, "base seed for sketch draws");
    solve->add_option("--ref-optimum", sa.ref_optimum,
                      "JSON array; enables dist_to_opt and loss_gap columns");
    solve->add_option("-o,--out", sa.out, "trace CSV path (stdout if absent)");

    VerifyArgs va;
    CLI::App* verify = app.add_subcommand(
        "verify", "Monte-Carlo check of every bound on an instance");
    verify->add_option("instance", va.instance_path, "instance JSON path")
        ->required();
    verify->add_option("--samples", va.samples, "points drawn from the ball");
    verify->add_option("--seed", va.seed, "sampling seed");
    verify->add_option("--l", va.l, "curvature floor to verify");
    verify->add_option("-o,--out", va.out, "report JSON path (stdout if absent)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::Success& e) {
        return app.exit(e) == 0 ? 0 : 2;
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (gen->parsed()) return cmd_gen(ga);
        if (solve->parsed()) return cmd_solve(sa);
        if (verify->parsed()) return cmd_verify(va);
        std::cerr << "error: no subcommand given\n";
        return 2;
    } catch (const NotPD& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const DegenerateC& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

} // namespace srr
