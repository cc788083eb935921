#include "srr/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "json.hpp"

#include "srr/derivatives.hpp"
#include "srr/forward.hpp"
#include "srr/hessian.hpp"

namespace srr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMaxDouble = std::numeric_limits<double>::max();

// coef * exp(arg) with overflow capped at the largest finite double and
// flagged, never silently turned into infinity.
double guarded_scale_exp(double coef, double arg, bool& saturated) {
    if (arg > 700.0 || std::log(coef) + arg > 709.0) {
        saturated = true;
        return kMaxDouble;
    }
    return coef * std::exp(arg);
}

// Largest singular value of a small dense matrix.
double op_norm(const Mat& a) {
    Eigen::JacobiSVD<Mat> svd(a);
    return svd.singularValues()(0);
}

// One bound check accumulated over Monte-Carlo samples.  `lower` switches
// the direction: margin is always "slack toward the bound" (positive =
// comfortable pass) and ratio is always "how much of the bound is used"
// (far below 1 = bound is loose, above 1 = violated).
struct Accumulator {
    double constant = 0.0;
    bool lower = false;
    double slack = 0.0; // absolute tolerance on the margin
    int samples = 0;
    int passes = 0;
    int premise_failures = 0;
    double worst_margin = kInf;
    double worst_ratio = -kInf;

    void skip() { ++premise_failures; }

    void observe(double empirical) {
        ++samples;
        const double margin =
            lower ? empirical - constant : constant - empirical;
        double ratio;
        if (lower)
            ratio = empirical != 0.0 ? constant / empirical : kMaxDouble;
        else
            ratio = constant != 0.0 ? empirical / constant : kMaxDouble;
        if (margin >= -slack) ++passes;
        worst_margin = std::min(worst_margin, margin);
        worst_ratio = std::max(worst_ratio, std::min(ratio, kMaxDouble));
    }

    BoundCheck finish(const std::string& name) const {
        BoundCheck c;
        c.name = name;
        c.samples = samples;
        c.passes = passes;
        c.premise_failures = premise_failures;
        c.worst_margin = samples > 0 ? worst_margin : 0.0;
        c.worst_ratio = samples > 0 ? worst_ratio : 0.0;
        c.theoretical_constant = constant;
        return c;
    }
};

// Does the pointwise weight premise hold at this C matrix?  It needs full
// column rank and every squared weight at least 20 + l / sigma_min(C)^2.
bool pd_premise_holds(const ProblemInstance& inst, const Mat& c_matrix,
                      double l) {
    Eigen::JacobiSVD<Mat> svd(c_matrix);
    const auto& sv = svd.singularValues();
    const double sigma_min = sv(sv.size() - 1);
    if (sigma_min <= 1e-10 * sv(0)) return false;
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) > 1e-10 * sv(0)) ++rank;
    if (rank < inst.d) return false;
    const double w_min_sq = inst.w.minCoeff() * inst.w.minCoeff();
    return w_min_sq + 1e-9 >= 20.0 + l / (sigma_min * sigma_min);
}

} // namespace

Vec sample_ball(int dim, double radius, std::mt19937_64& rng) {
    if (dim < 1) throw std::invalid_argument("sample_ball: dim must be positive");
    if (!(radius > 0.0)) throw std::invalid_argument("sample_ball: radius must be positive");
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Vec dir(dim);
    double norm = 0.0;
    do {
        for (int i = 0; i < dim; ++i) dir(i) = gauss(rng);
        norm = dir.norm();
    } while (norm == 0.0);
    // Direction uniform on the sphere, radius scaled by u^(1/dim) so the
    // point is uniform in the ball.
    return (radius * std::pow(unif(rng), 1.0 / dim) / norm) * dir;
}

TheoreticalBounds compute_bounds(const ProblemInstance& inst, double l,
                                 double probe_radius) {
    if (!(l > 0.0)) throw std::invalid_argument("compute_bounds: l must be positive");
    if (!(probe_radius > 0.0))
        throw std::invalid_argument("compute_bounds: probe_radius must be positive");

    TheoreticalBounds tb;
    tb.r_eff = std::max({spectral_norm(inst.a1), spectral_norm(inst.a2),
                         probe_radius});
    const double r2 = tb.r_eff * tb.r_eff;
    const double r3 = r2 * tb.r_eff;
    const double r4 = r2 * r2;
    const double m_d = static_cast<double>(inst.m);
    const double coef = std::pow(m_d, 1.5) *
                        std::sqrt(static_cast<double>(inst.n) *
                                  static_cast<double>(inst.d));

    tb.saturated = false;
    tb.h_bound = r2;
    tb.u_bound = guarded_scale_exp(std::sqrt(m_d), r3, tb.saturated);
    tb.beta_bound = std::exp(-r3); // lower bound; underflow to 0 stays honest
    tb.f_bound = 1.0;
    tb.c_bound = 2.0;
    tb.b_norm_bound = 16.0;
    tb.b_psd_bound = 20.0;
    tb.lipschitz_m = guarded_scale_exp(coef, 5.0 * r3, tb.saturated);
    tb.f_lip = guarded_scale_exp(2.0 * r2 * coef, 4.0 * r3, tb.saturated);
    tb.pd_l = l;
    tb.w_sq_max = inst.w.array().square().maxCoeff();
    tb.n_const = r4 * (16.0 + tb.w_sq_max) / l;
    return tb;
}

BoundsReport verify_bounds(const ProblemInstance& inst, int samples,
                           std::uint64_t seed, double l) {
    if (samples < 1)
        throw std::invalid_argument("verify_bounds: samples must be positive");

    BoundsReport report;
    report.bounds = compute_bounds(inst, l, inst.radius);
    report.samples = samples;
    report.seed = seed;
    const TheoreticalBounds& tb = report.bounds;

    std::map<std::string, Accumulator> acc;
    acc["hidden_norm"] = {tb.h_bound, false, 1e-12 * tb.h_bound};
    acc["u_norm"] = {tb.u_bound, false, 1e-12 * tb.u_bound};
    acc["alpha_floor"] = {tb.beta_bound, true, 1e-12 * tb.beta_bound};
    acc["softmax_norm"] = {tb.f_bound, false, 1e-12};
    acc["residual_norm"] = {tb.c_bound, false, 1e-12};
    acc["b_operator_norm"] = {tb.b_norm_bound, false, 1e-12 * 16.0};
    acc["b_eigenvalue_window"] = {tb.b_psd_bound, false, 1e-12 * 20.0};
    acc["regularized_curvature_floor"] = {tb.pd_l, true, 1e-8 * tb.pd_l};
    acc["hessian_lipschitz"] = {tb.lipschitz_m, false, 1e-9 * tb.lipschitz_m};
    acc["softmax_lipschitz"] = {tb.f_lip, false, 1e-9 * tb.f_lip};
    acc["inverse_pair_product"] = {tb.n_const, false, 1e-9 * tb.n_const};

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    for (int t = 0; t < samples; ++t) {
        const Vec x = sample_ball(inst.d, inst.radius, rng);
        const EvalCache cache = eval(inst, x);

        acc["hidden_norm"].observe(cache.hidden.norm());
        if (cache.overflow_suppressed)
            acc["u_norm"].skip(); // raw exponentials not representable here
        else
            acc["u_norm"].observe(cache.u.norm());
        acc["alpha_floor"].observe(cache.overflow_suppressed ? kMaxDouble
                                                             : cache.alpha);
        acc["softmax_norm"].observe(cache.softmax.norm());
        acc["residual_norm"].observe(cache.residual.norm());

        const HessianParts parts = build_hessian(inst, cache);
        Eigen::SelfAdjointEigenSolver<Mat> bes(parts.b_total);
        const double b_extreme = std::max(std::abs(bes.eigenvalues()(0)),
                                          std::abs(bes.eigenvalues()(inst.m - 1)));
        acc["b_operator_norm"].observe(b_extreme);
        acc["b_eigenvalue_window"].observe(b_extreme);

        if (pd_premise_holds(inst, parts.c_matrix, l)) {
            Eigen::SelfAdjointEigenSolver<Mat> hes(parts.hess_L_reg);
            acc["regularized_curvature_floor"].observe(hes.eigenvalues()(0));
        } else {
            acc["regularized_curvature_floor"].skip();
        }

        // Lipschitz checks need a nearby mate with the same ReLU state.
        bool found = false;
        Vec y;
        double step = 1e-3 * inst.radius;
        for (int attempt = 0; attempt < 32 && !found; ++attempt) {
            Vec dir(inst.d);
            for (int i = 0; i < inst.d; ++i) dir(i) = gauss(rng);
            const double dn = dir.norm();
            if (dn == 0.0) continue;
            Vec cand = x + (step / dn) * dir;
            const Vec cand_ind =
                ((inst.a1 * cand).array() > 0.0).cast<double>().matrix();
            if (cand.norm() <= inst.radius && cand_ind == cache.indicator &&
                (cand - x).norm() > 0.0) {
                y = std::move(cand);
                found = true;
            }
            step *= 0.5;
        }
        if (found) {
            const EvalCache cache_y = eval(inst, y);
            const HessianParts parts_y = build_hessian(inst, cache_y);
            const double dist = (x - y).norm();
            acc["hessian_lipschitz"].observe(
                op_norm(parts.hess_L - parts_y.hess_L) / dist);
            acc["softmax_lipschitz"].observe(
                (cache.softmax - cache_y.softmax).norm() / dist);
        } else {
            acc["hessian_lipschitz"].skip();
            acc["softmax_lipschitz"].skip();
        }

        // Product bound pairs the inverse at one point with the Hessian at
        // another; the curvature premise is needed only at the inverted one.
        const Vec xa = sample_ball(inst.d, inst.radius, rng);
        const Vec xb = sample_ball(inst.d, inst.radius, rng);
        const HessianParts pa = build_hessian(inst, eval(inst, xa));
        const HessianParts pb = build_hessian(inst, eval(inst, xb));
        if (pd_premise_holds(inst, pa.c_matrix, l)) {
            Eigen::LLT<Mat> llt(pa.hess_L_reg);
            if (llt.info() == Eigen::Success)
                acc["inverse_pair_product"].observe(
                    op_norm(llt.solve(pb.hess_L_reg)));
            else
                acc["inverse_pair_product"].skip();
        } else {
            acc["inverse_pair_product"].skip();
        }
    }

    report.all_passed = true;
    for (const auto& [name, a] : acc) {
        report.checks.push_back(a.finish(name));
        if (a.passes != a.samples) report.all_passed = false;
    }
    return report;
}

std::string bounds_report_to_json(const BoundsReport& report) {
    nlohmann::json j;
    const TheoreticalBounds& tb = report.bounds;
    nlohmann::json hdr;
    hdr["r_eff"] = tb.r_eff;
    hdr["h_bound"] = tb.h_bound;
    hdr["u_bound"] = tb.u_bound;
    hdr["beta_bound"] = tb.beta_bound;
    hdr["f_bound"] = tb.f_bound;
    hdr["c_bound"] = tb.c_bound;
    hdr["b_norm_bound"] = tb.b_norm_bound;
    hdr["b_psd_bound"] = tb.b_psd_bound;
    hdr["lipschitz_m"] = tb.lipschitz_m;
    hdr["pd_l"] = tb.pd_l;
    hdr["w_sq_max"] = tb.w_sq_max;
    hdr["n_const"] = tb.n_const;
    hdr["f_lip"] = tb.f_lip;
    hdr["saturated"] = tb.saturated;
    hdr["samples"] = report.samples;
    hdr["seed"] = report.seed;
    j["header"] = hdr;

    nlohmann::json checks = nlohmann::json::array();
    for (const BoundCheck& c : report.checks) {
        nlohmann::json jc;
        jc["name"] = c.name;
        jc["samples"] = c.samples;
        jc["passes"] = c.passes;
        jc["premise_failures"] = c.premise_failures;
        jc["worst_margin"] = c.worst_margin;
        jc["worst_ratio"] = c.worst_ratio;
        jc["theoretical_constant"] = c.theoretical_constant;
        checks.push_back(std::move(jc));
    }
    j["checks"] = std::move(checks);
    j["all_passed"] = report.all_passed;
    return j.dump(2) + "\n";
}

} // namespace srr
