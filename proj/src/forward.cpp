#include "srr/forward.hpp"

#include <cmath>
#include <string>

namespace srr {

namespace {

// exp(t) stays finite for |t| <= this; beyond it the unshifted exponentials
// are suppressed and the shifted (softmax-stable) values stand in for them.
constexpr double kExpWindow = 500.0;

void check_point(const ProblemInstance& inst, const Vec& x, const char* who) {
    if (x.size() != inst.d)
        throw DimensionError(std::string(who) + ": point has length " +
                             std::to_string(x.size()) + ", expected " +
                             std::to_string(inst.d));
}

} // namespace

Mat c_matrix_from_indicator(const ProblemInstance& inst, const Vec& indicator) {
    if (indicator.size() != inst.n)
        throw DimensionError("c_matrix_from_indicator: indicator has length " +
                             std::to_string(indicator.size()) + ", expected " +
                             std::to_string(inst.n));
    // C = A2 * diag(indicator) * A1, with the middle factor applied as a row
    // mask on A1 so no n x n matrix is ever formed.
    Mat masked = (inst.a1.array().colwise() * indicator.array()).matrix();
    return inst.a2 * masked;
}

Mat eval_c_matrix(const ProblemInstance& inst, const Vec& x) {
    check_point(inst, x, "eval_c_matrix");
    const Vec indicator = ((inst.a1 * x).array() > 0.0).cast<double>().matrix();
    return c_matrix_from_indicator(inst, indicator);
}

EvalCache eval(const ProblemInstance& inst, const Vec& x) {
    check_point(inst, x, "eval");

    EvalCache cache;
    cache.x = x;

    const Vec pre = inst.a1 * x;
    cache.indicator = (pre.array() > 0.0).cast<double>().matrix();
    cache.hidden = pre.cwiseMax(0.0);
    cache.logits = inst.a2 * cache.hidden;

    // Softmax through the max-shift, so f is finite for any logit magnitude.
    const double shift = cache.logits.maxCoeff();
    const Vec shifted_exp = (cache.logits.array() - shift).exp().matrix();
    const double shifted_sum = shifted_exp.sum();
    cache.softmax = shifted_exp / shifted_sum;

    if (cache.logits.cwiseAbs().maxCoeff() <= kExpWindow) {
        cache.u = cache.logits.array().exp().matrix();
        cache.alpha = cache.u.sum();
        cache.overflow_suppressed = false;
    } else {
        // Raw exponentials would overflow or flush to zero; keep the shifted
        // values (u and alpha rescaled by exp(-shift)) and flag it.
        cache.u = shifted_exp;
        cache.alpha = shifted_sum;
        cache.overflow_suppressed = true;
    }

    cache.residual = cache.softmax - inst.b;
    cache.loss = 0.5 * cache.residual.squaredNorm();

    const Mat c = c_matrix_from_indicator(inst, cache.indicator);
    const Vec wcx = inst.w.cwiseProduct(c * x);
    cache.reg = 0.5 * wcx.squaredNorm();
    cache.loss_reg = cache.loss + cache.reg;
    return cache;
}

} // namespace srr
