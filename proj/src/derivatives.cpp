#include "srr/derivatives.hpp"

#include <string>

#include "srr/forward.hpp"

namespace srr {

Vec grad_L(const ProblemInstance& inst, const EvalCache& cache) {
    //   dL/dx = C^T (f o c - <c, f> f)
    // with C frozen at the cached ReLU state.
    const Mat c_mat = c_matrix_from_indicator(inst, cache.indicator);
    const Vec& f = cache.softmax;
    const Vec& c = cache.residual;
    return c_mat.transpose() * (f.cwiseProduct(c) - c.dot(f) * f);
}

double grad_L_entry(const ProblemInstance& inst, const EvalCache& cache,
                    int i) {
    if (i < 0 || i >= inst.d)
        throw std::out_of_range("grad_L_entry: coordinate " + std::to_string(i) +
                                " out of range for d=" + std::to_string(inst.d));
    // Literal per-coordinate form: with v_i = A2 (1[A1 x] o A1 e_i),
    //   dL/dx_i = <c, f o v_i> - <c, f> <f, v_i>.
    const Vec vi = inst.a2 * cache.indicator.cwiseProduct(inst.a1.col(i));
    const Vec& f = cache.softmax;
    const Vec& c = cache.residual;
    return c.dot(f.cwiseProduct(vi)) - c.dot(f) * f.dot(vi);
}

Vec grad_L_reg(const ProblemInstance& inst, const EvalCache& cache) {
    const Mat c_mat = c_matrix_from_indicator(inst, cache.indicator);
    const Vec& f = cache.softmax;
    const Vec& c = cache.residual;
    const Vec loss_part = f.cwiseProduct(c) - c.dot(f) * f;
    // Ridge part: d/dx 0.5 ||W C x||^2 = C^T W^2 C x  (C locally constant).
    const Vec ridge_part =
        inst.w.array().square().matrix().cwiseProduct(c_mat * cache.x);
    return c_mat.transpose() * (loss_part + ridge_part);
}

} // namespace srr
