#include "srr/hessian.hpp"

#include <stdexcept>
#include <string>

#include "srr/forward.hpp"

namespace srr {

namespace {

struct BParts {
    Mat b1, b2, b3, b4, b5;
};

// The five pieces of the m x m core B, all in terms of the softmax f and the
// residual c at the evaluation point:
//   B1 = diag(f o (f + c))
//   B2 = diag(f) (c + f) f^T
//   B3 = f (c + f)^T diag(f)
//   B4 = <2c + f, f> f f^T
//   B5 = <c, f> diag(f)
BParts build_b_parts(const EvalCache& cache) {
    const Vec& f = cache.softmax;
    const Vec& c = cache.residual;
    const Eigen::Index m = f.size();
    const Vec cf = c + f;

    BParts p;
    p.b1 = Mat::Zero(m, m);
    p.b1.diagonal() = f.cwiseProduct(cf);
    p.b2 = f.cwiseProduct(cf) * f.transpose();
    p.b3 = f * cf.cwiseProduct(f).transpose();
    p.b4 = (2.0 * c + f).dot(f) * (f * f.transpose());
    p.b5 = Mat::Zero(m, m);
    p.b5.diagonal() = c.dot(f) * f;
    return p;
}

Mat total_b(const BParts& p) { return p.b1 - p.b2 - p.b3 + p.b4 - p.b5; }

void check_coord(const ProblemInstance& inst, int i, const char* who) {
    if (i < 0 || i >= inst.d)
        throw std::out_of_range(std::string(who) + ": coordinate " +
                                std::to_string(i) + " out of range for d=" +
                                std::to_string(inst.d));
}

} // namespace

HessianParts build_hessian(const ProblemInstance& inst,
                           const EvalCache& cache) {
    HessianParts parts;
    parts.c_matrix = c_matrix_from_indicator(inst, cache.indicator);

    const BParts bp = build_b_parts(cache);
    parts.b1 = bp.b1;
    parts.b2 = bp.b2;
    parts.b3 = bp.b3;
    parts.b4 = bp.b4;
    parts.b5 = bp.b5;
    parts.b_total = total_b(bp);

    const Vec w_sq = inst.w.array().square().matrix();
    parts.d_matrix = parts.b_total;
    parts.d_matrix.diagonal() += w_sq;

    const Mat& c_mat = parts.c_matrix;
    parts.hess_L = c_mat.transpose() * parts.b_total * c_mat;
    parts.hess_reg = c_mat.transpose() * w_sq.asDiagonal() * c_mat;
    parts.hess_L_reg = c_mat.transpose() * parts.d_matrix * c_mat;
    return parts;
}

double hessian_entry(const ProblemInstance& inst, const EvalCache& cache,
                     int i, int j) {
    check_coord(inst, i, "hessian_entry");
    check_coord(inst, j, "hessian_entry");
    // Entry (i, j) is the quadratic form v_i^T B v_j with
    // v_k = A2 (1[A1 x] o A1 e_k); only m-sized objects are touched.
    const Mat b = total_b(build_b_parts(cache));
    const Vec vi = inst.a2 * cache.indicator.cwiseProduct(inst.a1.col(i));
    const Vec vj = inst.a2 * cache.indicator.cwiseProduct(inst.a1.col(j));
    return vi.dot(b * vj);
}

double hessian_six_term(const ProblemInstance& inst, const EvalCache& cache,
                        int i, int j) {
    check_coord(inst, i, "hessian_six_term");
    check_coord(inst, j, "hessian_six_term");
    const Vec vi = inst.a2 * cache.indicator.cwiseProduct(inst.a1.col(i));
    const Vec vj = inst.a2 * cache.indicator.cwiseProduct(inst.a1.col(j));
    const Vec& f = cache.softmax;
    const Vec& c = cache.residual;

    // Literal six-term expansion of d^2 L / dx_i dx_j:
    const double t1 = f.cwiseProduct(vi).dot(f.cwiseProduct(vj));
    const double t2 = c.dot(f.cwiseProduct(vj).cwiseProduct(vi));
    const double t3 = (c + f).dot(f.cwiseProduct(vi)) * f.dot(vj);
    const double t4 = (c + f).dot(f.cwiseProduct(vj)) * f.dot(vi);
    const double t5 = (2.0 * c + f).dot(f) * f.dot(vj) * f.dot(vi);
    const double t6 = c.dot(f) * f.cwiseProduct(vj).dot(vi);
    return t1 + t2 - t3 - t4 + t5 - t6;
}

} // namespace srr
