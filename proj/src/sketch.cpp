#include "srr/sketch.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

namespace srr {

namespace {

// Eigenvalues at or below this fraction of the largest count as zero.
constexpr double kPdFloor = 1e-12;

} // namespace

SketchResult sketch_pd_form(const Mat& c_matrix, const Mat& d_matrix,
                            const SketchConfig& cfg) {
    const Eigen::Index m = c_matrix.rows();
    const Eigen::Index d = c_matrix.cols();
    if (d_matrix.rows() != m || d_matrix.cols() != m)
        throw DimensionError("sketch_pd_form: d_matrix must be m x m");
    if (m < d)
        throw DimensionError("sketch_pd_form: need at least as many rows as columns");
    if (!(cfg.epsilon0 > 0.0 && cfg.epsilon0 < 1.0))
        throw std::invalid_argument("sketch_pd_form: epsilon0 must lie in (0, 1)");
    if (!(cfg.delta > 0.0 && cfg.delta < 1.0))
        throw std::invalid_argument("sketch_pd_form: delta must lie in (0, 1)");
    if (!(cfg.oversample >= 1.0))
        throw std::invalid_argument("sketch_pd_form: oversample must be >= 1");

    // Split the core: D = (D^{1/2})^2 via the symmetric eigendecomposition.
    Eigen::SelfAdjointEigenSolver<Mat> des(d_matrix);
    if (des.info() != Eigen::Success)
        throw std::runtime_error("sketch_pd_form: eigendecomposition of the core failed");
    const Vec dev = des.eigenvalues();
    const double d_max = dev(m - 1);
    if (!(dev(0) > kPdFloor * std::max(d_max, 0.0)))
        throw NotPD("sketch_pd_form: core matrix is not positive definite");
    const Mat d_sqrt =
        des.eigenvectors() * dev.cwiseSqrt().asDiagonal() * des.eigenvectors().transpose();

    const Mat e = d_sqrt * c_matrix; // m x d, H = E^T E exactly
    const Mat h = c_matrix.transpose() * d_matrix * c_matrix;

    // Exact leverage scores: row norms of the thin-U factor of E.
    Eigen::JacobiSVD<Mat> svd(e, Eigen::ComputeThinU);
    const Mat& u = svd.matrixU();
    Vec leverage(m);
    for (Eigen::Index i = 0; i < m; ++i) leverage(i) = u.row(i).squaredNorm();
    const double lev_total = leverage.sum();
    if (!(lev_total > 0.0))
        throw DegenerateC("sketch_pd_form: all leverage scores vanish");

    Eigen::SelfAdjointEigenSolver<Mat> hes(h);
    if (hes.info() != Eigen::Success)
        throw std::runtime_error("sketch_pd_form: eigendecomposition of H failed");
    const Vec hev = hes.eigenvalues();
    if (!(hev(0) > kPdFloor * std::max(hev(d - 1), 0.0)))
        throw DegenerateC("sketch_pd_form: H = C^T D C is numerically singular");

    SketchResult res;
    if (cfg.all_rows) {
        // Deterministic reference path: every row once, unit weight.
        res.h_tilde = e.transpose() * e;
        res.rows_sampled = static_cast<int>(m);
    } else {
        const Vec p = leverage / lev_total;
        const double s_real = cfg.oversample * static_cast<double>(d) *
                              std::log(static_cast<double>(m) / cfg.delta) /
                              (cfg.epsilon0 * cfg.epsilon0);
        const int s = std::max(1, static_cast<int>(std::ceil(s_real)));

        // Inverse-CDF draws: i.i.d. with replacement, proportional to p.
        std::vector<double> cum(m);
        double acc = 0.0;
        for (Eigen::Index i = 0; i < m; ++i) {
            acc += p(i);
            cum[static_cast<size_t>(i)] = acc;
        }
        cum.back() = 1.0; // guard the final bucket against accumulation error

        std::mt19937_64 rng(cfg.seed);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        std::vector<int> counts(static_cast<size_t>(m), 0);
        for (int k = 0; k < s; ++k) {
            const double r = unif(rng);
            const auto it = std::upper_bound(cum.begin(), cum.end(), r);
            const auto idx = std::min<std::ptrdiff_t>(it - cum.begin(), m - 1);
            ++counts[static_cast<size_t>(idx)];
        }

        // H~ = sum_i count_i / (s p_i) e_i e_i^T over the sampled rows.
        res.h_tilde = Mat::Zero(d, d);
        for (Eigen::Index i = 0; i < m; ++i) {
            const int c = counts[static_cast<size_t>(i)];
            if (c == 0) continue;
            const double scale = static_cast<double>(c) / (s * p(i));
            res.h_tilde.noalias() += scale * (e.row(i).transpose() * e.row(i));
        }
        res.rows_sampled = s;
    }

    // Sandwich diagnostic: eigenvalues of H^{-1/2} H~ H^{-1/2} must sit in
    // [1 - eps0, 1 + eps0] for the sketch to certify itself.
    const Mat h_inv_sqrt = hes.eigenvectors() *
                           hev.cwiseInverse().cwiseSqrt().asDiagonal() *
                           hes.eigenvectors().transpose();
    const Mat normalized = h_inv_sqrt * res.h_tilde * h_inv_sqrt;
    Eigen::SelfAdjointEigenSolver<Mat> nes(0.5 * (normalized + normalized.transpose()));
    res.sandwich_lo = nes.eigenvalues()(0);
    res.sandwich_hi = nes.eigenvalues()(d - 1);
    res.sandwich_ok = res.sandwich_lo >= 1.0 - cfg.epsilon0 &&
                      res.sandwich_hi <= 1.0 + cfg.epsilon0;
    return res;
}

} // namespace srr
