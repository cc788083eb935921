#include "srr/oracle.hpp"

namespace srr {

Vec fd_gradient(const std::function<double(const Vec&)>& func, const Vec& x,
                double h) {
    Vec g(x.size());
    Vec probe = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        probe(i) = x(i) + h;
        const double up = func(probe);
        probe(i) = x(i) - h;
        const double down = func(probe);
        probe(i) = x(i);
        g(i) = (up - down) / (2.0 * h);
    }
    return g;
}

Mat fd_hessian(const std::function<Vec(const Vec&)>& grad, const Vec& x,
               double h) {
    const Eigen::Index dim = x.size();
    Mat jac(dim, dim);
    Vec probe = x;
    for (Eigen::Index i = 0; i < dim; ++i) {
        probe(i) = x(i) + h;
        const Vec up = grad(probe);
        probe(i) = x(i) - h;
        const Vec down = grad(probe);
        probe(i) = x(i);
        jac.col(i) = (up - down) / (2.0 * h);
    }
    // The true Hessian is symmetric; averaging cancels the antisymmetric
    // part of the finite-difference noise.
    return 0.5 * (jac + jac.transpose());
}

double kink_distance(const ProblemInstance& inst, const Vec& x) {
    if (x.size() != inst.d)
        throw DimensionError("kink_distance: point has length " +
                             std::to_string(x.size()) + ", expected " +
                             std::to_string(inst.d));
    return (inst.a1 * x).cwiseAbs().minCoeff();
}

} // namespace srr
