#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "fracflow/gdm.hpp"

namespace fracflow {

double largest_eigenvalue(int n, const std::function<Vector(const Vector&)>& apply, const EigenOptions& opt)
{
    if (n <= 0) return 0.0;
    std::mt19937 rng(opt.seed);
    std::normal_distribution<double> normal;
    Vector start(n);
    for (int i = 0; i < n; ++i) start[i] = normal(rng);
    start.normalize();

    const int m = std::min(n, opt.krylov_dim);
    double previous = -1.0;
    for (int restart = 0; restart <= opt.max_restarts; ++restart) {
        Eigen::MatrixXd V(n, m);
        Eigen::VectorXd alpha(m), beta(m);
        V.col(0) = start;
        int k = 0;
        double last_beta = 0.0;
        for (; k < m; ++k) {
            Vector w = apply(V.col(k));
            alpha[k] = V.col(k).dot(w);
            // full reorthogonalisation, twice for stability
            for (int pass = 0; pass < 2; ++pass) w -= V.leftCols(k + 1) * (V.leftCols(k + 1).transpose() * w);
            last_beta = w.norm();
            beta[k] = last_beta;
            if (k + 1 == m) break;
            if (last_beta <= 1e-14 * std::max(1.0, std::abs(alpha[k]))) break;
            V.col(k + 1) = w / last_beta;
        }
        const int dim = std::min(k + 1, m);
        Eigen::MatrixXd T = Eigen::MatrixXd::Zero(dim, dim);
        for (int i = 0; i < dim; ++i) {
            T(i, i) = alpha[i];
            if (i + 1 < dim) T(i, i + 1) = T(i + 1, i) = beta[i];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
        const double theta = es.eigenvalues()[dim - 1];
        const Eigen::VectorXd s = es.eigenvectors().col(dim - 1);
        const double residual = std::abs(beta[dim - 1] * s[dim - 1]);
        const double scale = std::max(std::abs(theta), 1e-300);
        if (dim == n || residual <= opt.tol * scale || last_beta <= 1e-14 * std::max(1.0, std::abs(theta))) return theta;
        if (previous >= 0.0 && std::abs(theta - previous) <= 1e-3 * opt.tol * scale) return theta;
        previous = theta;
        start = V.leftCols(dim) * s;
        start.normalize();
    }
    throw EigenError("eigenvalue iteration did not converge");
}

}  // namespace fracflow
