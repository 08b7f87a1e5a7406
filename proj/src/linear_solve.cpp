#include "fracflow/linear_solve.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/OrderingMethods>
#include <Eigen/SparseLU>

namespace fracflow {

struct SparseDirectSolver::Impl {
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    Eigen::Index rows = -1;
    Eigen::Index nnz = -1;
    std::vector<int> outer, inner;
};

SparseDirectSolver::SparseDirectSolver(LinearSolveOptions opt) : opt_(opt), impl_(std::make_unique<Impl>()) {}
SparseDirectSolver::~SparseDirectSolver() = default;
SparseDirectSolver::SparseDirectSolver(SparseDirectSolver&&) noexcept = default;
SparseDirectSolver& SparseDirectSolver::operator=(SparseDirectSolver&&) noexcept = default;

int find_null_row(const Eigen::SparseMatrix<double>& A, double tol)
{
    Vector row_max = Vector::Zero(A.rows());
    double global = 0.0;
    for (int k = 0; k < A.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it) {
            const double v = std::abs(it.value());
            row_max[it.row()] = std::max(row_max[it.row()], v);
            global = std::max(global, v);
        }
    for (int i = 0; i < A.rows(); ++i)
        if (!(row_max[i] > tol * global)) return i;
    return -1;
}

Vector SparseDirectSolver::solve(const Eigen::SparseMatrix<double>& A_in, const Vector& b)
{
    if (A_in.rows() != A_in.cols() || A_in.rows() != b.size()) throw std::invalid_argument("linear system size mismatch");
    if (A_in.rows() == 0) return Vector();
    Eigen::SparseMatrix<double> A = A_in;
    A.makeCompressed();
    for (int k = 0; k < A.nonZeros(); ++k)
        if (!std::isfinite(A.valuePtr()[k])) throw SingularMatrixError("non-finite Jacobian entry", -1);
    if (const int r = find_null_row(A, opt_.pivot_tol); r >= 0)
        throw SingularMatrixError("singular Jacobian: null row " + std::to_string(r), r);

    const bool same = impl_->rows == A.rows() && impl_->nnz == A.nonZeros() &&
                      std::equal(impl_->outer.begin(), impl_->outer.end(), A.outerIndexPtr()) &&
                      std::equal(impl_->inner.begin(), impl_->inner.end(), A.innerIndexPtr());
    if (!same) {
        impl_->lu.analyzePattern(A);
        impl_->rows = A.rows();
        impl_->nnz = A.nonZeros();
        impl_->outer.assign(A.outerIndexPtr(), A.outerIndexPtr() + A.outerSize() + 1);
        impl_->inner.assign(A.innerIndexPtr(), A.innerIndexPtr() + A.nonZeros());
    }
    impl_->lu.factorize(A);
    if (impl_->lu.info() != Eigen::Success) throw SingularMatrixError("singular Jacobian: " + impl_->lu.lastErrorMessage(), -1);
    Vector x = impl_->lu.solve(b);
    if (impl_->lu.info() != Eigen::Success || !x.allFinite()) throw SingularMatrixError("singular Jacobian: solve failed", -1);
    // one step of iterative refinement
    Vector r = b - A * x;
    x += impl_->lu.solve(r);
    r = b - A * x;
    const double bn = b.norm();
    if (bn > 0.0 && !(r.norm() <= opt_.residual_tol * bn))
        throw SingularMatrixError("singular Jacobian: residual check failed (" + std::to_string(r.norm() / bn) + ")", -1);
    return x;
}

Vector linear_solve(const Eigen::SparseMatrix<double>& A, const Vector& b, const LinearSolveOptions& opt)
{
    SparseDirectSolver s(opt);
    return s.solve(A, b);
}

}  // namespace fracflow
