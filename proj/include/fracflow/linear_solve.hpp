#pragma once

#include <memory>

#include <Eigen/SparseCore>

#include "fracflow/elimination.hpp"

namespace fracflow {

struct LinearSolveOptions {
    double pivot_tol = 0.0;       // a row with no entry above pivot_tol * max |A| is singular
    double residual_tol = 1e-9;   // ||Ax - b|| / ||b||
};

/// Sparse LU with partial pivoting. The symbolic analysis is reused while the sparsity
/// pattern is unchanged. Numerically singular systems raise SingularMatrixError with the
/// offending row.
class SparseDirectSolver {
public:
    explicit SparseDirectSolver(LinearSolveOptions opt = {});
    ~SparseDirectSolver();
    SparseDirectSolver(SparseDirectSolver&&) noexcept;
    SparseDirectSolver& operator=(SparseDirectSolver&&) noexcept;

    Vector solve(const Eigen::SparseMatrix<double>& A, const Vector& b);

private:
    struct Impl;
    LinearSolveOptions opt_;
    std::unique_ptr<Impl> impl_;
};

Vector linear_solve(const Eigen::SparseMatrix<double>& A, const Vector& b, const LinearSolveOptions& opt = {});

/// First row whose largest magnitude is below tol * max |A|, or -1.
int find_null_row(const Eigen::SparseMatrix<double>& A, double tol);

}  // namespace fracflow
