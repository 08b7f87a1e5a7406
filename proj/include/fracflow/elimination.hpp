#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>
#include <Eigen/LU>
#include <Eigen/SparseCore>

#include "fracflow/gdm.hpp"

namespace fracflow {

using Block = Eigen::Matrix2d;

/// Raised when a linear system is (numerically) singular; `row` is the offending DOF.
class SingularMatrixError : public std::runtime_error {
public:
    SingularMatrixError(const std::string& what, int row) : std::runtime_error(what), row_(row) {}
    int row() const { return row_; }

private:
    int row_;
};

/// Symmetric block sparsity over DOFs, one 2x2 phase block per coupled pair.
struct BlockPattern {
    int num_rows = 0;
    std::vector<int> row_ptr;
    std::vector<int> cols;  // sorted within each row

    /// Index of block (i, j); throws if the pair is not in the pattern.
    int slot(int i, int j) const;
    int find(int i, int j) const;  // -1 if absent
    int nnz() const { return static_cast<int>(cols.size()); }
};

/// Couplings induced by the pieces of a discretisation.
BlockPattern discretisation_pattern(const GradientDiscretisation& gd);
/// Pattern from an explicit list of coupled pairs (diagonal added).
BlockPattern pattern_from_pairs(int n, const std::vector<std::pair<int, int>>& pairs);

struct BlockMatrix {
    const BlockPattern* pattern = nullptr;
    std::vector<Block> blocks;

    explicit BlockMatrix(const BlockPattern* p = nullptr);
    void set_zero();
    Block& at(int i, int j) { return blocks[pattern->slot(i, j)]; }
    const Block& at(int i, int j) const { return blocks[pattern->slot(i, j)]; }
    /// Unknown ordering 2*dof + phase.
    Eigen::SparseMatrix<double> to_sparse() const;
    Vector multiply(const Vector& x) const;
};

/// Static condensation of the `eliminate` DOFs (each coupled only to non-eliminated DOFs)
/// out of the system restricted to the `active` DOFs.
struct ReducedSystem {
    Eigen::SparseMatrix<double> matrix;  // 2 * kept.size() square
    Vector rhs;
    std::vector<int> kept;        // DOF for each reduced block row
    std::vector<int> eliminated;  // eliminated DOFs
    std::vector<Block> inverse;   // inverse cell pivots
    std::vector<Eigen::Vector2d> rhs_cell;
};

ReducedSystem eliminate_cells(const BlockMatrix& J, const Vector& rhs, const std::vector<std::uint8_t>& active,
                              const std::vector<std::uint8_t>& eliminate);

/// Full solution (zero on inactive DOFs) from the reduced solution.
Vector back_substitute(const BlockMatrix& J, const ReducedSystem& sys, const Vector& reduced_solution);

}  // namespace fracflow
