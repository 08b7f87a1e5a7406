#include "fracflow/elimination.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fracflow {

int BlockPattern::find(int i, int j) const
{
    const auto begin = cols.begin() + row_ptr[i], end = cols.begin() + row_ptr[i + 1];
    const auto it = std::lower_bound(begin, end, j);
    return (it != end && *it == j) ? static_cast<int>(it - cols.begin()) : -1;
}

int BlockPattern::slot(int i, int j) const
{
    const int s = find(i, j);
    if (s < 0) throw std::out_of_range("block (" + std::to_string(i) + ", " + std::to_string(j) + ") not in pattern");
    return s;
}

BlockPattern pattern_from_pairs(int n, const std::vector<std::pair<int, int>>& pairs)
{
    std::vector<std::vector<int>> rows(n);
    for (int i = 0; i < n; ++i) rows[i].push_back(i);
    for (const auto& [a, b] : pairs) {
        rows[a].push_back(b);
        rows[b].push_back(a);
    }
    BlockPattern p;
    p.num_rows = n;
    p.row_ptr.assign(1, 0);
    for (auto& r : rows) {
        std::sort(r.begin(), r.end());
        r.erase(std::unique(r.begin(), r.end()), r.end());
        p.cols.insert(p.cols.end(), r.begin(), r.end());
        p.row_ptr.push_back(static_cast<int>(p.cols.size()));
    }
    return p;
}

BlockPattern discretisation_pattern(const GradientDiscretisation& gd)
{
    std::vector<std::pair<int, int>> pairs;
    for (const auto& piece : gd.matrix)
        for (int j = 0; j < 3; ++j)
            for (int k = j + 1; k < 3; ++k)
                if (piece.dofs[j] >= 0 && piece.dofs[k] >= 0) pairs.emplace_back(piece.dofs[j], piece.dofs[k]);
    for (const auto& piece : gd.fracture) pairs.emplace_back(piece.dofs[0], piece.dofs[1]);
    for (const auto& ip : gd.interface) pairs.emplace_back(ip.trace_dof, ip.fracture_dof);
    return pattern_from_pairs(gd.num_dofs, pairs);
}

BlockMatrix::BlockMatrix(const BlockPattern* p) : pattern(p)
{
    if (p) blocks.assign(p->nnz(), Block::Zero());
}

void BlockMatrix::set_zero() { std::fill(blocks.begin(), blocks.end(), Block::Zero()); }

Eigen::SparseMatrix<double> BlockMatrix::to_sparse() const
{
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(4 * blocks.size());
    for (int i = 0; i < pattern->num_rows; ++i)
        for (int s = pattern->row_ptr[i]; s < pattern->row_ptr[i + 1]; ++s)
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) t.emplace_back(2 * i + a, 2 * pattern->cols[s] + b, blocks[s](a, b));
    Eigen::SparseMatrix<double> m(2 * pattern->num_rows, 2 * pattern->num_rows);
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

Vector BlockMatrix::multiply(const Vector& x) const
{
    Vector y = Vector::Zero(2 * pattern->num_rows);
    for (int i = 0; i < pattern->num_rows; ++i)
        for (int s = pattern->row_ptr[i]; s < pattern->row_ptr[i + 1]; ++s)
            y.segment<2>(2 * i) += blocks[s] * x.segment<2>(2 * pattern->cols[s]);
    return y;
}

ReducedSystem eliminate_cells(const BlockMatrix& J, const Vector& rhs, const std::vector<std::uint8_t>& active,
                              const std::vector<std::uint8_t>& eliminate)
{
    const BlockPattern& p = *J.pattern;
    const int n = p.num_rows;
    ReducedSystem sys;
    std::vector<int> red(n, -1);
    for (int i = 0; i < n; ++i) {
        if (!active[i]) continue;
        if (eliminate[i]) {
            sys.eliminated.push_back(i);
        } else {
            red[i] = static_cast<int>(sys.kept.size());
            sys.kept.push_back(i);
        }
    }

    std::vector<Block> S = J.blocks;
    sys.rhs = Vector::Zero(2 * static_cast<int>(sys.kept.size()));
    for (int k = 0; k < static_cast<int>(sys.kept.size()); ++k) sys.rhs.segment<2>(2 * k) = rhs.segment<2>(2 * sys.kept[k]);

    sys.inverse.reserve(sys.eliminated.size());
    sys.rhs_cell.reserve(sys.eliminated.size());
    for (int c : sys.eliminated) {
        const Block& pivot = J.blocks[p.slot(c, c)];
        std::vector<int> nb;  // slots of active kept neighbours in row c
        for (int s = p.row_ptr[c]; s < p.row_ptr[c + 1]; ++s) {
            const int j = p.cols[s];
            if (j == c || !active[j]) continue;
            if (eliminate[j]) {
                if (!J.blocks[s].isZero(0.0))
                    throw std::invalid_argument("eliminated DOFs " + std::to_string(c) + " and " + std::to_string(j) +
                                                " are coupled");
                continue;
            }
            nb.push_back(s);
        }
        const double scale = pivot.cwiseAbs().maxCoeff();
        const double det = pivot.determinant();
        if (!std::isfinite(det) || scale == 0.0 || std::abs(det) <= 1e-14 * scale * scale)
            throw SingularMatrixError("zero cell pivot at DOF " + std::to_string(c), c);
        const Block inv = pivot.inverse();
        const Eigen::Vector2d rc = rhs.segment<2>(2 * c);
        sys.inverse.push_back(inv);
        sys.rhs_cell.push_back(rc);
        for (int sj : nb) {
            const int j = p.cols[sj];
            const Block right = inv * J.blocks[sj];  // inv * A_cj
            for (int si : nb) {
                const int i = p.cols[si];
                const Block& left = J.blocks[p.slot(i, c)];  // A_ic
                S[p.slot(i, j)] -= left * right;
            }
        }
        const Eigen::Vector2d y = inv * rc;
        for (int si : nb) {
            const int i = p.cols[si];
            sys.rhs.segment<2>(2 * red[i]) -= J.blocks[p.slot(i, c)] * y;
        }
    }

    std::vector<Eigen::Triplet<double>> t;
    for (int k = 0; k < static_cast<int>(sys.kept.size()); ++k) {
        const int i = sys.kept[k];
        for (int s = p.row_ptr[i]; s < p.row_ptr[i + 1]; ++s) {
            const int j = p.cols[s];
            if (red[j] < 0) continue;
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b)
                    t.emplace_back(2 * k + a, 2 * red[j] + b, S[s](a, b));
        }
    }
    const int m = 2 * static_cast<int>(sys.kept.size());
    sys.matrix.resize(m, m);
    sys.matrix.setFromTriplets(t.begin(), t.end());
    return sys;
}

Vector back_substitute(const BlockMatrix& J, const ReducedSystem& sys, const Vector& reduced_solution)
{
    const BlockPattern& p = *J.pattern;
    Vector x = Vector::Zero(2 * p.num_rows);
    std::vector<std::uint8_t> known(p.num_rows, 0);
    for (int k = 0; k < static_cast<int>(sys.kept.size()); ++k) {
        x.segment<2>(2 * sys.kept[k]) = reduced_solution.segment<2>(2 * k);
        known[sys.kept[k]] = 1;
    }
    for (std::size_t e = 0; e < sys.eliminated.size(); ++e) {
        const int c = sys.eliminated[e];
        Eigen::Vector2d r = sys.rhs_cell[e];
        for (int s = p.row_ptr[c]; s < p.row_ptr[c + 1]; ++s) {
            const int j = p.cols[s];
            if (j != c && known[j]) r -= J.blocks[s] * x.segment<2>(2 * j);
        }
        x.segment<2>(2 * c) = sys.inverse[e] * r;
    }
    return x;
}

}  // namespace fracflow
