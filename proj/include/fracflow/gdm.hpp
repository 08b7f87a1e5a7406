#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <Eigen/SparseCholesky>

#include "fracflow/mesh.hpp"
#include "fracflow/quadrature.hpp"

namespace fracflow {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

enum class DofKind : std::uint8_t { Node, Sector, Fracture, Cell };

/// Sub-simplex of the matrix on which the reconstructed gradient is constant:
/// grad v = sum_j grad[j] * v[dofs[j]]. Unused slots carry dof -1.
struct MatrixPiece {
    std::array<Point, 3> vertices;
    double area = 0.0;
    int triangle = -1;
    int region = 0;
    std::array<int, 3> dofs{-1, -1, -1};
    std::array<Point, 3> grad;
    int part_begin = 0;
    int part_end = 0;
};

/// Intersection of a DOF volume with a matrix piece; Pi_m v equals v[dof] there.
struct MatrixPart {
    int dof = -1;
    int region = 0;
    int piece = -1;
    double measure = 0.0;
    Polygon polygon;
};

/// Fracture edge with its constant tangential gradient (v[dofs[1]] - v[dofs[0]]) / length.
struct FracturePiece {
    std::array<int, 2> dofs{-1, -1};
    std::array<Point, 2> ends;
    double length = 0.0;
    Point tangent;
    double width = 0.01;
    int fracture = 0;
    int region = 0;
    int edge = -1;
};

/// Half of a fracture piece, measured in arclength interval [s0, s1] from ends[0].
struct FracturePart {
    int dof = -1;
    int piece = -1;
    double s0 = 0.0;
    double s1 = 0.0;
    double length() const { return s1 - s0; }
};

/// Half-edge of one fracture side: Pi_a v = v[trace_dof], Pi_f v = v[fracture_dof],
/// jump = Pi_a v - Pi_f v.
struct InterfacePiece {
    int side = 0;
    int trace_dof = -1;
    int fracture_dof = -1;
    int fracture_piece = -1;
    int triangle = -1;
    int matrix_region = 0;
    double s0 = 0.0;
    double s1 = 0.0;
    Point normal;
    double length() const { return s1 - s0; }
};

/// A gradient discretisation as tabulated operators. The reconstructions are piecewise
/// constant on the parts; gradients are piecewise constant on the pieces.
struct GradientDiscretisation {
    int num_dofs = 0;
    int num_sides = 0;
    int num_fractures = 0;
    std::vector<DofKind> kind;
    std::vector<int> entity;                  // node id, or triangle id for cells
    std::vector<Point> position;
    std::vector<std::uint8_t> boundary_mask;  // BoundaryTag bits of the DOF location
    std::vector<std::uint8_t> dirichlet;      // 1 if the DOF is excluded from X0

    std::vector<MatrixPiece> matrix;
    std::vector<MatrixPart> matrix_parts;
    std::vector<FracturePiece> fracture;
    std::vector<FracturePart> fracture_parts;  // two per piece, same order
    std::vector<InterfacePiece> interface;

    double domain_area = 0.0;

    int num_free() const;
    /// Free DOF index of each DOF, -1 for Dirichlet DOFs.
    std::vector<int> free_index() const;
    std::vector<int> free_dofs() const;
};

/// Volume of the matrix part of each DOF (sum over its parts).
std::vector<double> matrix_volumes(const GradientDiscretisation& gd);
/// Fracture length attached to each DOF.
std::vector<double> fracture_lengths(const GradientDiscretisation& gd);

/// Structural checks of the operator tables; empty when consistent.
std::vector<std::string> check_discretisation(const GradientDiscretisation& gd);

/// Gram matrix of the GD norm on X0, with its factorization.
class GDNormCache {
public:
    explicit GDNormCache(const GradientDiscretisation& gd);

    const GradientDiscretisation& gd() const { return *gd_; }
    const SparseMatrix& gram() const { return gram_; }
    int size() const { return static_cast<int>(free_.size()); }
    const std::vector<int>& free_dofs() const { return free_; }

    Vector restrict_to_free(const Vector& full) const;
    Vector extend(const Vector& free) const;
    /// A^{-1} r on X0.
    Vector solve(const Vector& r) const;
    /// sqrt(r^T A^{-1} r): the dual norm of the functional with coefficients r on X0.
    double dual_norm(const Vector& r) const;

private:
    const GradientDiscretisation* gd_;
    std::vector<int> free_;
    std::vector<int> index_;
    SparseMatrix gram_;
    std::unique_ptr<Eigen::SimplicialLLT<SparseMatrix>> chol_;
};

/// ||v||_D. Accepts a vector on X0 or a full DOF vector whose Dirichlet entries vanish.
double gd_norm(const GDNormCache& cache, const Vector& v);

/// Diagonal mass of the function reconstructions (matrix, fracture, each side) per DOF.
Vector reconstruction_mass(const GradientDiscretisation& gd);

struct SmoothScalar {
    std::function<double(const Point&)> value;
    std::function<Point(const Point&)> gradient;
};

struct SmoothField {
    std::function<Point(const Point&)> value;
    std::function<Eigen::Matrix2d(const Point&)> jacobian;
};

struct EigenOptions {
    int krylov_dim = 60;
    int max_restarts = 40;
    double tol = 1e-10;
    unsigned seed = 12345;
};

class EigenError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Largest eigenvalue of a symmetric positive semidefinite operator of size n
/// (restarted Lanczos with full reorthogonalisation).
double largest_eigenvalue(int n, const std::function<Vector(const Vector&)>& apply, const EigenOptions& opt = {});

/// Largest lambda with G v = lambda A v (A the Gram matrix of the cache, G on X0).
double generalized_largest_eigenvalue(const GDNormCache& cache, const SparseMatrix& G,
                                      const EigenOptions& opt = {});

struct CoercivityEstimate {
    double lambda_max = 0.0;
    double low = 0.0;   // sqrt(lambda_max)
    double high = 0.0;  // sqrt((2 + #sides) lambda_max)
};

CoercivityEstimate coercivity_estimate(const GDNormCache& cache, const EigenOptions& opt = {});

struct ConsistencyResult {
    double value = 0.0;
    std::array<double, 6> terms{};  // grad_m, grad_f, Pi_m, Pi_f, jump, trace
    Vector v;                       // full DOF vector at the minimiser
};

/// S_D(u) with u_f given on the fracture network through a function on the plane;
/// its tangential gradient is the gradient projected on each fracture edge.
ConsistencyResult consistency_defect(const GradientDiscretisation& gd, const SmoothScalar& u_m,
                                     const SmoothScalar& u_f, int quad_level = 1);

struct LimitConformityResult {
    double value = 0.0;
    bool quadrature_insufficient = false;
    Vector functional;  // coefficients on X0
};

/// W_D(q, phi). q_f is given by a planar field whose tangential component is used on
/// each fracture; phi receives (side, point).
LimitConformityResult limit_conformity_defect(const GDNormCache& cache, const SmoothField& q_m,
                                              const SmoothField& q_f,
                                              const std::function<double(int, const Point&)>& phi,
                                              int quad_level = 1);

/// Gram matrix (on X0) of the squared translate functional for the shift xi; fracture
/// shifts are the projection of xi on each (straight) fracture.
SparseMatrix translate_gram(const GradientDiscretisation& gd, const Point& xi);

/// T_D(xi) for each sample shift (squared-sum surrogate of the translate functional).
std::vector<double> compactness_translate_estimate(const GDNormCache& cache, const std::vector<Point>& shifts,
                                                   const EigenOptions& opt = {});

/// Discrete time derivative (w_{n+1} - w_n) / dt.
Vector discrete_time_derivative(const Vector& w_prev, const Vector& w_next, double dt);

}  // namespace fracflow
