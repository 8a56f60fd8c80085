#pragma once

#include <cstddef>
#include <vector>

#include "mtdc/errors.hpp"

namespace mtdc {

using Vec = std::vector<double>;

// Fixed numerical tolerances used across the library. Keeping them in one
// place makes pass/fail behaviour reproducible across platforms.
struct ToleranceProfile {
    double lu_pivot_rel = 1e-12;        // pivot cutoff relative to max|A|
    double chol_pivot_rel = 1e-12;      // pivot cutoff relative to trace/n
    double symmetry_rel = 1e-10;        // allowed relative asymmetry
    double jacobi_off_rel = 1e-12;      // off-diagonal Frobenius target
    int jacobi_max_sweeps = 100;
    double equilibrium_residual = 1e-9; // ||A x0 + b||_inf ceiling
    double rk4_safety = 0.1;            // substep: h * rho(A) <= rk4_safety
};

inline constexpr ToleranceProfile kTol{};

// Dense row-major real matrix. Systems in this project never exceed a few
// dozen states, so there is no sparse storage and no dimension above 64 for
// the Lyapunov path.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), a_(rows * cols, fill) {}

    static Matrix identity(std::size_t n);
    static Matrix diag(const Vec& d);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

    const Vec& data() const { return a_; }
    Vec& data() { return a_; }

    bool all_finite() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    Vec a_;
};

Matrix operator+(const Matrix& x, const Matrix& y);
Matrix operator-(const Matrix& x, const Matrix& y);
Matrix operator*(const Matrix& x, const Matrix& y);
Matrix operator*(double s, const Matrix& x);
Vec operator*(const Matrix& x, const Vec& v);
Matrix transpose(const Matrix& x);

double norm_inf(const Vec& v);
double norm_fro(const Matrix& x);
double max_abs(const Matrix& x);
double max_abs_diff(const Matrix& x, const Matrix& y);

// Eigen decomposition of a symmetric matrix: ascending eigenvalues and the
// matching orthonormal eigenvector columns.
struct SpectralResult {
    Vec eigenvalues;
    Matrix eigenvectors;
};

struct CholeskyResult {
    bool is_pd = false;
    Matrix factor; // lower-triangular L with S = L L^T, only set when is_pd
};

// Solves A x = b by LU with partial pivoting.
// Throws SingularMatrix when a pivot falls below lu_pivot_rel * max|A|.
Vec lu_solve(const Matrix& a, const Vec& b);

// Positive-definiteness probe via Cholesky pivots. Pivots must exceed
// chol_pivot_rel * trace(S)/n. Throws NotSymmetric for asymmetric input.
CholeskyResult cholesky_pd_check(const Matrix& s);

// Cyclic Jacobi rotations until the off-diagonal Frobenius norm falls below
// jacobi_off_rel * ||S||_F. Throws NoConvergence after jacobi_max_sweeps.
SpectralResult jacobi_sym_eig(const Matrix& s);

// Solves A^T P + P A = -I through the Kronecker-vectorized linear system.
// Throws SingularMatrix when the Lyapunov operator is singular (eigenvalues
// of A summing to zero in pairs), which signals marginal stability.
Matrix lyapunov_solve(const Matrix& a);

} // namespace mtdc
