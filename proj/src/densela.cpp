#include "mtdc/densela.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mtdc {

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::diag(const Vec& d) {
    Matrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
}

bool Matrix::all_finite() const {
    return std::all_of(a_.begin(), a_.end(), [](double v) { return std::isfinite(v); });
}

Matrix operator+(const Matrix& x, const Matrix& y) {
    Matrix r = x;
    for (std::size_t k = 0; k < r.data().size(); ++k) r.data()[k] += y.data()[k];
    return r;
}

Matrix operator-(const Matrix& x, const Matrix& y) {
    Matrix r = x;
    for (std::size_t k = 0; k < r.data().size(); ++k) r.data()[k] -= y.data()[k];
    return r;
}

Matrix operator*(const Matrix& x, const Matrix& y) {
    Matrix r(x.rows(), y.cols());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        for (std::size_t k = 0; k < x.cols(); ++k) {
            const double xik = x(i, k);
            if (xik == 0.0) continue;
            for (std::size_t j = 0; j < y.cols(); ++j) r(i, j) += xik * y(k, j);
        }
    }
    return r;
}

Matrix operator*(double s, const Matrix& x) {
    Matrix r = x;
    for (double& v : r.data()) v *= s;
    return r;
}

Vec operator*(const Matrix& x, const Vec& v) {
    Vec r(x.rows(), 0.0);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < x.cols(); ++j) acc += x(i, j) * v[j];
        r[i] = acc;
    }
    return r;
}

Matrix transpose(const Matrix& x) {
    Matrix r(x.cols(), x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < x.cols(); ++j) r(j, i) = x(i, j);
    return r;
}

double norm_inf(const Vec& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double norm_fro(const Matrix& x) {
    double s = 0.0;
    for (double v : x.data()) s += v * v;
    return std::sqrt(s);
}

double max_abs(const Matrix& x) {
    double m = 0.0;
    for (double v : x.data()) m = std::max(m, std::abs(v));
    return m;
}

double max_abs_diff(const Matrix& x, const Matrix& y) {
    double m = 0.0;
    for (std::size_t k = 0; k < x.data().size(); ++k)
        m = std::max(m, std::abs(x.data()[k] - y.data()[k]));
    return m;
}

namespace {

void require_symmetric(const Matrix& s, const char* who) {
    if (s.rows() != s.cols()) throw NotSymmetric(std::string(who) + ": matrix not square");
    double asym = 0.0;
    for (std::size_t i = 0; i < s.rows(); ++i)
        for (std::size_t j = i + 1; j < s.cols(); ++j)
            asym = std::max(asym, std::abs(s(i, j) - s(j, i)));
    const double scale = max_abs(s);
    if (asym > kTol.symmetry_rel * std::max(scale, 1e-30))
        throw NotSymmetric(std::string(who) + ": relative asymmetry exceeds tolerance");
}

} // namespace

Vec lu_solve(const Matrix& a, const Vec& b) {
    const std::size_t n = a.rows();
    if (a.cols() != n) throw std::invalid_argument("lu_solve: matrix not square");
    if (b.size() != n) throw std::invalid_argument("lu_solve: rhs size mismatch");

    const double pivot_floor = kTol.lu_pivot_rel * max_abs(a);

    Matrix lu = a;
    Vec x = b;
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);

    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        double best = std::abs(lu(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            if (std::abs(lu(i, k)) > best) {
                best = std::abs(lu(i, k));
                p = i;
            }
        }
        if (best < pivot_floor || best == 0.0)
            throw SingularMatrix("lu_solve: pivot below threshold at column " + std::to_string(k));
        if (p != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(lu(k, j), lu(p, j));
            std::swap(x[k], x[p]);
        }
        const double inv = 1.0 / lu(k, k);
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = lu(i, k) * inv;
            if (f == 0.0) continue;
            lu(i, k) = f;
            for (std::size_t j = k + 1; j < n; ++j) lu(i, j) -= f * lu(k, j);
            x[i] -= f * x[k];
        }
    }
    for (std::size_t ii = n; ii-- > 0;) {
        double acc = x[ii];
        for (std::size_t j = ii + 1; j < n; ++j) acc -= lu(ii, j) * x[j];
        x[ii] = acc / lu(ii, ii);
    }
    return x;
}

CholeskyResult cholesky_pd_check(const Matrix& s) {
    require_symmetric(s, "cholesky_pd_check");
    const std::size_t n = s.rows();
    double trace = 0.0;
    for (std::size_t i = 0; i < n; ++i) trace += s(i, i);
    const double pivot_floor = kTol.chol_pivot_rel * trace / static_cast<double>(std::max<std::size_t>(n, 1));

    Matrix l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = s(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (!(d > pivot_floor) || !(d > 0.0)) return {false, Matrix{}};
        l(j, j) = std::sqrt(d);
        for (std::size_t i = j + 1; i < n; ++i) {
            double v = s(i, j);
            for (std::size_t k = 0; k < j; ++k) v -= l(i, k) * l(j, k);
            l(i, j) = v / l(j, j);
        }
    }
    return {true, l};
}

SpectralResult jacobi_sym_eig(const Matrix& s_in) {
    require_symmetric(s_in, "jacobi_sym_eig");
    const std::size_t n = s_in.rows();
    Matrix s = s_in;
    Matrix v = Matrix::identity(n);

    const double target = kTol.jacobi_off_rel * norm_fro(s_in);
    auto off_fro = [&]() {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) acc += 2.0 * s(i, j) * s(i, j);
        return std::sqrt(acc);
    };

    int sweep = 0;
    while (off_fro() > target) {
        if (++sweep > kTol.jacobi_max_sweeps)
            throw NoConvergence("jacobi_sym_eig: not converged after " +
                                std::to_string(kTol.jacobi_max_sweeps) + " sweeps");
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = s(p, q);
                if (std::abs(apq) <= 1e-300) continue;
                const double theta = (s(q, q) - s(p, p)) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double sn = t * c;
                const double tau = sn / (1.0 + c);

                const double app = s(p, p), aqq = s(q, q);
                s(p, p) = app - t * apq;
                s(q, q) = aqq + t * apq;
                s(p, q) = 0.0;
                s(q, p) = 0.0;
                for (std::size_t r = 0; r < n; ++r) {
                    const double vrp = v(r, p), vrq = v(r, q);
                    v(r, p) = vrp - sn * (vrq + tau * vrp);
                    v(r, q) = vrq + sn * (vrp - tau * vrq);
                    if (r == p || r == q) continue;
                    const double arp = s(r, p), arq = s(r, q);
                    s(r, p) = s(p, r) = arp - sn * (arq + tau * arp);
                    s(r, q) = s(q, r) = arq + sn * (arp - tau * arq);
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return s(i, i) < s(j, j); });

    SpectralResult res;
    res.eigenvalues.resize(n);
    res.eigenvectors = Matrix(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        res.eigenvalues[k] = s(order[k], order[k]);
        for (std::size_t r = 0; r < n; ++r) res.eigenvectors(r, k) = v(r, order[k]);
    }
    return res;
}

Matrix lyapunov_solve(const Matrix& a) {
    const std::size_t n = a.rows();
    if (a.cols() != n) throw std::invalid_argument("lyapunov_solve: matrix not square");
    if (n > 64) throw std::invalid_argument("lyapunov_solve: dimension above 64 not supported");

    // (I (x) A^T + A^T (x) I) vec(P) = -vec(I), with column-stacked vec.
    const Matrix at = transpose(a);
    const std::size_t nn = n * n;
    Matrix k(nn, nn);
    for (std::size_t jb = 0; jb < n; ++jb)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                k(jb * n + i, jb * n + j) += at(i, j);
    for (std::size_t j1 = 0; j1 < n; ++j1)
        for (std::size_t j2 = 0; j2 < n; ++j2) {
            const double w = at(j1, j2);
            if (w == 0.0) continue;
            for (std::size_t i = 0; i < n; ++i) k(j1 * n + i, j2 * n + i) += w;
        }

    Vec rhs(nn, 0.0);
    for (std::size_t i = 0; i < n; ++i) rhs[i * n + i] = -1.0;

    Vec p;
    try {
        p = lu_solve(k, rhs);
    } catch (const SingularMatrix&) {
        throw SingularMatrix("lyapunov_solve: Lyapunov operator singular (marginal spectrum)");
    }

    Matrix res(n, n);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) res(i, j) = p[j * n + i];
    // symmetrize away solver roundoff
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double m = 0.5 * (res(i, j) + res(j, i));
            res(i, j) = m;
            res(j, i) = m;
        }
    return res;
}

} // namespace mtdc
