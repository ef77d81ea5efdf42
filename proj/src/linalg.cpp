#include "ahi/linalg.hpp"

#include "ahi/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace ahi {

Matrix::Matrix(int rows, int cols, double fill)
    : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {
    if (rows < 0 || cols < 0) throw std::invalid_argument("Matrix: negative dimensions");
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = static_cast<int>(rows.size());
    cols_ = rows_ == 0 ? 0 : static_cast<int>(rows.begin()->size());
    data_.reserve(static_cast<std::size_t>(rows_) * cols_);
    for (const auto& row : rows) {
        if (static_cast<int>(row.size()) != cols_)
            throw std::invalid_argument("Matrix: ragged initializer");
        data_.insert(data_.end(), row.begin(), row.end());
    }
}

Matrix Matrix::identity(int n) {
    Matrix m(n, n, 0.0);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

bool Matrix::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows())
        throw std::invalid_argument("matmul: dimension mismatch (" + std::to_string(a.rows()) + "x" +
                                    std::to_string(a.cols()) + " times " + std::to_string(b.rows()) + "x" +
                                    std::to_string(b.cols()) + ")");
    Matrix c(a.rows(), b.cols(), 0.0);
    for (int i = 0; i < a.rows(); ++i) {
        for (int k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (int j = 0; j < b.cols(); ++j) {
                c(i, j) += aik * b(k, j);
            }
        }
    }
    return c;
}

Matrix transpose(const Matrix& m) {
    Matrix t(m.cols(), m.rows());
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) t(j, i) = m(i, j);
    return t;
}

std::vector<double> matvec(const Matrix& a, const std::vector<double>& x) {
    if (a.cols() != static_cast<int>(x.size()))
        throw std::invalid_argument("matvec: dimension mismatch");
    std::vector<double> y(a.rows(), 0.0);
    for (int i = 0; i < a.rows(); ++i) {
        double acc = 0.0;
        for (int j = 0; j < a.cols(); ++j) acc += a(i, j) * x[j];
        y[i] = acc;
    }
    return y;
}

std::vector<double> matvec_transposed(const Matrix& a, const std::vector<double>& x) {
    if (a.rows() != static_cast<int>(x.size()))
        throw std::invalid_argument("matvec_transposed: dimension mismatch");
    std::vector<double> y(a.cols(), 0.0);
    for (int i = 0; i < a.rows(); ++i) {
        const double xi = x[i];
        for (int j = 0; j < a.cols(); ++j) y[j] += a(i, j) * xi;
    }
    return y;
}

std::vector<double> column_means(const Matrix& x) {
    std::vector<double> means(x.cols(), 0.0);
    if (x.rows() == 0) return means;
    for (int i = 0; i < x.rows(); ++i)
        for (int j = 0; j < x.cols(); ++j) means[j] += x(i, j);
    for (double& m : means) m /= x.rows();
    return means;
}

Matrix center_columns(const Matrix& x) {
    if (x.rows() < 1) throw std::invalid_argument("center_columns: empty matrix");
    const std::vector<double> means = column_means(x);
    Matrix c(x.rows(), x.cols());
    for (int i = 0; i < x.rows(); ++i)
        for (int j = 0; j < x.cols(); ++j) c(i, j) = x(i, j) - means[j];
    return c;
}

Matrix gram(const Matrix& x) {
    if (x.rows() < 2) throw std::invalid_argument("gram: need at least 2 rows");
    const double scale = 1.0 / (x.rows() - 1);
    Matrix g(x.cols(), x.cols());
    for (int a = 0; a < x.cols(); ++a) {
        for (int b = a; b < x.cols(); ++b) {
            double acc = 0.0;
            for (int i = 0; i < x.rows(); ++i) acc += x(i, a) * x(i, b);
            acc *= scale;
            g(a, b) = acc;
            g(b, a) = acc;  // mirror: exact symmetry
        }
    }
    return g;
}

double max_abs(const Matrix& m) {
    double v = 0.0;
    for (double d : m.data()) v = std::max(v, std::abs(d));
    return v;
}

namespace {

double offdiag_frobenius(const Matrix& a) {
    double acc = 0.0;
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j)
            if (i != j) acc += a(i, j) * a(i, j);
    return std::sqrt(acc);
}

double frobenius(const Matrix& a) {
    double acc = 0.0;
    for (double d : a.data()) acc += d * d;
    return std::sqrt(acc);
}

} // namespace

SymEigen sym_eig(const Matrix& s) {
    const int n = s.rows();
    if (n != s.cols()) throw std::invalid_argument("sym_eig: matrix not square");
    if (!s.all_finite()) throw std::invalid_argument("sym_eig: non-finite entries");
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (std::abs(s(i, j) - s(j, i)) > 1e-9)
                throw std::invalid_argument("sym_eig: matrix not symmetric within 1e-9");

    Matrix a = s;
    // enforce exact symmetry before rotating
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double avg = 0.5 * (a(i, j) + a(j, i));
            a(i, j) = avg;
            a(j, i) = avg;
        }
    Matrix p = Matrix::identity(n);

    // Stop when the off-diagonal mass is negligible. The 1e-12 target is
    // made relative to the matrix scale so large-valued covariances still
    // terminate within double precision.
    const double tol = 1e-12 * std::max(1.0, frobenius(a));
    const int max_sweeps = 100;
    bool converged = n <= 1 || offdiag_frobenius(a) < tol;

    for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
        for (int q = 1; q < n; ++q) {
            for (int pp = 0; pp < q; ++pp) {
                const double apq = a(pp, q);
                if (apq == 0.0) continue;
                const double app = a(pp, pp);
                const double aqq = a(q, q);
                // rotation angle zeroing a(pp, q)
                const double theta = 0.5 * (aqq - app) / apq;
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double sn = t * c;

                for (int k = 0; k < n; ++k) {
                    const double akp = a(k, pp);
                    const double akq = a(k, q);
                    a(k, pp) = c * akp - sn * akq;
                    a(k, q) = sn * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = a(pp, k);
                    const double aqk = a(q, k);
                    a(pp, k) = c * apk - sn * aqk;
                    a(q, k) = sn * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    const double pkp = p(k, pp);
                    const double pkq = p(k, q);
                    p(k, pp) = c * pkp - sn * pkq;
                    p(k, q) = sn * pkp + c * pkq;
                }
            }
        }
        converged = offdiag_frobenius(a) < tol;
    }
    if (!converged)
        throw NumericError("sym_eig: Jacobi iteration did not converge in 100 sweeps "
                           "(internal error for symmetric input)");

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int i, int j) { return a(i, i) > a(j, j); });

    SymEigen out;
    out.eigenvalues.resize(n);
    out.eigenvectors = Matrix(n, n);
    for (int j = 0; j < n; ++j) {
        double lambda = a(order[j], order[j]);
        if (lambda < 0.0 && lambda >= -1e-10) lambda = 0.0;
        out.eigenvalues[j] = lambda;
        // sign canonicalization: largest-magnitude entry positive
        int arg = 0;
        double best = -1.0;
        for (int k = 0; k < n; ++k) {
            const double mag = std::abs(p(k, order[j]));
            if (mag > best) {
                best = mag;
                arg = k;
            }
        }
        const double sign = p(arg, order[j]) < 0.0 ? -1.0 : 1.0;
        for (int k = 0; k < n; ++k) out.eigenvectors(k, j) = sign * p(k, order[j]);
    }
    return out;
}

} // namespace ahi
