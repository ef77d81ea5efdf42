#pragma once

#include <initializer_list>
#include <vector>

namespace ahi {

// Dense row-major matrix of doubles. Small sizes only (PCA inputs here are
// at most a few hundred square).
class Matrix {
public:
    Matrix() = default;
    Matrix(int rows, int cols, double fill = 0.0);
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix identity(int n);

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    double& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
    double operator()(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool all_finite() const;
    bool same_shape(const Matrix& other) const { return rows_ == other.rows_ && cols_ == other.cols_; }

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& m);

// y = A x for a column vector x.
std::vector<double> matvec(const Matrix& a, const std::vector<double>& x);
// y = A^T x.
std::vector<double> matvec_transposed(const Matrix& a, const std::vector<double>& x);

std::vector<double> column_means(const Matrix& x);

// Subtracts each column's mean; every column of the result has mean 0.
Matrix center_columns(const Matrix& x);

// X^T X / (rows - 1) for centered X; the sample covariance matrix.
// Requires rows >= 2. The result is exactly symmetric.
Matrix gram(const Matrix& x);

struct SymEigen {
    std::vector<double> eigenvalues;  // sorted descending
    Matrix eigenvectors;              // column j pairs with eigenvalues[j]
};

// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
// Eigenvalues are sorted descending; eigenvector columns are orthonormal
// and sign-canonicalized (largest-magnitude entry positive); eigenvalues
// in [-1e-10, 0) are clamped to 0.
SymEigen sym_eig(const Matrix& s);

double max_abs(const Matrix& m);

} // namespace ahi
