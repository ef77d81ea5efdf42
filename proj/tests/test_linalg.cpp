#include "doctest.h"

#include "ahi/error.hpp"
#include "ahi/linalg.hpp"
#include "ahi/rng.hpp"

#include <cmath>

using namespace ahi;

namespace {

Matrix random_symmetric(Rng& rng, int n) {
    Matrix s(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            const double v = rng.uniform(-1.0, 1.0);
            s(i, j) = v;
            s(j, i) = v;
        }
    return s;
}

Matrix reconstruct(const SymEigen& eig) {
    const int n = eig.eigenvectors.rows();
    Matrix d(n, n);
    for (int i = 0; i < n; ++i) d(i, i) = eig.eigenvalues[static_cast<std::size_t>(i)];
    return matmul(matmul(eig.eigenvectors, d), transpose(eig.eigenvectors));
}

} // namespace

TEST_SUITE("linalg") {

TEST_CASE("matmul identity") {
    const Matrix a{{1, 2, 3}, {4, 5, 6}, {7, 8, 9}};
    const Matrix r = matmul(Matrix::identity(3), a);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(r(i, j) == a(i, j));
}

TEST_CASE("matmul hand arithmetic") {
    // [[1,2],[3,4]] x [[0],[1]] = [[2],[4]]
    const Matrix r = matmul(Matrix{{1, 2}, {3, 4}}, Matrix{{0}, {1}});
    CHECK(r.rows() == 2);
    CHECK(r.cols() == 1);
    CHECK(r(0, 0) == 2.0);
    CHECK(r(1, 0) == 4.0);
}

TEST_CASE("matmul dimension mismatch") {
    const Matrix a(2, 3);
    const Matrix b(2, 2);
    CHECK_THROWS_AS(matmul(a, b), std::invalid_argument);
}

TEST_CASE("matmul associativity on random conformable triples") {
    Rng rng(42);
    for (int trial = 0; trial < 20; ++trial) {
        const int n1 = 1 + static_cast<int>(rng.index(5));
        const int n2 = 1 + static_cast<int>(rng.index(5));
        const int n3 = 1 + static_cast<int>(rng.index(5));
        const int n4 = 1 + static_cast<int>(rng.index(5));
        auto rand_mat = [&](int r, int c) {
            Matrix m(r, c);
            for (double& v : m.data()) v = rng.uniform(-2.0, 2.0);
            return m;
        };
        const Matrix a = rand_mat(n1, n2), b = rand_mat(n2, n3), c = rand_mat(n3, n4);
        const Matrix left = matmul(matmul(a, b), c);
        const Matrix right = matmul(a, matmul(b, c));
        for (int i = 0; i < left.rows(); ++i)
            for (int j = 0; j < left.cols(); ++j) {
                const double scale = std::max({1.0, std::abs(left(i, j)), std::abs(right(i, j))});
                CHECK(std::abs(left(i, j) - right(i, j)) / scale < 1e-9);
            }
    }
}

TEST_CASE("center_columns") {
    SUBCASE("simple column") {
        const Matrix c = center_columns(Matrix{{1}, {2}, {3}});
        CHECK(c(0, 0) == doctest::Approx(-1).epsilon(1e-12));
        CHECK(c(1, 0) == doctest::Approx(0).epsilon(1e-12));
        CHECK(c(2, 0) == doctest::Approx(1).epsilon(1e-12));
    }
    SUBCASE("already centered is unchanged") {
        const Matrix x{{-1, 2}, {1, -2}};
        const Matrix c = center_columns(x);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) CHECK(std::abs(c(i, j) - x(i, j)) < 1e-12);
    }
    SUBCASE("single row becomes zero") {
        const Matrix c = center_columns(Matrix{{3, -7, 11}});
        for (int j = 0; j < 3; ++j) CHECK(c(0, j) == 0.0);
    }
    SUBCASE("column means are zero") {
        Rng rng(7);
        Matrix x(13, 4);
        for (double& v : x.data()) v = rng.uniform(-5, 5);
        const auto means = column_means(center_columns(x));
        for (double m : means) CHECK(std::abs(m) < 1e-12);
    }
}

TEST_CASE("gram") {
    SUBCASE("variance of +-1 with n-1 = 1") {
        const Matrix g = gram(Matrix{{1}, {-1}});
        CHECK(g.rows() == 1);
        CHECK(g(0, 0) == doctest::Approx(2.0).epsilon(1e-14));
    }
    SUBCASE("orthogonal centered columns give zero off-diagonals") {
        // columns (1,-1,0,0) and (0,0,1,-1): centered, orthogonal
        const Matrix x{{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
        const Matrix g = gram(x);
        CHECK(std::abs(g(0, 1)) < 1e-12);
        CHECK(std::abs(g(1, 0)) < 1e-12);
    }
    SUBCASE("single row errors") { CHECK_THROWS_AS(gram(Matrix{{1, 2}}), std::invalid_argument); }
    SUBCASE("result is exactly symmetric") {
        Rng rng(3);
        Matrix x(9, 5);
        for (double& v : x.data()) v = rng.uniform(-1, 1);
        const Matrix g = gram(center_columns(x));
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j) CHECK(g(i, j) == g(j, i));
    }
}

TEST_CASE("sym_eig diagonal") {
    const SymEigen eig = sym_eig(Matrix{{3, 0}, {0, 1}});
    CHECK(eig.eigenvalues[0] == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(eig.eigenvalues[1] == doctest::Approx(1.0).epsilon(1e-12));
    // P = I up to column sign; canonicalization makes it exactly I
    CHECK(eig.eigenvectors(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(eig.eigenvectors(1, 1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(eig.eigenvectors(0, 1)) < 1e-12);
    CHECK(std::abs(eig.eigenvectors(1, 0)) < 1e-12);
}

TEST_CASE("sym_eig 2x2 by characteristic polynomial") {
    // [[2,1],[1,2]]: det(S - lambda I) = (2-l)^2 - 1 = 0 -> l = 3, 1
    const SymEigen eig = sym_eig(Matrix{{2, 1}, {1, 2}});
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    CHECK(eig.eigenvalues[0] == doctest::Approx(3.0).epsilon(1e-10));
    CHECK(eig.eigenvalues[1] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(eig.eigenvectors(0, 0) == doctest::Approx(inv_sqrt2).epsilon(1e-10));
    CHECK(eig.eigenvectors(1, 0) == doctest::Approx(inv_sqrt2).epsilon(1e-10));
    // second column is (1,-1)/sqrt(2) up to sign; canonical sign makes entry 0 positive
    CHECK(eig.eigenvectors(0, 1) == doctest::Approx(inv_sqrt2).epsilon(1e-10));
    CHECK(eig.eigenvectors(1, 1) == doctest::Approx(-inv_sqrt2).epsilon(1e-10));
}

TEST_CASE("sym_eig random 5x5 reconstruction") {
    Rng rng(11);
    const Matrix s = random_symmetric(rng, 5);
    const SymEigen eig = sym_eig(s);
    const Matrix back = reconstruct(eig);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) CHECK(std::abs(back(i, j) - s(i, j)) <= 1e-8 * max_abs(s));
}

TEST_CASE("sym_eig rejects bad input") {
    CHECK_THROWS_AS(sym_eig(Matrix{{1, 2}, {0.5, 1}}), std::invalid_argument);
    CHECK_THROWS_AS(sym_eig(Matrix(2, 3)), std::invalid_argument);
}

TEST_CASE("sym_eig properties on randomized matrices") {
    Rng rng(1234);
    for (int trial = 0; trial < 25; ++trial) {
        const int n = 2 + static_cast<int>(rng.index(7));
        const Matrix s = random_symmetric(rng, n);
        const SymEigen eig = sym_eig(s);

        // eigenvalues sorted descending
        for (std::size_t k = 1; k < eig.eigenvalues.size(); ++k)
            CHECK(eig.eigenvalues[k - 1] >= eig.eigenvalues[k]);

        // P^T P = I within 1e-8
        const Matrix ptp = matmul(transpose(eig.eigenvectors), eig.eigenvectors);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                CHECK(std::abs(ptp(i, j) - (i == j ? 1.0 : 0.0)) < 1e-8);

        // sum(lambda) = trace within 1e-8
        double lambda_sum = 0.0, trace = 0.0;
        for (double l : eig.eigenvalues) lambda_sum += l;
        for (int i = 0; i < n; ++i) trace += s(i, i);
        CHECK(std::abs(lambda_sum - trace) < 1e-8);

        // reconstruction bound
        const Matrix back = reconstruct(eig);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                CHECK(std::abs(back(i, j) - s(i, j)) <= 1e-8 * std::max(1e-30, max_abs(s)));

        // sign canonicalization: largest-magnitude entry of each column positive
        for (int c = 0; c < n; ++c) {
            int arg = 0;
            for (int r = 1; r < n; ++r)
                if (std::abs(eig.eigenvectors(r, c)) > std::abs(eig.eigenvectors(arg, c))) arg = r;
            CHECK(eig.eigenvectors(arg, c) >= 0.0);
        }
    }
}

TEST_CASE("sym_eig clamps tiny negative eigenvalues of covariances") {
    // rank-deficient covariance: perfectly correlated columns
    const Matrix x = center_columns(Matrix{{1, 1}, {2, 2}, {3, 3}});
    const SymEigen eig = sym_eig(gram(x));
    CHECK(eig.eigenvalues[1] >= 0.0);
}

} // TEST_SUITE
