#include <catch2/catch_amalgamated.hpp>

#include "bwmac/matrix.hpp"
#include "test_support.hpp"

using namespace bwmac;
using testsupport::naive_matmul;
using testsupport::random_complex;
using testsupport::rel_frob_error;

namespace {
const std::complex<double> j{0.0, 1.0};
}

TEST_CASE("ComplexMatrix enforces shape invariants") {
    REQUIRE_THROWS_AS(ComplexMatrix(0, 3), ShapeError);
    REQUIRE_THROWS_AS(ComplexMatrix(2, 0), ShapeError);
    REQUIRE_THROWS_AS(ComplexMatrix(2, 2, std::vector<std::complex<double>>(3)), ShapeError);
    const ComplexMatrix m(2, 3);
    REQUIRE(m.rows() == 2);
    REQUIRE(m.cols() == 3);
    REQUIRE(m.entries().size() == 6);
}

TEST_CASE("matmul: identity passes the other operand through") {
    const ComplexMatrix b = random_complex(2, 5, 11);
    const ComplexMatrix p = matmul(ComplexMatrix::identity(2), b);
    REQUIRE(testsupport::max_abs_diff(p, b) == 0.0);
}

TEST_CASE("matmul: hand-expandable 2x2 by 2x1") {
    const auto a = ComplexMatrix::from_rows({{1.0 + j, 0.0}, {0.0, 1.0}});
    const auto b = ComplexMatrix::from_rows({{1.0}, {j}});
    const ComplexMatrix p = matmul(a, b);
    REQUIRE(p(0, 0) == std::complex<double>(1.0, 1.0));
    REQUIRE(p(1, 0) == j);
}

TEST_CASE("matmul: random 8x8 pair matches the naive triple-loop oracle") {
    const ComplexMatrix a = random_complex(8, 8, 21);
    const ComplexMatrix b = random_complex(8, 8, 22);
    REQUIRE(rel_frob_error(matmul(a, b), naive_matmul(a, b)) < 1e-14);
}

TEST_CASE("matmul: dimension mismatch is a shape error") {
    REQUIRE_THROWS_AS(matmul(ComplexMatrix(2, 3), ComplexMatrix(2, 3)), ShapeError);
}

TEST_CASE("matmul associativity on random triples") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const ComplexMatrix a = random_complex(6, 5, 100 + seed);
        const ComplexMatrix b = random_complex(5, 7, 200 + seed);
        const ComplexMatrix c = random_complex(7, 4, 300 + seed);
        const ComplexMatrix left = matmul(matmul(a, b), c);
        const ComplexMatrix right = matmul(a, matmul(b, c));
        REQUIRE(rel_frob_error(left, right) < 1e-9);
    }
}

TEST_CASE("hermitian: scalar conjugate and real-symmetric fixed point") {
    const auto one_by_one = ComplexMatrix::from_rows({{j}});
    REQUIRE(hermitian(one_by_one)(0, 0) == -j);

    const auto sym = ComplexMatrix::from_rows({{1.0, 2.0}, {2.0, 5.0}});
    REQUIRE(testsupport::max_abs_diff(hermitian(sym), sym) == 0.0);
}

TEST_CASE("hermitian is an involution") {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        const ComplexMatrix a = random_complex(5, 3, 400 + seed);
        REQUIRE(testsupport::max_abs_diff(hermitian(hermitian(a)), a) == 0.0);
    }
}

TEST_CASE("hermitian reverses products") {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        const ComplexMatrix a = random_complex(4, 6, 500 + seed);
        const ComplexMatrix b = random_complex(6, 3, 600 + seed);
        const ComplexMatrix lhs = hermitian(matmul(a, b));
        const ComplexMatrix rhs = matmul(hermitian(b), hermitian(a));
        REQUIRE(testsupport::max_abs_diff(lhs, rhs) < 1e-10);
    }
}

TEST_CASE("gram: identity and column-norm cases") {
    const ComplexMatrix eye = ComplexMatrix::identity(3);
    REQUIRE(testsupport::max_abs_diff(gram(eye), eye) == 0.0);

    const auto column = ComplexMatrix::from_rows({{1.0}, {1.0}});
    const ComplexMatrix g = gram(column);
    REQUIRE(g.rows() == 1);
    REQUIRE(g(0, 0) == std::complex<double>(2.0, 0.0));
}

TEST_CASE("gram of a random tall channel is Hermitian PSD") {
    const ComplexMatrix h = random_complex(64, 8, 777, 1.0 / std::sqrt(2.0));
    const ComplexMatrix g = gram(h);

    // Hermitian to the bit: built symmetrically.
    REQUIRE(testsupport::max_abs_diff(g, hermitian(g)) == 0.0);

    // Eigenvalue sign via power iteration on the shifted matrix.
    const double lambda_min = testsupport::hermitian_smallest_eigenvalue(g, 200, 991);
    REQUIRE(lambda_min >= -1e-10);

    // Consistency with the oracle product H^H H.
    REQUIRE(rel_frob_error(g, naive_matmul(hermitian(h), h)) < 1e-13);
}

TEST_CASE("exact_inverse: diagonal and identity") {
    const auto d = ComplexMatrix::from_rows({{2.0, 0.0}, {0.0, 4.0}});
    const ComplexMatrix inv = exact_inverse(d);
    REQUIRE(inv(0, 0) == std::complex<double>(0.5, 0.0));
    REQUIRE(inv(1, 1) == std::complex<double>(0.25, 0.0));
    REQUIRE(inv(0, 1) == std::complex<double>(0.0, 0.0));

    const ComplexMatrix eye = ComplexMatrix::identity(4);
    REQUIRE(testsupport::max_abs_diff(exact_inverse(eye), eye) == 0.0);
}

TEST_CASE("exact_inverse: residual of a random well-conditioned 8x8") {
    // Diagonal boost keeps the condition number modest.
    ComplexMatrix a = random_complex(8, 8, 314);
    for (std::size_t i = 0; i < 8; ++i) a(i, i) += 8.0;
    const ComplexMatrix inv = exact_inverse(a);
    const ComplexMatrix residual = sub(matmul(a, inv), ComplexMatrix::identity(8));
    REQUIRE(frobenius_norm(residual) <= 1e-10);
}

TEST_CASE("exact_inverse: singular input throws") {
    const auto singular = ComplexMatrix::from_rows({{1.0, 2.0}, {2.0, 4.0}});
    REQUIRE_THROWS_AS(exact_inverse(singular), SingularityError);
    REQUIRE_THROWS_AS(exact_inverse(ComplexMatrix(3, 3)), SingularityError);  // zero matrix
    REQUIRE_THROWS_AS(exact_inverse(ComplexMatrix(2, 3)), ShapeError);
}

TEST_CASE("exact_inverse is an approximate involution on well-conditioned input") {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        ComplexMatrix a = random_complex(6, 6, 800 + seed);
        for (std::size_t i = 0; i < 6; ++i) a(i, i) += 6.0;
        REQUIRE(rel_frob_error(exact_inverse(exact_inverse(a)), a) < 1e-8);
    }
}

TEST_CASE("frobenius_norm: zero matrix, 3-4-5, and hermitian invariance") {
    REQUIRE(frobenius_norm(ComplexMatrix(3, 2)) == 0.0);
    REQUIRE(frobenius_norm(ComplexMatrix::from_rows({{3.0, 4.0}})) == 5.0);
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        const ComplexMatrix a = random_complex(4, 7, 900 + seed);
        REQUIRE(frobenius_norm(hermitian(a)) == Catch::Approx(frobenius_norm(a)).epsilon(1e-14));
    }
}
