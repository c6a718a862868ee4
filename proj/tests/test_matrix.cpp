#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "mpqkd/matrix.hpp"
#include "mpqkd/protocol.hpp"
#include "oracles.hpp"

using namespace mpqkd;

namespace {

ComplexMatrix diag(std::initializer_list<double> v) {
  const std::vector<double> d(v);
  return ComplexMatrix::diagonal(d);
}

ComplexMatrix basis(std::size_t n, std::size_t i) {
  ComplexMatrix v(n, 1);
  v(i, 0) = 1.0;
  return v;
}

}  // namespace

TEST_CASE("construction rejects bad shapes") {
  CHECK_THROWS_AS(ComplexMatrix(0, 2), std::invalid_argument);
  CHECK_THROWS_AS(ComplexMatrix(2, 2, std::vector<Complex>(3)), std::invalid_argument);
  CHECK_THROWS_AS(ComplexMatrix(2, 3) * ComplexMatrix(2, 3), std::invalid_argument);
  CHECK_THROWS_AS(ComplexMatrix(2, 2) + ComplexMatrix(3, 3), std::invalid_argument);
}

TEST_CASE("tensor") {
  CHECK(max_abs_diff(tensor(ComplexMatrix::identity(2), ComplexMatrix::identity(2)),
                     ComplexMatrix::identity(4)) == 0.0);

  const ComplexMatrix t = tensor(ComplexMatrix(2, 2), ComplexMatrix(4, 4));
  CHECK(t.rows() == 8);
  CHECK(t.cols() == 8);

  // Plain computational basis here, independent of the protocol's storage basis.
  const ComplexMatrix x(2, 2, {0.0, 1.0, 1.0, 0.0});
  const ComplexMatrix z = diag({1.0, -1.0});
  const ComplexMatrix out = tensor(x, z) * tensor(basis(2, 0), basis(2, 0));
  CHECK(max_abs_diff(out, tensor(basis(2, 1), basis(2, 0))) < 1e-15);

  std::mt19937_64 rng(7);
  const ComplexMatrix a = oracle::random_hermitian(2, rng);
  const ComplexMatrix b(2, 3, {1.0, 2.0, Complex(0, 1), -1.0, 0.5, 3.0});
  const ComplexMatrix c = oracle::random_hermitian(3, rng);
  CHECK(max_abs_diff(tensor(tensor(a, b), c), tensor(a, tensor(b, c))) < 1e-12);

  SUBCASE("bilinear") {
    const ComplexMatrix a2 = oracle::random_hermitian(2, rng);
    CHECK(max_abs_diff(tensor(a + a2, c), tensor(a, c) + tensor(a2, c)) < 1e-12);
    CHECK(max_abs_diff(tensor(a, Complex(0, 2) * c), Complex(0, 2) * tensor(a, c)) < 1e-12);
  }

  SUBCASE("unitaries stay unitary") {
    for (int trial = 0; trial < 5; ++trial) {
      const ComplexMatrix u = tensor(oracle::random_unitary(2, rng), oracle::random_unitary(4, rng));
      CHECK(max_abs_diff(u.adjoint() * u, ComplexMatrix::identity(8)) < 1e-10);
    }
  }
}

TEST_CASE("vector helpers") {
  const ComplexMatrix v = ComplexMatrix::column(std::vector<Complex>{Complex(0, 1), 1.0});
  CHECK(norm(v) == doctest::Approx(std::sqrt(2.0)));
  CHECK(std::abs(inner(v, v) - 2.0) < 1e-15);
  const ComplexMatrix p = projector(v);
  CHECK(p.is_hermitian());
  CHECK(std::abs(p(0, 1) - Complex(0, 1)) < 1e-15);
}

TEST_CASE("hermitian eigenvalues on known spectra") {
  const auto d = hermitian_eigenvalues(diag({3.0, 1.0, 2.0}));
  REQUIRE(d.size() == 3);
  CHECK(d[0] == doctest::Approx(1.0));
  CHECK(d[1] == doctest::Approx(2.0));
  CHECK(d[2] == doctest::Approx(3.0));

  const ComplexMatrix x(2, 2, {0.0, 1.0, 1.0, 0.0});
  const auto e = hermitian_eigenvalues(x);
  CHECK(e[0] == doctest::Approx(-1.0));
  CHECK(e[1] == doctest::Approx(1.0));

  CHECK(max_hermitian_eigenvalue(diag({-4.0, -7.0})) == doctest::Approx(-4.0));
  CHECK(max_hermitian_eigenvalue(ComplexMatrix(1, 1, {2.5})) == doctest::Approx(2.5));
}

TEST_CASE("non-hermitian input is rejected with its asymmetry") {
  const ComplexMatrix m(2, 2, {1.0, 0.5, 0.0, 1.0});
  try {
    hermitian_eigenvalues(m);
    FAIL("expected NotHermitianError");
  } catch (const NotHermitianError& e) {
    CHECK(e.asymmetry() == doctest::Approx(0.5));
  }
  CHECK_THROWS_AS(is_psd(m, 1e-9), NotHermitianError);
  CHECK_THROWS_AS(max_hermitian_eigenvalue(m), NotHermitianError);
}

TEST_CASE("random hermitian eigenvalues agree with the inertia oracle") {
  std::mt19937_64 rng(2024);
  for (std::size_t n : {2u, 3u, 5u, 8u, 16u}) {
    for (int trial = 0; trial < 4; ++trial) {
      const ComplexMatrix m = oracle::random_hermitian(n, rng);
      const EigenDecomposition eig = hermitian_eigen(m);
      REQUIRE(eig.values.size() == n);

      double trace = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        CHECK(eig.values[k] == doctest::Approx(oracle::kth_eigenvalue(m, static_cast<int>(k))).epsilon(1e-7));
        if (k > 0) CHECK(eig.values[k] >= eig.values[k - 1]);
        trace += eig.values[k];
      }
      CHECK(std::abs(trace - m.trace().real()) < 1e-9);
      CHECK(max_hermitian_eigenvalue(m) == doctest::Approx(eig.values.back()).epsilon(1e-10));

      // V diag(w) V^dagger reconstructs m.
      const ComplexMatrix rebuilt = eig.vectors * ComplexMatrix::diagonal(eig.values) * eig.vectors.adjoint();
      CHECK(max_abs_diff(rebuilt, m) < 1e-9);
      CHECK(max_abs_diff(eig.vectors.adjoint() * eig.vectors, ComplexMatrix::identity(n)) < 1e-10);

      // Unitary similarity keeps the spectrum.
      const ComplexMatrix p = oracle::random_unitary(n, rng);
      const auto moved = hermitian_eigenvalues(p.adjoint() * m * p);
      for (std::size_t k = 0; k < n; ++k) CHECK(std::abs(moved[k] - eig.values[k]) < 1e-9);
    }
  }
}

TEST_CASE("degenerate and rank-deficient spectra") {
  std::mt19937_64 rng(11);
  const ComplexMatrix m = oracle::random_psd(8, 3, rng);
  const auto w = hermitian_eigenvalues(m);
  for (int k = 0; k < 5; ++k) CHECK(std::abs(w[k]) < 1e-10);
  CHECK(w[5] > 1e-3);

  const ComplexMatrix u = oracle::random_unitary(6, rng);
  const ComplexMatrix d = u * diag({2.0, 2.0, 2.0, -1.0, -1.0, 0.0}) * u.adjoint();
  const auto dw = hermitian_eigenvalues(d);
  CHECK(dw[0] == doctest::Approx(-1.0));
  CHECK(dw[2] == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(dw[5] == doctest::Approx(2.0));
  CHECK(max_hermitian_eigenvalue(d) == doctest::Approx(2.0));
}

TEST_CASE("is_psd") {
  CHECK(is_psd(ComplexMatrix(3, 3), 1e-9));
  CHECK_FALSE(is_psd(diag({1.0, -0.5}), 1e-9));
  CHECK(is_psd(diag({1.0, -1e-10}), 1e-9));
}

TEST_CASE("generalized eigenvalue: worked cases") {
  const auto two = max_generalized_eigenvalue(diag({1.0, 2.0}), ComplexMatrix::identity(2));
  REQUIRE(two.has_value());
  CHECK(*two == doctest::Approx(2.0));

  // Positive numerator on the kernel of den: no finite y.
  CHECK_FALSE(max_generalized_eigenvalue(diag({1.0, 0.0}), diag({0.0, 1.0})).has_value());

  // Non-positive numerator on the kernel is harmless.
  const auto ok = max_generalized_eigenvalue(diag({-1.0, 3.0}), diag({0.0, 2.0}));
  REQUIRE(ok.has_value());
  CHECK(*ok == doctest::Approx(1.5));

  // A zero kernel block that couples to the support is infeasible too.
  const ComplexMatrix coupled(2, 2, {0.0, 1.0, 1.0, 0.0});
  CHECK_FALSE(max_generalized_eigenvalue(coupled, diag({0.0, 1.0})).has_value());

  CHECK_THROWS(max_generalized_eigenvalue(diag({1.0, 1.0}), diag({1.0, -1.0})));
  CHECK_THROWS(GeneralizedEigenSolver(ComplexMatrix(2, 2)));
}

TEST_CASE("generalized eigenvalue agrees with PSD bisection") {
  std::mt19937_64 rng(99);
  for (std::size_t n : {2u, 4u, 8u}) {
    for (int trial = 0; trial < 6; ++trial) {
      const ComplexMatrix num = oracle::random_hermitian(n, rng);
      const ComplexMatrix den = oracle::random_psd(n, n, rng, 0.1);
      const auto y = max_generalized_eigenvalue(num, den);
      REQUIRE(y.has_value());
      CHECK(*y == doctest::Approx(oracle::generalized_by_bisection(num, den)).epsilon(1e-8));
      CHECK(is_psd(*y * den - num, 1e-9));
      CHECK_FALSE(is_psd((*y - 1e-6) * den - num, 1e-9));

      const GeneralizedEigenSolver solver(den);
      CHECK(solver.kernel_dim() == 0);
      CHECK(*solver.max_eigenvalue(num) == doctest::Approx(*y).epsilon(1e-12));
      CHECK(*solver.max_eigenvalue(solver.project(num)) == doctest::Approx(*y).epsilon(1e-12));
    }
  }
}

TEST_CASE("generalized eigenvalue with a singular denominator") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 8; ++trial) {
    const std::size_t n = 6;
    const ComplexMatrix den = oracle::random_psd(n, 4, rng);
    // num = S - k*P_ker: finite y exists and equals the support problem.
    const EigenDecomposition eig = hermitian_eigen(den);
    ComplexMatrix kernel_proj(n, n);
    for (std::size_t c = 0; c < 2; ++c) {
      ComplexMatrix v(n, 1);
      for (std::size_t i = 0; i < n; ++i) v(i, 0) = eig.vectors(i, c);
      kernel_proj += projector(v);
    }
    const ComplexMatrix num = 0.5 * den - 3.0 * kernel_proj;
    const auto y = max_generalized_eigenvalue(num, den);
    REQUIRE(y.has_value());
    CHECK(*y == doctest::Approx(0.5).epsilon(1e-8));

    const ComplexMatrix bad = num + 4.0 * kernel_proj;
    CHECK_FALSE(max_generalized_eigenvalue(bad, den).has_value());

    // Projection is linear: project(a) + x*project(b) == project(a + x b).
    const GeneralizedEigenSolver solver(den);
    CHECK(solver.kernel_dim() == 2);
    const ComplexMatrix other = -1.0 * projector(ComplexMatrix::column(std::vector<Complex>(n, 1.0)));
    ProjectedNumerator sum = solver.project(other);
    sum *= 2.0;
    sum += solver.project(num);
    const auto direct = solver.max_eigenvalue(num + 2.0 * other);
    const auto combined = solver.max_eigenvalue(sum);
    REQUIRE(direct.has_value() == combined.has_value());
    if (direct) CHECK(*direct == doctest::Approx(*combined).epsilon(1e-10));
  }
}
