#include <gtest/gtest.h>

#include "qrc/linalg.hpp"
#include "qrc/randmat.hpp"
#include "test_support.hpp"

namespace {

using qrc::Complex;
using qrc::ComplexMatrix;
using qrc::DensityMatrix;

ComplexMatrix ket0_projector() {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 0) = 1;
  return m;
}

DensityMatrix random_state(std::size_t dim, std::uint64_t seed) {
  return qrc::random_density_matrix({dim, 1.0, seed});
}

TEST(Kron, IdentityTimesIdentity) {
  EXPECT_TRUE(qrc::kron(qrc::identity(2), qrc::identity(2)).isApprox(qrc::identity(4)));
}

TEST(Kron, PauliZTimesProjector) {
  const ComplexMatrix k = qrc::kron(qrc::pauli_z(), ket0_projector());
  ComplexMatrix expected = ComplexMatrix::Zero(4, 4);
  expected.diagonal() << 1, 0, -1, 0;
  EXPECT_EQ(k, expected);
}

TEST(Kron, PauliXTimesPauliX) {
  const ComplexMatrix k = qrc::kron(qrc::pauli_x(), qrc::pauli_x());
  EXPECT_EQ(k(0, 3), Complex(1, 0));
  EXPECT_EQ(k(0, 0), Complex(0, 0));
}

TEST(Kron, EntryLayout) {
  const ComplexMatrix a = qrc::random_hermitian({4, 1.0, 1});
  const ComplexMatrix b = qrc::random_hermitian({2, 1.0, 2});
  const ComplexMatrix k = qrc::kron(a, b);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int p = 0; p < 2; ++p)
        for (int q = 0; q < 2; ++q) EXPECT_EQ(k(i * 2 + p, j * 2 + q), a(i, j) * b(p, q));
}

TEST(Kron, SizeLimit) {
  try {
    (void)qrc::kron(qrc::identity(64), qrc::identity(128));
    FAIL() << "expected size-limit error";
  } catch (const qrc::Error& e) {
    EXPECT_EQ(e.category(), qrc::ErrorCategory::size_limit);
  }
  EXPECT_NO_THROW((void)qrc::kron(qrc::identity(2), qrc::identity(4), 8));
}

TEST(Trace, Examples) {
  EXPECT_EQ(qrc::trace(qrc::identity(4)), Complex(4, 0));
  EXPECT_EQ(qrc::trace(qrc::pauli_x()), Complex(0, 0));
  EXPECT_NEAR(std::abs(qrc::trace(random_state(8, 5).matrix()) - 1.0), 0.0, 1e-10);
}

TEST(PartialTrace, ProductStateFactorizes) {
  // property: >= 100 seeds
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto a = random_state(4, 1000 + seed);
    const auto b = random_state(2, 5000 + seed);
    const DensityMatrix ab(qrc::kron(a.matrix(), b.matrix()), {2, 2, 2});
    const auto reduced = qrc::partial_trace(ab, {0, 1});
    EXPECT_LE(qrc::test::max_abs_diff(reduced.matrix(), a.matrix()), 1e-12) << "seed " << seed;
    const auto reduced_b = qrc::partial_trace(ab, {2});
    EXPECT_LE(qrc::test::max_abs_diff(reduced_b.matrix(), b.matrix()), 1e-12) << "seed " << seed;
  }
}

TEST(PartialTrace, BellStateIsMaximallyMixed) {
  ComplexMatrix phi = ComplexMatrix::Zero(4, 4);
  phi(0, 0) = phi(0, 3) = phi(3, 0) = phi(3, 3) = 0.5;
  const DensityMatrix bell(phi, {2, 2});
  const auto r = qrc::partial_trace(bell, {0});
  EXPECT_LE(qrc::test::max_abs_diff(r.matrix(), 0.5 * qrc::identity(2)), 1e-15);
}

TEST(PartialTrace, MatchesNestedLoopOracle) {
  const std::vector<std::vector<int>> keeps{{0}, {1}, {2}, {0, 1}, {0, 2}, {1, 2}, {0, 1, 2}};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto rho = random_state(8, seed);
    for (const auto& keep : keeps) {
      std::vector<std::size_t> k(keep.begin(), keep.end());
      const auto fast = qrc::partial_trace(rho, k);
      const auto slow = qrc::test::naive_partial_trace(rho.matrix(), 3, keep);
      EXPECT_LE(qrc::test::max_abs_diff(fast.matrix(), slow), 1e-12);
    }
  }
}

TEST(PartialTrace, SiteDimsOfResult) {
  const auto rho = random_state(8, 3);
  const auto r = qrc::partial_trace(rho, {0, 2});
  EXPECT_EQ(r.site_dims(), (std::vector<std::size_t>{2, 2}));
  EXPECT_EQ(r.dim(), 4u);
}

TEST(PartialTrace, SingleSiteHasUnitTrace) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto rho = random_state(16, seed);
    for (std::size_t s = 0; s < 4; ++s) {
      const auto r = qrc::partial_trace(rho, {s});
      EXPECT_NEAR(std::abs(qrc::trace(r.matrix()) - 1.0), 0.0, 1e-10);
    }
  }
}

TEST(PartialTrace, Errors) {
  const auto rho = random_state(4, 1);
  try {
    (void)qrc::partial_trace(rho, {2});
    FAIL();
  } catch (const qrc::Error& e) {
    EXPECT_EQ(e.category(), qrc::ErrorCategory::site_index);
  }
  try {
    (void)qrc::partial_trace(rho, std::vector<std::size_t>{});
    FAIL();
  } catch (const qrc::Error& e) {
    EXPECT_EQ(e.category(), qrc::ErrorCategory::argument);
  }
  EXPECT_THROW((void)qrc::partial_trace(rho, {1, 0}), qrc::Error);
}

TEST(Expectation, Examples) {
  const DensityMatrix up(ket0_projector(), {2});
  EXPECT_DOUBLE_EQ(qrc::expectation(up, qrc::pauli_z()), 1.0);
  ComplexMatrix plus(2, 2);
  plus << 0.5, 0.5, 0.5, 0.5;
  EXPECT_NEAR(qrc::expectation(DensityMatrix(plus, {2}), qrc::pauli_z()), 0.0, 1e-15);
  EXPECT_NEAR(qrc::expectation(random_state(8, 9), qrc::identity(8)), 1.0, 1e-12);
}

TEST(Expectation, LinearInObservable) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto rho = random_state(8, seed);
    const ComplexMatrix o1 = qrc::random_hermitian({8, 0.7, seed + 100});
    const ComplexMatrix o2 = qrc::random_hermitian({8, 0.7, seed + 200});
    const double a = 1.5 - 0.1 * static_cast<double>(seed);
    const double b = -0.75;
    const double lhs = qrc::expectation(rho, a * o1 + b * o2);
    const double rhs = a * qrc::expectation(rho, o1) + b * qrc::expectation(rho, o2);
    EXPECT_NEAR(lhs, rhs, 1e-9);
  }
}

TEST(Expectation, Errors) {
  const auto rho = random_state(4, 1);
  try {
    (void)qrc::expectation(rho, qrc::pauli_z());
    FAIL();
  } catch (const qrc::Error& e) {
    EXPECT_EQ(e.category(), qrc::ErrorCategory::shape);
  }
  ComplexMatrix bad = qrc::identity(4);
  bad(0, 1) = Complex(0, 1);
  try {
    (void)qrc::expectation(rho, bad);
    FAIL();
  } catch (const qrc::Error& e) {
    EXPECT_EQ(e.category(), qrc::ErrorCategory::hermiticity);
  }
}

TEST(Eigen, Examples) {
  const auto ex = qrc::eigenvalues_hermitian(qrc::pauli_x());
  ASSERT_EQ(ex.size(), 2u);
  EXPECT_NEAR(ex[0], -1.0, 1e-12);
  EXPECT_NEAR(ex[1], 1.0, 1e-12);
  for (double v : qrc::eigenvalues_hermitian(qrc::identity(4))) EXPECT_NEAR(v, 1.0, 1e-12);
}

TEST(Eigen, TwoSpinExchangeMatchesJacobiOracle) {
  ComplexMatrix h = qrc::kron(qrc::pauli_x(), qrc::pauli_x()) + qrc::kron(qrc::pauli_y(), qrc::pauli_y()) +
                    qrc::kron(qrc::pauli_z(), qrc::pauli_z());
  ASSERT_LE(h.imag().cwiseAbs().maxCoeff(), 0.0);
  std::vector<std::vector<double>> real(4, std::vector<double>(4));
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) real[i][j] = h(i, j).real();
  const auto oracle = qrc::test::jacobi_eigenvalues(real);
  const std::vector<double> expected{-3, 1, 1, 1};
  const auto ev = qrc::eigenvalues_hermitian(h);
  for (int i = 0; i < 4; ++i) {
    EXPECT_NEAR(oracle[i], expected[i], 1e-12);
    EXPECT_NEAR(ev[i], oracle[i], 1e-12);
  }
}

TEST(Eigen, ReconstructionAndTraceSum) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const ComplexMatrix a = qrc::random_hermitian({16, 0.5, seed});
    const auto eig = qrc::eigen_hermitian(a);
    Eigen::VectorXd lambda = Eigen::Map<const Eigen::VectorXd>(eig.values.data(), 16);
    const ComplexMatrix rebuilt = eig.vectors * lambda.cast<Complex>().asDiagonal() * eig.vectors.adjoint();
    EXPECT_LT(qrc::test::max_abs_diff(rebuilt, a), 1e-8);
    double sum = 0.0;
    for (double v : eig.values) sum += v;
    EXPECT_NEAR(sum, qrc::trace(a).real(), 1e-8);
    EXPECT_TRUE(std::is_sorted(eig.values.begin(), eig.values.end()));
  }
}

TEST(Eigen, RejectsNonHermitian) {
  ComplexMatrix m = qrc::identity(2);
  m(0, 1) = 1.0;
  try {
    (void)qrc::eigenvalues_hermitian(m);
    FAIL();
  } catch (const qrc::Error& e) {
    EXPECT_EQ(e.category(), qrc::ErrorCategory::hermiticity);
  }
}

TEST(DensityMatrix, ValidationRejectsBadStates) {
  EXPECT_THROW(DensityMatrix(qrc::identity(2), {2}), qrc::Error);  // trace 2
  ComplexMatrix neg(2, 2);
  neg << 1.5, 0, 0, -0.5;
  EXPECT_THROW(DensityMatrix(neg, {2}), qrc::Error);
  EXPECT_THROW(DensityMatrix(0.25 * qrc::identity(4), {2}), qrc::Error);  // site dims mismatch
  EXPECT_NO_THROW(DensityMatrix(0.25 * qrc::identity(4), {2, 2}));
}

}  // namespace
