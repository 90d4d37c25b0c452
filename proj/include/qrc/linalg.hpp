#pragma once

// Dense complex linear algebra for composite spin systems. Site 0 is the
// most significant (leftmost) factor of every Kronecker product.

#include <Eigen/Dense>

#include <algorithm>
#include <complex>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qrc/error.hpp"
#include "qrc/tolerances.hpp"

namespace qrc {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

inline std::size_t dim_of(const ComplexMatrix& a) { return static_cast<std::size_t>(a.rows()); }

inline void require_square(const ComplexMatrix& a, const char* what) {
  require(a.rows() == a.cols() && a.rows() > 0, ErrorCategory::shape,
          std::string(what) + ": matrix must be square and non-empty");
}

inline bool all_finite(const ComplexMatrix& a) {
  return a.real().allFinite() && a.imag().allFinite();
}

/// max_ij |A_ij - conj(A_ji)|
inline double hermiticity_error(const ComplexMatrix& a) {
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline int log2_exact(std::size_t n) {
  int k = 0;
  while ((std::size_t{1} << k) < n) ++k;
  return k;
}

inline ComplexMatrix identity(std::size_t dim) {
  return ComplexMatrix::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
}

inline ComplexMatrix pauli_x() {
  ComplexMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

inline ComplexMatrix pauli_y() {
  ComplexMatrix m(2, 2);
  m << 0, Complex(0, -1), Complex(0, 1), 0;
  return m;
}

inline ComplexMatrix pauli_z() {
  ComplexMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

/// Entry [(i*db + k), (j*db + l)] = a[i,j] * b[k,l].
inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b,
                          std::size_t max_dim = tol::kMaxDim) {
  require_square(a, "kron");
  require_square(b, "kron");
  const auto da = a.rows();
  const auto db = b.rows();
  require(static_cast<std::size_t>(da) * static_cast<std::size_t>(db) <= max_dim,
          ErrorCategory::size_limit,
          "kron: product dimension " + std::to_string(da * db) + " exceeds limit " +
              std::to_string(max_dim));
  ComplexMatrix out(da * db, da * db);
  for (Eigen::Index i = 0; i < da; ++i)
    for (Eigen::Index j = 0; j < da; ++j) out.block(i * db, j * db, db, db) = a(i, j) * b;
  return out;
}

inline Complex trace(const ComplexMatrix& a) { return a.diagonal().sum(); }

/// I ⊗ ... ⊗ op ⊗ ... ⊗ I with `op` on `site` of an n_sites spin chain.
inline ComplexMatrix site_operator(const ComplexMatrix& op, std::size_t site, std::size_t n_sites) {
  ComplexMatrix out = ComplexMatrix::Identity(1, 1);
  for (std::size_t s = 0; s < n_sites; ++s) out = kron(out, s == site ? op : identity(2));
  return out;
}

inline std::vector<std::size_t> spin_dims(std::size_t n_spins) {
  return std::vector<std::size_t>(n_spins, 2);
}

/// Hermitian, unit-trace, positive-semidefinite matrix over a product of sites.
class DensityMatrix {
 public:
  struct Trusted {};

  /// Full validation including the eigenvalue check.
  DensityMatrix(ComplexMatrix m, std::vector<std::size_t> site_dims)
      : m_(std::move(m)), site_dims_(std::move(site_dims)) {
    check_structure();
    require(min_eigenvalue() >= -tol::kStructural, ErrorCategory::numerical,
            "density matrix has a negative eigenvalue");
  }

  /// Validates shape, hermiticity and trace; positivity is the caller's
  /// guarantee (AA^dagger, partial traces of valid states).
  DensityMatrix(ComplexMatrix m, std::vector<std::size_t> site_dims, Trusted)
      : m_(std::move(m)), site_dims_(std::move(site_dims)) {
    check_structure();
  }

  const ComplexMatrix& matrix() const noexcept { return m_; }
  const std::vector<std::size_t>& site_dims() const noexcept { return site_dims_; }
  std::size_t dim() const noexcept { return dim_of(m_); }
  std::size_t n_sites() const noexcept { return site_dims_.size(); }

  double min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m_, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  }

  double purity() const { return (m_.cwiseProduct(m_.transpose())).sum().real(); }

 private:
  void check_structure() const {
    require_square(m_, "DensityMatrix");
    require(!site_dims_.empty(), ErrorCategory::argument, "DensityMatrix: site_dims is empty");
    const auto prod = std::accumulate(site_dims_.begin(), site_dims_.end(), std::size_t{1},
                                      std::multiplies<>{});
    require(prod == dim(), ErrorCategory::shape,
            "DensityMatrix: product of site_dims does not match dimension");
    require(all_finite(m_), ErrorCategory::numerical, "DensityMatrix: non-finite entry");
    require(hermiticity_error(m_) <= tol::kStructural, ErrorCategory::hermiticity,
            "DensityMatrix: not Hermitian");
    require(std::abs(trace(m_) - 1.0) <= tol::kStructural, ErrorCategory::numerical,
            "DensityMatrix: trace differs from 1");
  }

  ComplexMatrix m_;
  std::vector<std::size_t> site_dims_;
};

namespace detail {

// Offsets of every composite index of `sites` (last site fastest) into the
// full row/column index, given per-site strides.
inline std::vector<std::size_t> composite_offsets(std::span<const std::size_t> sites,
                                                  std::span<const std::size_t> dims,
                                                  std::span<const std::size_t> strides) {
  std::vector<std::size_t> offsets{0};
  for (auto s : sites) {
    std::vector<std::size_t> next;
    next.reserve(offsets.size() * dims[s]);
    for (auto base : offsets)
      for (std::size_t v = 0; v < dims[s]; ++v) next.push_back(base + v * strides[s]);
    offsets = std::move(next);
  }
  return offsets;
}

inline void check_keep_sites(std::span<const std::size_t> keep, std::size_t n_sites) {
  require(!keep.empty(), ErrorCategory::argument, "partial_trace: keep set is empty");
  for (std::size_t i = 0; i < keep.size(); ++i) {
    require(keep[i] < n_sites, ErrorCategory::site_index,
            "partial_trace: site index " + std::to_string(keep[i]) + " out of range");
    require(i == 0 || keep[i - 1] < keep[i], ErrorCategory::argument,
            "partial_trace: keep sites must be strictly ascending");
  }
}

}  // namespace detail

/// Reduced matrix on `keep` (strictly ascending) of a matrix over `dims`.
inline ComplexMatrix partial_trace_matrix(const ComplexMatrix& m, std::span<const std::size_t> dims,
                                          std::span<const std::size_t> keep) {
  const std::size_t n = dims.size();
  detail::check_keep_sites(keep, n);
  std::vector<std::size_t> strides(n);
  std::size_t stride = 1;
  for (std::size_t s = n; s-- > 0;) {
    strides[s] = stride;
    stride *= dims[s];
  }
  std::vector<std::size_t> traced;
  for (std::size_t s = 0, k = 0; s < n; ++s) {
    if (k < keep.size() && keep[k] == s)
      ++k;
    else
      traced.push_back(s);
  }
  const auto kept_off = detail::composite_offsets(keep, dims, strides);
  const auto traced_off = detail::composite_offsets(traced, dims, strides);
  const auto dk = static_cast<Eigen::Index>(kept_off.size());
  ComplexMatrix out = ComplexMatrix::Zero(dk, dk);
  for (Eigen::Index r = 0; r < dk; ++r) {
    for (Eigen::Index c = 0; c < dk; ++c) {
      Complex acc = 0;
      for (auto t : traced_off)
        acc += m(static_cast<Eigen::Index>(kept_off[r] + t), static_cast<Eigen::Index>(kept_off[c] + t));
      out(r, c) = acc;
    }
  }
  return out;
}

inline DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const std::size_t> keep) {
  detail::check_keep_sites(keep, rho.n_sites());
  std::vector<std::size_t> kept_dims;
  for (auto s : keep) kept_dims.push_back(rho.site_dims()[s]);
  return DensityMatrix(partial_trace_matrix(rho.matrix(), rho.site_dims(), keep),
                       std::move(kept_dims), DensityMatrix::Trusted{});
}

inline DensityMatrix partial_trace(const DensityMatrix& rho, std::initializer_list<std::size_t> keep) {
  return partial_trace(rho, std::span<const std::size_t>(keep.begin(), keep.size()));
}

/// Re tr(rho O) without forming the product.
inline double expectation(const ComplexMatrix& rho, const ComplexMatrix& obs) {
  require(rho.rows() == obs.rows() && rho.cols() == obs.cols(), ErrorCategory::shape,
          "expectation: dimension mismatch");
  require(hermiticity_error(obs) <= tol::kStructural, ErrorCategory::hermiticity,
          "expectation: observable is not Hermitian");
  const Complex value = rho.cwiseProduct(obs.transpose()).sum();
  require(std::abs(value.imag()) < tol::kNumerical, ErrorCategory::hermiticity,
          "expectation: tr(rho O) has a non-negligible imaginary part");
  return value.real();
}

inline double expectation(const DensityMatrix& rho, const ComplexMatrix& obs) {
  return expectation(rho.matrix(), obs);
}

struct HermitianEigen {
  std::vector<double> values;  // ascending
  ComplexMatrix vectors;       // columns
};

inline HermitianEigen eigen_hermitian(const ComplexMatrix& a, bool with_vectors = true) {
  require_square(a, "eigen_hermitian");
  require(hermiticity_error(a) <= tol::kStructural, ErrorCategory::hermiticity,
          "eigen_hermitian: input is not Hermitian");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(
      a, with_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  require(es.info() == Eigen::Success, ErrorCategory::numerical,
          "eigen_hermitian: eigensolver did not converge");
  HermitianEigen out;
  out.values.assign(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  if (with_vectors) out.vectors = es.eigenvectors();
  return out;
}

inline std::vector<double> eigenvalues_hermitian(const ComplexMatrix& a) {
  return eigen_hermitian(a, false).values;
}

}  // namespace qrc
