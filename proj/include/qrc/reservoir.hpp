#pragma once

// Driven XXX Heisenberg chain
//
//   H(t) = J * sum_<i,i+1> (sx sx + sy sy + sz sz) + h(t) * sum_l w_l s_a^(l)
//
// with open boundaries, hbar = 1, and an optional uniform sz dephasing
// channel of strength gamma. The input is applied by zero-order hold: sample
// u_k sets h = u_k for one sample interval.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "qrc/error.hpp"
#include "qrc/linalg.hpp"
#include "qrc/rng.hpp"
#include "qrc/tolerances.hpp"

namespace qrc {

enum class Axis { x, y, z };
enum class InitialState { all_plus_x, all_up_z };

struct ChainConfig {
  int n_spins = 5;
  double coupling = 0.0;  // J, angular frequency units
  Axis drive_axis = Axis::z;
  InitialState initial_state = InitialState::all_plus_x;
  double dephasing_rate = 0.0;
  int substeps = 20;
  double sample_dt = 0.1;
  /// Per-site drive weights w_l; empty means w_l = 1 on every site.
  std::vector<double> field_weights;
};

inline void validate(const ChainConfig& c) {
  require(c.n_spins >= 1 && c.n_spins <= tol::kMaxSpins, ErrorCategory::argument,
          "chain: n_spins must be in [1, 9]");
  require(std::isfinite(c.coupling), ErrorCategory::argument, "chain: coupling must be finite");
  require(std::isfinite(c.dephasing_rate) && c.dephasing_rate >= 0.0, ErrorCategory::argument,
          "chain: dephasing_rate must be >= 0");
  require(c.substeps >= 1, ErrorCategory::argument, "chain: substeps must be >= 1");
  require(std::isfinite(c.sample_dt) && c.sample_dt > 0.0, ErrorCategory::argument,
          "chain: sample_dt must be > 0");
  require(c.field_weights.empty() || c.field_weights.size() == static_cast<std::size_t>(c.n_spins),
          ErrorCategory::argument, "chain: field_weights must have one entry per spin");
  for (double w : c.field_weights)
    require(std::isfinite(w), ErrorCategory::argument, "chain: field weights must be finite");
}

/// Site weights drawn U[lo, hi) from a dedicated stream.
inline std::vector<double> random_field_weights(int n_spins, std::uint64_t seed, double lo = 0.5,
                                                double hi = 1.5) {
  Rng rng(seed);
  std::vector<double> w(static_cast<std::size_t>(n_spins));
  for (auto& v : w) v = rng.uniform(lo, hi);
  return w;
}

inline ComplexMatrix pauli(Axis a) {
  switch (a) {
    case Axis::x: return pauli_x();
    case Axis::y: return pauli_y();
    case Axis::z: return pauli_z();
  }
  return pauli_z();
}

inline ComplexMatrix build_static_hamiltonian(const ChainConfig& c) {
  validate(c);
  const auto n = static_cast<std::size_t>(c.n_spins);
  const auto d = static_cast<Eigen::Index>(std::size_t{1} << n);
  ComplexMatrix h = ComplexMatrix::Zero(d, d);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    ComplexMatrix exchange = ComplexMatrix::Zero(4, 4);
    for (Axis a : {Axis::x, Axis::y, Axis::z}) exchange += kron(pauli(a), pauli(a));
    ComplexMatrix term = kron(kron(identity(std::size_t{1} << i), exchange),
                              identity(std::size_t{1} << (n - i - 2)));
    h += c.coupling * term;
  }
  return h;
}

inline ComplexMatrix build_drive_operator(const ChainConfig& c) {
  validate(c);
  const auto n = static_cast<std::size_t>(c.n_spins);
  const auto d = static_cast<Eigen::Index>(std::size_t{1} << n);
  ComplexMatrix out = ComplexMatrix::Zero(d, d);
  const ComplexMatrix s = pauli(c.drive_axis);
  for (std::size_t l = 0; l < n; ++l) {
    const double w = c.field_weights.empty() ? 1.0 : c.field_weights[l];
    out += w * site_operator(s, l, n);
  }
  return out;
}

inline DensityMatrix initial_state(const ChainConfig& c) {
  validate(c);
  ComplexMatrix one(2, 2);
  if (c.initial_state == InitialState::all_plus_x)
    one << 0.5, 0.5, 0.5, 0.5;
  else
    one << 1.0, 0.0, 0.0, 0.0;
  ComplexMatrix rho = ComplexMatrix::Identity(1, 1);
  for (int s = 0; s < c.n_spins; ++s) rho = kron(rho, one);
  return DensityMatrix(std::move(rho), spin_dims(static_cast<std::size_t>(c.n_spins)));
}

struct Trajectory {
  std::vector<double> times;  // end of each sample interval
  std::vector<DensityMatrix> states;
  std::vector<double> drive;

  std::size_t size() const noexcept { return states.size(); }
  int n_spins() const { return states.empty() ? 0 : static_cast<int>(states.front().n_sites()); }
};

/// Integrator steps per sample so that one step advances the fastest
/// coherence by at most `max_phase` radians. The bound uses the spectral
/// spread of H0 plus 2 * max|u| * sum|w_l|, and 2 * N * gamma for dephasing.
inline int stable_substeps(const ChainConfig& c, double max_abs_input, double max_phase) {
  require(max_phase > 0.0, ErrorCategory::argument, "stable_substeps: max_phase must be > 0");
  const auto ev = eigenvalues_hermitian(build_static_hamiltonian(c));
  double weight_sum = 0.0;
  for (int l = 0; l < c.n_spins; ++l)
    weight_sum += c.field_weights.empty() ? 1.0 : std::abs(c.field_weights[static_cast<std::size_t>(l)]);
  const double rate = (ev.back() - ev.front()) + 2.0 * std::abs(max_abs_input) * weight_sum +
                      2.0 * c.n_spins * c.dephasing_rate;
  return std::max(1, static_cast<int>(std::ceil(rate * c.sample_dt / max_phase)));
}

namespace detail {

// gamma * sum_l (z_i z_j - 1): the sz dephasing dissipator acts elementwise.
inline RealMatrix dephasing_factors(const ChainConfig& c) {
  const auto n = static_cast<std::size_t>(c.n_spins);
  const auto d = static_cast<Eigen::Index>(std::size_t{1} << n);
  RealMatrix f = RealMatrix::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j)
      for (std::size_t l = 0; l < n; ++l) {
        const auto bit = n - 1 - l;
        const double zi = ((i >> bit) & 1) ? -1.0 : 1.0;
        const double zj = ((j >> bit) & 1) ? -1.0 : 1.0;
        f(i, j) += zi * zj - 1.0;
      }
  return c.dephasing_rate * f;
}

// RK4 on a complex state; any Hermitian H.
class ComplexStepper {
 public:
  ComplexStepper(const ComplexMatrix& rho0, const RealMatrix& dephase, bool dissipative)
      : rho_(rho0), dephase_(dephase.cast<Complex>()), dissipative_(dissipative) {
    const auto d = rho0.rows();
    for (auto* m : {&k1_, &k2_, &k3_, &k4_, &tmp_}) m->resize(d, d);
  }

  void step(const ComplexMatrix& h, double dt) {
    rhs(h, rho_, k1_);
    tmp_ = rho_ + (0.5 * dt) * k1_;
    rhs(h, tmp_, k2_);
    tmp_ = rho_ + (0.5 * dt) * k2_;
    rhs(h, tmp_, k3_);
    tmp_ = rho_ + dt * k3_;
    rhs(h, tmp_, k4_);
    rho_ += (dt / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
  }

  ComplexMatrix state() const { return rho_; }
  void set_state(const ComplexMatrix& rho) { rho_ = rho; }

 private:
  // -i [H, rho] = -i (H rho - (H rho)^dagger) for Hermitian H, rho
  void rhs(const ComplexMatrix& h, const ComplexMatrix& rho, ComplexMatrix& out) {
    m_.noalias() = h * rho;
    out = Complex(0.0, -1.0) * (m_ - m_.adjoint());
    if (dissipative_) out += dephase_.cwiseProduct(rho);
  }

  ComplexMatrix rho_, dephase_, m_, k1_, k2_, k3_, k4_, tmp_;
  bool dissipative_;
};

// RK4 on rho = R + iI for real symmetric H, using real products only:
//   dR/dt = H I + (H I)^T,   dI/dt = -(H R - (H R)^T).
class RealStepper {
 public:
  RealStepper(const ComplexMatrix& rho0, const RealMatrix& dephase, bool dissipative)
      : dephase_(dephase), dissipative_(dissipative) {
    set_state(rho0);
    const auto d = rho0.rows();
    for (auto* m : {&a_, &kr_[0], &kr_[1], &kr_[2], &kr_[3], &ki_[0], &ki_[1], &ki_[2], &ki_[3], &tr_, &ti_})
      m->resize(d, d);
  }

  void step(const RealMatrix& h, double dt) {
    rhs(h, re_, im_, kr_[0], ki_[0]);
    tr_ = re_ + (0.5 * dt) * kr_[0];
    ti_ = im_ + (0.5 * dt) * ki_[0];
    rhs(h, tr_, ti_, kr_[1], ki_[1]);
    tr_ = re_ + (0.5 * dt) * kr_[1];
    ti_ = im_ + (0.5 * dt) * ki_[1];
    rhs(h, tr_, ti_, kr_[2], ki_[2]);
    tr_ = re_ + dt * kr_[2];
    ti_ = im_ + dt * ki_[2];
    rhs(h, tr_, ti_, kr_[3], ki_[3]);
    re_ += (dt / 6.0) * (kr_[0] + 2.0 * kr_[1] + 2.0 * kr_[2] + kr_[3]);
    im_ += (dt / 6.0) * (ki_[0] + 2.0 * ki_[1] + 2.0 * ki_[2] + ki_[3]);
  }

  ComplexMatrix state() const {
    ComplexMatrix out(re_.rows(), re_.cols());
    out.real() = re_;
    out.imag() = im_;
    return out;
  }

  void set_state(const ComplexMatrix& rho) {
    re_ = rho.real();
    im_ = rho.imag();
  }

 private:
  void rhs(const RealMatrix& h, const RealMatrix& r, const RealMatrix& i, RealMatrix& dr, RealMatrix& di) {
    a_.noalias() = h * i;
    dr = a_ + a_.transpose();
    a_.noalias() = h * r;
    di = a_.transpose() - a_;
    if (dissipative_) {
      dr += dephase_.cwiseProduct(r);
      di += dephase_.cwiseProduct(i);
    }
  }

  RealMatrix re_, im_, dephase_, a_, tr_, ti_;
  RealMatrix kr_[4], ki_[4];
  bool dissipative_;
};

template <class Stepper, class Matrix>
Trajectory integrate(const ChainConfig& c, const std::vector<double>& input, const Matrix& h0,
                     const Matrix& drive) {
  const auto dims = spin_dims(static_cast<std::size_t>(c.n_spins));
  const double dt = c.sample_dt / c.substeps;
  Stepper stepper(initial_state(c).matrix(), dephasing_factors(c), c.dephasing_rate > 0.0);

  Trajectory traj;
  traj.times.reserve(input.size());
  traj.states.reserve(input.size());
  traj.drive = input;
  Matrix hk;
  for (std::size_t k = 0; k < input.size(); ++k) {
    hk = h0 + input[k] * drive;
    for (int s = 0; s < c.substeps; ++s) stepper.step(hk, dt);
    ComplexMatrix rho = stepper.state();
    require(all_finite(rho), ErrorCategory::numerical,
            "evolve: non-finite state at sample " + std::to_string(k));
    rho = (0.5 * (rho + rho.adjoint())).eval();
    const double drift = std::abs(trace(rho) - 1.0);
    require(drift <= tol::kInstability, ErrorCategory::integration_instability,
            "evolve: trace drift " + std::to_string(drift) + " at sample " + std::to_string(k) +
                "; use more substeps");
    if (drift > tol::kTraceRenorm) rho /= trace(rho).real();
    stepper.set_state(rho);
    DensityMatrix state(std::move(rho), dims, DensityMatrix::Trusted{});
    require(state.min_eigenvalue() >= -tol::kInstability, ErrorCategory::integration_instability,
            "evolve: state lost positivity at sample " + std::to_string(k) + "; use more substeps");
    traj.times.push_back(static_cast<double>(k + 1) * c.sample_dt);
    traj.states.push_back(std::move(state));
  }
  return traj;
}

}  // namespace detail

/// Integrates d rho/dt = -i[H0 + u_k D, rho] + gamma * sum_l (sz rho sz - rho)
/// with classical RK4, `substeps` steps per input sample, recording the
/// state after each sample. Real symmetric Hamiltonians (x or z drive) take
/// a real-arithmetic path.
inline Trajectory evolve(const ChainConfig& c, const std::vector<double>& input) {
  validate(c);
  require(!input.empty(), ErrorCategory::argument, "evolve: input is empty");
  for (double u : input) require(std::isfinite(u), ErrorCategory::argument, "evolve: non-finite input");

  const ComplexMatrix h0 = build_static_hamiltonian(c);
  const ComplexMatrix drive = build_drive_operator(c);
  if (h0.imag().isZero(0.0) && drive.imag().isZero(0.0)) {
    const RealMatrix h0r = h0.real();
    const RealMatrix dr = drive.real();
    return detail::integrate<detail::RealStepper>(c, input, h0r, dr);
  }
  return detail::integrate<detail::ComplexStepper>(c, input, h0, drive);
}

}  // namespace qrc
