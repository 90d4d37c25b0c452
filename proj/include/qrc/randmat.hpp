#pragma once

// Seeded sparse random Hermitian observables and random density matrices.
//
// Generation scheme (normative): walk the upper triangle row by row
// (i <= j). For each entry draw u ~ U[0,1); the entry is nonzero iff
// u < density. A nonzero diagonal entry is real U[-1,1]; a nonzero
// off-diagonal entry takes real then imaginary part, each U[-1,1]. The
// lower triangle is the exact conjugate mirror.

#include <algorithm>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "qrc/csv.hpp"
#include "qrc/error.hpp"
#include "qrc/linalg.hpp"
#include "qrc/parallel.hpp"
#include "qrc/rng.hpp"

namespace qrc {

struct RandomMatrixSpec {
  std::size_t dim = 2;
  double density = 1.0;
  std::uint64_t seed = 0;
};

inline void validate(const RandomMatrixSpec& spec) {
  require(is_power_of_two(spec.dim) && spec.dim <= tol::kMaxRandomDim, ErrorCategory::argument,
          "random matrix dimension must be a power of two <= 512, got " + std::to_string(spec.dim));
  require(spec.density >= 0.0 && spec.density <= 1.0, ErrorCategory::argument,
          "random matrix density must lie in [0, 1]");
}

inline ComplexMatrix random_hermitian(const RandomMatrixSpec& spec) {
  validate(spec);
  const auto d = static_cast<Eigen::Index>(spec.dim);
  ComplexMatrix a = ComplexMatrix::Zero(d, d);
  Rng rng(spec.seed);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i; j < d; ++j) {
      if (!(rng.uniform01() < spec.density)) continue;
      if (i == j) {
        a(i, i) = Complex(rng.uniform(-1.0, 1.0), 0.0);
      } else {
        const double re = rng.uniform(-1.0, 1.0);
        const double im = rng.uniform(-1.0, 1.0);
        a(i, j) = Complex(re, im);
        a(j, i) = Complex(re, -im);
      }
    }
  }
  return a;
}

/// rho = A A^dagger / tr(A A^dagger) with A = random_hermitian(spec). A zero
/// draw is retried with seed + 1, so density must be positive.
inline DensityMatrix random_density_matrix(const RandomMatrixSpec& spec) {
  validate(spec);
  require(spec.density > 0.0, ErrorCategory::argument,
          "random_density_matrix: density must be > 0 (a zero matrix has no normalization)");
  RandomMatrixSpec draw = spec;
  ComplexMatrix a = random_hermitian(draw);
  while (a.isZero(0.0)) {
    ++draw.seed;
    a = random_hermitian(draw);
  }
  ComplexMatrix p = a * a.adjoint();
  p = (0.5 * (p + p.adjoint())).eval();
  p /= trace(p).real();
  const int n = log2_exact(spec.dim);
  auto dims = n == 0 ? std::vector<std::size_t>{1} : spin_dims(static_cast<std::size_t>(n));
  return DensityMatrix(std::move(p), std::move(dims), DensityMatrix::Trusted{});
}

// ---------------------------------------------------------------------------
// Eigenvalue spectra of random observables.

struct SpectrumTable {
  struct Row {
    std::size_t dim;
    double density;
    double eigenvalue;
  };
  std::vector<Row> rows;

  void write_csv(std::ostream& os) const {
    os << "dim,density,eigenvalue\n";
    for (const auto& r : rows)
      os << r.dim << ',' << csv::format_double(r.density) << ',' << csv::format_double(r.eigenvalue)
         << '\n';
  }

  /// Pooled eigenvalues of one (dim, density) cell.
  std::vector<double> cell(std::size_t dim, double density) const {
    std::vector<double> out;
    for (const auto& r : rows)
      if (r.dim == dim && r.density == density) out.push_back(r.eigenvalue);
    return out;
  }
};

/// Sample s of cell (a, b) uses seed derive_seed(seed, {a, b, s}).
inline SpectrumTable spectrum_study(const std::vector<std::size_t>& dims,
                                    const std::vector<double>& densities,
                                    std::size_t samples_per_cell, std::uint64_t seed,
                                    std::size_t threads = 1) {
  require(samples_per_cell >= 1, ErrorCategory::argument, "spectrum_study: samples_per_cell must be >= 1");
  for (auto d : dims) validate(RandomMatrixSpec{d, 1.0, 0});
  for (auto rho : densities) validate(RandomMatrixSpec{2, rho, 0});

  const std::size_t n_cells = dims.size() * densities.size();
  std::vector<std::vector<double>> pooled(n_cells * samples_per_cell);
  parallel_for(pooled.size(), threads, [&](std::size_t job) {
    const std::size_t cell = job / samples_per_cell;
    const std::size_t s = job % samples_per_cell;
    const std::size_t a = cell / densities.size();
    const std::size_t b = cell % densities.size();
    const RandomMatrixSpec spec{dims[a], densities[b], derive_seed(seed, {a, b, s})};
    pooled[job] = eigenvalues_hermitian(random_hermitian(spec));
  });

  SpectrumTable table;
  for (std::size_t job = 0; job < pooled.size(); ++job) {
    const std::size_t cell = job / samples_per_cell;
    const std::size_t a = cell / densities.size();
    const std::size_t b = cell % densities.size();
    for (double ev : pooled[job]) table.rows.push_back({dims[a], densities[b], ev});
  }
  return table;
}

// ---------------------------------------------------------------------------
// Expectation values of random observables on reduced random states.

struct MeasurementStudyOptions {
  int full_spins = 9;
  std::vector<std::size_t> obs_dims{2, 512};
  std::size_t samples = 500;
  std::uint64_t seed = 0;
  double state_density = 1.0;
  double observable_density = 1.0;
  std::size_t threads = 1;
  bool identity_observable = false;  // test hook
};

struct MeasurementTable {
  struct Row {
    std::size_t obs_dim;
    std::vector<std::size_t> sites;
    double expectation;
  };
  std::vector<Row> rows;

  void write_csv(std::ostream& os) const {
    os << "obs_dim,sites,expectation\n";
    for (const auto& r : rows) {
      os << r.obs_dim << ',';
      for (std::size_t i = 0; i < r.sites.size(); ++i) os << (i ? ";" : "") << r.sites[i];
      os << ',' << csv::format_double(r.expectation) << '\n';
    }
  }

  std::vector<double> expectations(std::size_t obs_dim) const {
    std::vector<double> out;
    for (const auto& r : rows)
      if (r.obs_dim == obs_dim) out.push_back(r.expectation);
    return out;
  }
};

/// For each obs_dim and sample: random 2^full_spins state, uniformly chosen
/// site subset of size log2(obs_dim), partial trace, fresh random observable.
/// Sample s of obs_dim index a draws from Rng(derive_seed(seed, {a, s})) in
/// the order: state seed, site subset, observable seed.
inline MeasurementTable measurement_statistics_study(const MeasurementStudyOptions& opt) {
  require(opt.full_spins >= 1 && opt.full_spins <= tol::kMaxSpins, ErrorCategory::argument,
          "measurement_statistics_study: full_spins must be in [1, 9]");
  require(opt.samples >= 1, ErrorCategory::argument, "measurement_statistics_study: samples must be >= 1");
  const auto n = static_cast<std::size_t>(opt.full_spins);
  const std::size_t full_dim = std::size_t{1} << n;
  for (auto d : opt.obs_dims) {
    require(is_power_of_two(d) && d >= 2, ErrorCategory::argument,
            "measurement_statistics_study: obs_dim must be a power of two >= 2");
    require(d <= full_dim, ErrorCategory::argument,
            "measurement_statistics_study: obs_dim " + std::to_string(d) +
                " exceeds the full dimension " + std::to_string(full_dim));
  }

  std::vector<MeasurementTable::Row> rows(opt.obs_dims.size() * opt.samples);
  parallel_for(rows.size(), opt.threads, [&](std::size_t job) {
    const std::size_t a = job / opt.samples;
    const std::size_t s = job % opt.samples;
    const std::size_t obs_dim = opt.obs_dims[a];
    Rng rng(derive_seed(opt.seed, {a, s}));
    const auto state_seed = rng.next_u64();
    auto sites = sample_without_replacement(n, static_cast<std::size_t>(log2_exact(obs_dim)), rng);
    std::sort(sites.begin(), sites.end());
    const auto obs_seed = rng.next_u64();

    const auto rho = random_density_matrix({full_dim, opt.state_density, state_seed});
    const ComplexMatrix obs = opt.identity_observable
                                  ? identity(obs_dim)
                                  : random_hermitian({obs_dim, opt.observable_density, obs_seed});
    const double value = obs_dim == full_dim ? expectation(rho, obs)
                                             : expectation(partial_trace(rho, sites), obs);
    rows[job] = {obs_dim, std::move(sites), value};
  });
  return MeasurementTable{std::move(rows)};
}

}  // namespace qrc
