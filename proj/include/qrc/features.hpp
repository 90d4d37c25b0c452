#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "qrc/csv.hpp"
#include "qrc/error.hpp"
#include "qrc/linalg.hpp"
#include "qrc/parallel.hpp"
#include "qrc/randmat.hpp"
#include "qrc/reservoir.hpp"
#include "qrc/rng.hpp"

namespace qrc {

/// Random observables, each attached to an ascending set of chain sites.
struct MeasurementSet {
  std::vector<ComplexMatrix> observables;
  std::vector<std::vector<std::size_t>> site_sets;
  int n_spins = 0;
  std::uint64_t seed = 0;
  double density = 1.0;

  std::size_t size() const noexcept { return observables.size(); }
};

/// Observable i draws from Rng(derive_seed(seed, {i})): first its site subset,
/// then the seed of its random Hermitian matrix. A set of n features is
/// therefore the prefix of any larger set with the same arguments.
inline MeasurementSet build_measurement_set(std::size_t n_features, int n_spins, int obs_spins,
                                            double density, std::uint64_t seed) {
  require(n_features >= 1, ErrorCategory::argument, "measurement set: n_features must be >= 1");
  require(n_spins >= 1 && n_spins <= tol::kMaxSpins, ErrorCategory::argument,
          "measurement set: n_spins must be in [1, 9]");
  require(obs_spins >= 1 && obs_spins <= n_spins, ErrorCategory::argument,
          "measurement set: obs_spins must be in [1, n_spins]");
  MeasurementSet set;
  set.n_spins = n_spins;
  set.seed = seed;
  set.density = density;
  set.observables.reserve(n_features);
  set.site_sets.reserve(n_features);
  const std::size_t obs_dim = std::size_t{1} << obs_spins;
  for (std::size_t i = 0; i < n_features; ++i) {
    Rng rng(derive_seed(seed, {i}));
    auto sites = sample_without_replacement(static_cast<std::size_t>(n_spins),
                                            static_cast<std::size_t>(obs_spins), rng);
    std::sort(sites.begin(), sites.end());
    set.site_sets.push_back(std::move(sites));
    set.observables.push_back(random_hermitian({obs_dim, density, rng.next_u64()}));
  }
  return set;
}

/// T x F matrix of expectation values.
struct FeatureMatrix {
  RealMatrix values;

  std::size_t rows() const noexcept { return static_cast<std::size_t>(values.rows()); }
  std::size_t cols() const noexcept { return static_cast<std::size_t>(values.cols()); }

  void write_csv(std::ostream& os) const {
    for (Eigen::Index j = 0; j < values.cols(); ++j) os << (j ? ",f" : "f") << j;
    os << '\n';
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
      for (Eigen::Index j = 0; j < values.cols(); ++j)
        os << (j ? "," : "") << csv::format_double(values(i, j));
      os << '\n';
    }
  }
};

/// value[t, i] = tr(tr_{complement}(rho_t) O_i). Reduced states are computed
/// once per distinct site set and time.
inline FeatureMatrix describe(const Trajectory& traj, const MeasurementSet& set, std::size_t threads = 1) {
  require(traj.n_spins() == set.n_spins, ErrorCategory::shape,
          "describe: measurement set is for " + std::to_string(set.n_spins) +
              " spins, trajectory has " + std::to_string(traj.n_spins()));
  require(set.observables.size() == set.site_sets.size(), ErrorCategory::shape,
          "describe: observables and site sets differ in length");
  const auto n = static_cast<std::size_t>(set.n_spins);
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto& sites = set.site_sets[i];
    require(!sites.empty() && dim_of(set.observables[i]) == (std::size_t{1} << sites.size()),
            ErrorCategory::shape, "describe: observable " + std::to_string(i) + " does not match its sites");
    for (auto s : sites)
      require(s < n, ErrorCategory::site_index, "describe: site index out of range");
  }

  std::map<std::vector<std::size_t>, std::size_t> group_of;
  std::vector<std::vector<std::size_t>> groups;
  std::vector<std::size_t> obs_group(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    auto [it, inserted] = group_of.try_emplace(set.site_sets[i], groups.size());
    if (inserted) groups.push_back(set.site_sets[i]);
    obs_group[i] = it->second;
  }

  FeatureMatrix out;
  out.values.resize(static_cast<Eigen::Index>(traj.size()), static_cast<Eigen::Index>(set.size()));
  parallel_for(traj.size(), threads, [&](std::size_t t) {
    const auto& rho = traj.states[t];
    std::vector<ComplexMatrix> reduced(groups.size());
    for (std::size_t g = 0; g < groups.size(); ++g)
      reduced[g] = groups[g].size() == n ? rho.matrix()
                                         : partial_trace_matrix(rho.matrix(), rho.site_dims(), groups[g]);
    for (std::size_t i = 0; i < set.size(); ++i)
      out.values(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(i)) =
          expectation(reduced[obs_group[i]], set.observables[i]);
  });
  return out;
}

}  // namespace qrc
