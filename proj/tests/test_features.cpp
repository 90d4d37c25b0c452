#include <gtest/gtest.h>

#include <sstream>

#include "qrc/features.hpp"
#include "test_support.hpp"

namespace {

using qrc::ComplexMatrix;

qrc::Trajectory random_trajectory(int n_spins, std::uint64_t seed, std::size_t length) {
  qrc::ChainConfig c;
  c.n_spins = n_spins;
  c.coupling = 1.0 + static_cast<double>(seed % 5);
  c.field_weights = qrc::random_field_weights(n_spins, seed);
  c.substeps = qrc::stable_substeps(c, 1.0, 0.05);
  qrc::Rng rng(seed);
  std::vector<double> u(length);
  for (auto& v : u) v = rng.uniform(-1.0, 1.0);
  return qrc::evolve(c, u);
}

qrc::Trajectory initial_only(int n_spins) {
  qrc::ChainConfig c;
  c.n_spins = n_spins;
  qrc::Trajectory t;
  t.times = {0.0};
  t.states = {qrc::initial_state(c)};
  t.drive = {0.0};
  return t;
}

TEST(MeasurementSet, FullSiteSet) {
  const auto set = qrc::build_measurement_set(1, 4, 4, 1.0, 3);
  EXPECT_EQ(set.site_sets[0], (std::vector<std::size_t>{0, 1, 2, 3}));
  EXPECT_EQ(qrc::dim_of(set.observables[0]), 16u);
}

TEST(MeasurementSet, Deterministic) {
  const auto a = qrc::build_measurement_set(20, 5, 2, 0.5, 99);
  const auto b = qrc::build_measurement_set(20, 5, 2, 0.5, 99);
  EXPECT_EQ(a.site_sets, b.site_sets);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_TRUE(a.observables[i] == b.observables[i]);
}

TEST(MeasurementSet, FiveHundredSingleSiteObservables) {
  const auto set = qrc::build_measurement_set(500, 5, 1, 1.0, 1);
  ASSERT_EQ(set.size(), 500u);
  std::vector<int> hits(5, 0);
  for (std::size_t i = 0; i < set.size(); ++i) {
    ASSERT_EQ(set.site_sets[i].size(), 1u);
    ASSERT_LT(set.site_sets[i][0], 5u);
    ++hits[set.site_sets[i][0]];
    EXPECT_EQ(qrc::dim_of(set.observables[i]), 2u);
    EXPECT_TRUE(set.observables[i] == set.observables[i].adjoint());
  }
  for (int h : hits) EXPECT_GT(h, 50);
}

TEST(MeasurementSet, SmallerSetIsPrefix) {
  const auto small = qrc::build_measurement_set(10, 5, 2, 1.0, 4);
  const auto large = qrc::build_measurement_set(100, 5, 2, 1.0, 4);
  for (std::size_t i = 0; i < small.size(); ++i) {
    EXPECT_EQ(small.site_sets[i], large.site_sets[i]);
    EXPECT_TRUE(small.observables[i] == large.observables[i]);
  }
}

TEST(MeasurementSet, Errors) {
  try {
    (void)qrc::build_measurement_set(3, 2, 3, 1.0, 0);
    FAIL();
  } catch (const qrc::Error& e) {
    EXPECT_EQ(e.category(), qrc::ErrorCategory::argument);
  }
  EXPECT_THROW((void)qrc::build_measurement_set(0, 2, 1, 1.0, 0), qrc::Error);
}

TEST(Describe, IdentityObservableGivesOnes) {
  const auto traj = random_trajectory(3, 2, 10);
  qrc::MeasurementSet set;
  set.n_spins = 3;
  set.observables = {qrc::identity(2), qrc::identity(4), qrc::identity(8)};
  set.site_sets = {{1}, {0, 2}, {0, 1, 2}};
  const auto f = qrc::describe(traj, set);
  EXPECT_LE((f.values.array() - 1.0).abs().maxCoeff(), 1e-12);
}

TEST(Describe, SigmaZOnPlusStateIsZero) {
  qrc::MeasurementSet set;
  set.n_spins = 4;
  for (std::size_t s = 0; s < 4; ++s) {
    set.observables.push_back(qrc::pauli_z());
    set.site_sets.push_back({s});
  }
  const auto f = qrc::describe(initial_only(4), set);
  EXPECT_LE(f.values.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Describe, MatchesLiftToFullOracle) {
  // property: >= 50 seeds, systems of <= 3 spins
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const int n = 1 + static_cast<int>(seed % 3);
    const auto traj = random_trajectory(n, seed, 4);
    const int obs_spins = 1 + static_cast<int>((seed / 3) % static_cast<std::uint64_t>(n));
    const auto set = qrc::build_measurement_set(6, n, obs_spins, 0.8, seed + 500);
    const auto f = qrc::describe(traj, set);
    for (std::size_t t = 0; t < traj.size(); ++t) {
      for (std::size_t i = 0; i < set.size(); ++i) {
        const ComplexMatrix full = qrc::test::lift_to_full(set.observables[i], n, set.site_sets[i]);
        const double oracle = qrc::trace(traj.states[t].matrix() * full).real();
        ASSERT_NEAR(f.values(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(i)), oracle, 1e-10)
            << "seed " << seed << " t " << t << " obs " << i;
      }
    }
  }
}

TEST(Describe, PureFunctionOfStates) {
  const auto traj = random_trajectory(4, 7, 12);
  const auto set = qrc::build_measurement_set(25, 4, 2, 1.0, 8);
  const auto serial = qrc::describe(traj, set, 1);
  const auto threaded = qrc::describe(traj, set, 4);
  EXPECT_TRUE(serial.values == threaded.values);
  qrc::Trajectory reversed = traj;
  std::reverse(reversed.states.begin(), reversed.states.end());
  const auto r = qrc::describe(reversed, set);
  EXPECT_TRUE(r.values == serial.values.colwise().reverse().eval());
}

TEST(Describe, DensityZeroColumnIsZero) {
  const auto traj = random_trajectory(3, 1, 5);
  const auto set = qrc::build_measurement_set(4, 3, 2, 0.0, 2);
  EXPECT_TRUE(qrc::describe(traj, set).values.isZero(0.0));
}

TEST(Describe, SizeMismatch) {
  const auto traj = random_trajectory(3, 1, 2);
  const auto set = qrc::build_measurement_set(4, 4, 1, 1.0, 2);
  try {
    (void)qrc::describe(traj, set);
    FAIL();
  } catch (const qrc::Error& e) {
    EXPECT_EQ(e.category(), qrc::ErrorCategory::shape);
  }
}

TEST(FeatureMatrix, CsvLayout) {
  qrc::FeatureMatrix f;
  f.values.resize(2, 3);
  f.values << 1, 2, 3, 4, 5, 6.5;
  std::ostringstream os;
  f.write_csv(os);
  EXPECT_EQ(os.str(), "f0,f1,f2\n1,2,3\n4,5,6.5\n");
}

}  // namespace
