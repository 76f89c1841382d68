#include <gtest/gtest.h>

#include <random>

#include "rrambb/channel_est.hpp"

using namespace rrambb;

namespace {

DeviceParams quiet() {
  DeviceParams p;
  p.sigma_c2c = 0.0;
  p.sigma_read = 0.0;
  return p;
}

ProgramOptions exact_write() {
  ProgramOptions o;
  o.tolerance = 1e-13;
  return o;
}

ComplexMatrix random_h(std::mt19937_64& g, int n_r, int n_t) {
  std::normal_distribution<double> d(0.0, std::sqrt(0.5));
  ComplexMatrix h(n_r, n_t);
  for (auto& x : h.reshaped()) x = Complex(d(g), d(g));
  return h;
}

}  // namespace

TEST(Pilot, AllKindsAreUnitary) {
  for (int n : {1, 2, 4, 8}) {
    for (PilotKind k : {PilotKind::identity, PilotKind::dft, PilotKind::hadamard}) {
      const ComplexMatrix p = make_unitary_pilot(n, k);
      EXPECT_LE((p * p.adjoint() - ComplexMatrix::Identity(n, n)).norm(), 1e-12) << n << " " << to_string(k);
    }
  }
  EXPECT_LE((make_unitary_pilot(3, PilotKind::dft).adjoint() * make_unitary_pilot(3, PilotKind::dft) -
             ComplexMatrix::Identity(3, 3))
                .norm(),
            1e-12);
}

TEST(Pilot, HadamardEntries) {
  const ComplexMatrix p = make_unitary_pilot(2, PilotKind::hadamard);
  const double s = 1.0 / std::sqrt(2.0);
  EXPECT_EQ(p(0, 0), Complex(s));
  EXPECT_EQ(p(0, 1), Complex(s));
  EXPECT_EQ(p(1, 0), Complex(s));
  EXPECT_EQ(p(1, 1), Complex(-s));
}

TEST(Pilot, HadamardNeedsPowerOfTwo) {
  try {
    make_unitary_pilot(3, PilotKind::hadamard);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnsupportedSize);
  }
  EXPECT_THROW(make_unitary_pilot(0, PilotKind::identity), Error);
}

TEST(Estimate, NoiselessTrainingRecoversChannel) {
  std::mt19937_64 g(1);
  for (PilotKind k : {PilotKind::identity, PilotKind::dft, PilotKind::hadamard}) {
    const ComplexMatrix h = random_h(g, 4, 2);
    const ComplexMatrix p = make_unitary_pilot(2, k);
    EXPECT_LE((estimate_channel({p, h * p}) - h).norm(), 1e-12 * h.norm());
  }
}

TEST(Estimate, NoisyTrainingErrorHasNoiseVariance) {
  // With unitary P the estimation error (N P^H) keeps the per-entry noise variance.
  std::mt19937_64 g(2);
  std::normal_distribution<double> d(0.0, std::sqrt(0.05));
  const ComplexMatrix p = make_unitary_pilot(4, PilotKind::dft);
  double err = 0.0;
  const int trials = 4000;
  for (int t = 0; t < trials; ++t) {
    const ComplexMatrix h = random_h(g, 4, 4);
    ComplexMatrix n(4, 4);
    for (auto& x : n.reshaped()) x = Complex(d(g), d(g));
    err += (estimate_channel({p, h * p + n}) - h).squaredNorm();
  }
  EXPECT_NEAR(err / (trials * 16.0), 0.1, 0.005);
}

TEST(Estimate, CrossbarMatchesExactAtZeroNoise) {
  std::mt19937_64 g(3);
  RandomStream rng(3);
  for (PilotKind k : {PilotKind::dft, PilotKind::hadamard}) {
    const ComplexMatrix p = make_unitary_pilot(4, k);
    const ProgrammedEstimator est = program_estimator(p, exact_write(), quiet(), rng);
    const ComplexMatrix h = random_h(g, 4, 4);
    const PilotBlock b{p, h * p};
    EXPECT_LE((estimate_channel(b, est.estimator, quiet(), rng) - estimate_channel(b)).norm(), 1e-9 * h.norm());
  }
}

TEST(Estimate, CrossbarCostIsTwoReadsPerReceiveAntenna) {
  std::mt19937_64 g(4);
  RandomStream rng(4);
  const ComplexMatrix p = make_unitary_pilot(2, PilotKind::dft);
  const ProgrammedEstimator est = program_estimator(p, exact_write(), quiet(), rng);
  EXPECT_GT(est.ledger.write_pulses, 0u);
  EnergyLatencyLedger l;
  estimate_channel({p, random_h(g, 3, 2) * p}, est.estimator, quiet(), rng, &l);
  EXPECT_EQ(l.mvm_invocations, 6u);
  EXPECT_EQ(l.mvm_reads, 6u * 16u);
}

TEST(Estimate, ShapeChecks) {
  std::mt19937_64 g(5);
  RandomStream rng(5);
  const ComplexMatrix p = make_unitary_pilot(2, PilotKind::dft);
  try {
    estimate_channel({p, random_h(g, 2, 3)});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ShapeMismatch);
  }
  const ProgrammedEstimator est = program_estimator(p, exact_write(), quiet(), rng);
  const ComplexMatrix p4 = make_unitary_pilot(4, PilotKind::dft);
  EXPECT_THROW(estimate_channel({p4, random_h(g, 4, 4)}, est.estimator, quiet(), rng), Error);
}
