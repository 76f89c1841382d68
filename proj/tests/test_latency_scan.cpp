#include <gtest/gtest.h>

#include "rrambb/latency_scan.hpp"

using namespace rrambb;

namespace {

DeviceParams quiet() {
  DeviceParams p;
  p.sigma_c2c = 0.0;
  p.sigma_read = 0.0;
  return p;
}

}  // namespace

TEST(ProgramArray, RowTakesItsSlowestCell) {
  const DeviceParams p = quiet();
  const double step = p.mean_step();
  RealMatrix t(2, 3);
  // Row 0 needs 1, 4 and 2 steps; row 1 needs 3, 0 and 1.
  t << p.g_min + step, p.g_min + 4 * step, p.g_min + 2 * step, p.g_min + 3 * step, p.g_min, p.g_min + step;
  LatencyScanOptions o;
  o.scheme = WriteScheme::no_verify;
  RandomStream rng(1);
  const ArrayWrite w = program_array(t, o, p, rng);
  const double width = p.potentiation.width;
  EXPECT_NEAR(w.latency, (4 + 3) * width, 1e-18);
  EXPECT_EQ(w.ledger.write_pulses, 11u);
  EXPECT_EQ(w.ledger.verify_reads, 0u);
  EXPECT_NEAR(w.ledger.latency, w.latency, 1e-18);
}

TEST(ProgramArray, VerifyAddsReads) {
  const DeviceParams p = quiet();
  const double step = p.mean_step();
  RealMatrix t(1, 2);
  t << p.g_min + 2 * step, p.g_min + 5 * step;
  LatencyScanOptions o;
  o.tolerance = 1e-9;
  RandomStream rng(2);
  const ArrayWrite w = program_array(t, o, p, rng);
  // The slower cell: 5 pulses and 6 reads (fast_forward aggregates but counts stay exact).
  EXPECT_NEAR(w.latency, 5 * p.potentiation.width + 6 * p.read_width, 1e-18);
  EXPECT_EQ(w.ledger.write_pulses, 7u);
  EXPECT_EQ(w.ledger.verify_reads, 9u);
}

TEST(ProgramArray, BudgetExhaustionFails) {
  const DeviceParams p = quiet();
  RealMatrix t = RealMatrix::Constant(2, 2, p.g_max);
  LatencyScanOptions o;
  o.max_pulses = 3;
  RandomStream rng(3);
  try {
    program_array(t, o, p, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ProgrammingFailure);
  }
}

TEST(LatencyFits, RecoverSyntheticCoefficients) {
  std::vector<double> n{8, 16, 32, 64, 128}, nlogn, y1, y2;
  for (double v : n) {
    nlogn.push_back(v * std::log(v));
    y1.push_back(3.0 * v * std::log(v));
    y2.push_back(2.0 * v + 5.0 * v * std::log(v));
  }
  const LatencyFit f = detail::fit_one("n_ln_n", nlogn, y1);
  EXPECT_NEAR(f.c, 3.0, 1e-12);
  EXPECT_NEAR(f.relative_rms, 0.0, 1e-12);
  const LatencyFit g = detail::fit_two(n, y2);
  EXPECT_NEAR(g.a, 2.0, 1e-9);
  EXPECT_NEAR(g.c, 5.0, 1e-9);
  EXPECT_NEAR(g.relative_rms, 0.0, 1e-12);
}

TEST(LatencyScan, MonotoneInSizeWithFitsAndSpreads) {
  DeviceParams p;
  LatencyScanOptions o;
  o.trials = 30;
  const LatencyScanReport r = latency_scan({8, 16, 32}, o, p, 7);
  ASSERT_EQ(r.points.size(), 3u);
  for (std::size_t i = 1; i < r.points.size(); ++i) EXPECT_GT(r.points[i].mean_latency, r.points[i - 1].mean_latency);
  for (const auto& pt : r.points) {
    EXPECT_GT(pt.std_latency, 0.0);
    EXPECT_NEAR(pt.per_n_ln_n, pt.mean_latency / (pt.n * std::log(double(pt.n))), 1e-20);
  }
  EXPECT_GE(r.spread_n_ln_n(), 1.0);
  EXPECT_EQ(r.fits.size(), 3u);
  EXPECT_GT(r.fit("n_ln_n").c, 0.0);
  EXPECT_THROW(r.fit("quadratic"), Error);
}

TEST(LatencyScan, DeterministicAndJobIndependent) {
  DeviceParams p;
  LatencyScanOptions o;
  o.trials = 30;
  o.scheme = WriteScheme::no_verify;
  const auto a = latency_scan({4, 8}, o, p, 11);
  o.jobs = 3;
  const auto b = latency_scan({4, 8}, o, p, 11);
  for (std::size_t i = 0; i < 2; ++i) EXPECT_EQ(a.points[i].mean_latency, b.points[i].mean_latency);
}

TEST(LatencyScan, FixedTargetFraction) {
  const DeviceParams p = quiet();
  LatencyScanOptions o;
  o.trials = 30;
  o.scheme = WriteScheme::no_verify;
  o.target_fraction = 0.5;
  const auto r = latency_scan({4, 8}, o, p, 12);
  // Every cell needs n_states / 2 pulses; n rows in sequence.
  for (const auto& pt : r.points) {
    EXPECT_NEAR(pt.mean_latency, pt.n * 128 * p.potentiation.width, 1e-15);
    EXPECT_NEAR(pt.std_latency, 0.0, 1e-18);
  }
}

TEST(LatencyScan, ArgumentChecks) {
  DeviceParams p;
  LatencyScanOptions o;
  auto kind = [&](auto f) -> std::optional<ErrorKind> {
    try {
      f();
    } catch (const Error& e) {
      return e.kind();
    }
    return std::nullopt;
  };
  EXPECT_EQ(kind([&] { latency_scan({8}, o, p, 1); }), ErrorKind::InsufficientData);
  o.trials = 29;
  EXPECT_EQ(kind([&] { latency_scan({8, 16}, o, p, 1); }), ErrorKind::InsufficientData);
  o.trials = 30;
  EXPECT_EQ(kind([&] { latency_scan({1, 16}, o, p, 1); }), ErrorKind::InvalidArgument);
  o.target_fraction = 1.5;
  EXPECT_EQ(kind([&] { latency_scan({8, 16}, o, p, 1); }), ErrorKind::InvalidArgument);
}
