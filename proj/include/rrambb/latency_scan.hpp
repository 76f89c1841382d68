#pragma once

// Write-latency scaling of an N x N device array programmed row by row:
// the devices of a row are written in parallel, so a row costs the slowest
// device's pulse/read time, and rows add up.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rrambb/crossbar.hpp"
#include "rrambb/device.hpp"
#include "rrambb/error.hpp"
#include "rrambb/ledger.hpp"
#include "rrambb/parallel.hpp"
#include "rrambb/random.hpp"

namespace rrambb {

struct LatencyScanOptions {
  WriteScheme scheme = WriteScheme::verify;
  double tolerance = 0.01;  // relative to each target
  std::uint64_t max_pulses = 2560;
  // When set, every device targets g_min + fraction * (g_max - g_min);
  // otherwise targets are uniform on [g_min, g_max].
  std::optional<double> target_fraction;
  std::size_t trials = 30;
  std::size_t jobs = 1;
};

struct ArrayWrite {
  double latency = 0.0;
  EnergyLatencyLedger ledger;
};

/// Programs an n x n array from g_min to `targets`. Throws ProgrammingFailure
/// if a verify write runs out of pulses.
inline ArrayWrite program_array(const RealMatrix& targets, const LatencyScanOptions& opt, const DeviceParams& params,
                                RandomStream& rng) {
  ArrayWrite out;
  for (Eigen::Index i = 0; i < targets.rows(); ++i) {
    double row = 0.0;
    for (Eigen::Index j = 0; j < targets.cols(); ++j) {
      const double t = targets(i, j);
      const ProgramResult r = opt.scheme == WriteScheme::verify
                                  ? program_with_verify({params.g_min}, t, opt.tolerance, opt.max_pulses, params, rng)
                                  : program_without_verify({params.g_min}, t, params, rng);
      if (!r.report.converged) fail(ErrorKind::ProgrammingFailure, "device did not reach tolerance");
      record_event(out.ledger, ProgramEvent{r.report.pulses_applied, r.report.verify_reads, r.report.write_energy,
                                            r.report.read_energy});
      row = std::max(row, r.report.latency(params));
    }
    out.latency += row;
  }
  record_event(out.ledger, LatencyEvent{out.latency});
  return out;
}

struct LatencyScanPoint {
  int n = 0;
  double mean_latency = 0.0;  // s
  double std_latency = 0.0;   // s, across trials
  double per_n_ln_n = 0.0;    // mean / (N ln N)
  double per_n_sqrt_ln_n = 0.0;
};

struct LatencyFit {
  std::string model;  // "n_ln_n", "n_sqrt_ln_n" or "linear_plus_n_ln_n"
  double a = 0.0;     // coefficient of N (two-term model only)
  double c = 0.0;     // coefficient of the growth term
  double relative_rms = 0.0;
};

struct LatencyScanReport {
  WriteScheme scheme = WriteScheme::verify;
  std::vector<LatencyScanPoint> points;
  std::vector<LatencyFit> fits;

  /// max/min across sizes of mean / (N ln N) or mean / (N sqrt(ln N)).
  double spread_n_ln_n() const {
    return spread([](const auto& p) { return p.per_n_ln_n; });
  }
  double spread_n_sqrt_ln_n() const {
    return spread([](const auto& p) { return p.per_n_sqrt_ln_n; });
  }

  const LatencyFit& fit(const std::string& model) const {
    for (const auto& f : fits)
      if (f.model == model) return f;
    fail(ErrorKind::InvalidArgument, "no fit named " + model);
  }

 private:
  template <typename F>
  double spread(F f) const {
    double lo = f(points.front()), hi = lo;
    for (const auto& p : points) {
      lo = std::min(lo, f(p));
      hi = std::max(hi, f(p));
    }
    return hi / lo;
  }
};

namespace detail {

inline LatencyFit fit_one(const std::string& name, const std::vector<double>& x, const std::vector<double>& y) {
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += x[i] * y[i];
    sxx += x[i] * x[i];
  }
  LatencyFit f{name, 0.0, sxy / sxx, 0.0};
  double r2 = 0.0, y2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    r2 += std::pow(y[i] - f.c * x[i], 2);
    y2 += y[i] * y[i];
  }
  f.relative_rms = std::sqrt(r2 / y2);
  return f;
}

inline LatencyFit fit_two(const std::vector<double>& n, const std::vector<double>& y) {
  Eigen::MatrixXd a(static_cast<Eigen::Index>(n.size()), 2);
  Eigen::VectorXd b(static_cast<Eigen::Index>(n.size()));
  for (std::size_t i = 0; i < n.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    a(r, 0) = n[i];
    a(r, 1) = n[i] * std::log(n[i]);
    b(r) = y[i];
  }
  const Eigen::Vector2d coef = a.colPivHouseholderQr().solve(b);
  return {"linear_plus_n_ln_n", coef(0), coef(1), (a * coef - b).norm() / b.norm()};
}

}  // namespace detail

inline LatencyScanReport latency_scan(const std::vector<int>& sizes, const LatencyScanOptions& opt,
                                      const DeviceParams& params, std::uint64_t seed) {
  if (sizes.size() < 2) fail(ErrorKind::InsufficientData, "latency scan needs at least two array sizes");
  if (opt.trials < 30) fail(ErrorKind::InsufficientData, "latency scan needs at least 30 trials per size");
  for (int n : sizes)
    if (n < 2) fail(ErrorKind::InvalidArgument, "array sizes must be at least 2");
  if (opt.target_fraction && (*opt.target_fraction < 0.0 || *opt.target_fraction > 1.0))
    fail(ErrorKind::InvalidArgument, "target fraction must lie in [0, 1]");
  params.validate();

  LatencyScanReport report;
  report.scheme = opt.scheme;
  std::vector<double> ns, means;
  for (std::size_t s = 0; s < sizes.size(); ++s) {
    const int n = sizes[s];
    std::vector<double> lat(opt.trials);
    parallel_for(opt.trials, opt.jobs, [&](std::size_t t) {
      RandomStream rng = RandomStream::derive(seed, {static_cast<std::uint64_t>(n), t});
      RealMatrix targets(n, n);
      for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i)
          targets(i, j) = params.g_min + opt.target_fraction.value_or(rng.uniform()) * params.range();
      lat[t] = program_array(targets, opt, params, rng).latency;
    });
    double mean = 0.0;
    for (double v : lat) mean += v;
    mean /= static_cast<double>(lat.size());
    double var = 0.0;
    for (double v : lat) var += (v - mean) * (v - mean);
    const double nd = n;
    const double ln = std::log(nd);
    report.points.push_back(
        {n, mean, std::sqrt(var / static_cast<double>(lat.size() - 1)), mean / (nd * ln), mean / (nd * std::sqrt(ln))});
    ns.push_back(nd);
    means.push_back(mean);
  }

  std::vector<double> x1, x2;
  for (double n : ns) {
    x1.push_back(n * std::log(n));
    x2.push_back(n * std::sqrt(std::log(n)));
  }
  report.fits.push_back(detail::fit_one("n_ln_n", x1, means));
  report.fits.push_back(detail::fit_one("n_sqrt_ln_n", x2, means));
  report.fits.push_back(detail::fit_two(ns, means));
  return report;
}

}  // namespace rrambb
