#include <gtest/gtest.h>

#include <bit>
#include <numbers>
#include <random>

#include "rrambb/link.hpp"

using namespace rrambb;

namespace {

DeviceParams quiet() {
  DeviceParams p;
  p.sigma_c2c = 0.0;
  p.sigma_read = 0.0;
  return p;
}

SystemConfig small_mimo() {
  SystemConfig c;
  c.n_c = 8;
  c.n_t = 2;
  c.n_r = 2;
  c.channel_taps = 2;
  c.cp_len = 1;
  c.channel_update_period = 4;
  return c;
}

Bits frames_of(const SystemConfig& c, std::size_t frames, std::uint64_t seed) {
  RandomStream rng(seed);
  return random_bits(frames * c.bits_per_frame(), rng);
}

std::vector<std::pair<unsigned, Complex>> all_points(const QamConstellation& q) {
  std::vector<std::pair<unsigned, Complex>> v;
  for (unsigned l = 0; l < static_cast<unsigned>(q.order()); ++l) v.emplace_back(l, q.point(l));
  return v;
}

}  // namespace

// ---------------------------------------------------------------- QAM

TEST(Qam, UnitAverageEnergy) {
  for (int m : {4, 16, 64, 256, 1024}) {
    const QamConstellation q(m);
    double e = 0.0;
    for (const auto& [l, s] : all_points(q)) e += std::norm(s);
    EXPECT_NEAR(e / m, 1.0, 1e-12) << m;
  }
}

TEST(Qam, GrayNeighboursDifferInOneBit) {
  for (int m : {4, 16, 64, 256}) {
    const QamConstellation q(m);
    const double d = 2.0 * q.spacing();
    const auto pts = all_points(q);
    int pairs = 0;
    for (const auto& [la, a] : pts)
      for (const auto& [lb, b] : pts) {
        const Complex diff = b - a;
        const bool horizontal = std::abs(std::abs(diff.real()) - d) < 1e-9 && std::abs(diff.imag()) < 1e-9;
        const bool vertical = std::abs(std::abs(diff.imag()) - d) < 1e-9 && std::abs(diff.real()) < 1e-9;
        if (!horizontal && !vertical) continue;
        ++pairs;
        EXPECT_EQ(std::popcount(la ^ lb), 1) << m << " " << la << " " << lb;
      }
    const int side = q.levels();
    EXPECT_EQ(pairs, 2 * 2 * side * (side - 1));
  }
}

TEST(Qam, PointsAreDistinctOnASquareGrid) {
  const QamConstellation q(16);
  const auto pts = all_points(q);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) EXPECT_GT(std::abs(pts[i].second - pts[j].second), 1e-9);
    const double re = (pts[i].second.real() / q.spacing() + 3.0) / 2.0;
    EXPECT_NEAR(re, std::round(re), 1e-12);
  }
  EXPECT_NEAR(q.spacing(), 1.0 / std::sqrt(10.0), 1e-15);
}

TEST(Qam, RoundTripEveryPattern) {
  for (int m : {4, 16, 64, 1024}) {
    const QamConstellation q(m);
    Bits bits;
    for (unsigned l = 0; l < static_cast<unsigned>(m); ++l)
      for (int b = q.bits_per_symbol() - 1; b >= 0; --b) bits.push_back(static_cast<std::uint8_t>((l >> b) & 1u));
    EXPECT_EQ(qam_demap(qam_map(bits, m), m), bits) << m;
  }
}

TEST(Qam, DemapIsMinimumDistance) {
  for (int m : {16, 64}) {
    const QamConstellation q(m);
    const auto pts = all_points(q);
    std::mt19937_64 g(1);
    std::uniform_real_distribution<double> u(-1.6, 1.6);
    for (int t = 0; t < 5000; ++t) {
      const Complex s(u(g), u(g));
      unsigned best = 0;
      double bd = 1e300;
      for (const auto& [l, p] : pts)
        if (std::abs(s - p) < bd) bd = std::abs(s - p), best = l;
      EXPECT_EQ(q.label(s), best);
    }
  }
}

TEST(Qam, SmallPerturbationKeepsBits) {
  const QamConstellation q(16);
  std::mt19937_64 g(2);
  std::uniform_real_distribution<double> r(0.0, 0.999 * q.spacing()), phi(0.0, 2.0 * std::numbers::pi);
  for (const auto& [l, p] : all_points(q))
    for (int t = 0; t < 50; ++t) EXPECT_EQ(q.label(p + std::polar(r(g), phi(g))), l);
}

TEST(Qam, Errors) {
  for (int m : {0, 2, 8, 32, 12}) EXPECT_THROW(QamConstellation{m}, Error) << m;
  try {
    qam_map(Bits(6, 0), 16);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::BadLength);
  }
}

// ---------------------------------------------------------------- metrics

TEST(Metrics, MerAndBerExamples) {
  ComplexVector ideal(2);
  ideal << Complex(1, 0), Complex(0, 1);
  EXPECT_EQ(compute_mer(ideal, ideal), 200.0);
  EXPECT_EQ(compute_mer(ideal, ideal, 80.0), 80.0);
  ComplexVector rx = ideal;
  rx(0) += Complex(0.1 * std::sqrt(2.0), 0.0);  // error power 0.02 of signal power 2
  EXPECT_NEAR(compute_mer(rx, ideal), 20.0, 1e-12);

  Bits tx(1000, 0), got(1000, 0);
  got[17] = 1;
  EXPECT_DOUBLE_EQ(compute_ber(got, tx), 1e-3);
  EXPECT_EQ(compute_ber(tx, tx), 0.0);
}

TEST(Metrics, Errors) {
  try {
    compute_mer(ComplexVector(), ComplexVector());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyInput);
  }
  EXPECT_THROW(compute_ber(Bits{}, Bits{}), Error);
  EXPECT_THROW(compute_ber(Bits(3, 0), Bits(4, 0)), Error);
}

// ---------------------------------------------------------------- channel

TEST(Channel, SubcarrierMatrixIsTapDft) {
  SystemConfig c = small_mimo();
  c.channel_taps = 3;
  c.cp_len = 2;
  RandomStream rng(3);
  const ChannelRealization ch = generate_channel(c, rng);
  ASSERT_EQ(ch.taps.size(), 3u);
  ASSERT_EQ(ch.subcarriers.size(), 8u);
  for (int k = 0; k < 8; ++k) {
    ComplexMatrix ref = ComplexMatrix::Zero(2, 2);
    for (int l = 0; l < 3; ++l) ref += std::exp(Complex(0.0, -2.0 * std::numbers::pi * k * l / 8.0)) * ch.taps[l];
    EXPECT_LE((ch.subcarriers[k] - ref).norm(), 1e-12);
  }
}

TEST(Channel, FlatFadingIsSameOnEverySubcarrier) {
  SystemConfig c = small_mimo();
  c.channel_taps = 1;
  c.cp_len = 0;
  RandomStream rng(4);
  const ChannelRealization ch = generate_channel(c, rng);
  for (const auto& h : ch.subcarriers) EXPECT_EQ(h, ch.subcarriers.front());
}

TEST(Channel, UnitAveragePower) {
  SystemConfig c;
  c.n_c = 16;
  c.n_t = 4;
  c.n_r = 4;
  c.channel_taps = 4;
  RandomStream rng(5);
  double acc = 0.0;
  const int reals = 2000;
  for (int t = 0; t < reals; ++t) {
    const ChannelRealization ch = generate_channel(c, rng);
    for (const auto& h : ch.subcarriers) acc += h.squaredNorm() / 16.0;
  }
  EXPECT_NEAR(acc / (reals * 16.0), 1.0, 0.02);
}

TEST(Channel, CyclicPrefixChainEqualsPerSubcarrierModel) {
  SystemConfig c = small_mimo();
  c.n_c = 32;
  c.n_t = 2;
  c.n_r = 3;
  c.channel_taps = 5;
  c.cp_len = 4;
  RandomStream rng(6);
  const ChannelRealization ch = generate_channel(c, rng);
  const DftOperator w = dft_matrix(c.n_c);
  const DeviceParams p = quiet();

  std::vector<ComplexVector> freq(2), tx(2);
  for (int a = 0; a < 2; ++a) {
    freq[a] = ComplexVector(c.n_c);
    for (auto& v : freq[a]) v = complex_normal(rng, 1.0);
    tx[a] = add_cyclic_prefix(idft(freq[a], w, p, rng), c.cp_len);
  }
  const auto rx = apply_channel(ch, tx);
  std::vector<ComplexVector> y(3);
  for (int r = 0; r < 3; ++r) y[r] = dft(remove_cyclic_prefix(rx[r], c.cp_len, c.n_c), w, p, rng);

  for (int k = 0; k < c.n_c; ++k) {
    const ComplexVector xk = (ComplexVector(2) << freq[0](k), freq[1](k)).finished();
    const ComplexVector expect = ch.subcarriers[k] * xk;
    for (int r = 0; r < 3; ++r) EXPECT_NEAR(std::abs(y[r](k) - expect(r)), 0.0, 1e-9);
  }
}

TEST(Channel, NoiseVariance) {
  RandomStream rng(7);
  std::vector<ComplexVector> rx(2, ComplexVector::Zero(50000));
  add_noise(rx, 0.25, rng);
  double re = 0.0, im = 0.0;
  for (const auto& v : rx)
    for (const auto& z : v) re += z.real() * z.real(), im += z.imag() * z.imag();
  EXPECT_NEAR(re / 100000.0, 0.125, 0.003);
  EXPECT_NEAR(im / 100000.0, 0.125, 0.003);
}

// ---------------------------------------------------------------- link

TEST(Link, IdealNoiselessIsErrorFree) {
  SystemConfig c = small_mimo();
  c.channel_noise = false;
  c.detector = DetectorMode::zf;  // L-MMSE would leave its bias
  const Bits payload = frames_of(c, 9, 8);
  RandomStream rng(8);
  const LinkResult r = run_link(c, payload, rng);
  EXPECT_EQ(r.bits, payload);
  EXPECT_EQ(r.metrics.ber, 0.0);
  EXPECT_GT(r.metrics.mer_db, 100.0);  // error-free up to round-off
  EXPECT_EQ(r.ledger.analog_events(), 0u);
  EXPECT_EQ(r.setup_ledger.analog_events(), 0u);
  EXPECT_EQ(r.ledger.data_symbols, 9u);
}

TEST(Link, MerCapWhenExactlyErrorFree) {
  SystemConfig c;
  c.n_c = 1;
  c.n_t = 1;
  c.n_r = 1;
  c.cp_len = 0;
  c.channel_taps = 1;
  c.channel = ChannelModel::awgn;
  c.csi = CsiMode::perfect;
  c.equalizer = Equalizer::none;
  c.channel_noise = false;
  RandomStream rng(9);
  const LinkResult r = run_link(c, frames_of(c, 16, 9), rng);
  EXPECT_EQ(r.metrics.mer_db, c.mer_cap_db);
  EXPECT_EQ(r.metrics.symbols_sent, 16u);
}

TEST(Link, CrossbarWithoutAnyNoiseIsErrorFree) {
  SystemConfig c = small_mimo();
  c.channel_noise = false;
  c.detector = DetectorMode::zf;
  c.processor = ProcessorKind::crossbar;
  c.pilot = PilotKind::dft;
  c.device = quiet();
  c.static_program.tolerance = 1e-12;
  c.detector_program.tolerance = 1e-12;
  const Bits payload = frames_of(c, 8, 10);
  RandomStream rng(10);
  const LinkResult r = run_link(c, payload, rng);
  EXPECT_EQ(r.metrics.ber, 0.0);
  EXPECT_GT(r.metrics.mer_db, 80.0);
}

TEST(Link, SingleAntennaDemoAtThirtyDb) {
  SystemConfig c;
  c.n_c = 4;
  c.n_t = 1;
  c.n_r = 1;
  c.cp_len = 1;
  c.channel_taps = 1;
  c.channel = ChannelModel::awgn;
  c.csi = CsiMode::perfect;
  c.equalizer = Equalizer::none;
  c.processor = ProcessorKind::crossbar;
  c.device.sigma_read = 0.0042;
  c.snr_db = 30.0;
  RandomStream rng(11);
  const LinkResult r = run_link(c, frames_of(c, 2048, 11), rng);
  EXPECT_GE(r.metrics.mer_db, 27.0);
  EXPECT_LE(r.metrics.mer_db, 33.0);
}

TEST(Link, NoiselessChannelMerFallsAsToleranceLoosens) {
  SystemConfig c;
  c.n_c = 4;
  c.n_t = 1;
  c.n_r = 1;
  c.cp_len = 1;
  c.channel_taps = 1;
  c.channel = ChannelModel::awgn;
  c.csi = CsiMode::perfect;
  c.equalizer = Equalizer::none;
  c.processor = ProcessorKind::crossbar;
  c.channel_noise = false;
  c.device.sigma_read = 0.0042;
  double prev = std::numeric_limits<double>::infinity();
  for (double tol : {0.005, 0.02, 0.05, 0.1, 0.2}) {
    c.static_program.tolerance = tol;
    double signal = 0.0, error = 0.0;
    // Each run programs its own DFT array, so trials average over writes.
    for (std::uint64_t t = 0; t < 40; ++t) {
      RandomStream rng = RandomStream::derive(12, {t});
      const LinkResult r = run_link(c, frames_of(c, 64, t), rng);
      signal += r.metrics.signal_power;
      error += r.metrics.error_power;
    }
    const double mer = 10.0 * std::log10(signal / error);
    if (tol == 0.005) EXPECT_GT(mer, 40.0);
    EXPECT_LT(mer, prev) << tol;
    prev = mer;
  }
}

TEST(Link, SameSeedSameResult) {
  SystemConfig c = small_mimo();
  c.processor = ProcessorKind::crossbar;
  c.snr_db = 15.0;
  const Bits payload = frames_of(c, 6, 13);
  RandomStream a(13), b(13), other(14);
  const LinkResult ra = run_link(c, payload, a);
  const LinkResult rb = run_link(c, payload, b);
  EXPECT_EQ(ra.bits, rb.bits);
  EXPECT_EQ(ra.metrics.error_power, rb.metrics.error_power);
  EXPECT_EQ(ra.ledger.write_energy + ra.ledger.mvm_energy, rb.ledger.write_energy + rb.ledger.mvm_energy);
  EXPECT_NE(run_link(c, payload, other).metrics.error_power, ra.metrics.error_power);
}

TEST(Link, PayloadMustFillFrames) {
  SystemConfig c = small_mimo();
  RandomStream rng(15);
  try {
    run_link(c, Bits(c.bits_per_frame() + 4, 0), rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::BadLength);
  }
  EXPECT_THROW(run_link(c, Bits{}, rng), Error);
}

TEST(Link, InvalidConfigIsRejected) {
  SystemConfig c = small_mimo();
  c.cp_len = 0;  // shorter than the channel memory
  RandomStream rng(16);
  try {
    run_link(c, frames_of(c, 1, 16), rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ConfigError);
  }
}

TEST(Link, CrossbarLedgerCountsEveryAnalogStep) {
  SystemConfig c = small_mimo();
  c.processor = ProcessorKind::crossbar;
  c.csi = CsiMode::perfect;
  const std::size_t frames = 10;
  RandomStream rng(17);
  const LinkResult r = run_link(c, frames_of(c, frames, 17), rng);
  const std::uint64_t n_c = 8, n_r = 2, n_t = 2;
  // Per frame: one receive DFT per antenna and two detector pairs per sub-carrier.
  EXPECT_EQ(r.ledger.mvm_invocations, frames * (n_r + 2 * n_c));
  EXPECT_EQ(r.ledger.mvm_reads, frames * (n_r * (2 * n_c) * (2 * n_c) + n_c * 2 * (2 * n_r) * (2 * n_t)));
  EXPECT_EQ(r.ledger.data_symbols, frames);
  EXPECT_GT(r.ledger.write_pulses, 0u);
  EXPECT_GT(r.ledger.verify_reads, 0u);
  EXPECT_GT(r.ledger.latency, 0.0);
  // Static DFT arrays plus the initial detector load.
  EXPECT_GT(r.setup_ledger.write_pulses, 0u);
  EXPECT_GT(r.setup_ledger.verify_reads, 0u);
}

TEST(Link, EstimatedCsiAddsTrainingSymbols) {
  SystemConfig c = small_mimo();
  c.processor = ProcessorKind::crossbar;
  c.pilot = PilotKind::dft;
  const std::size_t frames = 8;  // two update periods
  RandomStream rng(18);
  const LinkResult r = run_link(c, frames_of(c, frames, 18), rng);
  const std::uint64_t n_c = 8, n_r = 2, n_t = 2, periods = 2;
  const std::uint64_t training = periods * n_t;
  // Training symbols pass the DFTs; each sub-carrier estimate drives 2 n_r rows through the pilot array.
  EXPECT_EQ(r.ledger.mvm_invocations,
            (frames + training) * n_r + frames * 2 * n_c + periods * n_c * 2 * n_r);
}

TEST(Link, StaticChannelRewriteNeedsNoPulses) {
  SystemConfig c;
  c.n_c = 1;
  c.n_t = 2;
  c.n_r = 2;
  c.cp_len = 0;
  c.channel_taps = 1;
  c.channel = ChannelModel::fixed;
  c.fixed_channel = ComplexMatrix(2, 2);
  c.fixed_channel << Complex(1.0, 0.2), Complex(-0.3, 0.5), Complex(0.1, -0.7), Complex(0.9, 0.0);
  c.csi = CsiMode::perfect;
  c.processor = ProcessorKind::crossbar;
  c.device = quiet();
  c.channel_update_period = 2;
  RandomStream rng(19);
  const LinkResult r = run_link(c, frames_of(c, 6, 19), rng);
  EXPECT_GT(r.setup_ledger.write_pulses, 0u);
  EXPECT_EQ(r.ledger.write_pulses, 0u);
  EXPECT_GT(r.ledger.verify_reads, 0u);  // each update still verifies every cell
}

TEST(Link, SharedFrontEndMustMatch) {
  SystemConfig c = small_mimo();
  c.processor = ProcessorKind::crossbar;
  RandomStream rng(20);
  const ReceiverFrontEnd fe = build_front_end(c, rng);
  EXPECT_GT(fe.setup.write_pulses, 0u);
  const Bits payload = frames_of(c, 2, 20);
  const LinkResult shared = run_link(c, payload, rng, &fe);
  EXPECT_EQ(shared.setup_ledger.analog_events() < fe.setup.analog_events(), true);

  SystemConfig ideal = c;
  ideal.processor = ProcessorKind::ideal;
  try {
    run_link(ideal, payload, rng, &fe);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ModeMismatch);
  }
}

TEST(Link, IdealBerFallsWithSnr) {
  SystemConfig c = small_mimo();
  double prev_ber = 1.0, prev_mer = -1e9;
  for (double snr : {0.0, 5.0, 10.0, 15.0}) {
    c.snr_db = snr;
    RandomStream rng(21);
    const LinkResult r = run_link(c, frames_of(c, 200, 21), rng);
    EXPECT_LT(r.metrics.ber, prev_ber);
    EXPECT_GT(r.metrics.mer_db, prev_mer);
    EXPECT_GE(r.metrics.ber, 0.0);
    EXPECT_LE(r.metrics.ber, 1.0);
    prev_ber = r.metrics.ber;
    prev_mer = r.metrics.mer_db;
  }
}

TEST(Link, VerifyBeatsNoVerify) {
  SystemConfig c = small_mimo();
  c.processor = ProcessorKind::crossbar;
  c.snr_db = 25.0;
  c.device.sigma_c2c = 1.0;
  const Bits payload = frames_of(c, 64, 22);
  c.detector_program.scheme = WriteScheme::verify;
  RandomStream a(22);
  const LinkResult v = run_link(c, payload, a);
  c.detector_program.scheme = WriteScheme::no_verify;
  RandomStream b(22);
  const LinkResult nv = run_link(c, payload, b);
  EXPECT_LT(v.metrics.ber, nv.metrics.ber);
  EXPECT_GT(v.metrics.mer_db, nv.metrics.mer_db);
  EXPECT_EQ(nv.ledger.verify_reads, 0u);
}

// ---------------------------------------------------------------- images

TEST(Image, IdealRoundTripIsPixelExact) {
  // Uncoded transmission over deep fades always loses some bits, so exactness is checked without fading.
  SystemConfig c = small_mimo();
  c.channel = ChannelModel::awgn;
  c.channel_taps = 1;
  c.cp_len = 0;
  c.snr_db = 30.0;
  GrayImage img;
  img.width = 13;
  img.height = 7;
  for (int i = 0; i < 91; ++i) img.pixels.push_back(static_cast<std::uint8_t>(i * 37 % 256));
  RandomStream rng(23);
  const ImageTransmission t = transmit_image(c, img, rng);
  EXPECT_EQ(t.image.pixels, img.pixels);
  EXPECT_EQ(t.image.width, 13);
  EXPECT_EQ(t.metrics.ber, 0.0);
}

TEST(Image, AllZeroImage) {
  SystemConfig c = small_mimo();
  c.channel_noise = false;
  c.processor = ProcessorKind::crossbar;
  GrayImage img{4, 4, std::vector<std::uint8_t>(16, 0)};
  RandomStream rng(24);
  const ImageTransmission t = transmit_image(c, img, rng);
  EXPECT_EQ(t.image.pixels, img.pixels);
  EXPECT_EQ(t.metrics.ber, 0.0);
}

TEST(Image, RejectsInconsistentBuffer) {
  GrayImage img{4, 4, std::vector<std::uint8_t>(15, 0)};
  RandomStream rng(25);
  EXPECT_THROW(transmit_image(small_mimo(), img, rng), Error);
}
