#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <vector>

#include "coopsense/quantization.hpp"

using namespace coopsense;

namespace {

// shared fixture: a realistic estimate with a full observation window
struct Fixture {
  PulseSpec spec = default_pulse(3.2e-7);
  double tau_hat = 5.13e-8;
  std::complex<double> alpha_hat = std::polar(2.1e-4, 0.9);
  double noise_var = 1.0;
  double crb_tau_hat = 4e-20;  // ~0.02 Ts std
  ObservationWindow window;
  GaussianSurrogate surrogate;
  KLTBasis basis;

  Fixture() {
    window = observation_window(tau_hat, spec);
    surrogate = surrogate_moments(tau_hat, alpha_hat, crb_tau_hat, window, spec,
                                  noise_var);
    basis = klt(surrogate);
  }
};

Eigen::VectorXd deriv_vec(const Fixture& f, double tau) {
  const int k = f.window.count;
  std::vector<double> d(k);
  pulse_derivative_window(f.spec, f.window.k_lo, k, tau, d.data());
  Eigen::VectorXd out(2 * k);
  const double root_e = std::sqrt(f.spec.E);
  for (int i = 0; i < k; ++i) {
    out(i) = root_e * f.alpha_hat.real() * d[i];
    out(k + i) = root_e * f.alpha_hat.imag() * d[i];
  }
  return out;
}

}  // namespace

TEST_CASE("stack_window lays out real parts then imaginary parts") {
  SampleBlock blk;
  blk.k_lo = 3;
  blk.v = {{1.0, -1.0}, {2.0, -2.0}, {3.0, -3.0}, {4.0, -4.0}};
  const ObservationWindow w{4, 2};
  const SampleVector sv = stack_window(blk, w);
  REQUIRE(sv.v.size() == 4);
  CHECK(sv.v[0] == 2.0);
  CHECK(sv.v[1] == 3.0);
  CHECK(sv.v[2] == -2.0);
  CHECK(sv.v[3] == -3.0);
  CHECK_THROWS(stack_window(blk, ObservationWindow{6, 2}));
}

TEST_CASE("surrogate covariance is rank-1 plus scaled identity") {
  const Fixture f;
  const Eigen::MatrixXd cov = f.surrogate.covariance();
  const int dim = 2 * f.window.count;
  REQUIRE(cov.rows() == dim);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  const Eigen::VectorXd ev = es.eigenvalues();  // ascending
  const double half_noise = 0.5 * f.noise_var;
  for (int j = 0; j + 1 < dim; ++j)
    CHECK(ev(j) == doctest::Approx(half_noise).epsilon(1e-12));
  CHECK(ev(dim - 1) == doctest::Approx(half_noise + f.surrogate.e_crb *
                                                        f.surrogate.q.squaredNorm())
                           .epsilon(1e-12));
}

TEST_CASE("klt diagonalizes the surrogate covariance") {
  const Fixture f;
  const int dim = 2 * f.window.count;
  CHECK((f.basis.U.transpose() * f.basis.U -
         Eigen::MatrixXd::Identity(dim, dim)).norm() < 1e-10);
  for (int j = 0; j + 1 < dim; ++j) CHECK(f.basis.gamma(j) >= f.basis.gamma(j + 1));
  const Eigen::MatrixXd rebuilt =
      f.basis.U * f.basis.gamma.asDiagonal() * f.basis.U.transpose();
  CHECK((rebuilt - f.surrogate.covariance()).norm() < 1e-10);
}

TEST_CASE("klt on a synthetic two-dimensional source") {
  // covariance [[1, .5], [.5, 1]] has eigenvalues 1.5 and 0.5
  GaussianSurrogate s;
  s.mean = Eigen::VectorXd::Zero(2);
  s.q = Eigen::VectorXd(2);
  s.q << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  s.e_crb = 1.0;
  s.noise_var = 1.0;
  const KLTBasis b = klt(s);
  CHECK(b.gamma(0) == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(b.gamma(1) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(std::abs(b.U(0, 0)) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("lloyd codebook matches the known optimal Gaussian quantizers") {
  const ScalarCodebook one = lloyd_codebook(0.0, 1.0, 1);
  REQUIRE(one.levels.size() == 2);
  CHECK(one.levels[0] == doctest::Approx(-0.797885).epsilon(2e-3));
  CHECK(one.levels[1] == doctest::Approx(0.797885).epsilon(2e-3));

  const ScalarCodebook two = lloyd_codebook(0.0, 1.0, 2);
  REQUIRE(two.levels.size() == 4);
  CHECK(two.levels[0] == doctest::Approx(-1.510).epsilon(2e-3));
  CHECK(two.levels[1] == doctest::Approx(-0.4528).epsilon(2e-3));
  CHECK(two.levels[2] == doctest::Approx(0.4528).epsilon(2e-3));
  CHECK(two.levels[3] == doctest::Approx(1.510).epsilon(2e-3));
}

TEST_CASE("lloyd codebook is mean/scale equivariant") {
  const ScalarCodebook unit = lloyd_codebook(0.0, 1.0, 3);
  const double m = -2.3, v = 5.5;
  const ScalarCodebook shifted = lloyd_codebook(m, v, 3);
  REQUIRE(shifted.levels.size() == unit.levels.size());
  for (std::size_t i = 0; i < unit.levels.size(); ++i)
    CHECK(shifted.levels[i] ==
          doctest::Approx(m + std::sqrt(v) * unit.levels[i]).epsilon(1e-9));
  // boundaries are the midpoints between adjacent levels
  for (std::size_t i = 0; i + 1 < shifted.levels.size(); ++i)
    CHECK(shifted.boundaries[i] ==
          doctest::Approx(0.5 * (shifted.levels[i] + shifted.levels[i + 1])));
}

TEST_CASE("uniform codebook spans mean +- span sigma") {
  const ScalarCodebook cb = uniform_codebook(0.0, 1.0, 2, 4.0);
  REQUIRE(cb.levels.size() == 4);
  CHECK(cb.levels[0] == doctest::Approx(-3.0).epsilon(1e-12));
  CHECK(cb.levels[1] == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(cb.levels[2] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(cb.levels[3] == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("quantize maps to the nearest level") {
  const ScalarCodebook cb = uniform_codebook(0.0, 1.0, 2, 4.0);
  CHECK(dequantize(quantize(-10.0, cb), cb) == -3.0);
  CHECK(dequantize(quantize(-0.99, cb), cb) == -1.0);
  CHECK(dequantize(quantize(0.01, cb), cb) == 1.0);
  CHECK(dequantize(quantize(2.01, cb), cb) == 3.0);
  Rng rng(8);
  for (int i = 0; i < 200; ++i) {
    const double x = rng.uniform(-5.0, 5.0);
    const double q = dequantize(quantize(x, cb), cb);
    for (double lv : cb.levels) CHECK(std::abs(x - q) <= std::abs(x - lv) + 1e-12);
  }
}

TEST_CASE("codebook distortion matches Monte Carlo") {
  const ScalarCodebook cb = lloyd_codebook(0.5, 2.0, 2);
  Rng rng(31);
  double mc = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = 0.5 + std::sqrt(2.0) * rng.normal();
    const double e = x - dequantize(quantize(x, cb), cb);
    mc += e * e;
  }
  mc /= n;
  CHECK(codebook_distortion(cb) == doctest::Approx(mc).epsilon(0.03));
}

TEST_CASE("quantization noise variance follows the rate identity") {
  for (int x = 1; x <= 8; ++x) {
    const double denom = static_cast<double>((1u << (2 * x)) - 1u);
    CHECK(quant_noise_var(3.7, x) == 3.7 / denom);
  }
  CHECK(quant_noise_var(3.7, 0) == kZeroBitSentinel * 3.7);
}

TEST_CASE("quantized-delay bound agrees with the diagonalized form") {
  const Fixture f;
  const int dim = 2 * f.window.count;
  BitAllocation alloc;
  alloc.bits.assign(dim, 0);
  alloc.bits[0] = 3;
  alloc.bits[1] = 2;
  alloc.bits[5] = 1;
  alloc.budget = 6;
  const double tau = f.tau_hat + 0.3 * f.spec.Ts;
  const double bound = crb_prime(alloc, f.basis, f.surrogate, f.alpha_hat, tau,
                                 f.window, f.spec);
  // independent path: project the derivative into the KLT basis and sum
  // the diagonal information terms
  const Eigen::VectorXd dt = f.basis.U.transpose() * deriv_vec(f, tau);
  double info = 0.0;
  for (int j = 0; j < dim; ++j)
    info += dt(j) * dt(j) /
            (0.5 * f.noise_var + quant_noise_var(f.basis.gamma(j), alloc.bits[j]));
  CHECK(bound == doctest::Approx(1.0 / info).epsilon(1e-9));
}

TEST_CASE("expected bound collapses to the point bound for a tight prior") {
  const Fixture f;
  const int dim = 2 * f.window.count;
  BitAllocation alloc;
  alloc.bits.assign(dim, 1);
  alloc.budget = dim;
  const double point = crb_prime(alloc, f.basis, f.surrogate, f.alpha_hat,
                                 f.tau_hat, f.window, f.spec);
  const double expected = ecrb(alloc, f.basis, f.surrogate, f.alpha_hat,
                               f.tau_hat, 1e-40, f.window, f.spec);
  CHECK(expected == doctest::Approx(point).epsilon(1e-6));
}

TEST_CASE("evaluator matches the standalone expected bound") {
  const Fixture f;
  const int dim = 2 * f.window.count;
  EcrbEvaluator eval(f.basis, f.surrogate, f.alpha_hat, f.tau_hat, f.crb_tau_hat,
                     f.window, f.spec);
  Rng rng(77);
  for (int trial = 0; trial < 5; ++trial) {
    BitAllocation alloc;
    alloc.bits.resize(dim);
    for (int& b : alloc.bits) b = static_cast<int>(rng.next_u64() % 4);
    CHECK(eval(alloc.bits) ==
          doctest::Approx(ecrb(alloc, f.basis, f.surrogate, f.alpha_hat, f.tau_hat,
                               f.crb_tau_hat, f.window, f.spec))
              .epsilon(1e-12));
  }
}

TEST_CASE("greedy allocation spends the budget and beats an even split") {
  const Fixture f;
  const int dim = 2 * f.window.count;
  for (int budget : {2, 6, 10, 20}) {
    const BitAllocation alloc =
        greedy_allocate(budget, f.basis, f.surrogate, f.alpha_hat, f.tau_hat,
                        f.crb_tau_hat, f.window, f.spec);
    int total = 0;
    for (int b : alloc.bits) total += b;
    CHECK(total == budget);

    BitAllocation even;
    even.bits.assign(dim, budget / dim);
    for (int j = 0; j < budget % dim; ++j) ++even.bits[j];
    even.budget = budget;
    EcrbEvaluator eval(f.basis, f.surrogate, f.alpha_hat, f.tau_hat,
                       f.crb_tau_hat, f.window, f.spec);
    CHECK(eval(alloc.bits) <= eval(even.bits) * (1.0 + 1e-12));
  }
  // deterministic
  const BitAllocation a = greedy_allocate(7, f.basis, f.surrogate, f.alpha_hat,
                                          f.tau_hat, f.crb_tau_hat, f.window, f.spec);
  const BitAllocation b = greedy_allocate(7, f.basis, f.surrogate, f.alpha_hat,
                                          f.tau_hat, f.crb_tau_hat, f.window, f.spec);
  CHECK(a.bits == b.bits);
}

TEST_CASE("codec round trip through packed bits") {
  const Fixture f;
  // coarse block holding the true signal plus noise
  ChannelRealization chan;
  chan.xi = std::polar(1.0, 0.9);
  chan.alpha = f.alpha_hat;
  chan.tau = f.tau_hat;
  chan.noise_var = f.noise_var;
  Rng rng(55);
  const SampleBlock blk = synthesize_received(f.spec, chan, -4, 24, rng);

  const QuantContext ctx =
      build_quant_context(f.tau_hat, f.alpha_hat, f.crb_tau_hat, 12, false,
                          f.noise_var, f.spec, QuantizerKind::Klt);
  const ReceiverPayload payload = encode_payload(blk, ctx);
  int total = 0;
  for (int b : ctx.alloc.bits) total += b;
  CHECK(total == 12);
  CHECK(payload.bit_count == 12);

  // decoded components equal direct per-component quantization
  const SampleVector sv = stack_window(blk, ctx.window);
  const Eigen::VectorXd stacked =
      Eigen::Map<const Eigen::VectorXd>(sv.v.data(), sv.v.size());
  const Eigen::VectorXd proj = ctx.basis.U.transpose() * stacked;
  const Eigen::VectorXd decoded = decode_components(payload, ctx);
  for (Eigen::Index j = 0; j < decoded.size(); ++j) {
    if (ctx.alloc.bits[j] == 0) continue;  // zero-bit components carry the mean
    const ScalarCodebook& cb = ctx.codebooks[j];
    CHECK(decoded(j) == doctest::Approx(dequantize(quantize(proj(j), cb), cb)));
  }

  // infinite capacity bypasses the codec entirely
  const QuantContext open_ctx =
      build_quant_context(f.tau_hat, f.alpha_hat, f.crb_tau_hat, 0, true,
                          f.noise_var, f.spec, QuantizerKind::Klt);
  const ReceiverPayload raw = encode_payload(blk, open_ctx);
  const Eigen::VectorXd passthrough = decode_components(raw, open_ctx);
  for (Eigen::Index j = 0; j < passthrough.size(); ++j)
    CHECK(passthrough(j) == doctest::Approx(stacked(j)).epsilon(1e-12));
}
