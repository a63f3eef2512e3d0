#include "coopsense/quantization.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace coopsense {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014326779;

double norm_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }
double norm_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// Acklam's rational approximation with one Halley refinement.
double norm_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("norm_quantile: p out of (0,1)");
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p > 1.0 - plow) {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else {
    const double q = p - 0.5, r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }
  const double e = norm_cdf(x) - p;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

// centroid of N(0,1) over (a, b)
double truncated_centroid(double a, double b) {
  const double mass = norm_cdf(b) - norm_cdf(a);
  if (mass <= 0.0) return 0.5 * (a + b);
  const double lo = std::isinf(a) ? 0.0 : norm_pdf(a);
  const double hi = std::isinf(b) ? 0.0 : norm_pdf(b);
  return (lo - hi) / mass;
}

// E[(x - level)^2 ; a < x < b] under N(0,1)
double region_distortion(double a, double b, double level) {
  const double m0 = norm_cdf(b) - norm_cdf(a);
  const double pa = std::isinf(a) ? 0.0 : norm_pdf(a);
  const double pb = std::isinf(b) ? 0.0 : norm_pdf(b);
  const double m1 = pa - pb;
  const double m2 = m0 + (std::isinf(a) ? 0.0 : a * pa) - (std::isinf(b) ? 0.0 : b * pb);
  return m2 - 2.0 * level * m1 + level * level * m0;
}

std::vector<double> midpoints(const std::vector<double>& levels) {
  std::vector<double> bnd(levels.size() - 1);
  for (std::size_t i = 0; i + 1 < levels.size(); ++i)
    bnd[i] = 0.5 * (levels[i] + levels[i + 1]);
  return bnd;
}

void check_bits(int bits) {
  if (bits < 1) throw std::invalid_argument("codebook: bits must be >= 1");
  if (bits > 24) throw std::invalid_argument("codebook: bits too large");
}

// raw-domain even split, remainder to the lowest indices
std::vector<int> even_split(int budget, int dim) {
  std::vector<int> bits(dim, budget / dim);
  for (int j = 0; j < budget % dim; ++j) ++bits[j];
  return bits;
}

struct GaussHermite {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;  // normalized: sum = 1
};

// Golub-Welsch on the Hermite Jacobi matrix.
const GaussHermite& gauss_hermite_15() {
  static const GaussHermite gh = [] {
    const int n = 15;
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i + 1 < n; ++i) {
      const double off = std::sqrt((i + 1) / 2.0);
      J(i, i + 1) = off;
      J(i + 1, i) = off;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    GaussHermite out;
    out.nodes = es.eigenvalues();
    out.weights.resize(n);
    for (int i = 0; i < n; ++i) {
      const double v0 = es.eigenvectors()(0, i);
      out.weights(i) = v0 * v0;  // w_i / sqrt(pi)
    }
    out.weights /= out.weights.sum();
    return out;
  }();
  return gh;
}

Eigen::VectorXd derivative_vector(std::complex<double> alpha_hat, double tau,
                                  const ObservationWindow& window,
                                  const PulseSpec& spec) {
  const int k = window.count;
  std::vector<double> d(k);
  pulse_derivative_window(spec, window.k_lo, k, tau, d.data());
  Eigen::VectorXd out(2 * k);
  const double root_e = std::sqrt(spec.E);
  for (int i = 0; i < k; ++i) {
    out(i) = root_e * alpha_hat.real() * d[i];
    out(k + i) = root_e * alpha_hat.imag() * d[i];
  }
  return out;
}

}  // namespace

SampleVector stack_window(const SampleBlock& coarse, const ObservationWindow& window) {
  if (window.k_lo < coarse.k_lo || window.k_hi() > coarse.k_hi())
    throw std::out_of_range("stack_window: window outside the captured block");
  SampleVector out;
  out.v.resize(2 * static_cast<std::size_t>(window.count));
  const std::size_t off = static_cast<std::size_t>(window.k_lo - coarse.k_lo);
  for (int i = 0; i < window.count; ++i) {
    out.v[i] = coarse.v[off + i].real();
    out.v[window.count + i] = coarse.v[off + i].imag();
  }
  return out;
}

Eigen::MatrixXd GaussianSurrogate::covariance() const {
  const Eigen::Index n = q.size();
  Eigen::MatrixXd cov = e_crb * (q * q.transpose());
  cov += 0.5 * noise_var * Eigen::MatrixXd::Identity(n, n);
  return cov;
}

GaussianSurrogate surrogate_moments(double tau_hat, std::complex<double> alpha_hat,
                                    double crb_tau, const ObservationWindow& window,
                                    const PulseSpec& spec, double noise_var) {
  if (!(crb_tau > 0.0)) throw std::invalid_argument("surrogate_moments: nonpositive crb");
  if (window.count <= 0) throw std::invalid_argument("surrogate_moments: empty window");
  const int k = window.count;
  std::vector<double> s(k), d(k);
  sample_pulse_window(spec, window.k_lo, k, tau_hat, s.data());
  pulse_derivative_window(spec, window.k_lo, k, tau_hat, d.data());
  GaussianSurrogate out;
  out.mean.resize(2 * k);
  out.q.resize(2 * k);
  const double root_e = std::sqrt(spec.E);
  for (int i = 0; i < k; ++i) {
    out.mean(i) = root_e * alpha_hat.real() * s[i];
    out.mean(k + i) = root_e * alpha_hat.imag() * s[i];
    out.q(i) = alpha_hat.real() * d[i];
    out.q(k + i) = alpha_hat.imag() * d[i];
  }
  out.e_crb = spec.E * crb_tau;
  out.noise_var = noise_var;
  return out;
}

KLTBasis klt(const GaussianSurrogate& surrogate) {
  const Eigen::MatrixXd cov = surrogate.covariance();
  if (!cov.isApprox(cov.transpose(), 1e-12))
    throw std::invalid_argument("klt: covariance not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  const Eigen::Index n = cov.rows();
  KLTBasis basis;
  basis.U.resize(n, n);
  basis.gamma.resize(n);
  // Eigen sorts ascending; flip to descending
  for (Eigen::Index j = 0; j < n; ++j) {
    basis.gamma(j) = es.eigenvalues()(n - 1 - j);
    basis.U.col(j) = es.eigenvectors().col(n - 1 - j);
  }
  return basis;
}

ScalarCodebook lloyd_codebook(double mean, double variance, int bits) {
  check_bits(bits);
  if (!(variance > 0.0)) throw std::invalid_argument("lloyd_codebook: variance must be positive");
  const int m = 1 << bits;
  // standard-normal fixed point, affine-mapped at the end
  std::vector<double> levels(m);
  for (int i = 0; i < m; ++i) levels[i] = norm_quantile((i + 0.5) / m);
  double prev_dist = std::numeric_limits<double>::infinity();
  std::vector<double> bnd;
  for (int iter = 0; iter < 200; ++iter) {
    bnd = midpoints(levels);
    double dist = 0.0;
    for (int i = 0; i < m; ++i) {
      const double a = (i == 0) ? -std::numeric_limits<double>::infinity() : bnd[i - 1];
      const double b = (i == m - 1) ? std::numeric_limits<double>::infinity() : bnd[i];
      dist += region_distortion(a, b, levels[i]);
      levels[i] = truncated_centroid(a, b);
    }
    if (prev_dist - dist < 1e-9 * std::max(dist, 1e-300)) break;
    prev_dist = dist;
  }
  ScalarCodebook cb;
  cb.mean = mean;
  cb.variance = variance;
  cb.bits = bits;
  const double sigma = std::sqrt(variance);
  cb.levels.resize(m);
  for (int i = 0; i < m; ++i) cb.levels[i] = mean + sigma * levels[i];
  cb.boundaries = midpoints(cb.levels);
  return cb;
}

ScalarCodebook uniform_codebook(double mean, double variance, int bits, double span) {
  check_bits(bits);
  if (!(variance > 0.0)) throw std::invalid_argument("uniform_codebook: variance must be positive");
  const int m = 1 << bits;
  ScalarCodebook cb;
  cb.mean = mean;
  cb.variance = variance;
  cb.bits = bits;
  const double sigma = std::sqrt(variance);
  cb.levels.resize(m);
  for (int i = 0; i < m; ++i)
    cb.levels[i] = mean + sigma * (-span + 2.0 * span * (i + 0.5) / m);
  cb.boundaries = midpoints(cb.levels);
  return cb;
}

std::size_t quantize(double value, const ScalarCodebook& cb) {
  if (cb.levels.empty()) throw std::invalid_argument("quantize: empty codebook");
  return static_cast<std::size_t>(
      std::lower_bound(cb.boundaries.begin(), cb.boundaries.end(), value) -
      cb.boundaries.begin());
}

double dequantize(std::size_t index, const ScalarCodebook& cb) {
  if (index >= cb.levels.size()) throw std::out_of_range("dequantize: index out of range");
  return cb.levels[index];
}

double codebook_distortion(const ScalarCodebook& cb) {
  const double sigma = std::sqrt(cb.variance);
  double dist = 0.0;
  const std::size_t m = cb.levels.size();
  for (std::size_t i = 0; i < m; ++i) {
    const double a = (i == 0) ? -std::numeric_limits<double>::infinity()
                              : (cb.boundaries[i - 1] - cb.mean) / sigma;
    const double b = (i == m - 1) ? std::numeric_limits<double>::infinity()
                                  : (cb.boundaries[i] - cb.mean) / sigma;
    dist += region_distortion(a, b, (cb.levels[i] - cb.mean) / sigma);
  }
  return cb.variance * dist;
}

double quant_noise_var(double gamma, int bits) {
  if (!(gamma > 0.0)) throw std::invalid_argument("quant_noise_var: gamma must be positive");
  if (bits < 0) throw std::invalid_argument("quant_noise_var: negative bits");
  if (bits == 0) return kZeroBitSentinel * gamma;
  return gamma / (std::ldexp(1.0, 2 * bits) - 1.0);
}

double crb_prime(const BitAllocation& alloc, const KLTBasis& basis,
                 const GaussianSurrogate& surrogate,
                 std::complex<double> alpha_hat, double tau,
                 const ObservationWindow& window, const PulseSpec& spec) {
  const Eigen::Index n = basis.gamma.size();
  if (static_cast<Eigen::Index>(alloc.bits.size()) != n)
    throw std::invalid_argument("crb_prime: allocation size mismatch");
  Eigen::VectorXd eta(n);
  for (Eigen::Index j = 0; j < n; ++j)
    eta(j) = quant_noise_var(basis.gamma(j), alloc.bits[j]);
  Eigen::MatrixXd c = basis.U * eta.asDiagonal() * basis.U.transpose();
  c += 0.5 * surrogate.noise_var * Eigen::MatrixXd::Identity(n, n);
  c = 0.5 * (c + c.transpose());  // symmetrize before factorization
  const Eigen::VectorXd d = derivative_vector(alpha_hat, tau, window, spec);
  const double info = d.dot(c.ldlt().solve(d));
  return 1.0 / info;
}

EcrbEvaluator::EcrbEvaluator(const KLTBasis& basis, const GaussianSurrogate& surrogate,
                             std::complex<double> alpha_hat, double tau_hat,
                             double crb_tau_hat, const ObservationWindow& window,
                             const PulseSpec& spec)
    : gamma_(basis.gamma), half_noise_(0.5 * surrogate.noise_var) {
  if (!(crb_tau_hat >= 0.0)) throw std::invalid_argument("EcrbEvaluator: negative prior variance");
  const GaussHermite& gh = gauss_hermite_15();
  const int nodes = static_cast<int>(gh.nodes.size());
  const double scale = std::sqrt(2.0 * crb_tau_hat);
  node_vecs_.resize(gamma_.size(), nodes);
  weights_ = gh.weights;
  for (int i = 0; i < nodes; ++i) {
    const double tau = tau_hat + scale * gh.nodes(i);
    node_vecs_.col(i) = basis.U.transpose() *
                        derivative_vector(alpha_hat, tau, window, spec);
  }
}

double EcrbEvaluator::operator()(const std::vector<int>& bits) const {
  const Eigen::Index n = gamma_.size();
  if (static_cast<Eigen::Index>(bits.size()) != n)
    throw std::invalid_argument("EcrbEvaluator: allocation size mismatch");
  Eigen::VectorXd inv_denom(n);
  for (Eigen::Index j = 0; j < n; ++j)
    inv_denom(j) = 1.0 / (half_noise_ + quant_noise_var(gamma_(j), bits[j]));
  double acc = 0.0;
  for (int i = 0; i < node_vecs_.cols(); ++i) {
    double info = node_vecs_.col(i).cwiseAbs2().dot(inv_denom);
    if (!std::isfinite(info)) throw std::runtime_error("ecrb: non-finite integrand");
    // a node where the derivative vector vanishes carries an unbounded
    // bound; cap it so the quadrature stays finite
    info = std::max(info, 1e-300);
    acc += weights_(i) / info;
  }
  return acc;
}

double ecrb(const BitAllocation& alloc, const KLTBasis& basis,
            const GaussianSurrogate& surrogate, std::complex<double> alpha_hat,
            double tau_hat, double crb_tau_hat, const ObservationWindow& window,
            const PulseSpec& spec) {
  EcrbEvaluator eval(basis, surrogate, alpha_hat, tau_hat, crb_tau_hat, window, spec);
  return eval(alloc.bits);
}

BitAllocation greedy_allocate(int budget, const KLTBasis& basis,
                              const GaussianSurrogate& surrogate,
                              std::complex<double> alpha_hat, double tau_hat,
                              double crb_tau_hat, const ObservationWindow& window,
                              const PulseSpec& spec) {
  if (budget < 0) throw std::invalid_argument("greedy_allocate: negative budget");
  EcrbEvaluator eval(basis, surrogate, alpha_hat, tau_hat, crb_tau_hat, window, spec);
  const int dim = eval.dim();
  BitAllocation alloc;
  alloc.bits.assign(dim, 0);
  alloc.budget = budget;
  for (int step = 0; step < budget; ++step) {
    int best_j = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < dim; ++j) {
      ++alloc.bits[j];
      const double val = eval(alloc.bits);
      --alloc.bits[j];
      if (val < best) {
        best = val;
        best_j = j;
      }
    }
    ++alloc.bits[best_j];
  }
  return alloc;
}

QuantContext build_quant_context(double tau_hat, std::complex<double> alpha_hat,
                                 double crb_tau_hat, int capacity_bits,
                                 bool infinite_capacity, double noise_var,
                                 const PulseSpec& spec, QuantizerKind kind) {
  QuantContext ctx;
  ctx.kind = kind;
  ctx.window = observation_window(tau_hat, spec);
  ctx.surrogate = surrogate_moments(tau_hat, alpha_hat, crb_tau_hat, ctx.window,
                                    spec, noise_var);
  const int dim = 2 * ctx.window.count;
  if (infinite_capacity) {
    ctx.unquantized = true;
    ctx.basis.U = Eigen::MatrixXd::Identity(dim, dim);
    ctx.basis.gamma = ctx.surrogate.covariance().diagonal();
    ctx.alloc.bits.assign(dim, 0);
    ctx.alloc.budget = 0;
    return ctx;
  }
  if (kind == QuantizerKind::Klt) {
    ctx.basis = klt(ctx.surrogate);
    ctx.alloc = greedy_allocate(capacity_bits, ctx.basis, ctx.surrogate, alpha_hat,
                                tau_hat, crb_tau_hat, ctx.window, spec);
  } else {
    ctx.basis.U = Eigen::MatrixXd::Identity(dim, dim);
    ctx.basis.gamma = ctx.surrogate.covariance().diagonal();
    ctx.alloc.bits = even_split(capacity_bits, dim);
    ctx.alloc.budget = capacity_bits;
  }
  const Eigen::VectorXd comp_mean = ctx.basis.U.transpose() * ctx.surrogate.mean;
  ctx.codebooks.resize(dim);
  for (int j = 0; j < dim; ++j) {
    if (ctx.alloc.bits[j] < 1) continue;
    if (kind == QuantizerKind::Klt)
      ctx.codebooks[j] = lloyd_codebook(comp_mean(j), ctx.basis.gamma(j), ctx.alloc.bits[j]);
    else
      ctx.codebooks[j] = uniform_codebook(comp_mean(j), ctx.basis.gamma(j), ctx.alloc.bits[j]);
  }
  return ctx;
}

namespace {

void append_bits(std::vector<std::uint8_t>& buf, int& bit_count, std::size_t value,
                 int bits) {
  for (int b = bits - 1; b >= 0; --b) {
    const int pos = bit_count++;
    if (pos % 8 == 0) buf.push_back(0);
    if ((value >> b) & 1u) buf[pos / 8] |= static_cast<std::uint8_t>(1u << (7 - pos % 8));
  }
}

std::size_t read_bits(const std::vector<std::uint8_t>& buf, int& cursor, int bits) {
  std::size_t value = 0;
  for (int b = 0; b < bits; ++b) {
    const int pos = cursor++;
    const bool bit = (buf[pos / 8] >> (7 - pos % 8)) & 1u;
    value = (value << 1) | static_cast<std::size_t>(bit);
  }
  return value;
}

}  // namespace

ReceiverPayload encode_payload(const SampleBlock& coarse, const QuantContext& ctx) {
  ReceiverPayload payload;
  payload.tau_hat = 0.0;  // filled by the caller from the local estimate
  const SampleVector stacked = stack_window(coarse, ctx.window);
  if (ctx.unquantized) {
    payload.raw = stacked.v;
    return payload;
  }
  const Eigen::VectorXd comps =
      ctx.basis.U.transpose() *
      Eigen::Map<const Eigen::VectorXd>(stacked.v.data(), stacked.v.size());
  for (std::size_t j = 0; j < ctx.codebooks.size(); ++j) {
    const int bits = ctx.alloc.bits[j];
    if (bits < 1) continue;
    const std::size_t idx = quantize(comps(static_cast<Eigen::Index>(j)), ctx.codebooks[j]);
    append_bits(payload.index_bits, payload.bit_count, idx, bits);
  }
  return payload;
}

Eigen::VectorXd decode_components(const ReceiverPayload& payload,
                                  const QuantContext& ctx) {
  const int dim = 2 * ctx.window.count;
  if (ctx.unquantized) {
    if (static_cast<int>(payload.raw.size()) != dim)
      throw std::invalid_argument("decode_components: raw payload size mismatch");
    return Eigen::Map<const Eigen::VectorXd>(payload.raw.data(), dim);
  }
  if (payload.bit_count != ctx.alloc.budget)
    throw std::invalid_argument("decode_components: bit-stream length mismatch");
  const Eigen::VectorXd comp_mean = ctx.basis.U.transpose() * ctx.surrogate.mean;
  Eigen::VectorXd comps(dim);
  int cursor = 0;
  for (int j = 0; j < dim; ++j) {
    const int bits = ctx.alloc.bits[j];
    if (bits < 1) {
      comps(j) = comp_mean(j);  // untransmitted component: prior mean
      continue;
    }
    comps(j) = dequantize(read_bits(payload.index_bits, cursor, bits), ctx.codebooks[j]);
  }
  return comps;
}

}  // namespace coopsense
