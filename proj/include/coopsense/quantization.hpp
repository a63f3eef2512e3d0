#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <vector>

#include "coopsense/signalgen.hpp"
#include "coopsense/waveform.hpp"

namespace coopsense {

// Real stacking of a complex window: real parts over K_n, then imaginary
// parts over K_n (length 2|K_n|).
struct SampleVector {
  std::vector<double> v;
};

SampleVector stack_window(const SampleBlock& coarse, const ObservationWindow& window);

// Gaussian model of the stacked window induced by the first-order
// expansion of the received signal at tau_hat.
struct GaussianSurrogate {
  Eigen::VectorXd mean;  // 2K
  Eigen::VectorXd q;     // 2K derivative vector (no sqrt(E) factor)
  double e_crb = 0.0;    // E * CRB_tau scaling of the rank-1 term
  double noise_var = 0.0;

  // e_crb * q q^T + (noise_var/2) I
  Eigen::MatrixXd covariance() const;
};

GaussianSurrogate surrogate_moments(double tau_hat, std::complex<double> alpha_hat,
                                    double crb_tau, const ObservationWindow& window,
                                    const PulseSpec& spec, double noise_var);

struct KLTBasis {
  Eigen::MatrixXd U;       // orthonormal, columns are eigenvectors
  Eigen::VectorXd gamma;   // eigenvalues, descending
};

KLTBasis klt(const GaussianSurrogate& surrogate);

// Scalar quantizer for a Gaussian source: levels ascending, boundaries the
// midpoints between adjacent levels.
struct ScalarCodebook {
  std::vector<double> levels;
  std::vector<double> boundaries;
  double mean = 0.0;
  double variance = 1.0;
  int bits = 0;
};

// Lloyd fixed point for N(mean, variance); deterministic quantile-spaced
// initialization, closed-form truncated-Gaussian centroids.
ScalarCodebook lloyd_codebook(double mean, double variance, int bits);

// Equally spaced levels covering mean +- span*sqrt(variance).
ScalarCodebook uniform_codebook(double mean, double variance, int bits,
                                double span = 4.0);

std::size_t quantize(double value, const ScalarCodebook& cb);
double dequantize(std::size_t index, const ScalarCodebook& cb);

// Mean distortion of the codebook under its own Gaussian source (closed form).
double codebook_distortion(const ScalarCodebook& cb);

// Quantization-noise variance matching the mutual-information budget:
// X >= 1: gamma / (2^(2X) - 1);  X = 0: sentinel 1e6 * gamma.
double quant_noise_var(double gamma, int bits);

inline constexpr double kZeroBitSentinel = 1e6;

struct BitAllocation {
  std::vector<int> bits;
  int budget = 0;
};

// CRB of the delay from the quantized window at candidate delay tau.
double crb_prime(const BitAllocation& alloc, const KLTBasis& basis,
                 const GaussianSurrogate& surrogate,
                 std::complex<double> alpha_hat, double tau,
                 const ObservationWindow& window, const PulseSpec& spec);

// Gauss-Hermite (15 nodes) average of crb_prime over
// tau ~ N(tau_hat, crb_tau_hat).
double ecrb(const BitAllocation& alloc, const KLTBasis& basis,
            const GaussianSurrogate& surrogate, std::complex<double> alpha_hat,
            double tau_hat, double crb_tau_hat, const ObservationWindow& window,
            const PulseSpec& spec);

// Caches the per-node KLT-domain derivative vectors so candidate
// allocations are evaluated in O(2K) each.
class EcrbEvaluator {
 public:
  EcrbEvaluator(const KLTBasis& basis, const GaussianSurrogate& surrogate,
                std::complex<double> alpha_hat, double tau_hat,
                double crb_tau_hat, const ObservationWindow& window,
                const PulseSpec& spec);

  double operator()(const std::vector<int>& bits) const;
  int dim() const { return static_cast<int>(gamma_.size()); }

 private:
  Eigen::VectorXd gamma_;
  double half_noise_;
  Eigen::MatrixXd node_vecs_;  // dim x nodes: U^T d(tau_i)
  Eigen::VectorXd weights_;    // normalized quadrature weights
};

// Greedy descent on the ECRB, one bit per step, lowest index on ties.
BitAllocation greedy_allocate(int budget, const KLTBasis& basis,
                              const GaussianSurrogate& surrogate,
                              std::complex<double> alpha_hat, double tau_hat,
                              double crb_tau_hat, const ObservationWindow& window,
                              const PulseSpec& spec);

// ---- codec shared by receiver and fusion center ----

enum class QuantizerKind { Klt, Uniform };

// Everything both sides derive deterministically from (tau_hat, alpha_hat,
// C_n, sigma_n^2, PulseSpec). Codebooks are never transmitted.
struct QuantContext {
  ObservationWindow window;
  GaussianSurrogate surrogate;
  KLTBasis basis;  // identity for the uniform (raw-domain) quantizer
  BitAllocation alloc;
  std::vector<ScalarCodebook> codebooks;  // empty entries for 0-bit components
  QuantizerKind kind = QuantizerKind::Klt;
  bool unquantized = false;  // infinite capacity: codec bypassed
};

QuantContext build_quant_context(double tau_hat, std::complex<double> alpha_hat,
                                 double crb_tau_hat, int capacity_bits,
                                 bool infinite_capacity, double noise_var,
                                 const PulseSpec& spec, QuantizerKind kind);

// Packed indices: component j contributes exactly X_j bits, ascending j,
// MSB first.
struct ReceiverPayload {
  double tau_hat = 0.0;
  std::complex<double> alpha_hat;
  std::vector<std::uint8_t> index_bits;
  int bit_count = 0;
  // infinite-capacity mode ships the raw stacked window instead of bits
  std::vector<double> raw;
};

ReceiverPayload encode_payload(const SampleBlock& coarse, const QuantContext& ctx);

// Receiver-side view of what the FC will reconstruct (KLT-domain values).
Eigen::VectorXd decode_components(const ReceiverPayload& payload,
                                  const QuantContext& ctx);

}  // namespace coopsense
