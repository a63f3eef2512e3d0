#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "coopsense/geometry.hpp"
#include "coopsense/quantization.hpp"

namespace coopsense {

enum class Design { Advanced, Baseline };

// Per-receiver state the fusion center holds after decoding one payload.
// The quantization context is rebuilt deterministically from the shared
// (tau_hat, alpha_hat, C_n, sigma_n^2, PulseSpec) knowledge.
struct FcReceiver {
  ReceiverPayload payload;
  QuantContext ctx;
  double crb_tau_hat = 0.0;
  Eigen::VectorXd components;  // KLT-domain reconstruction U^T r~
  Eigen::VectorXd inv_var;     // 1 / (sigma^2/2 + eta_j)
};

FcReceiver make_fc_receiver(const ReceiverPayload& payload, const QuantContext& ctx,
                            double crb_tau_hat);

// r~ = U * components; eta per component (Eq. 17 model, sentinel at 0 bits).
struct Reconstruction {
  SampleVector r_tilde;
  Eigen::VectorXd eta;
};

Reconstruction reconstruct_samples(const ReceiverPayload& payload,
                                   const QuantContext& ctx);

// Sample term + delay term, theta-independent constants dropped.
double loglik_advanced(Vec2 theta, std::span<const FcReceiver> receivers,
                       const Scene& scene, const PulseSpec& spec);

// Delay term only.
double loglik_baseline(Vec2 theta, std::span<const FcReceiver> receivers,
                       const Scene& scene);

struct FusionResult {
  Vec2 theta;
  Design design = Design::Advanced;
  double loglik = 0.0;
  bool clamped = false;    // optimum hit the inflated support boundary
  bool ambiguous = false;  // single receiver: non-unique along the ellipse
};

// Coarse grid over the (10%-inflated) target support followed by
// derivative-free refinement of the top seeds to 1e-3 m.
FusionResult estimate_location(Design design, std::span<const FcReceiver> receivers,
                               const Scene& scene, const PulseSpec& spec,
                               const TopologySpec& topo);

}  // namespace coopsense
