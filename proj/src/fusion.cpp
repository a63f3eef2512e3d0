#include "coopsense/fusion.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace coopsense {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// stacked s_n(theta) in the KLT domain of the receiver's context
Eigen::VectorXd transformed_signal(const FcReceiver& r, double tau,
                                   const PulseSpec& spec) {
  const int k = r.ctx.window.count;
  std::vector<double> s(k);
  sample_pulse_window(spec, r.ctx.window.k_lo, k, tau, s.data());
  Eigen::VectorXd stacked(2 * k);
  const double root_e = std::sqrt(spec.E);
  const double ar = r.payload.alpha_hat.real();
  const double ai = r.payload.alpha_hat.imag();
  for (int i = 0; i < k; ++i) {
    stacked(i) = root_e * ar * s[i];
    stacked(k + i) = root_e * ai * s[i];
  }
  if (r.ctx.unquantized) return stacked;  // U = I
  return r.ctx.basis.U.transpose() * stacked;
}

}  // namespace

FcReceiver make_fc_receiver(const ReceiverPayload& payload, const QuantContext& ctx,
                            double crb_tau_hat) {
  FcReceiver r;
  r.payload = payload;
  r.ctx = ctx;
  r.crb_tau_hat = crb_tau_hat;
  r.components = decode_components(payload, ctx);
  const int dim = 2 * ctx.window.count;
  r.inv_var.resize(dim);
  for (int j = 0; j < dim; ++j) {
    const double eta =
        ctx.unquantized ? 0.0 : quant_noise_var(ctx.basis.gamma(j), ctx.alloc.bits[j]);
    r.inv_var(j) = 1.0 / (0.5 * ctx.surrogate.noise_var + eta);
  }
  return r;
}

Reconstruction reconstruct_samples(const ReceiverPayload& payload,
                                   const QuantContext& ctx) {
  const Eigen::VectorXd comps = decode_components(payload, ctx);
  const Eigen::VectorXd r = ctx.unquantized ? comps : (ctx.basis.U * comps).eval();
  Reconstruction out;
  out.r_tilde.v.assign(r.data(), r.data() + r.size());
  out.eta.resize(r.size());
  for (Eigen::Index j = 0; j < r.size(); ++j)
    out.eta(j) = ctx.unquantized ? 0.0 : quant_noise_var(ctx.basis.gamma(j), ctx.alloc.bits[j]);
  return out;
}

double loglik_advanced(Vec2 theta, std::span<const FcReceiver> receivers,
                       const Scene& scene, const PulseSpec& spec) {
  double ll = 0.0;
  for (std::size_t n = 0; n < receivers.size(); ++n) {
    const FcReceiver& r = receivers[n];
    const double tau = bistatic_delay(scene, n, theta);
    const Eigen::VectorXd s = transformed_signal(r, tau, spec);
    const Eigen::VectorXd diff = r.components - s;
    ll += -0.5 * diff.cwiseAbs2().dot(r.inv_var);
    const double dtau = r.payload.tau_hat - tau;
    ll += -dtau * dtau / (2.0 * r.crb_tau_hat);
  }
  return ll;
}

double loglik_baseline(Vec2 theta, std::span<const FcReceiver> receivers,
                       const Scene& scene) {
  double ll = 0.0;
  for (std::size_t n = 0; n < receivers.size(); ++n) {
    const FcReceiver& r = receivers[n];
    const double dtau = r.payload.tau_hat - bistatic_delay(scene, n, theta);
    ll += -dtau * dtau / (2.0 * r.crb_tau_hat);
  }
  return ll;
}

namespace {

struct Seed {
  Vec2 pos;
  double value;
};

// 2-D Nelder-Mead maximization with an infeasible barrier; stops when the
// simplex diameter drops below tol.
Vec2 nelder_mead(const std::function<double(Vec2)>& f, Vec2 start, double scale,
                 double tol) {
  struct Vert {
    Vec2 p;
    double v;
  };
  std::array<Vert, 3> s;
  s[0] = {start, f(start)};
  s[1] = {{start.x + scale, start.y}, f({start.x + scale, start.y})};
  s[2] = {{start.x, start.y + scale}, f({start.x, start.y + scale})};
  auto order = [&] {
    std::sort(s.begin(), s.end(), [](const Vert& a, const Vert& b) { return a.v > b.v; });
  };
  for (int iter = 0; iter < 400; ++iter) {
    order();
    const double diam = std::max(distance(s[0].p, s[1].p),
                                 std::max(distance(s[0].p, s[2].p), distance(s[1].p, s[2].p)));
    if (diam < tol) break;
    const Vec2 c{0.5 * (s[0].p.x + s[1].p.x), 0.5 * (s[0].p.y + s[1].p.y)};
    const Vec2 refl{2.0 * c.x - s[2].p.x, 2.0 * c.y - s[2].p.y};
    const double fr = f(refl);
    if (fr > s[0].v) {
      const Vec2 exp{3.0 * c.x - 2.0 * s[2].p.x, 3.0 * c.y - 2.0 * s[2].p.y};
      const double fe = f(exp);
      s[2] = (fe > fr) ? Vert{exp, fe} : Vert{refl, fr};
    } else if (fr > s[1].v) {
      s[2] = {refl, fr};
    } else {
      const Vec2 con{0.5 * (c.x + s[2].p.x), 0.5 * (c.y + s[2].p.y)};
      const double fc = f(con);
      if (fc > s[2].v) {
        s[2] = {con, fc};
      } else {
        for (int i = 1; i < 3; ++i) {
          s[i].p = {0.5 * (s[0].p.x + s[i].p.x), 0.5 * (s[0].p.y + s[i].p.y)};
          s[i].v = f(s[i].p);
        }
      }
    }
  }
  order();
  return s[0].p;
}

// Scaled residual vector whose half squared norm is the negated
// log-likelihood: one delay residual per receiver, plus the transform
// domain sample residuals for the advanced design.
struct ResidualModel {
  Design design;
  std::span<const FcReceiver> receivers;
  const Scene* scene;
  const PulseSpec* spec;

  int dim() const {
    int m = static_cast<int>(receivers.size());
    if (design == Design::Advanced)
      for (const FcReceiver& r : receivers) m += static_cast<int>(r.components.size());
    return m;
  }

  void eval(Vec2 theta, Eigen::VectorXd& out) const {
    int idx = 0;
    for (std::size_t n = 0; n < receivers.size(); ++n) {
      const FcReceiver& r = receivers[n];
      const double tau = bistatic_delay(*scene, n, theta);
      out(idx++) = (r.payload.tau_hat - tau) / std::sqrt(r.crb_tau_hat);
      if (design == Design::Advanced) {
        const Eigen::VectorXd s = transformed_signal(r, tau, *spec);
        for (Eigen::Index j = 0; j < s.size(); ++j)
          out(idx++) = (r.components(j) - s(j)) * std::sqrt(r.inv_var(j));
      }
    }
  }
};

// Levenberg-Marquardt on the residuals with a numerical Jacobian. The
// likelihood is a sum of narrow curved valleys (one per delay ellipse)
// and its global basin can be well under a meter wide when one receiver
// sits close to the target, so neither the coarse grid nor a simplex can
// land in it; a damped Gauss-Newton step reaches it from tens of meters
// away because the delay residuals are nearly linear at that scale.
Vec2 lm_polish(const ResidualModel& m, Vec2 start, bool fix_y) {
  const int dim = m.dim();
  const int np = fix_y ? 1 : 2;
  Eigen::VectorXd r0(dim), rp(dim), rm(dim);
  Vec2 p = start;
  m.eval(p, r0);
  double cost = 0.5 * r0.squaredNorm();
  if (!std::isfinite(cost)) return p;
  double lambda = 1e-3;
  const double h = 1e-5;
  for (int it = 0; it < 60; ++it) {
    Eigen::MatrixXd J(dim, np);
    for (int k = 0; k < np; ++k) {
      Vec2 pp = p, pm = p;
      (k == 0 ? pp.x : pp.y) += h;
      (k == 0 ? pm.x : pm.y) -= h;
      m.eval(pp, rp);
      m.eval(pm, rm);
      J.col(k) = (rp - rm) / (2.0 * h);
    }
    const Eigen::MatrixXd A = J.transpose() * J;
    const Eigen::VectorXd g = J.transpose() * r0;
    bool stepped = false;
    bool converged = false;
    for (int tries = 0; tries < 30; ++tries) {
      Eigen::MatrixXd damped = A;
      for (int k = 0; k < np; ++k) damped(k, k) += lambda * (A(k, k) + 1e-12);
      const Eigen::VectorXd delta = damped.ldlt().solve(g);
      Vec2 q = p;
      q.x -= delta(0);
      if (np > 1) q.y -= delta(1);
      m.eval(q, rp);
      const double trial_cost = 0.5 * rp.squaredNorm();
      if (std::isfinite(trial_cost) && trial_cost < cost) {
        p = q;
        r0 = rp;
        cost = trial_cost;
        lambda = std::max(lambda * 0.3, 1e-12);
        stepped = true;
        converged = delta.norm() < 1e-6;
        break;
      }
      lambda *= 10.0;
      if (lambda > 1e12) break;
    }
    if (!stepped || converged) break;
  }
  return p;
}

double golden_max(const std::function<double(double)>& f, double a, double b,
                  double tol) {
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tol) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = f(x1);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

FusionResult estimate_location(Design design, std::span<const FcReceiver> receivers,
                               const Scene& scene, const PulseSpec& spec,
                               const TopologySpec& topo) {
  if (receivers.empty()) throw std::invalid_argument("estimate_location: no receivers");

  auto objective = [&](Vec2 theta) {
    return design == Design::Advanced ? loglik_advanced(theta, receivers, scene, spec)
                                      : loglik_baseline(theta, receivers, scene);
  };

  FusionResult result;
  result.design = design;
  result.ambiguous = (receivers.size() == 1);

  const ResidualModel model{design, receivers, &scene, &spec};
  std::vector<Seed> seeds;
  if (topo.kind == TopologyKind::Circular) {
    const double r_max = 1.1 * topo.radius;
    auto feasible = [&](Vec2 p) { return std::hypot(p.x, p.y) <= r_max; };
    auto guarded = [&](Vec2 p) { return feasible(p) ? objective(p) : -kInf; };
    const int g = 50;
    for (int i = 0; i < g; ++i) {
      for (int j = 0; j < g; ++j) {
        const Vec2 p{-r_max + 2.0 * r_max * (i + 0.5) / g,
                     -r_max + 2.0 * r_max * (j + 0.5) / g};
        if (!feasible(p)) continue;
        seeds.push_back({p, objective(p)});
      }
    }
    if (seeds.empty()) throw std::runtime_error("estimate_location: empty search region");
    std::partial_sort(seeds.begin(), seeds.begin() + std::min<std::size_t>(5, seeds.size()),
                      seeds.end(), [](const Seed& a, const Seed& b) { return a.value > b.value; });
    const double cell = 2.0 * r_max / g;
    Vec2 best_p = seeds[0].pos;
    double best_v = -kInf;
    for (std::size_t i = 0; i < std::min<std::size_t>(5, seeds.size()); ++i) {
      // polish the raw seed and the simplex output separately: the raw
      // seed step can jump over intermediate stationary points that trap
      // the simplex, while the simplex handles surfaces where the
      // linearization from a cell away is poor
      const std::array<Vec2, 2> starts{
          lm_polish(model, seeds[i].pos, false),
          lm_polish(model, nelder_mead(guarded, seeds[i].pos, cell, 1e-3), false)};
      for (Vec2 p : starts) {
        double v = guarded(p);
        if (!std::isfinite(v)) {
          // the polish stepped outside the search region; pull back to the
          // boundary along the same direction
          const double r = std::hypot(p.x, p.y);
          p = {p.x * 0.999 * r_max / r, p.y * 0.999 * r_max / r};
          v = guarded(p);
        }
        if (v > best_v) {
          best_v = v;
          best_p = p;
        }
      }
    }
    result.theta = best_p;
    result.loglik = best_v;
    if (std::hypot(best_p.x, best_p.y) > 0.999 * r_max) result.clamped = true;
  } else {
    const double h = 1.1 * topo.target_halfspan();
    const double y = topo.target_standoff;
    auto fx = [&](double x) { return objective({x, y}); };
    const int g = 2500;
    for (int i = 0; i < g; ++i) {
      const double x = -h + 2.0 * h * (i + 0.5) / g;
      seeds.push_back({{x, y}, fx(x)});
    }
    std::partial_sort(seeds.begin(), seeds.begin() + 5, seeds.end(),
                      [](const Seed& a, const Seed& b) { return a.value > b.value; });
    const double cell = 2.0 * h / g;
    double best_x = seeds[0].pos.x;
    double best_v = -kInf;
    for (int i = 0; i < 5; ++i) {
      const double lo = std::max(-h, seeds[i].pos.x - cell);
      const double hi = std::min(h, seeds[i].pos.x + cell);
      double x = golden_max(fx, lo, hi, 1e-3);
      x = std::clamp(lm_polish(model, {x, y}, true).x, -h, h);
      const double v = fx(x);
      if (v > best_v) {
        best_v = v;
        best_x = x;
      }
    }
    result.theta = {best_x, y};
    result.loglik = best_v;
    if (std::abs(best_x) > 0.999 * h) result.clamped = true;
  }
  return result;
}

}  // namespace coopsense
