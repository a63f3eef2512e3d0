#include "coopsense/experiment.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "coopsense/local_estimation.hpp"
#include "coopsense/signalgen.hpp"

namespace coopsense {

std::string Capacity::str() const {
  return infinite ? "inf" : std::to_string(bits);
}

void ExperimentConfig::validate() const {
  if (trials < 1) throw std::invalid_argument("config: trials must be >= 1");
  if (rsnr_db.empty()) throw std::invalid_argument("config: rsnr list empty");
  if (capacities.empty()) throw std::invalid_argument("config: capacity list empty");
  for (const Capacity& c : capacities)
    if (!c.infinite && c.bits < 0) throw std::invalid_argument("config: capacity must be >= 0");
  if (topology.n_receivers < 1) throw std::invalid_argument("config: n_receivers must be >= 1");
  if (std::abs(Ts - 1.0 / (2.0 * B)) > 1e-15)
    throw std::invalid_argument("config: Ts must equal 1/(2B)");
  if (!(T_p > 0.0)) throw std::invalid_argument("config: T_p must be positive");
  pulse(1.0).validate();
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return d;
  } catch (...) {
    throw std::invalid_argument("config: bad value for " + key + ": " + v);
  }
}

long parse_long(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long d = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return d;
  } catch (...) {
    throw std::invalid_argument("config: bad value for " + key + ": " + v);
  }
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: expected key=value, got: " + line);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "topology") {
      if (value == "circular") cfg.topology.kind = TopologyKind::Circular;
      else if (value == "linear") cfg.topology.kind = TopologyKind::Linear;
      else throw std::invalid_argument("config: unknown topology: " + value);
    } else if (key == "n_receivers") {
      cfg.topology.n_receivers = static_cast<int>(parse_long(key, value));
    } else if (key == "radius") {
      cfg.topology.radius = parse_double(key, value);
    } else if (key == "spacing") {
      cfg.topology.spacing = parse_double(key, value);
    } else if (key == "tx_standoff") {
      cfg.topology.tx_standoff = parse_double(key, value);
    } else if (key == "target_standoff") {
      cfg.topology.target_standoff = parse_double(key, value);
    } else if (key == "rsnr") {
      cfg.rsnr_db.clear();
      for (const std::string& v : split_csv(value)) cfg.rsnr_db.push_back(parse_double(key, v));
    } else if (key == "capacity") {
      cfg.capacities.clear();
      for (const std::string& v : split_csv(value)) {
        if (v == "inf") cfg.capacities.push_back({true, 0});
        else cfg.capacities.push_back({false, static_cast<int>(parse_long(key, v))});
      }
    } else if (key == "quantizer") {
      if (value == "klt") cfg.quantizer = QuantizerKind::Klt;
      else if (value == "uniform") cfg.quantizer = QuantizerKind::Uniform;
      else throw std::invalid_argument("config: unknown quantizer: " + value);
    } else if (key == "design") {
      if (value == "advanced") cfg.design = DesignMode::Advanced;
      else if (value == "baseline") cfg.design = DesignMode::Baseline;
      else if (value == "both") cfg.design = DesignMode::Both;
      else throw std::invalid_argument("config: unknown design: " + value);
    } else if (key == "trials") {
      cfg.trials = static_cast<int>(parse_long(key, value));
    } else if (key == "master_seed") {
      cfg.master_seed = static_cast<std::uint64_t>(parse_long(key, value));
    } else if (key == "T") {
      cfg.T = parse_double(key, value);
    } else if (key == "Ts") {
      cfg.Ts = parse_double(key, value);
    } else if (key == "Tc") {
      cfg.Tc = parse_double(key, value);
    } else if (key == "Td") {
      cfg.Td = parse_double(key, value);
    } else if (key == "fc") {
      cfg.fc = parse_double(key, value);
    } else if (key == "B") {
      cfg.B = parse_double(key, value);
    } else if (key == "T_p") {
      cfg.T_p = parse_double(key, value);
    } else {
      throw std::invalid_argument("config: unknown key: " + key);
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string Condition::key() const {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "rsnr=%.6g|cap=%s|quant=%s", rsnr_db,
                capacity.str().c_str(), quantizer == QuantizerKind::Klt ? "klt" : "uniform");
  return buf;
}

ConditionSetup make_condition_setup(const ExperimentConfig& cfg, double rsnr_db) {
  ConditionSetup setup;
  setup.scene = make_scene(cfg.topology, cfg.fc);
  const Vec2 nominal = nominal_target(cfg.topology);
  double rho_sq_sum = 0.0;
  for (std::size_t n = 0; n < setup.scene.n_receivers(); ++n) {
    const double rho = amplitude_coefficient(setup.scene, n, nominal);
    rho_sq_sum += rho * rho;
  }
  // Received SNR per receiver: average signal power over one pulse
  // repetition interval divided by the noise power, SNR_n = E rho_n^2 /
  // (T_p sigma^2). Solve sum_n SNR_n = RSNR for E (sigma^2 = 1).
  const double rsnr_lin = std::pow(10.0, rsnr_db / 10.0);
  setup.energy = rsnr_lin * cfg.T_p / rho_sq_sum;
  for (std::size_t n = 0; n < setup.scene.n_receivers(); ++n)
    setup.supports.push_back(delay_support(setup.scene, cfg.topology, n));
  return setup;
}

// Pulses coherently integrated per processing interval at each receiver
// (the reflection coefficient is static over 16/PRF = 160 us). The local
// estimate and the backhauled window come from different intervals, so
// their noise realizations are independent.
constexpr int kCpiPulses = 16;

TrialRecord run_trial(const ExperimentConfig& cfg, const Condition& cond,
                      const ConditionSetup& setup, std::uint64_t trial,
                      bool run_advanced, bool run_baseline) {
  TrialRecord rec;
  rec.index = trial;
  Rng rng(trial_seed(cfg.master_seed, fnv1a(cond.key()), trial));
  const PulseSpec spec = cfg.pulse(setup.energy);
  const Scene& scene = setup.scene;
  const std::size_t n_rx = scene.n_receivers();

  rec.truth = sample_target(cfg.topology, rng).pos;

  std::vector<LocalEstimate> estimates(n_rx);
  std::vector<SampleBlock> blocks(n_rx);
  for (std::size_t n = 0; n < n_rx; ++n) {
    ChannelRealization chan;
    chan.xi = draw_reflection(rng);
    chan.rho = amplitude_coefficient(scene, n, rec.truth);
    chan.alpha = chan.rho * chan.xi;
    chan.tau = bistatic_delay(scene, n, rec.truth);
    chan.noise_var = 1.0 / kCpiPulses;
    rec.snr_db.push_back(
        10.0 * std::log10(spec.E * chan.rho * chan.rho / (cfg.T_p * chan.noise_var)));

    const DelaySupport& sup = setup.supports[n];
    const long k_lo = static_cast<long>(std::floor((sup.tau_min - 8.0 * spec.T) / spec.Ts));
    const long k_hi = static_cast<long>(std::ceil((sup.tau_max + 8.0 * spec.T) / spec.Ts));
    const SampleBlock est_block = synthesize_received(
        spec, chan, k_lo, static_cast<std::size_t>(k_hi - k_lo + 1), rng);
    estimates[n] = estimate_delay_coeff(
        est_block, spec, chan.noise_var,
        {sup.tau_min - 3.0 * spec.T, sup.tau_max + 3.0 * spec.T});
    // the quantized window comes from the next pulse of the train, so its
    // noise is independent of the delay/coefficient estimate
    blocks[n] = synthesize_received(spec, chan, k_lo,
                                    static_cast<std::size_t>(k_hi - k_lo + 1), rng);
  }

  if (run_advanced) {
    try {
      std::vector<FcReceiver> fc(n_rx);
      for (std::size_t n = 0; n < n_rx; ++n) {
        QuantContext ctx = build_quant_context(
            estimates[n].tau_hat, estimates[n].alpha_hat, estimates[n].crb_tau_hat,
            cond.capacity.bits, cond.capacity.infinite, 1.0 / kCpiPulses, spec,
            cond.quantizer);
        ReceiverPayload payload = encode_payload(blocks[n], ctx);
        payload.tau_hat = estimates[n].tau_hat;
        payload.alpha_hat = estimates[n].alpha_hat;
        fc[n] = make_fc_receiver(payload, ctx, estimates[n].crb_tau_hat);
      }
      const FusionResult res =
          estimate_location(Design::Advanced, fc, scene, spec, cfg.topology);
      rec.theta_advanced = res.theta;
      const double dx = res.theta.x - rec.truth.x, dy = res.theta.y - rec.truth.y;
      rec.sqerr_advanced = dx * dx + dy * dy;
      rec.advanced_ok = !res.clamped;
    } catch (const std::exception&) {
      rec.advanced_ok = false;
    }
  }

  if (run_baseline) {
    try {
      std::vector<FcReceiver> fc(n_rx);
      for (std::size_t n = 0; n < n_rx; ++n) {
        fc[n].payload.tau_hat = estimates[n].tau_hat;
        fc[n].payload.alpha_hat = estimates[n].alpha_hat;
        fc[n].crb_tau_hat = estimates[n].crb_tau_hat;
      }
      const FusionResult res =
          estimate_location(Design::Baseline, fc, scene, spec, cfg.topology);
      rec.theta_baseline = res.theta;
      const double dx = res.theta.x - rec.truth.x, dy = res.theta.y - rec.truth.y;
      rec.sqerr_baseline = dx * dx + dy * dy;
      rec.baseline_ok = !res.clamped;
    } catch (const std::exception&) {
      rec.baseline_ok = false;
    }
  }

  return rec;
}

namespace {

struct Stats {
  double mean = 0.0;
  double stderr_ = 0.0;
  int n = 0;
};

Stats mean_stderr(const std::vector<double>& xs) {
  Stats st;
  st.n = static_cast<int>(xs.size());
  if (st.n == 0) return st;
  double sum = 0.0;
  for (double x : xs) sum += x;
  st.mean = sum / st.n;
  if (st.n > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - st.mean) * (x - st.mean);
    st.stderr_ = std::sqrt(ss / (st.n - 1) / st.n);
  }
  return st;
}

}  // namespace

std::vector<SummaryRow> run_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  const bool run_adv = cfg.design != DesignMode::Baseline;
  const bool run_base = cfg.design != DesignMode::Advanced;
  const std::string topo_name =
      cfg.topology.kind == TopologyKind::Circular ? "circular" : "linear";

  std::vector<SummaryRow> rows;
  for (double rsnr : cfg.rsnr_db) {
    const ConditionSetup setup = make_condition_setup(cfg, rsnr);
    for (const Capacity& cap : cfg.capacities) {
      const Condition cond{rsnr, cap, cfg.quantizer};
      std::vector<double> adv_errs, base_errs, diffs;
      int adv_excluded = 0, base_excluded = 0;
      for (int t = 0; t < cfg.trials; ++t) {
        const TrialRecord rec = run_trial(cfg, cond, setup,
                                          static_cast<std::uint64_t>(t), run_adv, run_base);
        if (run_adv) {
          if (rec.advanced_ok) adv_errs.push_back(rec.sqerr_advanced);
          else ++adv_excluded;
        }
        if (run_base) {
          if (rec.baseline_ok) base_errs.push_back(rec.sqerr_baseline);
          else ++base_excluded;
        }
        if (run_adv && run_base && rec.advanced_ok && rec.baseline_ok)
          diffs.push_back(rec.sqerr_advanced - rec.sqerr_baseline);
      }
      const Stats adv = mean_stderr(adv_errs);
      const Stats base = mean_stderr(base_errs);
      const Stats diff = mean_stderr(diffs);
      std::optional<double> pg;
      if (run_adv && run_base && adv.mean > 0.0) pg = base.mean / adv.mean;
      const double overhead =
          cap.infinite ? std::numeric_limits<double>::infinity() : cap.bits / cfg.T_p;
      if (run_adv) {
        SummaryRow row{topo_name, rsnr, cap, cfg.quantizer, Design::Advanced,
                       adv.mean, adv.stderr_, pg, overhead, cfg.trials, adv_excluded};
        if (run_base && !diffs.empty()) {
          row.diff_mean = diff.mean;
          row.diff_stderr = diff.stderr_;
        }
        rows.push_back(row);
      }
      if (run_base) {
        rows.push_back({topo_name, rsnr, cap, cfg.quantizer, Design::Baseline,
                        base.mean, base.stderr_, pg, overhead, cfg.trials, base_excluded});
      }
    }
  }
  return rows;
}

void write_csv(std::ostream& os, const std::vector<SummaryRow>& rows) {
  os << "topology,rsnr_db,capacity_bits,quantizer,design,mmse_m2,stderr_m2,pg,"
        "overhead_bps,trials,excluded\n";
  char buf[64];
  auto fmt = [&](double v) -> std::string {
    if (std::isinf(v)) return "inf";
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
  };
  for (const SummaryRow& r : rows) {
    os << r.topology << ',' << fmt(r.rsnr_db) << ',' << r.capacity.str() << ','
       << (r.quantizer == QuantizerKind::Klt ? "klt" : "uniform") << ','
       << (r.design == Design::Advanced ? "advanced" : "baseline") << ','
       << fmt(r.mmse_m2) << ',' << fmt(r.stderr_m2) << ','
       << (r.pg ? fmt(*r.pg) : "") << ',' << fmt(r.overhead_bps) << ','
       << r.trials << ',' << r.excluded << '\n';
  }
}

}  // namespace coopsense
