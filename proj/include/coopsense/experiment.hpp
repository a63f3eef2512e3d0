#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "coopsense/fusion.hpp"
#include "coopsense/geometry.hpp"
#include "coopsense/quantization.hpp"

namespace coopsense {

struct Capacity {
  bool infinite = false;
  int bits = 0;

  std::string str() const;
};

enum class DesignMode { Advanced, Baseline, Both };

struct ExperimentConfig {
  TopologySpec topology;
  std::vector<double> rsnr_db = {-1.0};
  std::vector<Capacity> capacities = {{false, 10}};
  QuantizerKind quantizer = QuantizerKind::Klt;
  DesignMode design = DesignMode::Both;
  int trials = 1000;
  std::uint64_t master_seed = 1;
  // pulse / radio parameters (§V defaults)
  double T = 2e-8;
  double Ts = 1e-8;
  double Tc = 6e-8;
  double Td = 8e-8;
  double fc = 3.55;     // GHz
  double B = 5e7;       // Hz
  double T_p = 1e-5;    // pulse repetition interval [s]

  void validate() const;  // throws std::invalid_argument
  PulseSpec pulse(double energy) const { return {T, Ts, Tc, Td, energy}; }
};

// Flat key=value text; unknown keys are errors.
ExperimentConfig parse_config_file(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text);

struct Condition {
  double rsnr_db;
  Capacity capacity;
  QuantizerKind quantizer;

  std::string key() const;  // hashed into the per-trial seed
};

struct TrialRecord {
  std::uint64_t index = 0;
  Vec2 truth;
  std::optional<Vec2> theta_advanced;
  std::optional<Vec2> theta_baseline;
  double sqerr_advanced = 0.0;
  double sqerr_baseline = 0.0;
  bool advanced_ok = false;
  bool baseline_ok = false;
  std::vector<double> snr_db;
};

// Scene-level constants shared by all trials of a condition.
struct ConditionSetup {
  Scene scene;
  double energy;                       // calibrated transmit energy
  std::vector<DelaySupport> supports;  // per receiver
};

ConditionSetup make_condition_setup(const ExperimentConfig& cfg, double rsnr_db);

TrialRecord run_trial(const ExperimentConfig& cfg, const Condition& cond,
                      const ConditionSetup& setup, std::uint64_t trial,
                      bool run_advanced, bool run_baseline);

struct SummaryRow {
  std::string topology;
  double rsnr_db = 0.0;
  Capacity capacity;
  QuantizerKind quantizer = QuantizerKind::Klt;
  Design design = Design::Advanced;
  double mmse_m2 = 0.0;
  double stderr_m2 = 0.0;
  std::optional<double> pg;
  double overhead_bps = 0.0;
  int trials = 0;
  int excluded = 0;
  // paired-difference stats (advanced - baseline squared errors); set on
  // advanced rows when both designs ran, used by comparative checks
  std::optional<double> diff_mean;
  std::optional<double> diff_stderr;
};

std::vector<SummaryRow> run_sweep(const ExperimentConfig& cfg);

void write_csv(std::ostream& os, const std::vector<SummaryRow>& rows);

}  // namespace coopsense
