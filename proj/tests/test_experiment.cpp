#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>

#include "coopsense/experiment.hpp"

using namespace coopsense;

TEST_CASE("config text parses every supported key") {
  const ExperimentConfig cfg = parse_config_text(
      "# comment\n"
      "topology = linear\n"
      "n_receivers = 4\n"
      "spacing = 80\n"
      "rsnr = -3, 0, 2.5\n"
      "capacity = 8, inf\n"
      "quantizer = uniform\n"
      "design = advanced\n"
      "trials = 42\n"
      "master_seed = 9\n");
  CHECK(cfg.topology.kind == TopologyKind::Linear);
  CHECK(cfg.topology.n_receivers == 4);
  CHECK(cfg.topology.spacing == 80.0);
  REQUIRE(cfg.rsnr_db.size() == 3);
  CHECK(cfg.rsnr_db[1] == 0.0);
  CHECK(cfg.rsnr_db[2] == 2.5);
  REQUIRE(cfg.capacities.size() == 2);
  CHECK_FALSE(cfg.capacities[0].infinite);
  CHECK(cfg.capacities[0].bits == 8);
  CHECK(cfg.capacities[1].infinite);
  CHECK(cfg.quantizer == QuantizerKind::Uniform);
  CHECK(cfg.design == DesignMode::Advanced);
  CHECK(cfg.trials == 42);
  CHECK(cfg.master_seed == 9);
}

TEST_CASE("unknown or malformed config entries are rejected") {
  CHECK_THROWS(parse_config_text("bogus_key = 1\n"));
  CHECK_THROWS(parse_config_text("trials fifty\n"));
  CHECK_THROWS(parse_config_text("trials = -2\n"));
  CHECK_THROWS(parse_config_text("topology = hexagonal\n"));
  CHECK_THROWS(parse_config_text("capacity = -4\n"));
  CHECK_THROWS(parse_config_text("rsnr =\n"));
}

TEST_CASE("capacity renders as bits or inf") {
  CHECK(Capacity{false, 12}.str() == "12");
  CHECK(Capacity{true, 0}.str() == "inf");
}

TEST_CASE("energy calibration meets the requested received SNR") {
  ExperimentConfig cfg;
  for (double rsnr : {-5.0, 0.0, 10.0}) {
    const ConditionSetup setup = make_condition_setup(cfg, rsnr);
    const Vec2 nominal = nominal_target(cfg.topology);
    // sum of per-receiver average-power SNRs at the nominal target
    double lin = 0.0;
    for (std::size_t n = 0; n < setup.scene.n_receivers(); ++n) {
      const double rho = amplitude_coefficient(setup.scene, n, nominal);
      lin += setup.energy * rho * rho / cfg.T_p;
    }
    CHECK(10.0 * std::log10(lin) == doctest::Approx(rsnr).epsilon(1e-9));
  }
}

TEST_CASE("trials are reproducible and order independent") {
  ExperimentConfig cfg;
  cfg.master_seed = 5;
  const Condition cond{0.0, {false, 10}, QuantizerKind::Klt};
  const ConditionSetup setup = make_condition_setup(cfg, 0.0);
  const TrialRecord late = run_trial(cfg, cond, setup, 9, true, true);
  const TrialRecord r3 = run_trial(cfg, cond, setup, 3, true, true);
  const TrialRecord again = run_trial(cfg, cond, setup, 9, true, true);
  CHECK(late.truth.x == again.truth.x);
  CHECK(late.truth.y == again.truth.y);
  CHECK(late.sqerr_advanced == again.sqerr_advanced);
  CHECK(late.sqerr_baseline == again.sqerr_baseline);
  CHECK(r3.truth.x != late.truth.x);  // distinct trials differ
}

TEST_CASE("sweep bookkeeping: rows, gain, overhead and pairing") {
  ExperimentConfig cfg;
  cfg.rsnr_db = {0.0};
  cfg.capacities = {{false, 10}};
  cfg.trials = 25;
  cfg.master_seed = 2;
  const std::vector<SummaryRow> rows = run_sweep(cfg);
  REQUIRE(rows.size() == 2);  // both designs
  const SummaryRow& adv = rows[0];
  const SummaryRow& base = rows[1];
  CHECK(adv.design == Design::Advanced);
  CHECK(base.design == Design::Baseline);
  CHECK(adv.trials == 25);
  CHECK(adv.overhead_bps == doctest::Approx(10.0 / cfg.T_p));  // 1e6 bps
  REQUIRE(adv.pg.has_value());
  CHECK(*adv.pg == doctest::Approx(base.mmse_m2 / adv.mmse_m2).epsilon(1e-12));
  REQUIRE(adv.diff_mean.has_value());
  REQUIRE(adv.diff_stderr.has_value());
  CHECK(*adv.diff_mean == doctest::Approx(adv.mmse_m2 - base.mmse_m2).epsilon(1e-9));
}

TEST_CASE("csv output format") {
  ExperimentConfig cfg;
  cfg.rsnr_db = {0.0};
  cfg.capacities = {{true, 0}};
  cfg.trials = 10;
  cfg.design = DesignMode::Baseline;
  const std::vector<SummaryRow> rows = run_sweep(cfg);
  std::ostringstream os;
  write_csv(os, rows);
  const std::string text = os.str();
  CHECK(text.rfind("topology,rsnr_db,capacity_bits,quantizer,design,mmse_m2,"
                   "stderr_m2,pg,overhead_bps,trials,excluded\n", 0) == 0);
  CHECK(text.find("circular,0,inf,klt,baseline,") != std::string::npos);
  // infinite capacity reports inf overhead
  CHECK(text.find(",inf,10,0\n") != std::string::npos);
}

TEST_CASE("repeat sweeps are byte identical") {
  ExperimentConfig cfg;
  cfg.rsnr_db = {-1.0};
  cfg.capacities = {{false, 6}};
  cfg.trials = 15;
  cfg.master_seed = 11;
  std::ostringstream a, b;
  write_csv(a, run_sweep(cfg));
  write_csv(b, run_sweep(cfg));
  CHECK(a.str() == b.str());
  CHECK_FALSE(a.str().empty());
}
