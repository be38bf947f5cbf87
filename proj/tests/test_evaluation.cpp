// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch.hpp>

#include "agmp/evaluation.hpp"

using namespace agmp;

TEST_CASE("nmse of an exact estimate is the -inf sentinel") {
  CMat h(3, 2);
  h << cplx(1, 2), cplx(0, 1), cplx(2, 0), cplx(1, 1), cplx(0.5, 0), cplx(0, -1);
  REQUIRE(std::isinf(nmse(h, h)));
  REQUIRE(nmse(h, h) < 0);
}

TEST_CASE("nmse of the zero estimate is 0 dB and of a halved estimate -6.02 dB") {
  CMat h(2, 2);
  h << cplx(1, 0), cplx(0, 2), cplx(-1, 1), cplx(3, 0);
  REQUIRE(nmse(h, CMat::Zero(2, 2)) == Approx(0.0).margin(1e-12));
  REQUIRE(nmse(h, CMat(0.5 * h)) == Approx(10.0 * std::log10(0.25)).margin(1e-10));
}

TEST_CASE("nmse rejects invalid inputs") {
  CMat h = CMat::Ones(2, 2);
  REQUIRE_THROWS_AS(nmse(CMat::Zero(2, 2), h), std::invalid_argument);
  REQUIRE_THROWS_AS(nmse(h, CMat::Ones(3, 2)), std::invalid_argument);
}

TEST_CASE("spectral efficiency vanishes in the noise-dominated limit") {
  const CVec u = steering_vector(8, 0.2);
  const CVec v = steering_vector(4, -0.1);
  const CMat h = u * v.adjoint();
  REQUIRE(spectral_efficiency(h, v, u, 1e12) < 1e-10);
}

TEST_CASE("matched beams on a rank-one channel achieve the closed-form rate") {
  const double sigma1 = 1.7, sigma2 = 0.2;
  const CVec u = steering_vector(16, 0.4);
  const CVec v = steering_vector(8, -0.3);
  const CMat h = sigma1 * u * v.adjoint();
  const double se = spectral_efficiency(h, v, u, sigma2);
  REQUIRE(se == Approx(std::log2(1.0 + sigma1 * sigma1 / sigma2)).margin(1e-10));
}

TEST_CASE("estimated beams never beat the perfect-CSI matched pair") {
  Rng rng(12);
  for (int rep = 0; rep < 20; ++rep) {
    CMat h(12, 6), h_est(12, 6);
    for (Eigen::Index i = 0; i < h.size(); ++i) {
      h(i) = rng.cgaussian(1.0);
      h_est(i) = h(i) + rng.cgaussian(0.5);  // noisy estimate
    }
    const auto best = detail::matched_beams(h);
    const auto guess = detail::matched_beams(h_est);
    const double se_best = spectral_efficiency(h, best.f, best.b, 0.1);
    const double se_guess = spectral_efficiency(h, guess.f, guess.b, 0.1);
    REQUIRE(se_guess <= se_best + 1e-12);
  }
}

TEST_CASE("perfect-CSI trials report the sentinel and the matched-filter bound") {
  TrialConfig cfg;
  cfg.scheme = Scheme::perfect_csi;
  cfg.seed = 71;
  const TrialResult res = run_trial(cfg);
  REQUIRE(std::isinf(res.nmse_db));
  REQUIRE(res.nmse_linear == 0.0);

  // Reproduce the bound directly from the same seeded channel.
  Rng channel = Rng(cfg.seed).fork(1);
  const CascadeScenario sc = sample_cascade_scenario(channel, cfg.arrays, cfg.n_paths,
                                                     cfg.rician_k_db, db_to_linear(-10.0));
  Eigen::JacobiSVD<CMat> svd(effective_cascaded_channel(sc));
  const double top = svd.singularValues()[0];
  REQUIRE(res.se == Approx(std::log2(1.0 + top * top / db_to_linear(-cfg.snr_db)))
                        .epsilon(1e-9));
}

TEST_CASE("trials are bit-identical under the same seed and config") {
  TrialConfig cfg;
  cfg.seed = 2024;
  for (Scheme s : {Scheme::agmp, Scheme::beam_training_csi, Scheme::random_beamforming}) {
    cfg.scheme = s;
    const TrialResult a = run_trial(cfg);
    const TrialResult b = run_trial(cfg);
    REQUIRE(a.nmse_db == b.nmse_db);
    REQUIRE(a.se == b.se);
    REQUIRE(a.residual_norm == b.residual_norm);
    REQUIRE(a.aligned == b.aligned);
  }
}

TEST_CASE("trial validation names out-of-range fields") {
  TrialConfig cfg;
  cfg.arrays.n_ue = 0;
  REQUIRE_THROWS_WITH(run_trial(cfg), Catch::Contains("n_ue"));
  cfg = TrialConfig{};
  cfg.zeta = 0;
  REQUIRE_THROWS_WITH(run_trial(cfg), Catch::Contains("zeta"));
}

TEST_CASE("linear-domain averaging happens before the dB conversion") {
  const double db = aggregate_nmse_db({1.0, 0.01});
  REQUIRE(db == Approx(10.0 * std::log10(0.505)).margin(1e-12));
  const double mean_of_dbs = 0.5 * (0.0 + -20.0);
  REQUIRE(std::abs(db - mean_of_dbs) > 5.0);  // the two orders differ materially
  REQUIRE(std::isinf(aggregate_nmse_db({0.0, 0.0})));
}

TEST_CASE("a degenerate sweep equals the single trial it wraps") {
  TrialConfig base;
  base.scheme = Scheme::perfect_csi;
  base.seed = 5;
  const ResultTable table = run_sweep(base, SweepAxis::snr, {10.0}, 1);
  REQUIRE(table.rows.size() == 1);
  const TrialResult single = run_trial(base);
  REQUIRE(std::isinf(table.rows[0].mean_nmse_db));
  REQUIRE(table.rows[0].se_mean == Approx(single.se));
  REQUIRE(table.rows[0].n_trials == 1);
}

TEST_CASE("sweep tables are identical for any worker count") {
  TrialConfig base;
  base.seed = 31;
  base.scheme = Scheme::agmp;
  const std::vector<double> values = {5.0, 15.0};
  const ResultTable t1 = run_sweep(base, SweepAxis::snr, values, 6, 1);
  const ResultTable t4 = run_sweep(base, SweepAxis::snr, values, 6, 4);
  REQUIRE(t1.rows.size() == t4.rows.size());
  for (std::size_t i = 0; i < t1.rows.size(); ++i) {
    REQUIRE(t1.rows[i].mean_nmse_db == t4.rows[i].mean_nmse_db);
    REQUIRE(t1.rows[i].se_mean == t4.rows[i].se_mean);
    REQUIRE(t1.rows[i].se_stderr == t4.rows[i].se_stderr);
    REQUIRE(t1.rows[i].nmse_stderr == t4.rows[i].nmse_stderr);
  }
}

TEST_CASE("estimation error improves with SNR in the mean") {
  TrialConfig base;
  base.seed = 400;
  base.scheme = Scheme::agmp;
  const ResultTable table = run_sweep(base, SweepAxis::snr, {0.0, 20.0}, 60, 4);
  REQUIRE(table.rows[1].mean_nmse_db <= table.rows[0].mean_nmse_db);
}

TEST_CASE("spectral efficiency does not degrade with a finer dictionary") {
  TrialConfig base;
  base.seed = 500;
  base.scheme = Scheme::agmp;
  const ResultTable table = run_sweep(base, SweepAxis::g_tilde, {2.0, 6.0}, 60, 4);
  const double slack =
      2.0 * std::sqrt(table.rows[0].se_stderr * table.rows[0].se_stderr +
                      table.rows[1].se_stderr * table.rows[1].se_stderr);
  REQUIRE(table.rows[1].se_mean >= table.rows[0].se_mean - slack);
}

TEST_CASE("scheme ordering holds: perfect dominates agmp dominates random in the mean") {
  TrialConfig base;
  base.seed = 900;
  const std::vector<double> point = {10.0};
  const int trials = 60;

  base.scheme = Scheme::perfect_csi;
  const double se_perfect = run_sweep(base, SweepAxis::snr, point, trials, 4).rows[0].se_mean;
  base.scheme = Scheme::agmp;
  const double se_agmp = run_sweep(base, SweepAxis::snr, point, trials, 4).rows[0].se_mean;
  base.scheme = Scheme::random_beamforming;
  const double se_random = run_sweep(base, SweepAxis::snr, point, trials, 4).rows[0].se_mean;

  REQUIRE(se_perfect >= se_agmp);
  REQUIRE(se_agmp > se_random);

  // per-trial dominance of the matched pair on the same realization
  for (int t = 0; t < 10; ++t) {
    TrialConfig cfg = base;
    cfg.seed = 900 + t;
    cfg.scheme = Scheme::perfect_csi;
    const double sp = run_trial(cfg).se;
    cfg.scheme = Scheme::agmp;
    const double sa = run_trial(cfg).se;
    REQUIRE(sa <= sp + 1e-12);
  }
}

TEST_CASE("scheme names round-trip") {
  for (Scheme s : {Scheme::agmp, Scheme::beam_training_csi, Scheme::perfect_csi,
                   Scheme::random_beamforming, Scheme::no_irs})
    REQUIRE(scheme_from_string(to_string(s)) == s);
  REQUIRE_THROWS_AS(scheme_from_string("bogus"), std::invalid_argument);
}
