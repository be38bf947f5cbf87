// SPDX-License-Identifier: Apache-2.0
//
// Built-in correctness checks runnable without a test framework: noiseless
// exact recovery through the full estimation pipeline, and agreement of the
// greedy pursuit with an exhaustive least-squares search on small random
// instances. The exhaustive search is an independent reference path; it
// shares no solver code with the pursuit.

#pragma once

#include <chrono>
#include <cstdint>
#include <vector>

#include "agmp/estimation.hpp"
#include "agmp/evaluation.hpp"

namespace agmp {

struct ExactRecoveryResult {
  bool pass = false;
  double nmse_db = 0.0;
  double seconds = 0.0;
};

/// Noise-free single-path scenario whose true angles sit exactly on the
/// adaptive grid, probed with one measurement per dictionary column. One
/// pursuit iteration must reproduce the channel to numerical precision.
inline ExactRecoveryResult exact_recovery_check(std::uint64_t seed = 7,
                                                double nmse_threshold_db = -250.0) {
  const auto t0 = std::chrono::steady_clock::now();

  ArrayConfig arrays;  // 64 / 64 / 16
  CoarseADI coarse;
  coarse.phi_hat = 0.11;
  coarse.omega_hat = 0.37;
  coarse.c1 = adi_error_range(16, AdiErrorModel::paper);
  coarse.c2 = adi_error_range(64, AdiErrorModel::paper);

  const int g_tilde = 5;
  const AdaptiveDictionary dict = build_adaptive_grid(coarse, g_tilde, arrays);

  CascadeScenario sc;
  sc.arrays = arrays;
  sc.noise_variance = 0.0;
  sc.irs_bs_path.gain = std::polar(1.0, 0.7);
  sc.irs_bs_path.aoa_cos = 0.3;
  sc.irs_bs_path.aod_cos = -0.2;
  PathComponent los;
  los.gain = std::polar(0.9, 1.1);
  los.aoa_cos = dict.irs_grid[3];  // on-grid by construction
  los.aod_cos = dict.ue_grid[2];
  sc.ue_irs_paths.paths = {los};
  sc.ue_irs_paths.rician_k_db = 0.0;

  Rng rng(seed);
  const int m = g_tilde * g_tilde;  // one probe per dictionary column
  const MeasurementSet meas = build_measurements(sc, coarse, dict, m, rng);
  SparseEstimate est = matching_pursuit(meas.y, meas.q, 1);
  reconstruct(est, dict);

  const ChannelMatrix h_true = effective_cascaded_channel(sc);
  ExactRecoveryResult res;
  res.nmse_db = nmse(h_true, est.h_hat);
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  res.pass = res.nmse_db <= nmse_threshold_db;
  return res;
}

struct OracleEquivalenceResult {
  bool pass = false;
  int matches = 0;
  int total = 0;
  double seconds = 0.0;
};

namespace detail {

// Relative gap between the best and second-best selection score.
inline double selection_gap(const CVec& residual, const CMat& q, bool normalize) {
  double best = -1.0, second = -1.0;
  for (Eigen::Index g = 0; g < q.cols(); ++g) {
    double s = std::abs(q.col(g).dot(residual));
    if (normalize) {
      const double n = q.col(g).norm();
      s = (n > 0.0) ? s / n : 0.0;
    }
    if (s > best) {
      second = best;
      best = s;
    } else if (s > second) {
      second = s;
    }
  }
  if (best <= 0.0) return 0.0;
  return (best - second) / best;
}

// Exact-recovery condition max_j ||pinv(Q_S) q_j||_1 < bound for all columns
// outside the planted support; a standard sufficient condition for greedy
// selection to succeed on noiseless data.
inline bool erc_holds(const CMat& q, const std::vector<Eigen::Index>& support, double bound) {
  CMat sub(q.rows(), static_cast<Eigen::Index>(support.size()));
  for (std::size_t i = 0; i < support.size(); ++i)
    sub.col(static_cast<Eigen::Index>(i)) = q.col(support[i]);
  const CMat pinv = (sub.adjoint() * sub).inverse() * sub.adjoint();
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    if (std::find(support.begin(), support.end(), j) != support.end()) continue;
    const CVec v = pinv * q.col(j);
    double l1 = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) l1 += std::abs(v[i]);
    if (l1 >= bound) return false;
  }
  return true;
}

}  // namespace detail

/// Compares the greedy support with the exhaustive minimizer on random
/// noiseless instances (16 x 12 sensing matrices, planted supports of size 1
/// or 2). Instances are accepted only when the exact-recovery condition holds
/// and every greedy selection margin is unambiguous, so both methods are
/// guaranteed a well-posed problem; disagreement then indicates a defect.
inline OracleEquivalenceResult oracle_equivalence_check(int instances = 100,
                                                        std::uint64_t seed = 21) {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(seed);
  OracleEquivalenceResult res;
  res.total = instances;

  const Eigen::Index rows = 16, cols = 12;
  int produced = 0;
  while (produced < instances) {
    const int k = 1 + produced % 2;
    CMat q(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c) q(r, c) = rng.cgaussian(1.0);

    std::vector<Eigen::Index> planted;
    while (static_cast<int>(planted.size()) < k) {
      const auto idx = static_cast<Eigen::Index>(rng.uniform(0.0, static_cast<double>(cols)));
      if (std::find(planted.begin(), planted.end(), idx) == planted.end())
        planted.push_back(idx);
    }
    if (!detail::erc_holds(q, planted, 0.9)) continue;

    CVec y = CVec::Zero(rows);
    for (const Eigen::Index g : planted)
      y += (rng.uniform(0.5, 1.5) * rng.unit_phasor()) * q.col(g);

    // Reject ambiguous greedy margins step by step.
    bool ambiguous = false;
    CVec residual = y;
    for (int t = 1; t <= k; ++t) {
      if (detail::selection_gap(residual, q, true) < 1e-6) {
        ambiguous = true;
        break;
      }
      const SparseEstimate partial = matching_pursuit(y, q, t);
      CMat sub(rows, static_cast<Eigen::Index>(partial.support.size()));
      for (std::size_t i = 0; i < partial.support.size(); ++i)
        sub.col(static_cast<Eigen::Index>(i)) = q.col(partial.support[i]);
      residual = y - sub * partial.coefficients;
    }
    if (ambiguous) continue;

    ++produced;
    const SparseEstimate greedy = matching_pursuit(y, q, k);
    const ExhaustiveFit oracle = exhaustive_support_search(y, q, k);

    std::vector<Eigen::Index> a = greedy.support;
    std::vector<Eigen::Index> b = oracle.support;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a == b) ++res.matches;
  }

  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  res.pass = res.matches == res.total;
  return res;
}

}  // namespace agmp
