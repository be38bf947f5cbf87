// SPDX-License-Identifier: Apache-2.0
//
// Adaptive-grid matching pursuit for cascaded channel estimation.
//
// A small angle dictionary is built around the coarse training estimate,
// pilot probes turn the channel into a linear measurement model through the
// Kronecker identity vec(A*X*B) = (B^T kron A) vec(X), and a greedy pursuit
// with full least-squares refit recovers the few dominant angular
// coefficients. A full-range uniform grid drives the same pursuit core for
// baseline and complexity comparisons.

#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "agmp/beam_training.hpp"
#include "agmp/channel.hpp"
#include "agmp/common.hpp"

namespace agmp {

struct AdaptiveDictionary {
  RVec ue_grid;   // transmit-side cosine candidates
  RVec irs_grid;  // receive-side cosine candidates
  CMat a_ue;      // n_ue  x ue_grid.size(), unit-norm steering columns
  CMat a_irs;     // n_irs x irs_grid.size(), unit-norm steering columns
  CMat a_dict;    // conj(a_ue) kron a_irs; may be left empty for large grids
  bool materialized = false;
  bool degenerate = false;  // all grid points collapsed to one angle pair

  Eigen::Index ue_size() const { return ue_grid.size(); }
  Eigen::Index irs_size() const { return irs_grid.size(); }
  Eigen::Index n_columns() const { return ue_size() * irs_size(); }

  // Column g of conj(a_ue) kron a_irs; g = g_ue * irs_size() + g_irs.
  CVec column(Eigen::Index g) const {
    const Eigen::Index gu = g / irs_size();
    const Eigen::Index gi = g % irs_size();
    const Eigen::Index n_irs = a_irs.rows();
    CVec col(a_ue.rows() * n_irs);
    for (Eigen::Index r = 0; r < a_ue.rows(); ++r)
      col.segment(r * n_irs, n_irs) = std::conj(a_ue(r, gu)) * a_irs.col(gi);
    return col;
  }
};

namespace detail {

// Grid formula offset - range/2 + (range/size)*g, clamped to the physical
// cosine domain, with exact duplicates (from clamping) removed in order.
inline std::vector<double> angle_grid(double center, double range, int size) {
  std::vector<double> pts;
  pts.reserve(static_cast<std::size_t>(size));
  for (int g = 0; g < size; ++g) {
    double x = center - range / 2.0 +
               (range / static_cast<double>(size)) * static_cast<double>(g);
    x = std::clamp(x, -1.0, 1.0);
    if (pts.empty() || x != pts.back()) pts.push_back(x);
  }
  return pts;
}

inline CMat steering_bank(Eigen::Index n, const std::vector<double>& grid, double spacing) {
  CMat bank(n, static_cast<Eigen::Index>(grid.size()));
  for (std::size_t g = 0; g < grid.size(); ++g)
    bank.col(static_cast<Eigen::Index>(g)) = steering_vector(n, grid[g], spacing);
  return bank;
}

}  // namespace detail

/// Dictionary over the coarse sector: user grid centered near omega_hat with
/// span c1, surface grid near phi_hat with span c2, each quantized to g_tilde
/// points. Points leaving [-1, 1] are clamped (and collapsed duplicates
/// dropped), so the grids can be shorter than g_tilde at the domain edge.
inline AdaptiveDictionary build_adaptive_grid(const CoarseADI& coarse, int g_tilde,
                                              const ArrayConfig& arrays,
                                              bool materialize = true) {
  if (g_tilde < 1) throw std::invalid_argument("build_adaptive_grid: g_tilde must be >= 1");
  validate(arrays);

  AdaptiveDictionary dict;
  const auto ue_pts = detail::angle_grid(coarse.omega_hat, coarse.c1, g_tilde);
  const auto irs_pts = detail::angle_grid(coarse.phi_hat, coarse.c2, g_tilde);
  dict.ue_grid = Eigen::Map<const RVec>(ue_pts.data(), static_cast<Eigen::Index>(ue_pts.size()));
  dict.irs_grid =
      Eigen::Map<const RVec>(irs_pts.data(), static_cast<Eigen::Index>(irs_pts.size()));
  dict.a_ue = detail::steering_bank(arrays.n_ue, ue_pts, arrays.spacing_over_wavelength);
  dict.a_irs = detail::steering_bank(arrays.n_irs, irs_pts, arrays.spacing_over_wavelength);
  dict.degenerate = (dict.ue_size() == 1 && dict.irs_size() == 1 && g_tilde > 1);

  if (materialize) {
    dict.a_dict.resize(arrays.n_ue * arrays.n_irs, dict.n_columns());
    for (Eigen::Index g = 0; g < dict.n_columns(); ++g) dict.a_dict.col(g) = dict.column(g);
    dict.materialized = true;
  }
  return dict;
}

/// Uniform full-range grid with g points per angle axis spanning [-1, 1];
/// the baseline dictionary used without any coarse prior.
inline AdaptiveDictionary build_full_grid(int g, const ArrayConfig& arrays,
                                          bool materialize = false) {
  CoarseADI full;
  full.phi_hat = 0.0;
  full.omega_hat = 0.0;
  full.c1 = 2.0;
  full.c2 = 2.0;
  return build_adaptive_grid(full, g, arrays, materialize);
}

struct Probe {
  CVec f;    // user beamforming vector, unit norm
  CVec b_s;  // effective surface combining vector, unit norm
};

struct MeasurementSet {
  CVec y;                     // stacked pilot observations
  CMat q;                     // sensing matrix, one row per probe
  std::vector<Probe> probes;  // probe pairs actually used
};

// Sensing row (f^T kron b^H) * (conj(A_ue) kron A_irs) computed through the
// Kronecker mixed-product rule, avoiding the materialized dictionary.
inline Eigen::RowVectorXcd sensing_row(const AdaptiveDictionary& dict, const CVec& f,
                                       const CVec& b_s) {
  const Eigen::RowVectorXcd u = f.transpose() * dict.a_ue.conjugate();
  const Eigen::RowVectorXcd v = b_s.adjoint() * dict.a_irs;
  Eigen::RowVectorXcd row(dict.n_columns());
  const Eigen::Index gi = dict.irs_size();
  for (Eigen::Index a = 0; a < dict.ue_size(); ++a) row.segment(a * gi, gi) = u[a] * v;
  return row;
}

/// Collects m pilot observations. Probe 0 is the pair aligned with the
/// coarse estimate; the rest are unit-norm steering probes perturbed
/// uniformly within the coarse sectors, which makes the stacked system
/// identifiable without leaving the trained angular neighborhood.
inline MeasurementSet build_measurements(const CascadeScenario& sc, const CoarseADI& coarse,
                                         const AdaptiveDictionary& dict, int m, Rng& rng) {
  if (m < 1) throw std::invalid_argument("build_measurements: m must be >= 1");
  const double spacing = sc.arrays.spacing_over_wavelength;

  MeasurementSet set;
  set.probes.resize(static_cast<std::size_t>(m));
  set.probes[0].f = steering_vector(sc.arrays.n_ue, coarse.omega_hat, spacing);
  set.probes[0].b_s = steering_vector(sc.arrays.n_irs, coarse.phi_hat, spacing);
  for (int i = 1; i < m; ++i) {
    const double omega =
        std::clamp(coarse.omega_hat + coarse.c1 * (rng.uniform() - 0.5), -1.0, 1.0);
    const double phi =
        std::clamp(coarse.phi_hat + coarse.c2 * (rng.uniform() - 0.5), -1.0, 1.0);
    set.probes[static_cast<std::size_t>(i)].f = steering_vector(sc.arrays.n_ue, omega, spacing);
    set.probes[static_cast<std::size_t>(i)].b_s =
        steering_vector(sc.arrays.n_irs, phi, spacing);
  }

  const ChannelMatrix h_eff = effective_cascaded_channel(sc);
  set.y.resize(m);
  set.q.resize(m, dict.n_columns());
  for (int i = 0; i < m; ++i) {
    const Probe& p = set.probes[static_cast<std::size_t>(i)];
    set.y[i] = measure_channel(h_eff, p.f, p.b_s, sc.noise_variance, rng);
    set.q.row(i) = sensing_row(dict, p.f, p.b_s);
  }
  return set;
}

struct SparseEstimate {
  std::vector<Eigen::Index> support;     // selection order preserved
  CVec coefficients;                     // aligned with `support`
  CMat h_a;                              // sparse angular-domain matrix
  CMat h_hat;                            // reconstructed effective channel
  double residual_norm = 0.0;
  std::vector<double> residual_history;  // norm after each iteration
  bool rank_deficient = false;           // least squares fell back to min-norm
  long long correlation_ops = 0;         // multiply-accumulates spent scanning
};

struct PursuitOptions {
  // Score candidates by |q_g^H r| / ||q_g|| instead of the raw inner product;
  // raw scoring is kept available since it biases toward high-gain columns.
  bool normalize_selection = true;
  double rcond = 1e-10;  // relative rank threshold for the refit
};

/// Greedy pursuit: for `zeta` iterations pick the column most correlated with
/// the residual (ties to the lowest index), add it to the support set, refit
/// every supported coefficient by least squares and subtract the fit. The
/// refit makes the residual norm non-increasing and leaves it orthogonal to
/// all selected columns; re-selecting a column never grows the support.
inline SparseEstimate matching_pursuit(const CVec& y, const CMat& q, int zeta,
                                       const PursuitOptions& opts = {}) {
  if (zeta < 1) throw std::invalid_argument("matching_pursuit: zeta must be >= 1");
  if (q.cols() < 1) throw std::invalid_argument("matching_pursuit: q has no columns");
  if (q.rows() != y.size())
    throw std::invalid_argument("matching_pursuit: y length must match rows of q");

  RVec col_norms(q.cols());
  for (Eigen::Index g = 0; g < q.cols(); ++g) col_norms[g] = q.col(g).norm();

  SparseEstimate est;
  CVec residual = y;
  CMat q_sub;  // columns of q restricted to the support, in selection order

  for (int t = 0; t < zeta; ++t) {
    Eigen::Index best = 0;
    double best_score = -1.0;
    for (Eigen::Index g = 0; g < q.cols(); ++g) {
      double score = std::abs(q.col(g).dot(residual));
      if (opts.normalize_selection) score = (col_norms[g] > 0.0) ? score / col_norms[g] : 0.0;
      if (score > best_score) {
        best_score = score;
        best = g;
      }
    }
    est.correlation_ops += static_cast<long long>(q.rows()) * q.cols();

    if (std::find(est.support.begin(), est.support.end(), best) == est.support.end()) {
      est.support.push_back(best);
      q_sub.conservativeResize(q.rows(), static_cast<Eigen::Index>(est.support.size()));
      q_sub.col(q_sub.cols() - 1) = q.col(best);
    }

    Eigen::CompleteOrthogonalDecomposition<CMat> cod;
    cod.setThreshold(opts.rcond);
    cod.compute(q_sub);
    if (cod.rank() < q_sub.cols()) est.rank_deficient = true;
    est.coefficients = cod.solve(y);

    residual = y - q_sub * est.coefficients;
    est.residual_history.push_back(residual.norm());
  }
  est.residual_norm = est.residual_history.back();
  return est;
}

/// Same pursuit over a full-range uniform-grid sensing matrix; kept as a
/// separate entry point for baseline runs and complexity accounting.
inline SparseEstimate omp_full_grid(const CVec& y, const CMat& q_full, int zeta,
                                    const PursuitOptions& opts = {}) {
  return matching_pursuit(y, q_full, zeta, opts);
}

/// Places the fitted coefficients on the angular grid (column-major layout,
/// index g = g_ue * irs_size + g_irs) and expands the effective channel
/// estimate A_irs * H_a * A_ue^H.
inline void reconstruct(SparseEstimate& est, const AdaptiveDictionary& dict) {
  est.h_a = CMat::Zero(dict.irs_size(), dict.ue_size());
  for (std::size_t k = 0; k < est.support.size(); ++k) {
    const Eigen::Index g = est.support[k];
    if (g < 0 || g >= dict.n_columns())
      throw std::out_of_range("reconstruct: support index outside dictionary");
    const Eigen::Index gu = g / dict.irs_size();
    const Eigen::Index gi = g % dict.irs_size();
    est.h_a(gi, gu) = est.coefficients[static_cast<Eigen::Index>(k)];
  }
  est.h_hat = dict.a_irs * est.h_a * dict.a_ue.adjoint();
}

/// Numerical rank of a measurement matrix (singular values above
/// tol * largest). Diagnostic for probe sets with duplicated rows.
inline Eigen::Index effective_rank(const CMat& m, double tol = 1e-10) {
  Eigen::JacobiSVD<CMat> svd(m);
  const RVec sv = svd.singularValues();
  if (sv.size() == 0) return 0;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > tol * sv[0]) ++rank;
  return rank;
}

struct ExhaustiveFit {
  std::vector<Eigen::Index> support;  // ascending
  CVec coefficients;
  double residual_norm = 0.0;
};

/// Brute-force reference solver: least squares over every support of size k,
/// returning the global residual minimizer. Exponential in k; intended for
/// small dictionaries as an independent check of the greedy pursuit.
inline ExhaustiveFit exhaustive_support_search(const CVec& y, const CMat& q, int k) {
  if (k < 1 || k > q.cols())
    throw std::invalid_argument("exhaustive_support_search: bad support size");

  ExhaustiveFit best;
  best.residual_norm = std::numeric_limits<double>::infinity();

  std::vector<Eigen::Index> idx(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;

  const auto evaluate = [&](const std::vector<Eigen::Index>& support) {
    CMat sub(q.rows(), k);
    for (int i = 0; i < k; ++i) sub.col(i) = q.col(support[static_cast<std::size_t>(i)]);
    Eigen::CompleteOrthogonalDecomposition<CMat> cod(sub);
    const CVec coef = cod.solve(y);
    const double res = (y - sub * coef).norm();
    if (res < best.residual_norm) {
      best.residual_norm = res;
      best.support = support;
      best.coefficients = coef;
    }
  };

  // Lexicographic walk over all k-subsets of the column index range.
  while (true) {
    evaluate(idx);
    int pos = k - 1;
    while (pos >= 0 &&
           idx[static_cast<std::size_t>(pos)] == q.cols() - k + pos)
      --pos;
    if (pos < 0) break;
    ++idx[static_cast<std::size_t>(pos)];
    for (int j = pos + 1; j < k; ++j)
      idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
  return best;
}

}  // namespace agmp
