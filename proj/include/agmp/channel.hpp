// SPDX-License-Identifier: Apache-2.0
//
// Narrowband geometric channel model for a reflecting-surface assisted
// mmWave link with uniform linear arrays at every node. Angles are handled
// in the cosine domain throughout. All channels between a user and the
// surface follow a multipath Rician model; the surface-to-base-station link
// is rank-one (a single dominant path, consistent with the sparse scattering
// around elevated nodes).
//
// Uplink orientation convention: the user-to-surface channel has shape
// (n_irs, n_ue) and the surface-to-base-station channel has shape
// (n_bs, n_irs), so a received pilot is w^H * H_ib * Theta * H_ui * f.

#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "agmp/common.hpp"

namespace agmp {

struct ArrayConfig {
  int n_bs = 64;
  int n_irs = 64;
  int n_ue = 16;
  double spacing_over_wavelength = 0.5;
};

inline void validate(const ArrayConfig& a) {
  if (a.n_bs < 1) throw std::invalid_argument("ArrayConfig: n_bs must be >= 1");
  if (a.n_irs < 1) throw std::invalid_argument("ArrayConfig: n_irs must be >= 1");
  if (a.n_ue < 1) throw std::invalid_argument("ArrayConfig: n_ue must be >= 1");
  if (!(a.spacing_over_wavelength > 0.0))
    throw std::invalid_argument("ArrayConfig: spacing_over_wavelength must be positive");
}

/// Unit-norm ULA response at a cosine-domain angle. Element k carries phase
/// 2*pi*k*spacing*cos_angle; the same 2*pi convention is used on both the
/// transmit and receive sides.
inline CVec steering_vector(Eigen::Index n, double cos_angle,
                            double spacing_over_wavelength = 0.5) {
  if (n < 1) throw std::invalid_argument("steering_vector: n must be >= 1");
  if (!(cos_angle >= -1.0 && cos_angle <= 1.0))
    throw std::invalid_argument("steering_vector: cos_angle outside [-1, 1]");
  CVec v(n);
  const double amp = 1.0 / std::sqrt(static_cast<double>(n));
  const double step = kTwoPi * spacing_over_wavelength * cos_angle;
  for (Eigen::Index k = 0; k < n; ++k) v[k] = std::polar(amp, step * static_cast<double>(k));
  return v;
}

struct PathComponent {
  cplx gain{0.0, 0.0};
  double aoa_cos = 0.0;  // receive-side cosine angle
  double aod_cos = 0.0;  // transmit-side cosine angle
};

struct PathSet {
  std::vector<PathComponent> paths;  // paths[0] is the LOS component
  double rician_k_db = 0.0;

  int n_paths() const { return static_cast<int>(paths.size()); }
};

/// Draws a Rician path set: a fixed-magnitude LOS gain with uniform phase
/// and (n_paths - 1) equal-power complex-Gaussian NLOS gains. Total expected
/// gain power is 1 and E|LOS|^2 / sum E|NLOS|^2 = 10^(rician_k_db / 10).
/// Angle cosines are uniform on [-1, 1]. Deterministic given the source.
inline PathSet sample_path_set(Rng& rng, int n_paths, double rician_k_db) {
  if (n_paths < 1) throw std::invalid_argument("sample_path_set: n_paths must be >= 1");
  PathSet set;
  set.rician_k_db = rician_k_db;
  set.paths.resize(static_cast<std::size_t>(n_paths));

  const double k_lin = db_to_linear(rician_k_db);
  const double los_power = (n_paths == 1) ? 1.0 : k_lin / (k_lin + 1.0);
  const double nlos_power_each =
      (n_paths == 1) ? 0.0 : 1.0 / ((k_lin + 1.0) * static_cast<double>(n_paths - 1));

  for (int l = 0; l < n_paths; ++l) {
    PathComponent& p = set.paths[static_cast<std::size_t>(l)];
    if (l == 0) {
      p.gain = std::sqrt(los_power) * rng.unit_phasor();
    } else {
      p.gain = rng.cgaussian(nlos_power_each);
    }
    p.aoa_cos = rng.uniform(-1.0, 1.0);
    p.aod_cos = rng.uniform(-1.0, 1.0);
  }
  return set;
}

using ChannelMatrix = CMat;

// Gain-weighted sum of steering outer products, without any array-size
// normalization. Shared by the assembled and effective channel forms.
inline ChannelMatrix path_response_sum(const PathSet& set, Eigen::Index n_rx,
                                       Eigen::Index n_tx, double spacing = 0.5) {
  ChannelMatrix h = ChannelMatrix::Zero(n_rx, n_tx);
  for (const PathComponent& p : set.paths) {
    h.noalias() +=
        p.gain * steering_vector(n_rx, p.aoa_cos, spacing) *
        steering_vector(n_tx, p.aod_cos, spacing).adjoint();
  }
  return h;
}

/// Multipath channel sqrt(n_tx*n_rx/L) * sum_l gain_l * a_rx * a_tx^H.
/// Identical to A_R * diag(sqrt(n_tx*n_rx/L) * gain) * A_T^H where A_R, A_T
/// stack the per-path steering vectors.
inline ChannelMatrix assemble_channel(const PathSet& set, Eigen::Index n_rx,
                                      Eigen::Index n_tx, double spacing = 0.5) {
  if (set.paths.empty()) throw std::invalid_argument("assemble_channel: empty path set");
  const double scale = std::sqrt(static_cast<double>(n_tx) * static_cast<double>(n_rx) /
                                 static_cast<double>(set.paths.size()));
  return scale * path_response_sum(set, n_rx, n_tx, spacing);
}

struct PhaseShiftConfig {
  RVec phases;              // per-element phase in [0, 2*pi)
  RVec amplitudes;          // reflection amplitudes, all 1 in this model
  int quantization_levels = 0;  // 0 means continuous

  Eigen::Index size() const { return phases.size(); }
};

inline PhaseShiftConfig make_phase_config(const RVec& phases, int quantization_levels = 0) {
  PhaseShiftConfig cfg;
  cfg.phases = phases;
  cfg.amplitudes = RVec::Ones(phases.size());
  cfg.quantization_levels = quantization_levels;
  return cfg;
}

inline double quantize_phase(double phase, int levels) {
  const double step = kTwoPi / static_cast<double>(levels);
  double q = std::round(phase / step) * step;
  q = std::fmod(q, kTwoPi);
  if (q < 0.0) q += kTwoPi;
  return q;
}

/// Surface phase profile that realizes receive beam a_rx(target_cos) through
/// elements illuminated from aod_cos_bs, optionally quantized to a uniform
/// phase grid with `levels` states.
inline PhaseShiftConfig irs_phases_for_beam(Eigen::Index n_irs, double aod_cos_bs,
                                            double target_cos, double spacing = 0.5,
                                            int levels = 0) {
  RVec phases(n_irs);
  for (Eigen::Index k = 0; k < n_irs; ++k) {
    double phi = kTwoPi * spacing * static_cast<double>(k) * (aod_cos_bs - target_cos);
    phi = std::fmod(phi, kTwoPi);
    if (phi < 0.0) phi += kTwoPi;
    phases[k] = (levels > 0) ? quantize_phase(phi, levels) : phi;
  }
  return make_phase_config(phases, levels);
}

/// Composite uplink channel H_ib * Theta * H_ui seen at the base station.
inline ChannelMatrix cascaded_channel(const ChannelMatrix& h_ue_irs,
                                      const PhaseShiftConfig& theta,
                                      const ChannelMatrix& h_irs_bs) {
  const Eigen::Index n_irs = theta.size();
  if (h_ue_irs.rows() != n_irs || h_irs_bs.cols() != n_irs)
    throw std::invalid_argument("cascaded_channel: inner dimensions must equal n_irs");
  CVec diag(n_irs);
  for (Eigen::Index k = 0; k < n_irs; ++k)
    diag[k] = std::polar(theta.amplitudes[k], theta.phases[k]);
  return h_irs_bs * diag.asDiagonal() * h_ue_irs;
}

struct CascadeScenario {
  PathComponent irs_bs_path;  // rank-one surface-to-base-station link
  PathSet ue_irs_paths;       // multipath user-to-surface link
  ArrayConfig arrays;
  double noise_variance = 0.0;  // sigma^2, linear power
};

/// Effective cascaded channel of shape (n_irs, n_ue): the base-station leg
/// collapses to the surface-link gain once the combiner is matched to the
/// known surface direction (w^H a_rx = 1).
inline ChannelMatrix effective_cascaded_channel(const CascadeScenario& sc) {
  validate(sc.arrays);
  return sc.irs_bs_path.gain *
         path_response_sum(sc.ue_irs_paths, sc.arrays.n_irs, sc.arrays.n_ue,
                           sc.arrays.spacing_over_wavelength);
}

/// Effective combining vector b[n] = exp(-j*phi_n) * a_tx(aod_cos_bs)[n].
/// A diagonal unitary, so the unit norm of the steering vector is preserved.
inline CVec effective_combining(const PhaseShiftConfig& theta, double aod_cos_bs,
                                double spacing = 0.5) {
  const CVec a = steering_vector(theta.size(), aod_cos_bs, spacing);
  CVec b(theta.size());
  for (Eigen::Index k = 0; k < theta.size(); ++k)
    b[k] = theta.amplitudes[k] * std::polar(1.0, -theta.phases[k]) * a[k];
  return b;
}

// Scalar pilot observation for a precomputed effective channel. The noise
// term models the combined receiver noise after unit-gain combining.
inline cplx measure_channel(const ChannelMatrix& h_eff, const CVec& f, const CVec& b_s,
                            double noise_variance, Rng& rng) {
  if (std::abs(f.norm() - 1.0) > 1e-9)
    throw std::invalid_argument("measure: beamforming vector f must have unit norm");
  const cplx signal = (b_s.adjoint() * h_eff * f)(0, 0);
  return signal + rng.cgaussian(noise_variance);
}

/// One uplink pilot observation y = b_s^H * H_eff * f + noise.
inline cplx measure(const CascadeScenario& sc, const CVec& f, const CVec& b_s, Rng& rng) {
  return measure_channel(effective_cascaded_channel(sc), f, b_s, sc.noise_variance, rng);
}

/// Random scenario draw: unit-magnitude surface-link gain with uniform phase
/// and uniform angles, plus a Rician user-side path set.
inline CascadeScenario sample_cascade_scenario(Rng& rng, const ArrayConfig& arrays,
                                               int n_paths, double rician_k_db,
                                               double noise_variance) {
  validate(arrays);
  CascadeScenario sc;
  sc.arrays = arrays;
  sc.noise_variance = noise_variance;
  sc.irs_bs_path.gain = rng.unit_phasor();
  sc.irs_bs_path.aoa_cos = rng.uniform(-1.0, 1.0);
  sc.irs_bs_path.aod_cos = rng.uniform(-1.0, 1.0);
  sc.ue_irs_paths = sample_path_set(rng, n_paths, rician_k_db);
  return sc;
}

}  // namespace agmp
