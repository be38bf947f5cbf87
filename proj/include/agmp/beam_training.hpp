// SPDX-License-Identifier: Apache-2.0
//
// Hierarchical beam training over cosine-domain angle bins. The surface
// refines a binary partition of [-1, 1] level by level while the user sweeps
// its narrow beams exhaustively for every candidate surface beam; received
// power decides each refinement. The result is a coarse angle pair plus the
// error ranges implied by the phase resolutions of both sides.

#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "agmp/channel.hpp"
#include "agmp/common.hpp"

namespace agmp {

struct Beam {
  double center_cos = 0.0;
  double half_width_cos = 0.0;
  CVec weights;  // unit Euclidean norm
};

struct Codebook {
  // levels[i] holds the 2^(i+1) beams of refinement level i+1; the intervals
  // of each level tile [-1, 1] exactly.
  std::vector<std::vector<Beam>> levels;
  int resolution = 0;  // number of narrow beams at the deepest level

  int depth() const { return static_cast<int>(levels.size()); }
  const std::vector<Beam>& deepest() const { return levels.back(); }
};

/// Rounds every element's phase to the nearest multiple of 2*pi/levels while
/// keeping its magnitude. Idempotent; zero elements stay zero.
inline CVec quantize_phases(const CVec& v, int levels) {
  if (levels < 2) throw std::invalid_argument("quantize_phases: levels must be >= 2");
  CVec out(v.size());
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    const double mag = std::abs(v[k]);
    if (mag == 0.0) {
      out[k] = cplx(0.0, 0.0);
      continue;
    }
    double phase = std::arg(v[k]);
    if (phase < 0.0) phase += kTwoPi;
    out[k] = std::polar(mag, quantize_phase(phase, levels));
  }
  return out;
}

// Wide beams use a sub-array surrogate: the steering vector of the interval
// center on a reduced aperture of 2^level elements (remaining elements off),
// which puts the first pattern null at the interval edge's mirror so the
// mainlobe covers the whole interval.
inline CVec widened_beam(Eigen::Index n_elements, double center_cos, int level,
                         double spacing) {
  const Eigen::Index active =
      std::min<Eigen::Index>(n_elements, Eigen::Index(1) << level);
  CVec w = CVec::Zero(n_elements);
  w.head(active) = steering_vector(active, center_cos, spacing);
  return w;
}

/// Binary-refinement codebook: level l (1-based) splits [-1, 1] into 2^l
/// equal cosine intervals, one beam per interval, all beamformers unit norm.
/// With a finite `quantization_levels` every nonzero weight phase lies on the
/// 2*pi/levels grid.
inline Codebook build_hierarchical_codebook(Eigen::Index n_elements, int depth,
                                            int quantization_levels = 0,
                                            double spacing = 0.5) {
  if (n_elements < 1)
    throw std::invalid_argument("build_hierarchical_codebook: n_elements must be >= 1");
  if (depth < 1) throw std::invalid_argument("build_hierarchical_codebook: depth must be >= 1");
  if (depth > 24) throw std::invalid_argument("build_hierarchical_codebook: depth too large");

  Codebook cb;
  cb.resolution = 1 << depth;
  cb.levels.resize(static_cast<std::size_t>(depth));
  for (int level = 1; level <= depth; ++level) {
    const int beams = 1 << level;
    const double width = 2.0 / static_cast<double>(beams);
    auto& row = cb.levels[static_cast<std::size_t>(level - 1)];
    row.resize(static_cast<std::size_t>(beams));
    for (int b = 0; b < beams; ++b) {
      Beam& beam = row[static_cast<std::size_t>(b)];
      beam.half_width_cos = width / 2.0;
      beam.center_cos = -1.0 + width * (static_cast<double>(b) + 0.5);
      beam.weights = widened_beam(n_elements, beam.center_cos, level, spacing);
      if (quantization_levels > 0)
        beam.weights = quantize_phases(beam.weights, quantization_levels);
    }
  }
  return cb;
}

enum class AdiErrorModel {
  paper,   // error range 2*pi / phase-resolution
  cosine,  // error range 2 / phase-resolution (cosine-domain bin width)
};

struct CoarseADI {
  double phi_hat = 0.0;    // surface-side cosine estimate
  double omega_hat = 0.0;  // user-side cosine estimate
  double c1 = 0.0;         // user-side error range
  double c2 = 0.0;         // surface-side error range
};

inline double adi_error_range(int resolution, AdiErrorModel model) {
  return (model == AdiErrorModel::paper) ? kTwoPi / static_cast<double>(resolution)
                                         : 2.0 / static_cast<double>(resolution);
}

struct TrainingOptions {
  AdiErrorModel error_model = AdiErrorModel::paper;
};

struct TrainingTrace {
  long measure_calls = 0;
  int irs_beam_index = 0;  // deepest-level index of the winning surface beam
  int ue_beam_index = 0;   // index of the winning user beam
};

/// Level-by-level refinement: at each level the two children of the current
/// surface beam are probed, the user sweeping all of its narrow beams per
/// candidate, and the child with the larger peak received power survives.
/// Ties keep the lower-index child. Measurement noise comes from the
/// scenario, so misalignment is a possible (and valid) outcome.
inline CoarseADI run_beam_training(const CascadeScenario& sc, const Codebook& irs_codebook,
                                   const Codebook& ue_codebook, Rng& rng,
                                   const TrainingOptions& opts = {},
                                   TrainingTrace* trace = nullptr) {
  if (irs_codebook.levels.empty() || ue_codebook.levels.empty())
    throw std::invalid_argument("run_beam_training: empty codebook");

  const ChannelMatrix h_eff = effective_cascaded_channel(sc);
  const auto& ue_beams = ue_codebook.deepest();

  long calls = 0;
  int node = 0;        // beam index within the current level
  int best_ue = 0;     // user beam behind the current winner
  for (int level = 0; level < irs_codebook.depth(); ++level) {
    const auto& row = irs_codebook.levels[static_cast<std::size_t>(level)];
    int winner = -1;
    double winner_power = 0.0;
    for (int child = 0; child < 2; ++child) {
      const int idx = 2 * node + child;
      const Beam& candidate = row[static_cast<std::size_t>(idx)];
      double peak = -1.0;
      int peak_ue = 0;
      for (std::size_t u = 0; u < ue_beams.size(); ++u) {
        const cplx y = measure_channel(h_eff, ue_beams[u].weights, candidate.weights,
                                       sc.noise_variance, rng);
        ++calls;
        const double p = std::norm(y);
        if (p > peak) {
          peak = p;
          peak_ue = static_cast<int>(u);
        }
      }
      if (winner < 0 || peak > winner_power) {  // strict: ties keep child 0
        winner = idx;
        winner_power = peak;
        best_ue = peak_ue;
      }
    }
    node = winner;
  }

  CoarseADI adi;
  adi.phi_hat = irs_codebook.deepest()[static_cast<std::size_t>(node)].center_cos;
  adi.omega_hat = ue_codebook.deepest()[static_cast<std::size_t>(best_ue)].center_cos;
  adi.c1 = adi_error_range(ue_codebook.resolution, opts.error_model);
  adi.c2 = adi_error_range(irs_codebook.resolution, opts.error_model);

  if (trace != nullptr) {
    trace->measure_calls = calls;
    trace->irs_beam_index = node;
    trace->ue_beam_index = best_ue;
  }
  return adi;
}

/// Index of the width-2/resolution bin containing a cosine value.
inline int cosine_bin(double cos_angle, int resolution) {
  const double width = 2.0 / static_cast<double>(resolution);
  int bin = static_cast<int>(std::floor((cos_angle + 1.0) / width));
  if (bin < 0) bin = 0;
  if (bin >= resolution) bin = resolution - 1;
  return bin;
}

}  // namespace agmp
