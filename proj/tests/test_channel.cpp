// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch.hpp>

#include "agmp/channel.hpp"

using namespace agmp;

namespace {

// Row vector f^T kron b^H, laid out so entry (u * n_irs + i) = f[u] * conj(b[i]);
// used to check the vectorization identity against the direct product.
Eigen::RowVectorXcd kron_row(const CVec& f, const CVec& b) {
  Eigen::RowVectorXcd row(f.size() * b.size());
  for (Eigen::Index u = 0; u < f.size(); ++u)
    for (Eigen::Index i = 0; i < b.size(); ++i)
      row[u * b.size() + i] = f[u] * std::conj(b[i]);
  return row;
}

CVec vec_colmajor(const CMat& m) {
  CVec v(m.size());
  Eigen::Index k = 0;
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r) v[k++] = m(r, c);
  return v;
}

}  // namespace

TEST_CASE("steering vector at broadside is the scaled all-ones vector") {
  const CVec v = steering_vector(4, 0.0, 0.5);
  for (Eigen::Index k = 0; k < 4; ++k) {
    REQUIRE(v[k].real() == Approx(0.5).margin(1e-15));
    REQUIRE(v[k].imag() == Approx(0.0).margin(1e-15));
  }
}

TEST_CASE("steering vector at endfire alternates sign for half-wavelength spacing") {
  const CVec v = steering_vector(2, 1.0, 0.5);
  const double s = 1.0 / std::sqrt(2.0);
  REQUIRE(std::abs(v[0] - cplx(s, 0)) < 1e-15);
  REQUIRE(std::abs(v[1] - cplx(-s, 0)) < 1e-12);
}

TEST_CASE("steering vector element ratio and norm follow the phase progression") {
  const double cosang = 0.37;
  const CVec v = steering_vector(8, cosang, 0.5);
  REQUIRE(v.norm() == Approx(1.0).margin(1e-12));
  const cplx expected = std::polar(1.0, kPi * cosang);
  for (Eigen::Index k = 0; k + 1 < v.size(); ++k)
    REQUIRE(std::abs(v[k + 1] / v[k] - expected) < 1e-12);
}

TEST_CASE("steering vector rejects bad arguments") {
  REQUIRE_THROWS_AS(steering_vector(0, 0.0), std::invalid_argument);
  REQUIRE_THROWS_AS(steering_vector(4, 1.5), std::invalid_argument);
  REQUIRE_THROWS_AS(steering_vector(4, -1.0001), std::invalid_argument);
}

TEST_CASE("steering vectors have unit norm for random sizes and angles") {
  Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    const auto n = static_cast<Eigen::Index>(1 + rng.uniform(0.0, 128.0));
    const double c = rng.uniform(-1.0, 1.0);
    REQUIRE(steering_vector(n, c).norm() == Approx(1.0).margin(1e-12));
  }
}

TEST_CASE("path set satisfies the configured LOS/NLOS power ratio") {
  const double k_db = 20.0;
  Rng rng(123);
  double los = 0.0, nlos = 0.0;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    const PathSet set = sample_path_set(rng, 3, k_db);
    los += std::norm(set.paths[0].gain);
    nlos += std::norm(set.paths[1].gain) + std::norm(set.paths[2].gain);
  }
  const double ratio = los / nlos;
  REQUIRE(ratio == Approx(db_to_linear(k_db)).epsilon(0.05));
}

TEST_CASE("single-path set is LOS only and angles stay in range") {
  Rng rng(5);
  const PathSet set = sample_path_set(rng, 1, 3.0);
  REQUIRE(set.n_paths() == 1);
  REQUIRE(std::abs(set.paths[0].gain) == Approx(1.0).margin(1e-12));
  REQUIRE(set.paths[0].aoa_cos >= -1.0);
  REQUIRE(set.paths[0].aoa_cos <= 1.0);
  REQUIRE_THROWS_AS(sample_path_set(rng, 0, 3.0), std::invalid_argument);
}

TEST_CASE("identical seeds give bit-identical path sets") {
  Rng a(77), b(77);
  const PathSet sa = sample_path_set(a, 4, 10.0);
  const PathSet sb = sample_path_set(b, 4, 10.0);
  for (int l = 0; l < 4; ++l) {
    REQUIRE(sa.paths[l].gain == sb.paths[l].gain);
    REQUIRE(sa.paths[l].aoa_cos == sb.paths[l].aoa_cos);
    REQUIRE(sa.paths[l].aod_cos == sb.paths[l].aod_cos);
  }
}

TEST_CASE("assembled single-path broadside channel is the all-ones matrix") {
  PathSet set;
  set.paths = {PathComponent{cplx(1.0, 0.0), 0.0, 0.0}};
  const ChannelMatrix h = assemble_channel(set, 6, 3);
  for (Eigen::Index r = 0; r < 6; ++r)
    for (Eigen::Index c = 0; c < 3; ++c) REQUIRE(std::abs(h(r, c) - cplx(1.0, 0.0)) < 1e-12);
}

TEST_CASE("sum form and factored form of the multipath channel agree") {
  Rng rng(31);
  for (int rep = 0; rep < 20; ++rep) {
    const auto n_rx = static_cast<Eigen::Index>(2 + rng.uniform(0.0, 14.0));
    const auto n_tx = static_cast<Eigen::Index>(2 + rng.uniform(0.0, 14.0));
    const int n_paths = 1 + static_cast<int>(rng.uniform(0.0, 4.0));
    const PathSet set = sample_path_set(rng, n_paths, 10.0);

    const ChannelMatrix h_sum = assemble_channel(set, n_rx, n_tx);

    CMat a_r(n_rx, n_paths), a_t(n_tx, n_paths);
    CMat h_a = CMat::Zero(n_paths, n_paths);
    const double scale = std::sqrt(static_cast<double>(n_rx * n_tx) / n_paths);
    for (int l = 0; l < n_paths; ++l) {
      a_r.col(l) = steering_vector(n_rx, set.paths[l].aoa_cos);
      a_t.col(l) = steering_vector(n_tx, set.paths[l].aod_cos);
      h_a(l, l) = scale * set.paths[l].gain;
    }
    const ChannelMatrix h_fact = a_r * h_a * a_t.adjoint();
    REQUIRE((h_sum - h_fact).cwiseAbs().maxCoeff() < 1e-12);

    // Pulling the common scale out of the sum leaves the Frobenius identity.
    const ChannelMatrix bare = path_response_sum(set, n_rx, n_tx);
    REQUIRE(h_sum.squaredNorm() ==
            Approx(scale * scale * bare.squaredNorm()).epsilon(1e-12));
  }
}

TEST_CASE("cascaded channel with zero phases is the plain product") {
  Rng rng(9);
  CMat h_ui(3, 2), h_ib(4, 3);
  for (Eigen::Index i = 0; i < h_ui.size(); ++i) h_ui(i) = rng.cgaussian(1.0);
  for (Eigen::Index i = 0; i < h_ib.size(); ++i) h_ib(i) = rng.cgaussian(1.0);
  const PhaseShiftConfig theta = make_phase_config(RVec::Zero(3));
  const ChannelMatrix h = cascaded_channel(h_ui, theta, h_ib);
  REQUIRE((h - h_ib * h_ui).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("common phase offset factors out of the cascade") {
  Rng rng(10);
  CMat h_ui(5, 2), h_ib(3, 5);
  for (Eigen::Index i = 0; i < h_ui.size(); ++i) h_ui(i) = rng.cgaussian(1.0);
  for (Eigen::Index i = 0; i < h_ib.size(); ++i) h_ib(i) = rng.cgaussian(1.0);
  RVec phases(5);
  for (Eigen::Index i = 0; i < 5; ++i) phases[i] = rng.uniform(0.0, kTwoPi);
  const double delta = 0.83;
  RVec shifted = phases.array() + delta;
  const ChannelMatrix h0 = cascaded_channel(h_ui, make_phase_config(phases), h_ib);
  const ChannelMatrix h1 = cascaded_channel(h_ui, make_phase_config(shifted), h_ib);
  REQUIRE((h1 - std::polar(1.0, delta) * h0).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("small cascade matches the hand-computed triple product") {
  CMat h_ui(3, 2), h_ib(2, 3);
  h_ui << cplx(1, 1), cplx(0, 2), cplx(-1, 0), cplx(2, -1), cplx(0.5, 0.5), cplx(1, 0);
  h_ib << cplx(1, 0), cplx(0, 1), cplx(2, 0), cplx(-1, 1), cplx(1, -1), cplx(0, -2);
  RVec phases(3);
  phases << 0.2, 1.5, 4.0;
  const ChannelMatrix got = cascaded_channel(h_ui, make_phase_config(phases), h_ib);
  CMat expect = CMat::Zero(2, 2);
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c)
      for (int k = 0; k < 3; ++k)
        expect(r, c) += h_ib(r, k) * std::polar(1.0, phases[k]) * h_ui(k, c);
  REQUIRE((got - expect).cwiseAbs().maxCoeff() < 1e-12);

  REQUIRE_THROWS_AS(cascaded_channel(h_ib, make_phase_config(phases), h_ui),
                    std::invalid_argument);
}

TEST_CASE("effective channel vanishes with a zero surface-link gain") {
  Rng rng(3);
  CascadeScenario sc = sample_cascade_scenario(rng, ArrayConfig{8, 16, 4, 0.5}, 3, 20.0, 0.0);
  sc.irs_bs_path.gain = cplx(0.0, 0.0);
  REQUIRE(effective_cascaded_channel(sc).norm() == 0.0);
}

TEST_CASE("single-path effective channel is a rank-one unit-factor outer product") {
  CascadeScenario sc;
  sc.arrays = ArrayConfig{8, 16, 4, 0.5};
  sc.irs_bs_path = PathComponent{cplx(1.0, 0.0), 0.4, -0.3};
  sc.ue_irs_paths.paths = {PathComponent{cplx(1.0, 0.0), 0.25, -0.6}};
  const ChannelMatrix h = effective_cascaded_channel(sc);
  const CVec a_r = steering_vector(16, 0.25);
  const CVec a_t = steering_vector(4, -0.6);
  REQUIRE((h - a_r * a_t.adjoint()).cwiseAbs().maxCoeff() < 1e-14);
  REQUIRE(h.norm() == Approx(1.0).margin(1e-12));  // |gain| * 1 * 1
}

TEST_CASE("full-link measurement route matches the effective-channel route") {
  Rng rng(17);
  const ArrayConfig arrays{12, 16, 6, 0.5};
  const CascadeScenario sc = sample_cascade_scenario(rng, arrays, 3, 20.0, 0.0);

  RVec phases(arrays.n_irs);
  for (Eigen::Index i = 0; i < phases.size(); ++i) phases[i] = rng.uniform(0.0, kTwoPi);
  const PhaseShiftConfig theta = make_phase_config(phases);

  // Full uplink: user -> surface -> base station with matched combining.
  const ChannelMatrix h_ui = path_response_sum(sc.ue_irs_paths, arrays.n_irs, arrays.n_ue);
  const ChannelMatrix h_ib = sc.irs_bs_path.gain *
                             steering_vector(arrays.n_bs, sc.irs_bs_path.aoa_cos) *
                             steering_vector(arrays.n_irs, sc.irs_bs_path.aod_cos).adjoint();
  const CVec w = steering_vector(arrays.n_bs, sc.irs_bs_path.aoa_cos);
  const Eigen::RowVectorXcd via_links = w.adjoint() * cascaded_channel(h_ui, theta, h_ib);

  // Collapsed form: effective combining against the effective channel.
  const CVec b_s = effective_combining(theta, sc.irs_bs_path.aod_cos);
  const Eigen::RowVectorXcd via_eff = b_s.adjoint() * effective_cascaded_channel(sc);

  REQUIRE((via_links - via_eff).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("effective combining with zero phases returns the steering vector") {
  const PhaseShiftConfig theta = make_phase_config(RVec::Zero(16));
  const CVec b = effective_combining(theta, 0.7);
  REQUIRE((b - steering_vector(16, 0.7)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("phase-matched combining aligns every element coherently") {
  const Eigen::Index n = 32;
  const double omega_b = -0.45;
  const CVec a = steering_vector(n, omega_b);
  RVec phases(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    double p = std::arg(a[k]);
    if (p < 0.0) p += kTwoPi;
    phases[k] = p;
  }
  const CVec b = effective_combining(make_phase_config(phases), omega_b);
  const double amp = 1.0 / std::sqrt(static_cast<double>(n));
  for (Eigen::Index k = 0; k < n; ++k) REQUIRE(std::abs(b[k] - cplx(amp, 0.0)) < 1e-12);
}

TEST_CASE("effective combining preserves unit norm for random phases") {
  Rng rng(41);
  RVec phases(24);
  for (Eigen::Index k = 0; k < 24; ++k) phases[k] = rng.uniform(0.0, kTwoPi);
  REQUIRE(effective_combining(make_phase_config(phases), 0.2).norm() ==
          Approx(1.0).margin(1e-12));
}

TEST_CASE("noiseless aligned measurement equals the surface-path gain product") {
  CascadeScenario sc;
  sc.arrays = ArrayConfig{8, 32, 8, 0.5};
  sc.noise_variance = 0.0;
  sc.irs_bs_path = PathComponent{std::polar(1.0, 0.9), 0.1, 0.6};
  sc.ue_irs_paths.paths = {PathComponent{std::polar(0.7, 2.2), 0.0, 0.0}};
  Rng rng(2);
  const CVec f = steering_vector(sc.arrays.n_ue, 0.0);
  const CVec b = steering_vector(sc.arrays.n_irs, 0.0);
  const cplx y = measure(sc, f, b, rng);
  REQUIRE(std::abs(y) == Approx(0.7).margin(1e-12));  // |beta| * |alpha|
  const cplx direct = (b.adjoint() * effective_cascaded_channel(sc) * f)(0, 0);
  REQUIRE(std::abs(y - direct) < 1e-14);
}

TEST_CASE("pure-noise measurements have the configured variance") {
  CascadeScenario sc;
  sc.arrays = ArrayConfig{4, 8, 4, 0.5};
  sc.noise_variance = 0.37;
  sc.irs_bs_path = PathComponent{cplx(0.0, 0.0), 0.2, 0.2};
  sc.ue_irs_paths.paths = {PathComponent{cplx(0.0, 0.0), 0.1, 0.1}};
  Rng rng(8);
  const CVec f = steering_vector(4, 0.3);
  const CVec b = steering_vector(8, -0.2);
  double acc = 0.0;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) acc += std::norm(measure(sc, f, b, rng));
  REQUIRE(acc / draws == Approx(0.37).epsilon(0.05));
}

TEST_CASE("measurement rejects a non-unit beamforming vector") {
  CascadeScenario sc;
  sc.arrays = ArrayConfig{4, 8, 4, 0.5};
  sc.ue_irs_paths.paths = {PathComponent{cplx(1.0, 0.0), 0.1, 0.1}};
  Rng rng(1);
  CVec f = CVec::Ones(4);  // norm 2
  REQUIRE_THROWS_AS(measure(sc, f, steering_vector(8, 0.0), rng), std::invalid_argument);
}

TEST_CASE("bilinear form equals the Kronecker row acting on the vectorized channel") {
  Rng rng(19);
  CMat h(12, 5);
  for (Eigen::Index i = 0; i < h.size(); ++i) h(i) = rng.cgaussian(1.0);
  CVec f(5), b(12);
  for (Eigen::Index i = 0; i < 5; ++i) f[i] = rng.cgaussian(1.0);
  for (Eigen::Index i = 0; i < 12; ++i) b[i] = rng.cgaussian(1.0);
  const cplx direct = (b.adjoint() * h * f)(0, 0);
  const cplx via_kron = (kron_row(f, b) * vec_colmajor(h))(0, 0);
  REQUIRE(std::abs(direct - via_kron) < 1e-12);
}

TEST_CASE("shifting all surface phases rotates the measurement but not its magnitude") {
  Rng rng(23);
  const ArrayConfig arrays{8, 16, 4, 0.5};
  const CascadeScenario sc = sample_cascade_scenario(rng, arrays, 2, 10.0, 0.0);
  RVec phases(arrays.n_irs);
  for (Eigen::Index i = 0; i < phases.size(); ++i) phases[i] = rng.uniform(0.0, kTwoPi);
  const double delta = 1.21;
  const CVec f = steering_vector(arrays.n_ue, 0.33);
  const ChannelMatrix h_eff = effective_cascaded_channel(sc);

  const CVec b0 = effective_combining(make_phase_config(phases), sc.irs_bs_path.aod_cos);
  const CVec b1 = effective_combining(make_phase_config(RVec(phases.array() + delta)),
                                      sc.irs_bs_path.aod_cos);
  const cplx y0 = (b0.adjoint() * h_eff * f)(0, 0);
  const cplx y1 = (b1.adjoint() * h_eff * f)(0, 0);
  REQUIRE(std::abs(y1 - std::polar(1.0, delta) * y0) < 1e-12);
  REQUIRE(std::abs(y1) == Approx(std::abs(y0)).margin(1e-12));
}

TEST_CASE("identical seeds reproduce scenarios and measurements bit for bit") {
  const ArrayConfig arrays{8, 16, 4, 0.5};
  Rng a(99), b(99);
  const CascadeScenario sa = sample_cascade_scenario(a, arrays, 3, 20.0, 0.1);
  const CascadeScenario sb = sample_cascade_scenario(b, arrays, 3, 20.0, 0.1);
  REQUIRE(sa.irs_bs_path.gain == sb.irs_bs_path.gain);
  REQUIRE(effective_cascaded_channel(sa) == effective_cascaded_channel(sb));
  const CVec f = steering_vector(4, 0.1);
  const CVec bs = steering_vector(16, -0.1);
  REQUIRE(measure(sa, f, bs, a) == measure(sb, f, bs, b));
}
