#include <doctest.h>

#include <cmath>

#include "beamkit/batch.hpp"
#include "beamkit/hermitian.hpp"
#include "beamkit/rng.hpp"
#include "oracles.hpp"

using namespace beamkit;

namespace {

// Spectrogram with X_m(t,k) = field_m(k) * s(t,k) + noise_m(t,k).
Spectrogram synth_spec(const std::vector<CVec>& h, const CMat& s,
                       const std::vector<CMat>* noise = nullptr) {
  const int m_count = static_cast<int>(h[0].size());
  Spectrogram spec;
  spec.ch.assign(m_count, CMat::Zero(s.rows(), s.cols()));
  for (int m = 0; m < m_count; ++m)
    for (long t = 0; t < s.rows(); ++t)
      for (long k = 0; k < s.cols(); ++k) {
        spec.ch[m](t, k) = h[k](m) * s(t, k);
        if (noise) spec.ch[m](t, k) += (*noise)[k](m, t);
      }
  return spec;
}

SteeringField unit_field(const std::vector<CVec>& h) {
  SteeringField f;
  for (const auto& v : h) f.h.push_back(v / v.norm());
  return f;
}

}  // namespace

TEST_SUITE("batch") {

TEST_CASE("accumulate_wscm basics and oracle") {
  Rng rng(41);
  SUBCASE("single frame with unit weight is the outer product") {
    const CVec x = oracles::random_cvec(3, rng);
    std::vector<CMat> xbins{x};
    const WscmStack v = accumulate_wscm(xbins, RealField::Ones(1, 1));
    CHECK((v.v[0] - x * x.adjoint()).norm() < 1e-14);
  }
  SUBCASE("zero weights give the zero matrix") {
    CMat xk(3, 4);
    for (int t = 0; t < 4; ++t) xk.col(t) = oracles::random_cvec(3, rng);
    const WscmStack v = accumulate_wscm({xk}, RealField::Zero(4, 1));
    CHECK(v.v[0].norm() == 0.0);
  }
  SUBCASE("random case matches the double-loop oracle") {
    const long t_count = 16;
    const int m = 3, k_count = 2;
    std::vector<CMat> xbins(k_count, CMat(m, t_count));
    RealField phi(t_count, k_count);
    for (int k = 0; k < k_count; ++k)
      for (long t = 0; t < t_count; ++t) {
        xbins[k].col(t) = oracles::random_cvec(m, rng);
        phi(t, k) = rng.uniform();
      }
    const WscmStack v = accumulate_wscm(xbins, phi);
    for (int k = 0; k < k_count; ++k) {
      CMat ref = CMat::Zero(m, m);
      for (long t = 0; t < t_count; ++t)
        for (int r = 0; r < m; ++r)
          for (int c = 0; c < m; ++c)
            ref(r, c) += phi(t, k) * xbins[k](r, t) * std::conj(xbins[k](c, t));
      ref /= static_cast<double>(t_count);
      CHECK((v.v[k] - ref).norm() < 1e-12);
    }
  }
}

TEST_CASE("distortionless_filter") {
  Rng rng(42);
  SUBCASE("identity covariance returns the steering vector") {
    CHECK((distortionless_filter(CMat::Identity(3, 3), CVec::Unit(3, 0)) - CVec::Unit(3, 0))
              .norm() < 1e-12);
    CVec h = oracles::random_cvec(4, rng);
    h /= h.norm();
    CHECK((distortionless_filter(CMat::Identity(4, 4), h) - h).norm() < 1e-10);
  }
  SUBCASE("attains the constrained minimum against random feasible probes") {
    for (int inst = 0; inst < 20; ++inst) {
      const int m = 3 + static_cast<int>(rng.raw() % 3);
      const CMat v = oracles::random_hpd(m, rng, 30.0);
      CVec h = oracles::random_cvec(m, rng);
      h /= h.norm();
      const CVec w = distortionless_filter(v, h);
      CHECK(std::abs(w.dot(h) - Complex(1, 0)) < 1e-10);
      const double base = std::real(w.dot(v * w));
      for (int probe = 0; probe < 200; ++probe) {
        CVec r = oracles::random_cvec(m, rng);
        const CVec u = w + (r - h * h.dot(r));  // stays on w^H h = 1
        CHECK(std::real(u.dot(v * u)) - base >= -1e-12);
      }
    }
  }
}

TEST_CASE("mvdr_from_mask") {
  Rng rng(43);
  const int m = 2;
  const long t_total = 24;
  // temporally disjoint scene: speech frames then noise-only frames
  CVec h(m);
  h << Complex(1, 0), Complex(0.6, -0.8);
  h /= h.norm();
  CMat xk(m, t_total);
  RealField mask(t_total, 1);
  for (long t = 0; t < t_total; ++t) {
    if (t < 12) {
      xk.col(t) = h * Complex(2.0 * rng.normal(), 2.0 * rng.normal());
      mask(t, 0) = 1.0;
    } else {
      xk.col(t) = oracles::random_cvec(m, rng);
      mask(t, 0) = 0.0;
    }
  }
  Spectrogram spec;
  spec.ch.assign(m, CMat(t_total, 1));
  for (int c = 0; c < m; ++c) spec.ch[c].col(0) = xk.row(c).transpose();
  const std::vector<CMat> xbins = per_bin(spec);

  SUBCASE("noise SCM equals the noise-only-frame oracle") {
    const WscmStack vn = accumulate_wscm(xbins, weight_mask_mvdr(mask));
    CMat ref = CMat::Zero(m, m);
    for (long t = 12; t < t_total; ++t) ref += xk.col(t) * xk.col(t).adjoint();
    ref /= static_cast<double>(t_total);
    CHECK((vn.v[0] - ref).norm() < 1e-12);
  }
  SUBCASE("all-zero mask reduces to MPDR") {
    SteeringField field;
    field.h = {h};
    const BeamformerFilterField w0 = mvdr_from_mask(xbins, RealField::Zero(t_total, 1), field);
    const WscmStack scm = accumulate_wscm(xbins, RealField::Ones(t_total, 1));
    const CVec ref = distortionless_filter(scm.v[0], h);
    CHECK((w0.w[0] - ref).norm() < 1e-12);
  }
  SUBCASE("all-one mask is the documented loading-only degenerate case") {
    SteeringField field;
    field.h = {h};
    const BeamformerFilterField w1 = mvdr_from_mask(xbins, RealField::Ones(t_total, 1), field);
    CHECK(std::abs(w1.w[0].dot(h) - Complex(1, 0)) < 1e-10);
  }
}

TEST_CASE("run_batch") {
  Rng rng(44);
  const int m = 3, k_count = 4;
  const long t_count = 32;
  std::vector<CVec> h(k_count);
  for (int k = 0; k < k_count; ++k) {
    h[k] = oracles::random_cvec(m, rng);
    h[k] /= h[k].norm();
  }
  CMat s(t_count, k_count);
  for (long t = 0; t < t_count; ++t)
    for (int k = 0; k < k_count; ++k) s(t, k) = 2.0 * rng.normal_complex();

  SUBCASE("MPDR on a noiseless single-source scene passes the source through") {
    const Spectrogram spec = synth_spec(h, s);
    const BatchResult res =
        run_batch(spec, unit_field(h), BeamformerVariant::Mpdr, nullptr, 10, ModelParams{});
    CHECK((res.y - s).norm() < 1e-10 * s.norm());
    CHECK(res.diag.distortionless_residuals.back() < 1e-10);
  }
  SUBCASE("iters = 0 leaves the reference channel") {
    const Spectrogram spec = synth_spec(h, s);
    const BatchResult res =
        run_batch(spec, unit_field(h), BeamformerVariant::Mldr, nullptr, 0, ModelParams{});
    CHECK((res.y - spec.ch[0]).norm() < 1e-14);
  }
  SUBCASE("missing mask is rejected by name") {
    const Spectrogram spec = synth_spec(h, s);
    CHECK_THROWS_WITH_AS(
        run_batch(spec, unit_field(h), BeamformerVariant::MaskSMldr, nullptr, 2, ModelParams{}),
        doctest::Contains("mask_s_mldr"), InvalidInput);
  }
}

TEST_CASE("one sparse-variant round matches a scripted oracle on a toy") {
  Rng rng(45);
  const int m = 2;
  const long t_count = 8;
  std::vector<CVec> h{oracles::random_cvec(m, rng)};
  h[0] /= h[0].norm();
  CMat s(t_count, 1);
  RealField mask(t_count, 1);
  for (long t = 0; t < t_count; ++t) {
    s(t, 0) = rng.normal_complex() * 2.0;
    mask(t, 0) = rng.uniform();
  }
  std::vector<CMat> noise{CMat(m, t_count)};
  for (long t = 0; t < t_count; ++t) noise[0].col(t) = 0.3 * oracles::random_cvec(m, rng);
  const Spectrogram spec = synth_spec(h, s, &noise);
  ModelParams params;

  const BatchResult res =
      run_batch(spec, unit_field(h), BeamformerVariant::MaskSMldr, &mask, 1, params);

  // scripted round: Y = X_1; lambda = movavg(M medmag^2)/4; phi = 1/(2 sqrt(l)|Y|);
  // V = (1/T) sum phi x x^H; w = V^{-1} h / (h^H V^{-1} h)
  const RealField medmag = median_magnitude(spec, {});
  const CMat y0 = spec.ch[0];
  RealField lambda(t_count, 1), phi(t_count, 1);
  for (long t = 0; t < t_count; ++t) {
    const long lo = std::max<long>(0, t - 1), hi = std::min<long>(t_count - 1, t + 1);
    double acc = 0.0;
    for (long i = lo; i <= hi; ++i) acc += mask(i, 0) * medmag(i, 0) * medmag(i, 0);
    lambda(t, 0) = std::max(acc / (4.0 * (hi - lo + 1)), params.tvv_floor);
    phi(t, 0) = std::min(
        1.0 / (2.0 * std::sqrt(lambda(t, 0)) * std::max(std::abs(y0(t, 0)), params.mag_floor)),
        params.phi0);
  }
  const std::vector<CMat> xbins = per_bin(spec);
  CMat v = CMat::Zero(m, m);
  for (long t = 0; t < t_count; ++t)
    v += phi(t, 0) * xbins[0].col(t) * xbins[0].col(t).adjoint();
  v /= static_cast<double>(t_count);
  const CVec u = oracles::gauss_solve(diagonal_load(v, 1e-6), h[0] / h[0].norm());
  const CVec w_ref = u / (h[0] / h[0].norm()).dot(u);

  CHECK((res.filters.w[0] - w_ref).norm() < 1e-9 * w_ref.norm());
}

TEST_CASE("non-ICA steering estimation drivers") {
  Rng rng(49);
  const int m = 3, k_count = 3;
  const long t_count = 60;
  // temporally disjoint speech and noise per bin, exact 0/1 mask
  std::vector<CVec> h_true(k_count);
  std::vector<CMat> xbins(k_count, CMat(m, t_count));
  RealField mask(t_count, k_count);
  for (int k = 0; k < k_count; ++k) {
    CVec h = oracles::random_cvec(m, rng);
    h /= h.norm();
    h_true[k] = h;
    for (long t = 0; t < t_count; ++t) {
      if (t % 2 == 0) {
        xbins[k].col(t) =
            h * Complex(2.0 * rng.normal(), 2.0 * rng.normal()) + 0.05 * oracles::random_cvec(m, rng);
        mask(t, k) = 1.0;
      } else {
        xbins[k].col(t) = 0.7 * oracles::random_cvec(m, rng);
        mask(t, k) = 0.0;
      }
    }
  }
  Spectrogram spec;
  spec.ch.assign(m, CMat(t_count, k_count));
  for (int k = 0; k < k_count; ++k)
    for (int c = 0; c < m; ++c) spec.ch[c].col(k) = xbins[k].row(c).transpose();

  SUBCASE("mask_only recovers the steering from the mask complement") {
    const BatchResult res = run_batch_with_sve(spec, SveMode::MaskOnly,
                                               BeamformerVariant::MaskMldr, &mask, 1,
                                               ModelParams{});
    for (int k = 0; k < k_count; ++k)
      CHECK(steering_cosine(res.steering.h[k], h_true[k]) > 0.99);
    CHECK(res.diag.distortionless_residuals.back() < 1e-10);
  }
  SUBCASE("wscm alternation converges to a consistent steering estimate") {
    const BatchResult res = run_batch_with_sve(spec, SveMode::Wscm, BeamformerVariant::MaskSMldr,
                                               &mask, 8, ModelParams{});
    for (int k = 0; k < k_count; ++k)
      CHECK(steering_cosine(res.steering.h[k], h_true[k]) > 0.95);
    for (double r : res.diag.distortionless_residuals) CHECK(r < 1e-10);
  }
  SUBCASE("fixed requires a steering field; ICA modes are rejected") {
    CHECK_THROWS_AS(run_batch_with_sve(spec, SveMode::Fixed, BeamformerVariant::Mpdr, nullptr, 1,
                                       ModelParams{}),
                    InvalidInput);
    CHECK_THROWS_AS(run_batch_with_sve(spec, SveMode::IcaHc, BeamformerVariant::Mpdr, nullptr, 1,
                                       ModelParams{}),
                    InvalidInput);
  }
}

TEST_CASE("weight scale invariance makes MPDR equal constant-variance MLDR") {
  Rng rng(46);
  const int m = 3;
  const long t_count = 20;
  CMat xk(m, t_count);
  for (long t = 0; t < t_count; ++t) xk.col(t) = oracles::random_cvec(m, rng);
  CVec h = oracles::random_cvec(m, rng);
  h /= h.norm();
  const WscmStack a = accumulate_wscm({xk}, RealField::Ones(t_count, 1));
  const WscmStack b = accumulate_wscm({xk}, RealField::Constant(t_count, 1, 1.0 / 0.37));
  const CVec wa = distortionless_filter(a.v[0], h);
  const CVec wb = distortionless_filter(b.v[0], h);
  CHECK((wa - wb).norm() < 1e-10 * wa.norm());
}

TEST_CASE("minimum-weighted-power holds on every variant's final wSCM") {
  Rng rng(48);
  const int m = 3, k_count = 3;
  const long t_count = 40;
  std::vector<CVec> h(k_count);
  std::vector<CMat> noise(k_count, CMat(m, t_count));
  CMat s(t_count, k_count);
  RealField mask(t_count, k_count);
  for (int k = 0; k < k_count; ++k) {
    h[k] = oracles::random_cvec(m, rng);
    h[k] /= h[k].norm();
    for (long t = 0; t < t_count; ++t) {
      s(t, k) = (0.2 + rng.uniform()) * rng.normal_complex();
      noise[k].col(t) = 0.5 * oracles::random_cvec(m, rng);
      mask(t, k) = rng.uniform();
    }
  }
  const Spectrogram spec = synth_spec(h, s, &noise);
  const SteeringField field = unit_field(h);
  const std::vector<CMat> xbins = per_bin(spec);
  const RealField medmag = median_magnitude(spec, {});
  ModelParams params;

  for (BeamformerVariant v :
       {BeamformerVariant::Mpdr, BeamformerVariant::MaskMvdr, BeamformerVariant::Mldr,
        BeamformerVariant::MaskMldr, BeamformerVariant::MaskPMldr, BeamformerVariant::MaskSMldr}) {
    const RealField* mp = requires_mask(v) ? &mask : nullptr;
    const BatchResult res = run_batch(spec, field, v, mp, 4, params);
    // rebuild the wSCM the final outputs induce and probe its solution
    const RealField phi = variant_phi(v, res.y, mp, medmag, params);
    const WscmStack stack = accumulate_wscm(xbins, phi);
    for (int k = 0; k < k_count; ++k) {
      const CVec w = distortionless_filter(stack.v[k], field.h[k]);
      const double base = std::real(w.dot(stack.v[k] * w));
      for (int probe = 0; probe < 100; ++probe) {
        CVec r = 0.5 * oracles::random_cvec(m, rng);
        const CVec u = w + (r - field.h[k] * field.h[k].dot(r));
        CHECK(std::real(u.dot(stack.v[k] * u)) - base >= -1e-12);
      }
      if (!is_iterative(v))  // weights ignore the outputs, so this is the returned filter
        CHECK((w - res.filters.w[k]).norm() < 1e-10 * w.norm());
    }
  }
}

TEST_CASE("MLDR iterations do not increase the model negative log-likelihood") {
  Rng rng(47);
  const int m = 3, k_count = 6;
  const long t_count = 48;
  std::vector<CVec> h(k_count);
  std::vector<CMat> noise(k_count, CMat(m, t_count));
  CMat s(t_count, k_count);
  for (int k = 0; k < k_count; ++k) {
    h[k] = oracles::random_cvec(m, rng);
    h[k] /= h[k].norm();
    for (long t = 0; t < t_count; ++t) {
      const double env = 0.2 + std::fabs(std::sin(0.4 * t));
      s(t, k) = env * rng.normal_complex();
      noise[k].col(t) = 0.4 * oracles::random_cvec(m, rng);
    }
  }
  const Spectrogram spec = synth_spec(h, s, &noise);
  const SteeringField field = unit_field(h);
  double prev = std::numeric_limits<double>::infinity();
  for (int iters = 1; iters <= 6; ++iters) {
    const BatchResult res =
        run_batch(spec, field, BeamformerVariant::Mldr, nullptr, iters, ModelParams{});
    const double nll = oracles::mldr_negative_log_likelihood(res.y, 1);
    CHECK(nll <= prev + 1e-9);
    prev = nll;
  }
}

}  // TEST_SUITE
