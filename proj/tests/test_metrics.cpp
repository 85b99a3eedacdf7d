#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "cfhb/metrics.hpp"

using namespace cfhb;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const DerivedParams kRated = derive(ConverterParams{});
const DerivedParams kZeroRipple = derive(with_zero_ripple(ConverterParams{}));
const ModulationScheme kIdcpsm = ModulationScheme::idcpsm(rated_peak_ratio(10.2, kRated));
const ModulationScheme kDcpsm = ModulationScheme::dcpsm(10.2);
const ModulationScheme kSpsm = ModulationScheme::spsm(overlap_limited_spsm(), "overlap-limited");

IntervalMetrics numeric_at(const DerivedParams& d, const ModulationScheme& s, int k) {
  const IntervalPlan p = plan_interval(d, s, k);
  return numeric_metrics(synth_interval(p, d), p);
}

IntervalMetrics analytic_at(const DerivedParams& d, const ModulationScheme& s, int k) {
  return analytic_metrics(s, plan_interval(d, s, k), d);
}

}  // namespace

TEST_CASE("rms and average of elementary shapes") {
  const auto c = PiecewiseLinearWaveform::constant(0.0, 2.0, 3.0);
  CHECK_THAT(rms_of(c, 2.0), WithinRel(3.0, 1e-15));
  CHECK_THAT(avg_of(c, 2.0), WithinRel(3.0, 1e-15));

  const auto ramp = PiecewiseLinearWaveform::from_breakpoints({{0.0, 0.0}, {1.0, 1.0}});
  CHECK_THAT(rms_of(ramp, 1.0), WithinRel(1.0 / std::sqrt(3.0), 1e-15));
  CHECK_THAT(avg_of(ramp, 1.0), WithinRel(0.5, 1e-15));

  const auto tri = PiecewiseLinearWaveform::from_breakpoints({{0.0, 0.0}, {0.5, 1.0}, {1.0, 0.0}});
  CHECK_THAT(rms_of(tri, 1.0), WithinRel(1.0 / std::sqrt(3.0), 1e-15));

  // triangular pulse of height 4 occupying 0.2 of the period
  const auto pulse = PiecewiseLinearWaveform::from_breakpoints({{0.0, 0.0}, {0.1, 4.0}, {0.2, 0.0}, {1.0, 0.0}});
  CHECK_THAT(avg_of(pulse, 1.0), WithinRel(4.0 * 0.2 / 2.0, 1e-15));

  CHECK_THROWS_AS(rms_of(PiecewiseLinearWaveform{}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(avg_of(PiecewiseLinearWaveform{}, 1.0), std::invalid_argument);
}

TEST_CASE("rms agrees with dense sampling of a random waveform") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  std::vector<Segment> segs;
  double t = 0.0;
  for (int i = 0; i < 12; ++i) {
    const double d = 0.05 + 0.1 * (i % 4);
    segs.push_back({t, t + d, u(rng), u(rng)});  // jumps between segments
    t += d;
  }
  const PiecewiseLinearWaveform w(segs);
  const int n = 1'000'000;
  double sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double v = w.eval((i + 0.5) * t / n);
    sq += v * v;
  }
  CHECK_THAT(rms_of(w, t), WithinRel(std::sqrt(sq / n), 1e-6));
}

TEST_CASE("waveform metrics, IDCPSM at the grid peak") {
  const IntervalMetrics m = numeric_at(kRated, kIdcpsm, 500);
  CHECK(m.origin == Origin::numeric);
  CHECK_THAT(m.ilk_rms, WithinRel(4.815137, 1e-6));
  CHECK_THAT(m.s_ac_rms, WithinRel(6.493996, 1e-6));
  CHECK_THAT(m.d_ac_avg, WithinRel(0.051793, 1e-5));
  CHECK_THAT(m.s_dc_rms, WithinRel(8.960042, 1e-6));
  CHECK(m.d_dc_avg == 0.0);
  CHECK_THAT(m.i_cir, WithinAbs(10.2 - kRated.im / 2.0, 1e-12));

  const IntervalPlan p = plan_interval(kRated, kIdcpsm, 500);
  CHECK_THAT(power_delivered(synth_interval(p, kRated), kRated.source.n), WithinRel(2863.313414, 1e-8));
}

TEST_CASE("waveform metrics, DCPSM near the zero crossing") {
  const IntervalMetrics m = numeric_at(kRated, kDcpsm, 56);
  CHECK_THAT(m.ilk_rms, WithinRel(2.875672, 1e-6));
  CHECK_THAT(m.s_ac_rms, WithinRel(2.657943, 1e-6));
  CHECK_THAT(m.d_ac_avg, WithinRel(0.237108, 1e-5));
  CHECK_THAT(m.s_dc_rms, WithinRel(3.765125, 1e-6));
  CHECK_THAT(m.d_dc_avg, WithinRel(0.916522, 1e-6));
}

TEST_CASE("waveform metrics in the zero-ripple limit") {
  const IntervalMetrics i = numeric_at(kZeroRipple, kIdcpsm, 500);
  CHECK_THAT(i.ilk_rms, WithinRel(4.839552, 1e-6));
  CHECK_THAT(i.s_dc_rms, WithinRel(9.005473, 1e-6));
  // 30 deg lands on k=167 (30.06 deg)
  const int k30 = nearest_interval(kZeroRipple, 30.0);
  REQUIRE(k30 == 167);
  const IntervalMetrics d = numeric_at(kZeroRipple, kDcpsm, k30);
  CHECK_THAT(d.ilk_rms, WithinRel(3.178442, 1e-6));
  CHECK_THAT(d.s_ac_rms, WithinRel(3.805771, 1e-6));
  CHECK_THAT(d.d_dc_avg, WithinRel(1.882629, 1e-6));
}

TEST_CASE("closed-form metrics, IDCPSM") {
  const IntervalMetrics m = analytic_at(kRated, kIdcpsm, 500);
  CHECK(m.origin == Origin::analytic);
  CHECK_THAT(m.ilk_rms, WithinAbs(4.61, 0.005));
  CHECK_THAT(m.ilk_rms, WithinRel(4.609536, 1e-6));
  CHECK_THAT(m.s_ac_rms, WithinRel(6.429618, 1e-6));
  CHECK_THAT(m.d_ac_avg, WithinRel(0.055749, 1e-5));
  CHECK_THAT(m.s_dc_rms, WithinAbs(8.58, 0.005));
  CHECK(m.d_dc_avg == 0.0);
  CHECK_FALSE(m.clamped);

  // identical radicands: s_dc = ilk / (sqrt2 n) at every interval
  for (int k = 0; k < 1000; k += 37) {
    const IntervalMetrics a = analytic_at(kRated, kIdcpsm, k);
    CHECK_THAT(a.s_dc_rms, WithinAbs(a.ilk_rms / (std::numbers::sqrt2 * kRated.source.n), 1e-12));
  }

  const IntervalMetrics z = analytic_at(kRated, kIdcpsm, 0);
  CHECK(z.ilk_rms == 0.0);
  CHECK(z.s_ac_rms == 0.0);
  CHECK(z.d_ac_avg == 0.0);
  CHECK(z.s_dc_rms == 0.0);
  CHECK(z.i_cir == 0.0);
}

TEST_CASE("closed-form metrics, DCPSM") {
  const IntervalMetrics peak = analytic_at(kRated, kDcpsm, 500);
  CHECK_THAT(peak.ilk_rms, WithinRel(4.730001, 1e-6));
  CHECK_THAT(peak.s_ac_rms, WithinRel(6.510358, 1e-6));
  CHECK_THAT(peak.d_ac_avg, WithinRel(0.067559, 1e-5));
  CHECK_THAT(peak.d_dc_avg, WithinRel(4.931437, 1e-6));
  CHECK_THAT(peak.s_dc_rms, WithinAbs(3.76, 0.01));
  const IntervalMetrics low = analytic_at(kRated, kDcpsm, 56);
  CHECK_THAT(low.ilk_rms, WithinRel(2.848136, 1e-6));
  CHECK_THAT(low.d_dc_avg, WithinRel(0.892951, 1e-6));
  CHECK(low.s_dc_rms == peak.s_dc_rms);
}

TEST_CASE("closed-form metrics, SPSM") {
  const IntervalMetrics m = analytic_at(kRated, kSpsm, 500);
  CHECK_THAT(m.ilk_rms, WithinRel(5.712131971, 1e-8));
  CHECK_THAT(m.d_ac_avg, WithinRel(0.199797024, 1e-8));
  CHECK_THAT(m.s_dc_rms, WithinRel(m.ilk_rms / (std::numbers::sqrt2 * kRated.source.n), 1e-12));
  CHECK(m.s_ac_rms == 0.0);  // negative radicand at this point
  CHECK(m.clamped);
  CHECK(m.d_dc_avg == 0.0);

  const ModulationScheme bare = ModulationScheme::spsm(nullptr);
  IntervalPlan p = plan_interval(kRated, kSpsm, 500);
  CHECK_THROWS_AS(analytic_metrics(bare, p, kRated), MissingParameterError);
  CHECK_THROWS_AS(analytic_metrics(kDcpsm, p, kRated), std::invalid_argument);
}

TEST_CASE("circulating current") {
  const IntervalPlan i90 = plan_interval(kRated, kIdcpsm, 500);
  CHECK_THAT(circulating_current(i90), WithinAbs(5.59, 0.005));
  const IntervalPlan d10 = plan_interval(kRated, kDcpsm, 56);
  const IntervalPlan i10 = plan_interval(kRated, kIdcpsm, 56);
  CHECK_THAT(circulating_current(d10), WithinAbs(10.2 - d10.ig / 2.0, 1e-12));
  CHECK_THAT(circulating_current(d10), WithinRel(9.40, 0.01));
  CHECK_THAT(circulating_current(i10), WithinRel(0.97, 0.01));
  CHECK(circulating_current(plan_interval(kRated, kIdcpsm, 0)) == 0.0);
}

TEST_CASE("zero-input interval measures zero") {
  const IntervalMetrics m = numeric_at(kRated, kIdcpsm, 0);
  CHECK(m.ilk_rms == 0.0);
  CHECK(m.s_ac_rms == 0.0);
  CHECK(m.d_ac_avg == 0.0);
  CHECK(m.s_dc_rms == 0.0);
  CHECK(m.d_dc_avg == 0.0);
}

TEST_CASE("winding current near the zero crossing") {
  CHECK(numeric_at(kRated, kIdcpsm, 56).ilk_rms < numeric_at(kRated, kDcpsm, 56).ilk_rms);
  CHECK(analytic_at(kRated, kIdcpsm, 56).ilk_rms < analytic_at(kRated, kDcpsm, 56).ilk_rms);
}
