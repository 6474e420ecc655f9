#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "mbp/pulse_coding.hpp"

using mbp::QuantizationScheme;

namespace {

// Exhaustive nearest-grid-point search, ties away from zero.
double nearest_grid_point(double v, const QuantizationScheme& s) {
  const double c = std::clamp(v, s.lo(), s.hi());
  double best = 0.0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (auto k = s.min_index(); k <= s.max_index(); ++k) {
    const double g = static_cast<double>(k) * s.step();
    const double dist = std::fabs(g - c);
    const bool tie = std::fabs(dist - best_dist) < 1e-12;
    if ((!tie && dist < best_dist) || (tie && std::fabs(g) > std::fabs(best))) {
      best = g;
      best_dist = dist;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("quantize examples") {
  const auto x20 = QuantizationScheme::discrete(0, 5, 20);
  const auto x100 = QuantizationScheme::discrete(0, 5, 100);
  const auto d20 = QuantizationScheme::discrete(-1, 2, 20);
  CHECK(x20.quantize(0.0) == 0.0);
  CHECK(d20.quantize(0.0) == 0.0);
  CHECK(x20.quantize(7.0) == 5.0);
  CHECK(x100.quantize(0.37) == doctest::Approx(0.35).epsilon(1e-12));
  CHECK(x100.quantize(0.37) == nearest_grid_point(0.37, x100));
}

TEST_CASE("the delta grid is anchored at zero and lopsided") {
  const auto d20 = QuantizationScheme::discrete(-1, 2, 20);
  CHECK(d20.step() == doctest::Approx(0.15));
  CHECK(d20.min_index() == -6);
  CHECK(d20.max_index() == 13);
  CHECK(d20.quantize(-1.0) == doctest::Approx(-0.9));
  CHECK(d20.quantize(2.0) == doctest::Approx(1.95));
  const auto d100 = QuantizationScheme::discrete(-1, 2, 100);
  CHECK(d100.min_index() == -33);
  CHECK(d100.max_index() == 66);
}

TEST_CASE("continuous scheme only clamps") {
  const auto c = QuantizationScheme::continuous(0, 5);
  CHECK(c.quantize(0.37) == 0.37);
  CHECK(c.quantize(-1.0) == 0.0);
  CHECK(c.quantize(9.0) == 5.0);
  CHECK_THROWS_AS(mbp::encode_pulses(1.0, c), std::invalid_argument);
}

TEST_CASE("invalid schemes are rejected") {
  CHECK_THROWS_AS(QuantizationScheme::discrete(1, 1, 10), std::invalid_argument);
  CHECK_THROWS_AS(QuantizationScheme::discrete(0, 5, 0), std::invalid_argument);
  CHECK_THROWS_AS(QuantizationScheme::discrete(1, 5, 10), std::invalid_argument);
}

TEST_CASE("encode_pulses examples") {
  const auto x20 = QuantizationScheme::discrete(0, 5, 20);
  const auto d20 = QuantizationScheme::discrete(-1, 2, 20);
  CHECK(mbp::encode_pulses(0.0, x20).count == 0);
  CHECK(mbp::encode_pulses(5.0, x20).count == 20);
  const auto t = mbp::encode_pulses(-0.45, d20);
  CHECK(t.count == 3);
  CHECK(t.polarity == mbp::Polarity::negative);
  CHECK(t.phase == mbp::Phase::phase2);
  CHECK(mbp::encode_pulses(0.3, d20).phase == mbp::Phase::phase1);
}

TEST_CASE("coincidence_count examples") {
  using mbp::Phase;
  using mbp::Polarity;
  using mbp::PulseTrain;
  CHECK(mbp::coincidence_count({7, Polarity::positive, Phase::phase1},
                               {3, Polarity::positive, Phase::phase1}) == 3);
  CHECK(mbp::coincidence_count({0, Polarity::positive, Phase::phase1},
                               {9, Polarity::positive, Phase::phase1}) == 0);
  CHECK(mbp::coincidence_count({4, Polarity::positive, Phase::phase2},
                               {4, Polarity::negative, Phase::phase2}) == 4);
  CHECK_THROWS_AS(mbp::coincidence_count({1, Polarity::positive, Phase::phase1},
                                         {1, Polarity::negative, Phase::phase2}),
                  std::invalid_argument);
}

TEST_CASE("coincidence equals min exhaustively; symmetric and monotone") {
  using mbp::Phase;
  using mbp::Polarity;
  for (int levels : {20, 100}) {
    for (std::int64_t a = 0; a <= levels; ++a) {
      for (std::int64_t b = 0; b <= levels; ++b) {
        const mbp::PulseTrain ta{a, Polarity::positive, Phase::phase1};
        const mbp::PulseTrain tb{b, Polarity::positive, Phase::phase1};
        const auto ab = mbp::coincidence_count(ta, tb);
        REQUIRE(ab == std::min(a, b));
        REQUIRE(ab == mbp::coincidence_count(tb, ta));
        if (a > 0) {
          REQUIRE(mbp::coincidence_count({a - 1, Polarity::positive, Phase::phase1}, tb) <= ab);
        }
      }
    }
  }
}

TEST_CASE("quantize properties on random inputs") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> dist(-4.0, 8.0);
  for (const auto& s : {QuantizationScheme::discrete(0, 5, 20), QuantizationScheme::discrete(0, 5, 100),
                        QuantizationScheme::discrete(-1, 2, 20), QuantizationScheme::discrete(-1, 2, 100)}) {
    for (int i = 0; i < 20000; ++i) {
      const double v = dist(rng);
      const double q = s.quantize(v);
      REQUIRE(s.quantize(q) == q);
      REQUIRE(q == doctest::Approx(nearest_grid_point(v, s)).epsilon(1e-12));
      // Within half a step of the clamped value, except where the grid stops
      // short of an endpoint (e.g. -1 on a 0.15 grid).
      const double c = s.clamp(v);
      const double edge_lo = static_cast<double>(s.min_index()) * s.step();
      const double edge_hi = static_cast<double>(s.max_index()) * s.step();
      if (c >= edge_lo && c <= edge_hi) REQUIRE(std::fabs(q - c) <= s.step() / 2 + 1e-12);
      const auto t = mbp::encode_pulses(v, s);
      REQUIRE(mbp::decode_pulses(t, s) == q);
      REQUIRE(t.count <= s.levels());
    }
  }
}
