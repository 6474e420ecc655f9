#include <doctest.h>

#include <algorithm>
#include <random>
#include <stdexcept>

#include "mbp/device.hpp"
#include "mbp/update.hpp"

using mbp::MemristorDevice;
using mbp::Phase;
using mbp::Polarity;
using mbp::PulseProtocol;
using mbp::PulseTrain;
using mbp::QuantizationScheme;

namespace {

// Independent per-slot simulation straight from the waveform rules.
std::int64_t slot_oracle(std::int64_t x_count, std::int64_t d_count, Phase phase,
                         const PulseProtocol& p, const MemristorDevice& dev) {
  const double amp = phase == Phase::phase1 ? p.u_plus : p.u_minus;
  std::int64_t steps = 0;
  for (std::int64_t s = 0; s < std::max(x_count, d_count); ++s) {
    const double a = s < x_count ? amp / 2 : 0.0;
    const double b = s < d_count ? -amp / 2 : 0.0;
    const double v = a - b;
    if (v > dev.v_on) ++steps;
    if (v < dev.v_off) --steps;
  }
  return steps;
}

}  // namespace

TEST_CASE("apply_voltage") {
  const MemristorDevice dev{};
  const PulseProtocol p{};
  CHECK(mbp::apply_voltage(dev, p.u_plus / 2).conductance == dev.conductance);
  CHECK(mbp::apply_voltage(dev, p.u_plus).conductance == doctest::Approx(dev.conductance + dev.g_step));
  CHECK(mbp::apply_voltage(dev, p.u_minus).conductance == doctest::Approx(dev.conductance - dev.g_step));
  CHECK(mbp::apply_voltage(dev, 0.0).conductance == dev.conductance);
  CHECK(mbp::apply_voltage(dev, p.u_minus / 2).conductance == dev.conductance);
}

TEST_CASE("saturation keeps conductance inside [g_min, g_max]") {
  MemristorDevice dev{};
  dev.conductance = dev.g_max - dev.g_step / 2;
  dev = mbp::apply_voltage(dev, 1.5);
  CHECK(dev.conductance == dev.g_max);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> volts(-3.0, 3.0);
  dev.g_step = 0.05;
  for (int i = 0; i < 10000; ++i) {
    dev = mbp::apply_voltage(dev, volts(rng));
    REQUIRE(dev.conductance >= dev.g_min);
    REQUIRE(dev.conductance <= dev.g_max);
  }
}

TEST_CASE("protocol validation") {
  const MemristorDevice dev{};
  CHECK_NOTHROW(PulseProtocol{}.validate_for(dev));
  CHECK_THROWS_AS((PulseProtocol{0.9, -1.5}.validate_for(dev)), std::invalid_argument);
  CHECK_THROWS_AS((PulseProtocol{2.5, -1.5}.validate_for(dev)), std::invalid_argument);
  CHECK_THROWS_AS((PulseProtocol{1.5, -2.5}.validate_for(dev)), std::invalid_argument);
  CHECK_THROWS_AS(mbp::run_phase(dev, PulseProtocol{2.5, -1.5}, {1, Polarity::positive, Phase::phase1},
                                 {1, Polarity::positive, Phase::phase1}, Phase::phase1),
                  std::invalid_argument);
}

TEST_CASE("run_phase examples") {
  const MemristorDevice dev{};
  const PulseProtocol p{};
  const auto up = mbp::run_phase(dev, p, {5, Polarity::positive, Phase::phase1},
                                 {3, Polarity::positive, Phase::phase1}, Phase::phase1);
  CHECK(mbp::cycle_steps(dev, up) == 3);
  CHECK(slot_oracle(5, 3, Phase::phase1, p, dev) == 3);

  const auto idle = mbp::run_phase(dev, p, {5, Polarity::positive, Phase::phase1},
                                   {0, Polarity::positive, Phase::phase1}, Phase::phase1);
  CHECK(idle.conductance == dev.conductance);

  const auto down = mbp::run_phase(dev, p, {4, Polarity::positive, Phase::phase2},
                                   {2, Polarity::negative, Phase::phase2}, Phase::phase2);
  CHECK(mbp::cycle_steps(dev, down) == -2);
  CHECK(slot_oracle(4, 2, Phase::phase2, p, dev) == -2);
}

TEST_CASE("a delta of the wrong polarity leaves its electrode grounded") {
  const MemristorDevice dev{};
  const PulseProtocol p{};
  const auto w = mbp::phase_waveform(p, {3, Polarity::positive, Phase::phase1},
                                     {4, Polarity::negative, Phase::phase2}, Phase::phase1);
  for (double v : w.electrode_b) CHECK(v == 0.0);
  CHECK(mbp::drive(dev, w).conductance == dev.conductance);
}

TEST_CASE("run_phase agrees with the slot oracle for all counts") {
  const MemristorDevice dev{};
  const PulseProtocol p{};
  for (std::int64_t a = 0; a <= 20; ++a) {
    for (std::int64_t b = 0; b <= 20; ++b) {
      const auto g1 = mbp::run_phase(dev, p, {a, Polarity::positive, Phase::phase1},
                                     {b, Polarity::positive, Phase::phase1}, Phase::phase1);
      const auto g2 = mbp::run_phase(dev, p, {a, Polarity::positive, Phase::phase2},
                                     {b, Polarity::negative, Phase::phase2}, Phase::phase2);
      REQUIRE(mbp::cycle_steps(dev, g1) == slot_oracle(a, b, Phase::phase1, p, dev));
      REQUIRE(mbp::cycle_steps(dev, g2) == slot_oracle(a, b, Phase::phase2, p, dev));
    }
  }
}

TEST_CASE("learning cycle examples") {
  const MemristorDevice dev{};
  const PulseProtocol p{};
  const auto xs = QuantizationScheme::discrete(0, 5, 20);
  const auto ds = QuantizationScheme::discrete(-1, 2, 20);
  CHECK(mbp::run_learning_cycle(dev, p, 2.0, 0.0, xs, ds).conductance == dev.conductance);
  CHECK(mbp::run_learning_cycle(dev, p, 0.1, 1.0, xs, ds).conductance == dev.conductance);
  CHECK_THROWS_AS(mbp::run_learning_cycle(dev, p, -0.5, 1.0, xs, ds), std::invalid_argument);

  // x = 1.0 -> 4 pulses, delta = 0.45 -> 3 pulses.
  const auto descent = mbp::run_learning_cycle(dev, p, 1.0, 0.45, xs, ds);
  CHECK(mbp::cycle_steps(dev, descent) == -3);
  const auto physical =
      mbp::run_learning_cycle(dev, p, 1.0, 0.45, xs, ds, mbp::SignConvention::physical);
  CHECK(mbp::cycle_steps(dev, physical) == 3);
  // Negative delta, 2 pulses each way.
  CHECK(mbp::cycle_steps(dev, mbp::run_learning_cycle(dev, p, 0.5, -0.3, xs, ds)) == 2);
}

TEST_CASE("cycle over the full 20-level grid equals -sign(d) * min(counts)") {
  const MemristorDevice dev{};
  const PulseProtocol p{};
  const auto xs = QuantizationScheme::discrete(0, 5, 20);
  const auto ds = QuantizationScheme::discrete(-1, 2, 20);
  for (auto i = xs.min_index(); i <= xs.max_index(); ++i) {
    for (auto j = ds.min_index(); j <= ds.max_index(); ++j) {
      const double x = static_cast<double>(i) * xs.step();
      const double d = static_cast<double>(j) * ds.step();
      const std::int64_t want = (j > 0 ? -1 : (j < 0 ? 1 : 0)) * std::min<std::int64_t>(i, j < 0 ? -j : j);
      REQUIRE(mbp::cycle_steps(dev, mbp::run_learning_cycle(dev, p, x, d, xs, ds)) == want);
    }
  }
}

TEST_CASE("phase order does not matter away from saturation") {
  const MemristorDevice dev{};
  const PulseProtocol p{};
  for (std::int64_t a = 0; a <= 10; ++a) {
    for (std::int64_t b = 0; b <= 10; ++b) {
      const PulseTrain x{a, Polarity::positive, Phase::phase1};
      for (Polarity pol : {Polarity::positive, Polarity::negative}) {
        const PulseTrain d{b, pol, pol == Polarity::positive ? Phase::phase1 : Phase::phase2};
        auto fwd = mbp::run_phase(mbp::run_phase(dev, p, x, d, Phase::phase1), p, x, d, Phase::phase2);
        auto rev = mbp::run_phase(mbp::run_phase(dev, p, x, d, Phase::phase2), p, x, d, Phase::phase1);
        REQUIRE(mbp::cycle_steps(dev, fwd) == mbp::cycle_steps(dev, rev));
      }
    }
  }
}

TEST_CASE("with a shared pulse unit the cycle is proportional to -absmin") {
  const MemristorDevice dev{};
  const PulseProtocol p{};
  const auto xs = QuantizationScheme::discrete(0, 3, 20);  // step 0.15, as the delta grid
  const auto ds = QuantizationScheme::discrete(-1, 2, 20);
  const auto m = mbp::UpdateMethod::with_schemes(mbp::UpdateKind::absmin, xs, ds);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> xd(0.0, 3.5), dd(-1.5, 2.5);
  for (int i = 0; i < 2000; ++i) {
    const double x = xd(rng), d = dd(rng);
    const double delta_g =
        mbp::run_learning_cycle(dev, p, x, d, xs, ds).conductance - dev.conductance;
    REQUIRE(delta_g == doctest::Approx(-mbp::absmin_update(x, d, m) * dev.g_step / ds.step()));
  }
}
