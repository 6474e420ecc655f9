#include "mbp/checks.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "mbp/device.hpp"
#include "mbp/network.hpp"
#include "mbp/pulse_coding.hpp"
#include "mbp/update.hpp"

namespace mbp {

CheckOptions::CheckOptions() : absmin(absmin_kernel) {}

namespace {

int sgn(double v) { return (v > 0.0) - (v < 0.0); }

CheckResult pass(std::string suite, std::string property, std::string detail) {
  return {std::move(suite), std::move(property), true, std::move(detail)};
}

CheckResult fail(std::string suite, std::string property, std::string detail) {
  return {std::move(suite), std::move(property), false, std::move(detail)};
}

}  // namespace

CheckResult check_gradient(const CheckOptions& opt) {
  constexpr double kH = 1e-5;
  constexpr std::size_t kBatch = 3;
  const std::vector<std::size_t> sizes = {4, 3, 2};
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> prob(0.0, 1.0);

  double worst = 0.0;
  int checked = 0;
  while (checked < opt.gradient_coordinates) {
    Network net = init_network(sizes, Activation::sigmoid, false, rng);
    for (auto& w : net.weights)
      for (double& v : w.data()) v = unit(rng);
    Matrix x(kBatch, sizes.front());
    Matrix t(kBatch, sizes.back());
    for (double& v : x.data()) v = unit(rng);
    for (double& v : t.data()) v = prob(rng);

    const ForwardTrace trace = forward(net, x);
    const auto deltas = backward_deltas(net, trace, output_delta(trace.outputs(), t),
                                        BackwardMode::transposed);
    const UpdateMethod times = UpdateMethod::continuous(UpdateKind::times);

    // Summed-over-batch gradient equals batch * d(mean loss)/dW.
    auto loss_sum = [&](const Network& n) {
      return compute_loss(forward(n, x).outputs(), t, LossKind::cross_entropy) *
             static_cast<double>(kBatch);
    };
    for (int c = 0; c < 20 && checked < opt.gradient_coordinates; ++c, ++checked) {
      const std::size_t k = std::uniform_int_distribution<std::size_t>(0, net.num_layers() - 1)(rng);
      const Matrix grad = batch_weight_delta(times, append_ones_column(trace.layer_input(k)),
                                             deltas[k], Reduction::sum);
      const std::size_t e = std::uniform_int_distribution<std::size_t>(0, grad.size() - 1)(rng);
      Network plus = net;
      Network minus = net;
      plus.weights[k].data()[e] += kH;
      minus.weights[k].data()[e] -= kH;
      const double fd = (loss_sum(plus) - loss_sum(minus)) / (2.0 * kH);
      const double g = grad.data()[e];
      const double rel = std::fabs(g - fd) / std::max({std::fabs(g), std::fabs(fd), 1e-8});
      worst = std::max(worst, rel);
    }
  }
  std::ostringstream os;
  os << "max relative error " << worst << " over " << checked << " coordinates (tolerance "
     << opt.gradient_tolerance << ")";
  if (worst < opt.gradient_tolerance) return pass("gradient", "finite-difference-gradient", os.str());
  return fail("gradient", "finite-difference-gradient", os.str());
}

CheckResult check_sign_agreement(const CheckOptions& opt) {
  const auto xs = QuantizationScheme::discrete(kSignalLo, kSignalHi, 20);
  const auto ds = QuantizationScheme::discrete(kDeltaLo, kDeltaHi, 20);
  std::int64_t n = 0;
  auto mismatch = [&](double x, double d) {
    ++n;
    return sgn(opt.absmin(x, d)) != sgn(x * d);
  };
  for (auto i = xs.min_index(); i <= xs.max_index(); ++i) {
    for (auto j = ds.min_index(); j <= ds.max_index(); ++j) {
      const double x = static_cast<double>(i) * xs.step();
      const double d = static_cast<double>(j) * ds.step();
      if (mismatch(x, d)) {
        std::ostringstream os;
        os << "grid point x=" << x << " d=" << d << ": sign(absmin)=" << sgn(opt.absmin(x, d))
           << " sign(x*d)=" << sgn(x * d);
        return fail("sign", "sign-agreement", os.str());
      }
    }
  }
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> dist(-10.0, 10.0);
  for (int r = 0; r < opt.random_sign_pairs; ++r) {
    const double x = dist(rng);
    const double d = dist(rng);
    if (mismatch(x, d)) {
      std::ostringstream os;
      os << "random pair x=" << x << " d=" << d;
      return fail("sign", "sign-agreement", os.str());
    }
  }
  return pass("sign", "sign-agreement", std::to_string(n) + " pairs agree");
}

CheckResult check_pulse_coincidence(const CheckOptions& opt) {
  std::int64_t n = 0;
  for (std::int64_t a = 0; a <= opt.max_pulse_count; ++a) {
    for (std::int64_t b = 0; b <= opt.max_pulse_count; ++b, ++n) {
      const PulseTrain ta{a, Polarity::positive, Phase::phase1};
      const PulseTrain tb{b, Polarity::positive, Phase::phase1};
      if (coincidence_count(ta, tb) != std::min(a, b)) {
        return fail("pulse", "coincidence-equals-min",
                    "counts (" + std::to_string(a) + ", " + std::to_string(b) + ")");
      }
    }
  }
  return pass("pulse", "coincidence-equals-min", std::to_string(n) + " count pairs");
}

CheckResult check_device_cycle(const CheckOptions& opt) {
  const MemristorDevice dev{};
  const PulseProtocol protocol{};
  const auto xs = QuantizationScheme::discrete(kSignalLo, kSignalHi, 20);
  const auto ds = QuantizationScheme::discrete(kDeltaLo, kDeltaHi, 20);

  // Expected steps from pulse counts alone.
  auto expected = [](const QuantizationScheme& xq, const QuantizationScheme& dq, double x,
                     double d) {
    const auto cx = encode_pulses(x, xq).count;
    const double qd = dq.quantize(d);
    const auto cd = encode_pulses(std::fabs(qd), dq).count;
    return -static_cast<std::int64_t>(sgn(qd)) * std::min(cx, cd);
  };
  auto cycle = [&](const QuantizationScheme& xq, const QuantizationScheme& dq, double x,
                   double d) {
    return cycle_steps(dev, run_learning_cycle(dev, protocol, x, d, xq, dq));
  };

  std::int64_t n = 0;
  // 20 x 41 sweep of raw inputs, including deltas outside [-1, 2] that clamp.
  for (int i = 1; i <= 20; ++i) {
    for (int m = 0; m <= 40; ++m, ++n) {
      const double x = 0.25 * i;
      const double d = -3.0 + 0.15 * m;
      if (cycle(xs, ds, x, d) != expected(xs, ds, x, d)) {
        std::ostringstream os;
        os << "x=" << x << " d=" << d << ": cycle " << cycle(xs, ds, x, d) << " steps, expected "
           << expected(xs, ds, x, d);
        return fail("device", "cycle-equals-signed-min", os.str());
      }
    }
  }
  // Every representable grid point, zero included.
  for (auto i = xs.min_index(); i <= xs.max_index(); ++i) {
    for (auto j = ds.min_index(); j <= ds.max_index(); ++j, ++n) {
      const double x = static_cast<double>(i) * xs.step();
      const double d = static_cast<double>(j) * ds.step();
      if (cycle(xs, ds, x, d) != expected(xs, ds, x, d)) {
        return fail("device", "cycle-equals-signed-min",
                    "grid index (" + std::to_string(i) + ", " + std::to_string(j) + ")");
      }
    }
  }
  // With a shared pulse unit the cycle is proportional to -absmin.
  const auto shared_x = QuantizationScheme::discrete(0.0, 3.0, 20);
  const UpdateMethod shared = UpdateMethod::with_schemes(UpdateKind::absmin, shared_x, ds);
  for (auto i = shared_x.min_index(); i <= shared_x.max_index(); ++i) {
    for (auto j = ds.min_index(); j <= ds.max_index(); ++j, ++n) {
      const double x = static_cast<double>(i) * shared_x.step();
      const double d = static_cast<double>(j) * ds.step();
      const double want = -opt.absmin(shared.quantize_x(x), shared.quantize_delta(d)) / ds.step();
      const auto got = cycle(shared_x, ds, x, d);
      if (std::fabs(static_cast<double>(got) - want) > 1e-9) {
        std::ostringstream os;
        os << "x=" << x << " d=" << d << ": cycle " << got << " steps, -absmin/step " << want;
        return fail("device", "cycle-proportional-to-absmin", os.str());
      }
    }
  }
  // Locality: one driven electrode never writes.
  for (std::int64_t c = 0; c <= 20; ++c) {
    for (Phase ph : {Phase::phase1, Phase::phase2}) {
      const PulseTrain none{0, Polarity::positive, ph};
      const PulseTrain x_only{c, Polarity::positive, ph};
      const PulseTrain d_only{c, ph == Phase::phase1 ? Polarity::positive : Polarity::negative, ph};
      const auto a = run_phase(dev, protocol, x_only, none, ph);
      const auto b = run_phase(dev, protocol, none, d_only, ph);
      if (a.conductance != dev.conductance || b.conductance != dev.conductance) {
        return fail("device", "single-electrode-locality",
                    "count " + std::to_string(c) + " changed conductance");
      }
    }
  }
  return pass("device", "cycle-equals-signed-min",
              std::to_string(n) + " cycles match; single-electrode drive is inert");
}

std::vector<std::string> check_suite_names() { return {"gradient", "sign", "pulse", "device"}; }

CheckResult run_check(const std::string& suite, const CheckOptions& opt) {
  if (suite == "gradient") return check_gradient(opt);
  if (suite == "sign") return check_sign_agreement(opt);
  if (suite == "pulse") return check_pulse_coincidence(opt);
  if (suite == "device") return check_device_cycle(opt);
  throw std::invalid_argument("unknown suite '" + suite + "'");
}

}  // namespace mbp
