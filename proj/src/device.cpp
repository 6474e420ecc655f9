#include "mbp/device.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mbp {

void MemristorDevice::validate() const {
  if (!(v_off < 0.0 && 0.0 < v_on)) throw std::invalid_argument("device: need v_off < 0 < v_on");
  if (!(g_step > 0.0)) throw std::invalid_argument("device: g_step must be positive");
  if (!(g_min <= conductance && conductance <= g_max)) {
    throw std::invalid_argument("device: conductance outside [g_min, g_max]");
  }
}

void PulseProtocol::validate_for(const MemristorDevice& dev) const {
  if (!(u_plus > dev.v_on && u_plus / 2.0 < dev.v_on)) {
    throw std::invalid_argument("protocol: need u_plus > v_on and u_plus/2 < v_on");
  }
  if (!(u_minus < dev.v_off && u_minus / 2.0 > dev.v_off)) {
    throw std::invalid_argument("protocol: need u_minus < v_off and u_minus/2 > v_off");
  }
}

MemristorDevice apply_voltage(MemristorDevice dev, double volts) {
  if (volts > dev.v_on) {
    dev.conductance = std::min(dev.conductance + dev.g_step, dev.g_max);
  } else if (volts < dev.v_off) {
    dev.conductance = std::max(dev.conductance - dev.g_step, dev.g_min);
  }
  return dev;
}

PhaseWaveform phase_waveform(const PulseProtocol& protocol, const PulseTrain& x_train,
                             const PulseTrain& d_train, Phase phase) {
  if (x_train.count < 0 || d_train.count < 0) {
    throw std::invalid_argument("phase_waveform: negative pulse count");
  }
  if (x_train.polarity == Polarity::negative && x_train.count > 0) {
    throw std::invalid_argument("phase_waveform: negative x needs the four-phase cycle");
  }
  const Polarity active = phase == Phase::phase1 ? Polarity::positive : Polarity::negative;
  const std::int64_t d_count = d_train.polarity == active ? d_train.count : 0;
  const double amplitude = phase == Phase::phase1 ? protocol.u_plus : protocol.u_minus;

  const auto slots = static_cast<std::size_t>(std::max(x_train.count, d_count));
  PhaseWaveform w{std::vector<double>(slots, 0.0), std::vector<double>(slots, 0.0)};
  std::fill_n(w.electrode_a.begin(), x_train.count, amplitude / 2.0);
  std::fill_n(w.electrode_b.begin(), d_count, -amplitude / 2.0);
  return w;
}

MemristorDevice drive(MemristorDevice dev, const PhaseWaveform& wave) {
  if (wave.electrode_a.size() != wave.electrode_b.size()) {
    throw std::invalid_argument("drive: electrode waveforms differ in length");
  }
  for (std::size_t s = 0; s < wave.electrode_a.size(); ++s) {
    dev = apply_voltage(dev, wave.electrode_a[s] - wave.electrode_b[s]);
  }
  return dev;
}

MemristorDevice run_phase(MemristorDevice dev, const PulseProtocol& protocol,
                          const PulseTrain& x_train, const PulseTrain& d_train, Phase phase) {
  dev.validate();
  protocol.validate_for(dev);
  return drive(dev, phase_waveform(protocol, x_train, d_train, phase));
}

MemristorDevice run_learning_cycle(MemristorDevice dev, const PulseProtocol& protocol, double x,
                                   double delta, const QuantizationScheme& x_scheme,
                                   const QuantizationScheme& delta_scheme,
                                   SignConvention convention) {
  if (x < 0.0) throw std::invalid_argument("run_learning_cycle: x must be non-negative");
  const double emitted = convention == SignConvention::descent ? -delta : delta;
  const PulseTrain x_train = encode_pulses(x, x_scheme);
  // Quantize first so that -delta lands on the same grid magnitude as delta
  // even when the range is asymmetric.
  const double qd = delta_scheme.quantize(delta);
  PulseTrain d_train = encode_pulses(qd, delta_scheme);
  if (convention == SignConvention::descent && d_train.count > 0) {
    d_train.polarity = emitted < 0.0 ? Polarity::negative : Polarity::positive;
    d_train.phase = emitted < 0.0 ? Phase::phase2 : Phase::phase1;
  }
  dev = run_phase(dev, protocol, x_train, d_train, Phase::phase1);
  dev = run_phase(dev, protocol, x_train, d_train, Phase::phase2);
  return dev;
}

std::int64_t cycle_steps(const MemristorDevice& before, const MemristorDevice& after) {
  return std::llround((after.conductance - before.conductance) / before.g_step);
}

}  // namespace mbp
