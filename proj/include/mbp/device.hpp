#pragma once

#include <cstdint>
#include <vector>

#include "mbp/pulse_coding.hpp"

namespace mbp {

/// Idealized threshold-switching memristor. Any voltage above v_on raises
/// conductance by one g_step, any voltage below v_off lowers it by one g_step;
/// the band in between is a dead zone. Conductance saturates at [g_min, g_max].
struct MemristorDevice {
  double conductance = 0.5;
  double v_on = 1.0;
  double v_off = -1.0;
  double g_step = 1e-3;
  double g_min = 0.0;
  double g_max = 1.0;

  /// Throws std::invalid_argument unless v_off < 0 < v_on, g_step > 0 and
  /// g_min <= conductance <= g_max.
  void validate() const;
};

/// Write amplitudes. Each electrode carries half of an amplitude, so only
/// coincident pulses from both sides cross a threshold.
struct PulseProtocol {
  double u_plus = 1.5;
  double u_minus = -1.5;

  /// Throws std::invalid_argument unless u_plus > v_on > u_plus / 2 and
  /// u_minus < v_off < u_minus / 2.
  void validate_for(const MemristorDevice& dev) const;
};

MemristorDevice apply_voltage(MemristorDevice dev, double volts);

/// Per-slot electrode potentials for one phase. The device sees
/// electrode_a[s] - electrode_b[s].
struct PhaseWaveform {
  std::vector<double> electrode_a;
  std::vector<double> electrode_b;
};

/// Builds the waveform of one phase:
///  phase 1: x at +u_plus/2 on A; delta (only if positive) at -u_plus/2 on B.
///  phase 2: x at u_minus/2 on A; delta (only if negative) at -u_minus/2 on B.
/// A delta train of the wrong polarity for the phase leaves B grounded.
PhaseWaveform phase_waveform(const PulseProtocol& protocol, const PulseTrain& x_train,
                             const PulseTrain& d_train, Phase phase);

/// Drives the device slot by slot with the given waveform.
MemristorDevice drive(MemristorDevice dev, const PhaseWaveform& wave);

/// One phase of the learning cycle. Conductance moves by
/// +g_step * min(counts) in phase 1 (delta > 0) and -g_step * min(counts) in
/// phase 2 (delta < 0), saturation aside.
MemristorDevice run_phase(MemristorDevice dev, const PulseProtocol& protocol,
                          const PulseTrain& x_train, const PulseTrain& d_train, Phase phase);

/// Sign convention of a learning cycle.
///  physical: delta > 0 raises conductance (the raw pulse physics).
///  descent:  the delta neuron emits -delta, so the cycle realizes
///            w <- w - lr * absmin(x, delta).
enum class SignConvention { physical, descent };

/// Encodes x and delta, then runs phase 1 followed by phase 2 unconditionally.
/// Requires x >= 0 (two-phase regime); throws std::invalid_argument otherwise.
MemristorDevice run_learning_cycle(MemristorDevice dev, const PulseProtocol& protocol, double x,
                                   double delta, const QuantizationScheme& x_scheme,
                                   const QuantizationScheme& delta_scheme,
                                   SignConvention convention = SignConvention::descent);

/// Conductance change of a cycle in units of g_step, rounded to the nearest
/// integer. Saturation must not occur for this to be meaningful.
std::int64_t cycle_steps(const MemristorDevice& before, const MemristorDevice& after);

}  // namespace mbp
