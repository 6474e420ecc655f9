#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace mbp {

/// Clamp range plus an optional number of gradations.
///
/// Discrete schemes use a uniform grid anchored at zero:
/// {k * step : k integer, lo <= k * step <= hi} with step = (hi - lo) / levels.
/// Zero is always a grid point, so a zero signal maps to zero pulses. For an
/// asymmetric range such as [-1, 2] the grid is lopsided (k in [-6, 13] for 20
/// levels).
class QuantizationScheme {
 public:
  static QuantizationScheme continuous(double lo, double hi);
  static QuantizationScheme discrete(double lo, double hi, int levels);

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  bool is_discrete() const { return levels_.has_value(); }
  /// Number of gradations; only meaningful for discrete schemes.
  int levels() const { return levels_.value_or(0); }
  double step() const { return step_; }
  /// Smallest and largest grid index k (discrete only).
  std::int64_t min_index() const { return min_index_; }
  std::int64_t max_index() const { return max_index_; }

  double clamp(double v) const;
  /// Clamp, then snap to the nearest grid point (ties away from zero).
  /// Continuous schemes only clamp.
  double quantize(double v) const;
  /// Signed grid index of quantize(v).
  std::int64_t index_of(double v) const;

  std::string describe() const;

  friend bool operator==(const QuantizationScheme&, const QuantizationScheme&) = default;

 private:
  QuantizationScheme(double lo, double hi, std::optional<int> levels);

  double lo_ = 0.0;
  double hi_ = 0.0;
  std::optional<int> levels_;
  double step_ = 0.0;
  std::int64_t min_index_ = 0;
  std::int64_t max_index_ = 0;
};

/// Input-signal range (pixels and relu activations) used for quantization.
inline constexpr double kSignalLo = 0.0;
inline constexpr double kSignalHi = 5.0;
/// Backpropagated delta range.
inline constexpr double kDeltaLo = -1.0;
inline constexpr double kDeltaHi = 2.0;

enum class Polarity { positive, negative };

/// Phase 1 of the learning cycle raises conductance, phase 2 lowers it.
enum class Phase { phase1, phase2 };

/// A run of equal-amplitude pulses emitted contiguously from slot 0.
struct PulseTrain {
  std::int64_t count = 0;
  Polarity polarity = Polarity::positive;
  Phase phase = Phase::phase1;

  friend bool operator==(const PulseTrain&, const PulseTrain&) = default;
};

/// Encodes v as |quantize(v)| / step pulses. Non-negative values are assigned
/// to phase 1 with positive polarity, negative values to phase 2 with negative
/// polarity. Throws std::invalid_argument for continuous schemes.
PulseTrain encode_pulses(double v, const QuantizationScheme& scheme);

/// Inverse of encode_pulses on the grid: sign * count * step.
double decode_pulses(const PulseTrain& train, const QuantizationScheme& scheme);

/// Number of clock slots in which both trains are active. Materializes the
/// slot arrays and counts overlaps. Throws std::invalid_argument if the trains
/// belong to different phases.
std::int64_t coincidence_count(const PulseTrain& a, const PulseTrain& b);

}  // namespace mbp
