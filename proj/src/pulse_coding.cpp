#include "mbp/pulse_coding.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace mbp {

namespace {

// Guards floor/ceil of range/step against representation error, e.g.
// 5 / 0.05 evaluating to 99.999...
constexpr double kIndexSlack = 1e-9;

}  // namespace

QuantizationScheme::QuantizationScheme(double lo, double hi, std::optional<int> levels)
    : lo_(lo), hi_(hi), levels_(levels) {
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw std::invalid_argument("QuantizationScheme: need finite lo < hi");
  }
  if (levels_) {
    if (*levels_ < 1) throw std::invalid_argument("QuantizationScheme: levels must be >= 1");
    step_ = (hi - lo) / *levels_;
    min_index_ = static_cast<std::int64_t>(std::ceil(lo / step_ - kIndexSlack));
    max_index_ = static_cast<std::int64_t>(std::floor(hi / step_ + kIndexSlack));
    if (min_index_ > 0 || max_index_ < 0) {
      throw std::invalid_argument("QuantizationScheme: range must contain zero");
    }
  }
}

QuantizationScheme QuantizationScheme::continuous(double lo, double hi) {
  return QuantizationScheme(lo, hi, std::nullopt);
}

QuantizationScheme QuantizationScheme::discrete(double lo, double hi, int levels) {
  return QuantizationScheme(lo, hi, levels);
}

double QuantizationScheme::clamp(double v) const { return std::clamp(v, lo_, hi_); }

std::int64_t QuantizationScheme::index_of(double v) const {
  if (!levels_) throw std::invalid_argument("index_of: continuous scheme has no grid");
  // std::llround rounds halfway cases away from zero.
  const auto k = static_cast<std::int64_t>(std::llround(clamp(v) / step_));
  return std::clamp(k, min_index_, max_index_);
}

double QuantizationScheme::quantize(double v) const {
  if (!levels_) return clamp(v);
  return static_cast<double>(index_of(v)) * step_;
}

std::string QuantizationScheme::describe() const {
  std::ostringstream os;
  os << "[" << lo_ << ", " << hi_ << "]";
  if (levels_) {
    os << "/" << *levels_;
  } else {
    os << "/continuous";
  }
  return os.str();
}

PulseTrain encode_pulses(double v, const QuantizationScheme& scheme) {
  if (!scheme.is_discrete()) {
    throw std::invalid_argument("encode_pulses: continuous scheme has no pulse encoding");
  }
  const std::int64_t k = scheme.index_of(v);
  PulseTrain t;
  t.count = k < 0 ? -k : k;
  t.polarity = k < 0 ? Polarity::negative : Polarity::positive;
  t.phase = k < 0 ? Phase::phase2 : Phase::phase1;
  return t;
}

double decode_pulses(const PulseTrain& train, const QuantizationScheme& scheme) {
  const double sign = train.polarity == Polarity::negative ? -1.0 : 1.0;
  return sign * static_cast<double>(train.count) * scheme.step();
}

std::int64_t coincidence_count(const PulseTrain& a, const PulseTrain& b) {
  if (a.phase != b.phase) throw std::invalid_argument("coincidence_count: phase mismatch");
  if (a.count < 0 || b.count < 0) throw std::invalid_argument("coincidence_count: negative count");
  const auto slots = static_cast<std::size_t>(std::max(a.count, b.count));
  std::vector<bool> on_a(slots, false);
  std::vector<bool> on_b(slots, false);
  std::fill_n(on_a.begin(), a.count, true);
  std::fill_n(on_b.begin(), b.count, true);
  std::int64_t hits = 0;
  for (std::size_t s = 0; s < slots; ++s) hits += (on_a[s] && on_b[s]) ? 1 : 0;
  return hits;
}

}  // namespace mbp
