#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace mbp {

/// Result of one oracle suite.
struct CheckResult {
  std::string suite;
  std::string property;  // name of the property that was checked (or that failed)
  bool passed = false;
  std::string detail;
};

using Kernel = std::function<double(double, double)>;

struct CheckOptions {
  /// absmin kernel under test; replaceable to inject faults.
  Kernel absmin;
  std::uint64_t seed = 2016;
  int gradient_coordinates = 100;
  double gradient_tolerance = 1e-5;
  int random_sign_pairs = 100000;
  std::int64_t max_pulse_count = 100;

  CheckOptions();
};

/// Times-kernel gradient over transposed backward deltas vs central finite
/// differences of the cross-entropy loss on random sigmoid [4-3-2] nets.
CheckResult check_gradient(const CheckOptions& opt = {});

/// sign(absmin(x, d)) == sign(x * d) over the 20-level grids and random pairs.
CheckResult check_sign_agreement(const CheckOptions& opt = {});

/// Slot-array coincidence count == min(n1, n2) for all counts 0..max.
CheckResult check_pulse_coincidence(const CheckOptions& opt = {});

/// Device learning cycle vs -sign(delta) * min(pulse counts) over the 20x41
/// input sweep and the full 20-level grid, proportionality to absmin on a
/// shared-step grid, and single-electrode locality.
CheckResult check_device_cycle(const CheckOptions& opt = {});

std::vector<std::string> check_suite_names();

/// Runs one named suite ("gradient", "sign", "pulse", "device").
CheckResult run_check(const std::string& suite, const CheckOptions& opt = {});

}  // namespace mbp
