#pragma once

#include <optional>
#include <string>

#include "mbp/numerics.hpp"
#include "mbp/pulse_coding.hpp"

namespace mbp {

enum class UpdateKind { times, absmin };

/// How per-sample contributions are combined over a minibatch.
enum class Reduction { sum, mean };

/// Exact product x * d.
inline double times_kernel(double x, double d) { return x * d; }

/// sign(x * d) * min(|x|, |d|); exactly 0 when either argument is 0.
double absmin_kernel(double x, double d);

/// A weight-update rule: kernel plus optional quantization of both operands.
/// Either both schemes are set with equal level counts, or neither is
/// (continuous: operands are used as-is, without clamping).
class UpdateMethod {
 public:
  static UpdateMethod continuous(UpdateKind kind);
  /// Discrete method with the default ranges [0, 5] for signals and [-1, 2]
  /// for deltas.
  static UpdateMethod discrete(UpdateKind kind, int levels);
  static UpdateMethod with_schemes(UpdateKind kind, QuantizationScheme x_scheme,
                                   QuantizationScheme delta_scheme);

  UpdateKind kind() const { return kind_; }
  bool is_discrete() const { return x_scheme_.has_value(); }
  const std::optional<QuantizationScheme>& x_scheme() const { return x_scheme_; }
  const std::optional<QuantizationScheme>& delta_scheme() const { return delta_scheme_; }

  double quantize_x(double x) const { return x_scheme_ ? x_scheme_->quantize(x) : x; }
  double quantize_delta(double d) const { return delta_scheme_ ? delta_scheme_->quantize(d) : d; }

  /// Kernel applied to the quantized operands.
  double apply(double x, double d) const;

  std::string describe() const;

 private:
  UpdateMethod(UpdateKind kind, std::optional<QuantizationScheme> xs,
               std::optional<QuantizationScheme> ds);

  UpdateKind kind_;
  std::optional<QuantizationScheme> x_scheme_;
  std::optional<QuantizationScheme> delta_scheme_;
};

double times_update(double x, double d, const UpdateMethod& method);
double absmin_update(double x, double d, const UpdateMethod& method);

/// Gradient-shaped weight change over a minibatch:
///   out(i,j) = r * sum_b kernel(q_x(X(b,i)), q_d(D(b,j)))
/// with r = 1 for Reduction::sum and 1/batch for Reduction::mean. Samples are
/// accumulated in ascending b. The caller applies W -= lr * out.
Matrix batch_weight_delta(const UpdateMethod& method, const Matrix& x, const Matrix& d,
                          Reduction reduction = Reduction::sum);

std::string to_string(UpdateKind k);
UpdateKind parse_update_kind(const std::string& s);
std::string to_string(Reduction r);
Reduction parse_reduction(const std::string& s);

}  // namespace mbp
