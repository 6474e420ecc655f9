#include "mbp/update.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace mbp {

double absmin_kernel(double x, double d) {
  if (x == 0.0 || d == 0.0) return 0.0;
  const double m = std::min(std::fabs(x), std::fabs(d));
  return ((x > 0.0) == (d > 0.0)) ? m : -m;
}

UpdateMethod::UpdateMethod(UpdateKind kind, std::optional<QuantizationScheme> xs,
                           std::optional<QuantizationScheme> ds)
    : kind_(kind), x_scheme_(std::move(xs)), delta_scheme_(std::move(ds)) {
  if (x_scheme_.has_value() != delta_scheme_.has_value()) {
    throw std::invalid_argument("UpdateMethod: x and delta must both be discrete or both continuous");
  }
  if (x_scheme_) {
    if (!x_scheme_->is_discrete() || !delta_scheme_->is_discrete()) {
      throw std::invalid_argument("UpdateMethod: schemes must be discrete");
    }
    if (x_scheme_->levels() != delta_scheme_->levels()) {
      throw std::invalid_argument("UpdateMethod: x and delta schemes need equal level counts");
    }
  }
}

UpdateMethod UpdateMethod::continuous(UpdateKind kind) {
  return UpdateMethod(kind, std::nullopt, std::nullopt);
}

UpdateMethod UpdateMethod::discrete(UpdateKind kind, int levels) {
  return UpdateMethod(kind, QuantizationScheme::discrete(kSignalLo, kSignalHi, levels),
                      QuantizationScheme::discrete(kDeltaLo, kDeltaHi, levels));
}

UpdateMethod UpdateMethod::with_schemes(UpdateKind kind, QuantizationScheme x_scheme,
                                        QuantizationScheme delta_scheme) {
  return UpdateMethod(kind, std::move(x_scheme), std::move(delta_scheme));
}

double UpdateMethod::apply(double x, double d) const {
  const double qx = quantize_x(x);
  const double qd = quantize_delta(d);
  return kind_ == UpdateKind::times ? times_kernel(qx, qd) : absmin_kernel(qx, qd);
}

std::string UpdateMethod::describe() const {
  std::string s = to_string(kind_);
  s += is_discrete() ? "/" + std::to_string(x_scheme_->levels()) : "/continuous";
  return s;
}

double times_update(double x, double d, const UpdateMethod& method) {
  return times_kernel(method.quantize_x(x), method.quantize_delta(d));
}

double absmin_update(double x, double d, const UpdateMethod& method) {
  return absmin_kernel(method.quantize_x(x), method.quantize_delta(d));
}

namespace {

Matrix quantized(const Matrix& m, const std::optional<QuantizationScheme>& scheme) {
  if (!scheme) return m;
  Matrix out(m.rows(), m.cols());
  std::transform(m.data().begin(), m.data().end(), out.data().begin(),
                 [&](double v) { return scheme->quantize(v); });
  return out;
}

// Inner loop over output columns: acc[j] += sign(x d_j) min(|x|, |d_j|).
// Zero x contributes nothing and is skipped.
Matrix absmin_batch(const Matrix& x, const Matrix& d) {
  const std::size_t n_in = x.cols();
  const std::size_t n_out = d.cols();
  Matrix out(n_in, n_out);
  std::vector<double> abs_d(n_out);
  for (std::size_t b = 0; b < x.rows(); ++b) {
    const double* drow = d.row(b).data();
    for (std::size_t j = 0; j < n_out; ++j) abs_d[j] = std::fabs(drow[j]);
    const double* xrow = x.row(b).data();
    for (std::size_t i = 0; i < n_in; ++i) {
      const double xi = xrow[i];
      if (xi == 0.0) continue;
      const double ax = std::fabs(xi);
      const double flip = xi > 0.0 ? 1.0 : -1.0;
      double* acc = out.row(i).data();
      for (std::size_t j = 0; j < n_out; ++j) {
        // d_j == 0 yields a signed zero, which leaves acc unchanged.
        acc[j] += std::copysign(std::min(ax, abs_d[j]), flip * drow[j]);
      }
    }
  }
  return out;
}

}  // namespace

Matrix batch_weight_delta(const UpdateMethod& method, const Matrix& x, const Matrix& d,
                          Reduction reduction) {
  if (x.rows() != d.rows()) {
    throw ShapeError("batch_weight_delta: X " + x.shape() + " and D " + d.shape() +
                     " differ in batch size");
  }
  const Matrix qx = quantized(x, method.x_scheme());
  const Matrix qd = quantized(d, method.delta_scheme());
  Matrix out = method.kind() == UpdateKind::times ? transpose_matmul(qx, qd) : absmin_batch(qx, qd);
  if (reduction == Reduction::mean && x.rows() > 0) {
    const double inv = 1.0 / static_cast<double>(x.rows());
    for (double& v : out.data()) v *= inv;
  }
  return out;
}

std::string to_string(UpdateKind k) { return k == UpdateKind::times ? "times" : "absmin"; }

UpdateKind parse_update_kind(const std::string& s) {
  if (s == "times") return UpdateKind::times;
  if (s == "absmin") return UpdateKind::absmin;
  throw std::invalid_argument("unknown update method '" + s + "' (expected times|absmin)");
}

std::string to_string(Reduction r) { return r == Reduction::sum ? "sum" : "mean"; }

Reduction parse_reduction(const std::string& s) {
  if (s == "sum") return Reduction::sum;
  if (s == "mean") return Reduction::mean;
  throw std::invalid_argument("unknown reduction '" + s + "' (expected sum|mean)");
}

}  // namespace mbp
