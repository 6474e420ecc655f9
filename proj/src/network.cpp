#include "mbp/network.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace mbp {

double activate(Activation a, double z) {
  if (a == Activation::relu) return z > 0.0 ? z : 0.0;
  return 1.0 / (1.0 + std::exp(-z));
}

double activation_derivative(Activation a, double z, double y) {
  if (a == Activation::relu) return z > 0.0 ? 1.0 : 0.0;
  return y * (1.0 - y);
}

double init_bound(std::size_t fan_in) { return 1.0 / std::sqrt(static_cast<double>(fan_in)); }

Network init_network(const std::vector<std::size_t>& layer_sizes, Activation hidden,
                     bool use_const_backward, std::mt19937_64& rng) {
  if (layer_sizes.size() < 2) throw std::invalid_argument("init_network: need at least 2 layers");
  if (std::find(layer_sizes.begin(), layer_sizes.end(), 0u) != layer_sizes.end()) {
    throw std::invalid_argument("init_network: layer sizes must be positive");
  }
  Network net;
  net.layer_sizes = layer_sizes;
  net.hidden_activation = hidden;
  for (std::size_t k = 0; k + 1 < layer_sizes.size(); ++k) {
    const std::size_t fan_in = layer_sizes[k];
    const double a = init_bound(fan_in);
    std::uniform_real_distribution<double> dist(-a, a);
    Matrix w(fan_in + 1, layer_sizes[k + 1]);
    for (std::size_t i = 0; i < fan_in; ++i)
      for (double& v : w.row(i)) v = dist(rng);
    net.weights.push_back(std::move(w));
  }
  if (use_const_backward) {
    for (std::size_t k = 0; k + 1 < layer_sizes.size(); ++k) {
      const double a = init_bound(layer_sizes[k]);
      std::uniform_real_distribution<double> dist(-a, a);
      Matrix b(layer_sizes[k], layer_sizes[k + 1]);
      for (double& v : b.data()) v = dist(rng);
      net.backward.push_back(std::move(b));
    }
  }
  return net;
}

Network init_network(const std::vector<std::size_t>& layer_sizes, Activation hidden,
                     bool use_const_backward, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return init_network(layer_sizes, hidden, use_const_backward, rng);
}

ForwardTrace forward(const Network& net, const Matrix& inputs) {
  if (inputs.cols() != net.layer_sizes.front()) {
    throw ShapeError("forward: input width " + std::to_string(inputs.cols()) + " != " +
                     std::to_string(net.layer_sizes.front()));
  }
  ForwardTrace trace;
  trace.inputs = inputs;
  for (std::size_t k = 0; k < net.num_layers(); ++k) {
    const Matrix& x = trace.layer_input(k);
    Matrix z = matmul(append_ones_column(x), net.weights[k]);
    const Activation act =
        k + 1 == net.num_layers() ? net.output_activation : net.hidden_activation;
    Matrix y(z.rows(), z.cols());
    std::transform(z.data().begin(), z.data().end(), y.data().begin(),
                   [act](double v) { return activate(act, v); });
    trace.pre.push_back(std::move(z));
    trace.post.push_back(std::move(y));
  }
  return trace;
}

double compute_loss(const Matrix& outputs, const Matrix& targets, LossKind kind) {
  if (outputs.rows() != targets.rows() || outputs.cols() != targets.cols()) {
    throw ShapeError("compute_loss: outputs " + outputs.shape() + " vs targets " +
                     targets.shape());
  }
  if (outputs.rows() == 0) return 0.0;
  double total = 0.0;
  for (std::size_t b = 0; b < outputs.rows(); ++b) {
    double sample = 0.0;
    for (std::size_t j = 0; j < outputs.cols(); ++j) {
      const double y = outputs(b, j);
      const double t = targets(b, j);
      if (kind == LossKind::mse) {
        sample += (y - t) * (y - t);
      } else {
        if (!(y > 0.0 && y < 1.0)) {
          throw std::domain_error("compute_loss: cross-entropy needs outputs in (0, 1)");
        }
        sample -= t * std::log(y) + (1.0 - t) * std::log(1.0 - y);
      }
    }
    total += sample;
  }
  return total / static_cast<double>(outputs.rows());
}

Matrix output_delta(const Matrix& outputs, const Matrix& targets) {
  if (outputs.rows() != targets.rows() || outputs.cols() != targets.cols()) {
    throw ShapeError("output_delta: outputs " + outputs.shape() + " vs targets " +
                     targets.shape());
  }
  Matrix d(outputs.rows(), outputs.cols());
  for (std::size_t k = 0; k < d.size(); ++k) d.data()[k] = outputs.data()[k] - targets.data()[k];
  return d;
}

std::vector<Matrix> backward_deltas(const Network& net, const ForwardTrace& trace,
                                    const Matrix& output_deltas, BackwardMode mode) {
  const std::size_t layers = net.num_layers();
  if (output_deltas.cols() != net.layer_sizes.back() ||
      output_deltas.rows() != trace.outputs().rows()) {
    throw ShapeError("backward_deltas: output delta " + output_deltas.shape() +
                     " does not match outputs " + trace.outputs().shape());
  }
  if (mode == BackwardMode::const_random && net.backward.size() != layers) {
    throw std::invalid_argument("backward_deltas: const mode needs feedback matrices");
  }
  std::vector<Matrix> deltas(layers);
  deltas[layers - 1] = output_deltas;
  for (std::size_t k = layers - 1; k > 0; --k) {
    // Push deltas of layer k+1 down to layer k through M (n_k x n_{k+1}).
    const std::size_t n_below = net.layer_sizes[k];
    Matrix back = mode == BackwardMode::transposed
                      ? matmul_transpose(deltas[k], net.weights[k], n_below)
                      : matmul_transpose(deltas[k], net.backward[k]);
    const Matrix& z = trace.pre[k - 1];
    const Matrix& y = trace.post[k - 1];
    for (std::size_t e = 0; e < back.size(); ++e) {
      back.data()[e] *= activation_derivative(net.hidden_activation, z.data()[e], y.data()[e]);
    }
    deltas[k - 1] = std::move(back);
  }
  return deltas;
}

namespace {

constexpr std::array<char, 8> kMagic = {'M', 'B', 'P', 'N', 'E', 'T', '1', '\n'};
constexpr std::uint32_t kByteOrderMark = 0x01020304u;

void put_u64(std::ostream& os, std::uint64_t v) {
  std::array<char, 8> b{};
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
  os.write(b.data(), b.size());
}

std::uint64_t get_u64(std::istream& is) {
  std::array<unsigned char, 8> b{};
  if (!is.read(reinterpret_cast<char*>(b.data()), b.size())) {
    throw std::runtime_error("load_network: truncated checkpoint");
  }
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

void put_matrix(std::ostream& os, const Matrix& m) {
  put_u64(os, m.rows());
  put_u64(os, m.cols());
  for (double v : m.data()) put_u64(os, std::bit_cast<std::uint64_t>(v));
}

Matrix get_matrix(std::istream& is) {
  const auto rows = get_u64(is);
  const auto cols = get_u64(is);
  if (rows > (1u << 24) || cols > (1u << 24)) throw std::runtime_error("load_network: bad shape");
  std::vector<double> data(rows * cols);
  for (double& v : data) v = std::bit_cast<double>(get_u64(is));
  return Matrix(rows, cols, std::move(data));
}

}  // namespace

void save_network(std::ostream& os, const Network& net) {
  os.write(kMagic.data(), kMagic.size());
  const std::array<char, 4> bom = {4, 3, 2, 1};  // kByteOrderMark, little-endian
  os.write(bom.data(), bom.size());
  put_u64(os, net.layer_sizes.size());
  for (auto n : net.layer_sizes) put_u64(os, n);
  put_u64(os, static_cast<std::uint64_t>(net.hidden_activation));
  put_u64(os, static_cast<std::uint64_t>(net.output_activation));
  for (const auto& w : net.weights) put_matrix(os, w);
  put_u64(os, net.backward.size());
  for (const auto& b : net.backward) put_matrix(os, b);
}

Network load_network(std::istream& is) {
  std::array<char, 8> magic{};
  if (!is.read(magic.data(), magic.size()) || magic != kMagic) {
    throw std::runtime_error("load_network: not a network checkpoint");
  }
  std::array<unsigned char, 4> bom{};
  is.read(reinterpret_cast<char*>(bom.data()), bom.size());
  const std::uint32_t mark = bom[0] | (bom[1] << 8) | (bom[2] << 16) |
                             (static_cast<std::uint32_t>(bom[3]) << 24);
  if (mark != kByteOrderMark) throw std::runtime_error("load_network: unknown byte order");
  Network net;
  const auto n_sizes = get_u64(is);
  if (n_sizes < 2 || n_sizes > 64) throw std::runtime_error("load_network: bad layer count");
  for (std::uint64_t i = 0; i < n_sizes; ++i) net.layer_sizes.push_back(get_u64(is));
  net.hidden_activation = static_cast<Activation>(get_u64(is));
  net.output_activation = static_cast<Activation>(get_u64(is));
  for (std::uint64_t k = 0; k + 1 < n_sizes; ++k) net.weights.push_back(get_matrix(is));
  const auto n_back = get_u64(is);
  if (n_back != 0 && n_back + 1 != n_sizes) throw std::runtime_error("load_network: bad feedback count");
  for (std::uint64_t k = 0; k < n_back; ++k) net.backward.push_back(get_matrix(is));
  for (std::size_t k = 0; k < net.weights.size(); ++k) {
    if (net.weights[k].rows() != net.layer_sizes[k] + 1 ||
        net.weights[k].cols() != net.layer_sizes[k + 1]) {
      throw std::runtime_error("load_network: weight shape does not match layer sizes");
    }
  }
  return net;
}

std::string to_string(Activation a) { return a == Activation::relu ? "relu" : "sigmoid"; }

Activation parse_activation(const std::string& s) {
  if (s == "relu") return Activation::relu;
  if (s == "sigmoid") return Activation::sigmoid;
  throw std::invalid_argument("unknown activation '" + s + "' (expected relu|sigmoid)");
}

std::string to_string(BackwardMode m) {
  return m == BackwardMode::transposed ? "transposed" : "const";
}

BackwardMode parse_backward_mode(const std::string& s) {
  if (s == "transposed") return BackwardMode::transposed;
  if (s == "const") return BackwardMode::const_random;
  throw std::invalid_argument("unknown backward mode '" + s + "' (expected transposed|const)");
}

}  // namespace mbp
