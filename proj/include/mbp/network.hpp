#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "mbp/numerics.hpp"

namespace mbp {

enum class Activation { sigmoid, relu };

double activate(Activation a, double z);

/// Derivative of the activation, from the pre-activation z and output y.
/// relu'(0) is taken as 0.
double activation_derivative(Activation a, double z, double y);

enum class BackwardMode { transposed, const_random };

enum class LossKind { mse, cross_entropy };

/// Multilayer perceptron. weights[k] has shape (n_k + 1) x n_{k+1}; its last
/// row holds the biases. backward[k], when present, has shape n_k x n_{k+1}
/// and is never modified by training.
struct Network {
  std::vector<std::size_t> layer_sizes;
  std::vector<Matrix> weights;
  std::vector<Matrix> backward;
  Activation hidden_activation = Activation::relu;
  Activation output_activation = Activation::sigmoid;

  std::size_t num_layers() const { return weights.size(); }
  bool has_backward() const { return !backward.empty(); }

  friend bool operator==(const Network&, const Network&) = default;
};

/// Uniform init in [-a, a], a = 1 / sqrt(fan_in); biases start at zero.
/// Feedback matrices, if requested, are drawn after all weights.
Network init_network(const std::vector<std::size_t>& layer_sizes, Activation hidden,
                     bool use_const_backward, std::mt19937_64& rng);
Network init_network(const std::vector<std::size_t>& layer_sizes, Activation hidden,
                     bool use_const_backward, std::uint64_t seed);

/// Init bound for a layer with the given fan-in.
double init_bound(std::size_t fan_in);

/// pre[k] and post[k] hold z and f(z) of layer k+1; inputs is x^(0).
struct ForwardTrace {
  Matrix inputs;
  std::vector<Matrix> pre;
  std::vector<Matrix> post;

  const Matrix& outputs() const { return post.back(); }
  /// Presynaptic activations feeding layer k+1 (x^(k)).
  const Matrix& layer_input(std::size_t k) const { return k == 0 ? inputs : post[k - 1]; }
};

ForwardTrace forward(const Network& net, const Matrix& inputs);

/// Loss summed over output units and averaged over the batch.
double compute_loss(const Matrix& outputs, const Matrix& targets, LossKind kind);

/// y - t: the output delta for sigmoid outputs with cross-entropy loss.
Matrix output_delta(const Matrix& outputs, const Matrix& targets);

/// Deltas for every layer, deltas[k] belonging to layer k+1; the last entry
/// is output_delta. Hidden deltas are (delta_next * M^T) .* f'(z), with M the
/// weight matrix (bias row excluded) or the frozen feedback matrix.
std::vector<Matrix> backward_deltas(const Network& net, const ForwardTrace& trace,
                                    const Matrix& output_deltas, BackwardMode mode);

/// Binary checkpoint: "MBPNET1\n" magic, a little-endian u32 byte-order
/// marker, then the layout header followed by every matrix as little-endian
/// IEEE-754 doubles in row-major order. Round-trips bit-exactly.
void save_network(std::ostream& os, const Network& net);
Network load_network(std::istream& is);

std::string to_string(Activation a);
Activation parse_activation(const std::string& s);
std::string to_string(BackwardMode m);
BackwardMode parse_backward_mode(const std::string& s);

}  // namespace mbp
