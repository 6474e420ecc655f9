#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mbp/numerics.hpp"

namespace mbp {

/// Malformed IDX payload. The message says which check failed.
class IdxError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;
inline constexpr std::size_t kImageSide = 28;
inline constexpr std::size_t kImagePixels = kImageSide * kImageSide;
inline constexpr std::size_t kNumClasses = 10;

struct RawImages {
  std::size_t count = 0;
  std::vector<std::uint8_t> pixels;  // count * 784, row-major
};

RawImages parse_idx_images(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> parse_idx_labels(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_idx_images(const RawImages& images);
std::vector<std::uint8_t> encode_idx_labels(std::span<const std::uint8_t> labels);

struct Dataset {
  Matrix images;                     // n x 784, entries in [0, 1]
  std::vector<std::uint8_t> labels;  // class indices 0..9
  Matrix one_hot;                    // n x 10

  std::size_t size() const { return labels.size(); }
  /// First n samples (all if n >= size()).
  Dataset head(std::size_t n) const;
};

/// Pixels p -> p / 255, labels c -> e_c.
Dataset normalize_and_encode(const RawImages& images, std::span<const std::uint8_t> labels);

/// Reads a whole file, transparently inflating gzip (magic 1f 8b).
std::vector<std::uint8_t> read_maybe_gzip(const std::filesystem::path& path);

struct MnistSplits {
  Dataset train;
  Dataset test;
};

/// Looks for the four standard IDX files (optionally with .gz) in dir.
/// Throws std::runtime_error naming the expected paths if any is missing.
MnistSplits load_mnist(const std::filesystem::path& dir);

/// Resolves the data directory: explicit flag, else $MNIST_DATA_DIR, else "data/mnist".
std::filesystem::path resolve_data_dir(const std::string& flag_value);

/// One epoch: a permutation of all sample indices cut into batches of
/// batch_size (the last may be shorter).
std::vector<std::vector<std::size_t>> epoch_batches(std::size_t n, std::size_t batch_size,
                                                    std::mt19937_64& rng);

/// Gathers the rows of a batch.
Matrix gather_rows(const Matrix& m, std::span<const std::size_t> idx);

/// Iterates over (inputs, targets) minibatches of one shuffled epoch.
class MinibatchIterator {
 public:
  MinibatchIterator(const Dataset& ds, std::size_t batch_size, std::mt19937_64& rng);

  bool done() const { return next_ >= batches_.size(); }
  std::size_t num_batches() const { return batches_.size(); }
  /// Indices of the batch about to be returned by next().
  std::span<const std::size_t> peek_indices() const { return batches_[next_]; }

  struct Batch {
    Matrix inputs;
    Matrix targets;
    std::span<const std::size_t> indices;
  };
  Batch next();

 private:
  const Dataset* ds_;
  std::vector<std::vector<std::size_t>> batches_;
  std::size_t next_ = 0;
};

}  // namespace mbp
