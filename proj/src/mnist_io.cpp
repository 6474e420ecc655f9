#include "mbp/mnist_io.hpp"

#include <zlib.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <numeric>

namespace mbp {

namespace {

std::uint32_t read_be32(std::span<const std::uint8_t> bytes, std::size_t off) {
  return (std::uint32_t{bytes[off]} << 24) | (std::uint32_t{bytes[off + 1]} << 16) |
         (std::uint32_t{bytes[off + 2]} << 8) | std::uint32_t{bytes[off + 3]};
}

void write_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>((v >> s) & 0xffu));
}

std::string hex32(std::uint32_t v) {
  char buf[11];
  std::snprintf(buf, sizeof buf, "0x%08x", v);
  return buf;
}

void check_magic(std::span<const std::uint8_t> bytes, std::uint32_t expected, const char* what) {
  if (bytes.size() < 4) throw IdxError(std::string(what) + ": file shorter than the IDX magic");
  const std::uint32_t magic = read_be32(bytes, 0);
  if (magic == expected) return;
  if (expected == kIdxImagesMagic && magic == kIdxLabelsMagic) {
    throw IdxError("images: labels file given for images (magic 0x00000801)");
  }
  if (expected == kIdxLabelsMagic && magic == kIdxImagesMagic) {
    throw IdxError("labels: images file given for labels (magic 0x00000803)");
  }
  throw IdxError(std::string(what) + ": bad magic " + hex32(magic) + ", expected " +
                 hex32(expected));
}

}  // namespace

RawImages parse_idx_images(std::span<const std::uint8_t> bytes) {
  check_magic(bytes, kIdxImagesMagic, "images");
  if (bytes.size() < 16) throw IdxError("images: truncated header (need 16 bytes)");
  const std::size_t count = read_be32(bytes, 4);
  const std::size_t rows = read_be32(bytes, 8);
  const std::size_t cols = read_be32(bytes, 12);
  if (rows != kImageSide || cols != kImageSide) {
    throw IdxError("images: dimension mismatch, got " + std::to_string(rows) + "x" +
                   std::to_string(cols) + ", expected 28x28");
  }
  const std::size_t expected = count * kImagePixels;
  const std::size_t actual = bytes.size() - 16;
  if (actual < expected) {
    throw IdxError("images: truncated payload, expected " + std::to_string(expected) +
                   " bytes, got " + std::to_string(actual));
  }
  RawImages raw;
  raw.count = count;
  raw.pixels.assign(bytes.begin() + 16, bytes.begin() + 16 + static_cast<std::ptrdiff_t>(expected));
  return raw;
}

std::vector<std::uint8_t> parse_idx_labels(std::span<const std::uint8_t> bytes) {
  check_magic(bytes, kIdxLabelsMagic, "labels");
  if (bytes.size() < 8) throw IdxError("labels: truncated header (need 8 bytes)");
  const std::size_t count = read_be32(bytes, 4);
  const std::size_t actual = bytes.size() - 8;
  if (actual < count) {
    throw IdxError("labels: truncated payload, expected " + std::to_string(count) +
                   " bytes, got " + std::to_string(actual));
  }
  std::vector<std::uint8_t> labels(bytes.begin() + 8,
                                   bytes.begin() + 8 + static_cast<std::ptrdiff_t>(count));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= kNumClasses) {
      throw IdxError("labels: label " + std::to_string(labels[i]) + " at index " +
                     std::to_string(i) + " is outside 0..9");
    }
  }
  return labels;
}

std::vector<std::uint8_t> encode_idx_images(const RawImages& images) {
  std::vector<std::uint8_t> out;
  out.reserve(16 + images.pixels.size());
  write_be32(out, kIdxImagesMagic);
  write_be32(out, static_cast<std::uint32_t>(images.count));
  write_be32(out, kImageSide);
  write_be32(out, kImageSide);
  out.insert(out.end(), images.pixels.begin(), images.pixels.end());
  return out;
}

std::vector<std::uint8_t> encode_idx_labels(std::span<const std::uint8_t> labels) {
  std::vector<std::uint8_t> out;
  out.reserve(8 + labels.size());
  write_be32(out, kIdxLabelsMagic);
  write_be32(out, static_cast<std::uint32_t>(labels.size()));
  out.insert(out.end(), labels.begin(), labels.end());
  return out;
}

Dataset normalize_and_encode(const RawImages& images, std::span<const std::uint8_t> labels) {
  if (images.count != labels.size()) {
    throw std::invalid_argument("normalize_and_encode: " + std::to_string(images.count) +
                                " images but " + std::to_string(labels.size()) + " labels");
  }
  Dataset ds;
  ds.images = Matrix(images.count, kImagePixels);
  std::transform(images.pixels.begin(), images.pixels.end(), ds.images.data().begin(),
                 [](std::uint8_t p) { return static_cast<double>(p) / 255.0; });
  ds.labels.assign(labels.begin(), labels.end());
  ds.one_hot = Matrix(images.count, kNumClasses);
  for (std::size_t i = 0; i < ds.labels.size(); ++i) ds.one_hot(i, ds.labels[i]) = 1.0;
  return ds;
}

Dataset Dataset::head(std::size_t n) const {
  n = std::min(n, size());
  Dataset out;
  out.images = Matrix(n, images.cols(),
                      std::vector<double>(images.data().begin(),
                                          images.data().begin() + static_cast<std::ptrdiff_t>(n * images.cols())));
  out.labels.assign(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(n));
  out.one_hot = Matrix(n, one_hot.cols(),
                       std::vector<double>(one_hot.data().begin(),
                                           one_hot.data().begin() + static_cast<std::ptrdiff_t>(n * one_hot.cols())));
  return out;
}

std::vector<std::uint8_t> read_maybe_gzip(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (bytes.size() < 2 || bytes[0] != 0x1f || bytes[1] != 0x8b) return bytes;

  z_stream zs{};
  if (inflateInit2(&zs, 16 + MAX_WBITS) != Z_OK) throw std::runtime_error("zlib init failed");
  std::vector<std::uint8_t> out;
  std::vector<std::uint8_t> chunk(1 << 20);
  zs.next_in = bytes.data();
  zs.avail_in = static_cast<uInt>(bytes.size());
  int rc = Z_OK;
  while (rc != Z_STREAM_END) {
    zs.next_out = chunk.data();
    zs.avail_out = static_cast<uInt>(chunk.size());
    rc = inflate(&zs, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      inflateEnd(&zs);
      throw std::runtime_error("corrupt gzip data in " + path.string());
    }
    out.insert(out.end(), chunk.begin(), chunk.end() - zs.avail_out);
  }
  inflateEnd(&zs);
  return out;
}

namespace {

std::filesystem::path find_idx(const std::filesystem::path& dir, const std::string& stem,
                               std::vector<std::string>& missing) {
  for (const auto& name : {stem, stem + ".gz"}) {
    if (std::filesystem::exists(dir / name)) return dir / name;
  }
  missing.push_back((dir / stem).string() + "[.gz]");
  return {};
}

}  // namespace

MnistSplits load_mnist(const std::filesystem::path& dir) {
  std::vector<std::string> missing;
  const auto tr_img = find_idx(dir, "train-images-idx3-ubyte", missing);
  const auto tr_lbl = find_idx(dir, "train-labels-idx1-ubyte", missing);
  const auto te_img = find_idx(dir, "t10k-images-idx3-ubyte", missing);
  const auto te_lbl = find_idx(dir, "t10k-labels-idx1-ubyte", missing);
  if (!missing.empty()) {
    std::string msg = "MNIST files not found; expected:";
    for (const auto& m : missing) msg += "\n  " + m;
    msg += "\nPass --data-dir or set MNIST_DATA_DIR.";
    throw std::runtime_error(msg);
  }
  MnistSplits s;
  s.train = normalize_and_encode(parse_idx_images(read_maybe_gzip(tr_img)),
                                 parse_idx_labels(read_maybe_gzip(tr_lbl)));
  s.test = normalize_and_encode(parse_idx_images(read_maybe_gzip(te_img)),
                                parse_idx_labels(read_maybe_gzip(te_lbl)));
  return s;
}

std::filesystem::path resolve_data_dir(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("MNIST_DATA_DIR"); env != nullptr && *env != '\0') return env;
  return "data/mnist";
}

std::vector<std::vector<std::size_t>> epoch_batches(std::size_t n, std::size_t batch_size,
                                                    std::mt19937_64& rng) {
  if (batch_size == 0) throw std::invalid_argument("epoch_batches: batch_size must be >= 1");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < n; start += batch_size) {
    const std::size_t end = std::min(n, start + batch_size);
    batches.emplace_back(perm.begin() + static_cast<std::ptrdiff_t>(start),
                         perm.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

Matrix gather_rows(const Matrix& m, std::span<const std::size_t> idx) {
  Matrix out(idx.size(), m.cols());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    auto src = m.row(idx[r]);
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  return out;
}

MinibatchIterator::MinibatchIterator(const Dataset& ds, std::size_t batch_size,
                                     std::mt19937_64& rng)
    : ds_(&ds), batches_(epoch_batches(ds.size(), batch_size, rng)) {}

MinibatchIterator::Batch MinibatchIterator::next() {
  const auto& idx = batches_.at(next_++);
  return {gather_rows(ds_->images, idx), gather_rows(ds_->one_hot, idx), idx};
}

}  // namespace mbp
