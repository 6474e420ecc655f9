#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "mbp/trainer.hpp"

using mbp::Dataset;
using mbp::ExperimentConfig;
using mbp::Matrix;
using mbp::ScheduleState;

namespace {

Dataset synthetic(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  mbp::RawImages raw;
  raw.count = n;
  raw.pixels.resize(n * mbp::kImagePixels);
  std::uniform_int_distribution<int> px(0, 255), cls(0, 9);
  for (auto& p : raw.pixels) p = static_cast<std::uint8_t>(px(rng));
  std::vector<std::uint8_t> labels(n);
  for (auto& l : labels) l = static_cast<std::uint8_t>(cls(rng));
  return mbp::normalize_and_encode(raw, labels);
}

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.arch = {784, 6, 10};
  c.epochs = 3;
  c.trials = 2;
  c.batch_size = 10;
  c.lr0 = 1e-3;
  return c;
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

TEST_CASE("learning-rate schedule examples") {
  const ScheduleState s{1e-4, 0.5};
  const auto up = mbp::update_learning_rate(s, 0.4);
  CHECK(up.lr == doctest::Approx(1.1e-4));
  CHECK(up.prev_error == 0.4);
  CHECK(mbp::update_learning_rate(s, 0.6).lr == doctest::Approx(0.7e-4));
  CHECK(mbp::update_learning_rate(s, 0.5).lr == 1e-4);
}

TEST_CASE("learning-rate schedule over a synthetic error sequence") {
  const std::vector<double> errors = {0.9, 0.5, 0.4, 0.45, 0.45, 0.3};
  ScheduleState s{1.0, 1.0};
  double want = 1.0;
  double prev = 1.0;
  for (double e : errors) {
    s = mbp::update_learning_rate(s, e);
    if (e < prev) want *= 1.1;
    if (e > prev) want *= 0.7;
    prev = e;
    CHECK(s.lr == doctest::Approx(want).epsilon(1e-14));
  }
}

TEST_CASE("predict breaks ties toward the lowest index") {
  CHECK(mbp::predict(Matrix{{0.5, 0.5, 0.1}, {0.1, 0.9, 0.9}}) == std::vector<std::size_t>{0, 1});
  const std::vector<std::uint8_t> labels = {0, 2};
  mbp::Network net = mbp::init_network({784, 3, 10}, mbp::Activation::relu, false, 1u);
  for (auto& w : net.weights) w = Matrix(w.rows(), w.cols());
  // All outputs are 0.5, so every sample is predicted as class 0.
  CHECK(mbp::evaluate(net, Matrix(2, 784), labels) == 0.5);
}

TEST_CASE("a zero learning rate leaves the weights untouched") {
  const Dataset data = synthetic(30, 1);
  ExperimentConfig c = small_config();
  mbp::Network net = mbp::init_network(c.arch, c.hidden_activation, false, 3u);
  const mbp::Network before = net;
  std::mt19937_64 rng(4);
  mbp::train_epoch(net, data, c, 0.0, rng);
  CHECK(net == before);
}

TEST_CASE("one SGD step matches a scalar oracle") {
  const Dataset data = synthetic(1, 2);
  ExperimentConfig c = small_config();
  c.arch = {784, 3, 10};
  c.batch_size = 1;
  c.hidden_activation = mbp::Activation::sigmoid;
  const double lr = 0.05;
  mbp::Network net = mbp::init_network(c.arch, c.hidden_activation, false, 5u);
  const mbp::Network start = net;
  std::mt19937_64 rng(6);
  mbp::train_epoch(net, data, c, lr, rng);

  const Matrix& w1 = start.weights[0];
  const Matrix& w2 = start.weights[1];
  std::vector<double> h(3), y(10), d2(10), d1(3);
  for (std::size_t j = 0; j < 3; ++j) {
    double z = w1(784, j);
    for (std::size_t i = 0; i < 784; ++i) z += data.images(0, i) * w1(i, j);
    h[j] = sigmoid(z);
  }
  for (std::size_t k = 0; k < 10; ++k) {
    double z = w2(3, k);
    for (std::size_t j = 0; j < 3; ++j) z += h[j] * w2(j, k);
    y[k] = sigmoid(z);
    d2[k] = y[k] - data.one_hot(0, k);
  }
  for (std::size_t j = 0; j < 3; ++j) {
    double s = 0.0;
    for (std::size_t k = 0; k < 10; ++k) s += d2[k] * w2(j, k);
    d1[j] = s * h[j] * (1 - h[j]);
  }
  for (std::size_t k = 0; k < 10; ++k) {
    for (std::size_t j = 0; j <= 3; ++j) {
      const double in = j < 3 ? h[j] : 1.0;
      CHECK(net.weights[1](j, k) == doctest::Approx(w2(j, k) - lr * in * d2[k]).epsilon(1e-12));
    }
  }
  for (std::size_t j = 0; j < 3; ++j) {
    for (std::size_t i : {0u, 100u, 400u, 783u, 784u}) {
      const double in = i < 784 ? data.images(0, i) : 1.0;
      CHECK(net.weights[0](i, j) == doctest::Approx(w1(i, j) - lr * in * d1[j]).epsilon(1e-12));
    }
  }
}

TEST_CASE("weight updates are local to the synapse") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (auto kind : {mbp::UpdateKind::times, mbp::UpdateKind::absmin}) {
    const auto m = mbp::UpdateMethod::continuous(kind);
    Matrix x(4, 5), d(4, 3);
    for (double& v : x.data()) v = u(rng);
    for (double& v : d.data()) v = u(rng) - 1.0;
    const Matrix base = mbp::batch_weight_delta(m, x, d);
    Matrix x2 = x;
    for (std::size_t b = 0; b < 4; ++b) x2(b, 2) += 0.5;
    const Matrix moved = mbp::batch_weight_delta(m, x2, d);
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t j = 0; j < 3; ++j)
        if (i != 2) CHECK(moved(i, j) == base(i, j));
  }
}

TEST_CASE("each epoch visits every sample exactly once") {
  std::mt19937_64 rng(8);
  const auto batches = mbp::epoch_batches(250, 100, rng);
  REQUIRE(batches.size() == 3);
  CHECK(batches[0].size() == 100);
  CHECK(batches[2].size() == 50);
  std::vector<std::size_t> all;
  for (const auto& b : batches) all.insert(all.end(), b.begin(), b.end());
  std::sort(all.begin(), all.end());
  std::vector<std::size_t> want(250);
  std::iota(want.begin(), want.end(), 0);
  CHECK(all == want);
}

TEST_CASE("feedback matrices stay frozen during training") {
  const Dataset data = synthetic(40, 9);
  ExperimentConfig c = small_config();
  c.backward = mbp::BackwardMode::const_random;
  c.method = mbp::UpdateKind::absmin;
  mbp::Network net = mbp::init_network(c.arch, c.hidden_activation, true, 10u);
  const auto b = net.backward;
  const auto w = net.weights;
  std::mt19937_64 rng(11);
  for (int e = 0; e < 3; ++e) mbp::train_epoch(net, data, c, 0.01, rng);
  CHECK(net.backward == b);
  CHECK(net.weights != w);
}

TEST_CASE("trials record epoch 0 and are reproducible") {
  const Dataset train = synthetic(60, 12);
  const Dataset test = synthetic(20, 13);
  ExperimentConfig c = small_config();
  const auto a = mbp::run_trial(c, train, test, 0);
  REQUIRE(a.epochs.size() == 4);
  CHECK(a.epochs[0].epoch == 0);
  CHECK(a.epochs[0].lr == c.lr0);
  CHECK(a.epochs[1].lr == c.lr0);
  CHECK(a.seed == c.seed);
  const auto b = mbp::run_trial(c, train, test, 0);
  for (std::size_t e = 0; e < a.epochs.size(); ++e) {
    CHECK(a.epochs[e].train_error == b.epochs[e].train_error);
    CHECK(a.epochs[e].test_error == b.epochs[e].test_error);
    CHECK(a.epochs[e].lr == b.epochs[e].lr);
  }
  CHECK(mbp::run_trial(c, train, test, 1).seed == c.seed + 1);
}

TEST_CASE("experiment results do not depend on the thread count") {
  const Dataset train = synthetic(60, 14);
  const Dataset test = synthetic(20, 15);
  ExperimentConfig c = small_config();
  c.trials = 3;
  const auto serial = mbp::run_experiment(c, train, test);
  c.threads = 3;
  const auto parallel = mbp::run_experiment(c, train, test);
  REQUIRE(serial.trials.size() == 3);
  for (std::size_t t = 0; t < 3; ++t)
    for (std::size_t e = 0; e < serial.trials[t].epochs.size(); ++e)
      CHECK(serial.trials[t].epochs[e].test_error == parallel.trials[t].epochs[e].test_error);
  CHECK(serial.mean_test_error == parallel.mean_test_error);
}

TEST_CASE("pulse histograms cover every operand of the last epoch") {
  const Dataset train = synthetic(30, 16);
  ExperimentConfig c = small_config();
  c.quant_levels = 20;
  c.collect_pulses = true;
  c.epochs = 1;
  const auto r = mbp::run_trial(c, train, train, 0);
  REQUIRE(r.pulses.has_value());
  std::uint64_t n = 0;
  for (const auto& [k, v] : r.pulses->x[0]) {
    CHECK(k >= 0);
    CHECK(k <= 20);
    n += v;
  }
  CHECK(n == 30u * 785u);
  for (const auto& [k, v] : r.pulses->delta[1]) {
    CHECK(k >= -6);
    CHECK(k <= 13);
  }
}

TEST_CASE("mean_and_sd") {
  const std::vector<double> v = {1.0, 2.0, 3.0};
  const auto [m, sd] = mbp::mean_and_sd(v);
  CHECK(m == 2.0);
  CHECK(sd == 1.0);
  const std::vector<double> one = {0.25};
  CHECK(mbp::mean_and_sd(one).second == 0.0);
}

TEST_CASE("config validation and naming") {
  ExperimentConfig c;
  c.method = mbp::UpdateKind::absmin;
  c.backward = mbp::BackwardMode::const_random;
  c.quant_levels = 20;
  CHECK(c.cell_name() == "absmin-const-20");
  c.quant_levels.reset();
  CHECK(c.cell_name() == "absmin-const-continuous");
  CHECK_NOTHROW(c.validate());
  c.batch_size = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = ExperimentConfig{};
  c.arch = {784, 110, 9};
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}
