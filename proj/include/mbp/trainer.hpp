#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "mbp/mnist_io.hpp"
#include "mbp/network.hpp"
#include "mbp/update.hpp"

namespace mbp {

/// Learning-rate schedule driven by the training-set error: +10% after an
/// epoch whose error fell, -30% after one whose error rose.
struct ScheduleState {
  double lr = 1e-4;
  double prev_error = 1.0;
};

inline constexpr double kLrIncrease = 1.1;
inline constexpr double kLrDecrease = 0.7;

ScheduleState update_learning_rate(ScheduleState state, double epoch_train_error);

/// One cell of the experiment grid plus the training protocol.
struct ExperimentConfig {
  UpdateKind method = UpdateKind::times;
  BackwardMode backward = BackwardMode::transposed;
  std::optional<int> quant_levels;  // nullopt = continuous
  std::vector<std::size_t> arch = {784, 110, 10};
  Activation hidden_activation = Activation::relu;
  int epochs = 50;
  std::size_t batch_size = 100;
  double lr0 = 1e-4;
  int trials = 10;
  std::uint64_t seed = 1;
  Reduction reduction = Reduction::sum;
  /// Use only the first n training samples (0 = all).
  std::size_t train_limit = 0;
  /// Worker threads for independent trials (results do not depend on it).
  int threads = 1;
  /// Record a histogram of pulse counts during the last epoch (discrete only).
  bool collect_pulses = false;

  UpdateMethod update_method() const;
  std::string quant_label() const;
  /// e.g. "absmin-transposed-100"
  std::string cell_name() const;
  void validate() const;
};

struct EpochRecord {
  int epoch = 0;
  double lr = 0.0;
  double train_error = 0.0;
  double test_error = 0.0;
};

/// Signed grid index -> number of operands, per layer, for the signals and
/// deltas entering the weight update.
struct PulseHistogram {
  std::vector<std::map<std::int64_t, std::uint64_t>> x;
  std::vector<std::map<std::int64_t, std::uint64_t>> delta;
};

/// Row 0 is the untrained network; row e (e >= 1) describes epoch e, with the
/// learning rate that epoch used and its running training error.
struct TrialResult {
  std::uint64_t seed = 0;
  std::vector<EpochRecord> epochs;
  std::optional<PulseHistogram> pulses;
  double final_test_error() const { return epochs.back().test_error; }
};

struct EpochStats {
  double train_error = 0.0;  // running misclassification over the epoch
  std::size_t batches = 0;
};

/// Fraction of samples whose argmax output (lowest index on ties) differs
/// from the label.
double evaluate(const Network& net, const Matrix& inputs, std::span<const std::uint8_t> labels);

/// Argmax per row, lowest index on ties.
std::vector<std::size_t> predict(const Matrix& outputs);

/// One shuffled pass of minibatch updates W <- W - lr * dW with the given lr.
/// If `pulses` is non-null and the config is discrete, operand grid indices
/// are tallied into it.
EpochStats train_epoch(Network& net, const Dataset& data, const ExperimentConfig& config,
                       double lr, std::mt19937_64& rng, PulseHistogram* pulses = nullptr);

using EpochCallback = std::function<void(int trial, const EpochRecord&)>;

TrialResult run_trial(const ExperimentConfig& config, const Dataset& train, const Dataset& test,
                      int trial, const EpochCallback& on_epoch = {});

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<TrialResult> trials;
  double mean_test_error = 0.0;
  double sd_test_error = 0.0;  // sample standard deviation (0 for one trial)
  std::vector<EpochRecord> mean_curve;
};

/// Runs trials with seeds seed + 0 ... seed + trials - 1.
ExperimentResult run_experiment(const ExperimentConfig& config, const Dataset& train,
                                const Dataset& test, const EpochCallback& on_epoch = {});

/// Mean and sample standard deviation.
std::pair<double, double> mean_and_sd(std::span<const double> values);

}  // namespace mbp
