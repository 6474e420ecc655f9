#include "mbp/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace mbp {

ScheduleState update_learning_rate(ScheduleState state, double epoch_train_error) {
  if (epoch_train_error < state.prev_error) {
    state.lr *= kLrIncrease;
  } else if (epoch_train_error > state.prev_error) {
    state.lr *= kLrDecrease;
  }
  state.prev_error = epoch_train_error;
  return state;
}

UpdateMethod ExperimentConfig::update_method() const {
  return quant_levels ? UpdateMethod::discrete(method, *quant_levels)
                      : UpdateMethod::continuous(method);
}

std::string ExperimentConfig::quant_label() const {
  return quant_levels ? std::to_string(*quant_levels) : "continuous";
}

std::string ExperimentConfig::cell_name() const {
  return to_string(method) + "-" + to_string(backward) + "-" + quant_label();
}

void ExperimentConfig::validate() const {
  if (arch.size() < 2) throw std::invalid_argument("config: arch needs at least 2 layers");
  if (arch.back() != kNumClasses) throw std::invalid_argument("config: last layer must have 10 units");
  if (arch.front() != kImagePixels) throw std::invalid_argument("config: first layer must have 784 units");
  if (epochs < 0) throw std::invalid_argument("config: epochs must be >= 0");
  if (batch_size < 1) throw std::invalid_argument("config: batch size must be >= 1");
  if (!(lr0 >= 0.0)) throw std::invalid_argument("config: lr0 must be >= 0");
  if (trials < 1) throw std::invalid_argument("config: trials must be >= 1");
  if (quant_levels && *quant_levels < 1) throw std::invalid_argument("config: quant levels must be >= 1");
  if (threads < 1) throw std::invalid_argument("config: threads must be >= 1");
}

std::vector<std::size_t> predict(const Matrix& outputs) {
  std::vector<std::size_t> out(outputs.rows());
  for (std::size_t b = 0; b < outputs.rows(); ++b) {
    auto row = outputs.row(b);
    out[b] = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

double evaluate(const Network& net, const Matrix& inputs, std::span<const std::uint8_t> labels) {
  if (inputs.rows() != labels.size()) throw ShapeError("evaluate: inputs and labels differ in count");
  if (labels.empty()) return 0.0;
  constexpr std::size_t kChunk = 1000;
  std::size_t wrong = 0;
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < inputs.rows(); start += kChunk) {
    const std::size_t end = std::min(inputs.rows(), start + kChunk);
    idx.resize(end - start);
    for (std::size_t i = start; i < end; ++i) idx[i - start] = i;
    const auto pred = predict(forward(net, gather_rows(inputs, idx)).outputs());
    for (std::size_t i = start; i < end; ++i) wrong += pred[i - start] != labels[i] ? 1 : 0;
  }
  return static_cast<double>(wrong) / static_cast<double>(labels.size());
}

namespace {

void tally(std::map<std::int64_t, std::uint64_t>& hist, const Matrix& m,
           const QuantizationScheme& scheme) {
  for (double v : m.data()) ++hist[scheme.index_of(v)];
}

}  // namespace

EpochStats train_epoch(Network& net, const Dataset& data, const ExperimentConfig& config,
                       double lr, std::mt19937_64& rng, PulseHistogram* pulses) {
  const UpdateMethod method = config.update_method();
  if (pulses != nullptr && method.is_discrete()) {
    pulses->x.resize(net.num_layers());
    pulses->delta.resize(net.num_layers());
  } else {
    pulses = nullptr;
  }
  MinibatchIterator it(data, config.batch_size, rng);
  EpochStats stats;
  std::size_t wrong = 0;
  while (!it.done()) {
    const auto batch = it.next();
    const ForwardTrace trace = forward(net, batch.inputs);
    const auto pred = predict(trace.outputs());
    for (std::size_t b = 0; b < pred.size(); ++b) {
      wrong += pred[b] != data.labels[batch.indices[b]] ? 1 : 0;
    }
    const auto deltas =
        backward_deltas(net, trace, output_delta(trace.outputs(), batch.targets), config.backward);
    std::vector<Matrix> grads;
    grads.reserve(net.num_layers());
    for (std::size_t k = 0; k < net.num_layers(); ++k) {
      const Matrix x = append_ones_column(trace.layer_input(k));
      if (pulses != nullptr) {
        tally(pulses->x[k], x, *method.x_scheme());
        tally(pulses->delta[k], deltas[k], *method.delta_scheme());
      }
      grads.push_back(batch_weight_delta(method, x, deltas[k], config.reduction));
    }
    for (std::size_t k = 0; k < net.num_layers(); ++k) {
      auto& w = net.weights[k].data();
      const auto& g = grads[k].data();
      for (std::size_t e = 0; e < w.size(); ++e) w[e] -= lr * g[e];
    }
    ++stats.batches;
  }
  stats.train_error = data.size() == 0 ? 0.0
                                       : static_cast<double>(wrong) / static_cast<double>(data.size());
  return stats;
}

TrialResult run_trial(const ExperimentConfig& config, const Dataset& train, const Dataset& test,
                      int trial, const EpochCallback& on_epoch) {
  config.validate();
  TrialResult result;
  result.seed = config.seed + static_cast<std::uint64_t>(trial);
  std::mt19937_64 rng(result.seed);
  Network net = init_network(config.arch, config.hidden_activation,
                             config.backward == BackwardMode::const_random, rng);

  EpochRecord initial{0, config.lr0, evaluate(net, train.images, train.labels),
                      evaluate(net, test.images, test.labels)};
  result.epochs.push_back(initial);
  if (on_epoch) on_epoch(trial, initial);

  ScheduleState schedule{config.lr0, initial.train_error};
  for (int e = 1; e <= config.epochs; ++e) {
    const double lr = schedule.lr;
    PulseHistogram hist;
    const bool last = e == config.epochs && config.collect_pulses;
    const EpochStats stats = train_epoch(net, train, config, lr, rng, last ? &hist : nullptr);
    if (last && config.quant_levels) result.pulses = std::move(hist);
    schedule = update_learning_rate(schedule, stats.train_error);
    EpochRecord rec{e, lr, stats.train_error, evaluate(net, test.images, test.labels)};
    result.epochs.push_back(rec);
    if (on_epoch) on_epoch(trial, rec);
  }
  return result;
}

std::pair<double, double> mean_and_sd(std::span<const double> values) {
  if (values.empty()) return {0.0, 0.0};
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  if (values.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / static_cast<double>(values.size() - 1))};
}

ExperimentResult run_experiment(const ExperimentConfig& config, const Dataset& train,
                                const Dataset& test, const EpochCallback& on_epoch) {
  config.validate();
  const Dataset limited = config.train_limit > 0 ? train.head(config.train_limit) : Dataset{};
  const Dataset& train_set = config.train_limit > 0 ? limited : train;

  ExperimentResult out;
  out.config = config;
  out.trials.resize(static_cast<std::size_t>(config.trials));

  std::mutex cb_mutex;
  EpochCallback guarded;
  if (on_epoch) {
    guarded = [&](int t, const EpochRecord& r) {
      std::lock_guard lock(cb_mutex);
      on_epoch(t, r);
    };
  }
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int t = next++; t < config.trials; t = next++) {
      out.trials[static_cast<std::size_t>(t)] = run_trial(config, train_set, test, t, guarded);
    }
  };
  const int n_threads = std::min(config.threads, config.trials);
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  }

  std::vector<double> finals;
  for (const auto& t : out.trials) finals.push_back(t.final_test_error());
  std::tie(out.mean_test_error, out.sd_test_error) = mean_and_sd(finals);

  out.mean_curve.resize(out.trials.front().epochs.size());
  for (std::size_t e = 0; e < out.mean_curve.size(); ++e) {
    EpochRecord m{static_cast<int>(e), 0.0, 0.0, 0.0};
    for (const auto& t : out.trials) {
      m.lr += t.epochs[e].lr;
      m.train_error += t.epochs[e].train_error;
      m.test_error += t.epochs[e].test_error;
    }
    const double n = static_cast<double>(out.trials.size());
    m.lr /= n;
    m.train_error /= n;
    m.test_error /= n;
    out.mean_curve[e] = m;
  }
  return out;
}

}  // namespace mbp
