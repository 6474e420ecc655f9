// Command-line runner for pulse-coded backpropagation experiments on MNIST.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mbp/checks.hpp"
#include "mbp/mnist_io.hpp"
#include "mbp/records.hpp"
#include "mbp/trainer.hpp"

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CommonFlags {
  std::string arch = "784,110,10";
  std::string activation = "relu";
  int epochs = 50;
  int trials = 10;
  std::size_t batch_size = 100;
  double lr0 = 1e-4;
  std::uint64_t seed = 1;
  std::string reduction = "sum";
  std::size_t train_limit = 0;
  int threads = 1;
  std::string data_dir;
  std::string out_dir = "runs";
  bool quiet = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--arch", f.arch, "Layer sizes, comma separated")->capture_default_str();
  cmd->add_option("--activation", f.activation, "Hidden activation: relu|sigmoid")
      ->capture_default_str();
  cmd->add_option("--epochs", f.epochs, "Training epochs")->capture_default_str();
  cmd->add_option("--trials", f.trials, "Independent trials per cell")->capture_default_str();
  cmd->add_option("--batch-size", f.batch_size, "Minibatch size")->capture_default_str();
  cmd->add_option("--lr0", f.lr0, "Initial learning rate")->capture_default_str();
  cmd->add_option("--seed", f.seed, "Base seed; trial t uses seed + t")->capture_default_str();
  cmd->add_option("--reduction", f.reduction, "Minibatch reduction: sum|mean")
      ->capture_default_str();
  cmd->add_option("--train-limit", f.train_limit, "Use only the first N training samples (0 = all)")
      ->capture_default_str();
  cmd->add_option("--threads", f.threads, "Parallel trials")->capture_default_str();
  cmd->add_option("--data-dir", f.data_dir, "MNIST directory (default: $MNIST_DATA_DIR)");
  cmd->add_option("--out-dir", f.out_dir, "Output directory")->capture_default_str();
  cmd->add_flag("--quiet", f.quiet, "No per-epoch progress on stderr");
}

std::vector<std::size_t> parse_arch(const std::string& s) {
  std::vector<std::size_t> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      out.push_back(std::stoul(tok));
    } catch (const std::exception&) {
      throw UsageError("--arch: '" + tok + "' is not a layer size");
    }
  }
  return out;
}

std::optional<int> parse_quant(const std::string& s) {
  if (s == "continuous") return std::nullopt;
  try {
    const int n = std::stoi(s);
    if (n < 1) throw std::invalid_argument("");
    return n;
  } catch (const std::exception&) {
    throw UsageError("--quant must be a positive integer or 'continuous', got '" + s + "'");
  }
}

mbp::ExperimentConfig base_config(const CommonFlags& f) {
  mbp::ExperimentConfig c;
  try {
    c.arch = parse_arch(f.arch);
    c.hidden_activation = mbp::parse_activation(f.activation);
    c.reduction = mbp::parse_reduction(f.reduction);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  c.epochs = f.epochs;
  c.trials = f.trials;
  c.batch_size = f.batch_size;
  c.lr0 = f.lr0;
  c.seed = f.seed;
  c.train_limit = f.train_limit;
  c.threads = f.threads;
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return c;
}

mbp::EpochCallback progress(const std::string& cell, bool quiet) {
  if (quiet) return {};
  return [cell](int trial, const mbp::EpochRecord& r) {
    std::fprintf(stderr, "[%s] trial %d epoch %d lr %.3g train %.4f test %.4f\n", cell.c_str(),
                 trial, r.epoch, r.lr, r.train_error, r.test_error);
  };
}

void write_pulse_histogram(const std::filesystem::path& path, const mbp::ExperimentResult& res) {
  std::ostringstream os;
  os << "trial,layer,operand,grid_index,count\n";
  for (std::size_t t = 0; t < res.trials.size(); ++t) {
    const auto& h = res.trials[t].pulses;
    if (!h) continue;
    for (std::size_t k = 0; k < h->x.size(); ++k) {
      for (const auto& [idx, n] : h->x[k]) os << t << ',' << k + 1 << ",x," << idx << ',' << n << '\n';
      for (const auto& [idx, n] : h->delta[k])
        os << t << ',' << k + 1 << ",delta," << idx << ',' << n << '\n';
    }
  }
  mbp::write_file_atomic(path, os.str());
}

std::string summary_line(const mbp::ExperimentResult& r) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s: test error %.2f%% ± %.2f%% over %d trial(s), %d epoch(s)",
                r.config.cell_name().c_str(), 100.0 * r.mean_test_error, 100.0 * r.sd_test_error,
                r.config.trials, r.config.epochs);
  return buf;
}

int cmd_train(const CommonFlags& f, const std::string& method, const std::string& backward,
              const std::string& quant, bool emit_pulses) {
  auto cfg = base_config(f);
  try {
    cfg.method = mbp::parse_update_kind(method);
    cfg.backward = mbp::parse_backward_mode(backward);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  cfg.quant_levels = parse_quant(quant);
  if (emit_pulses && !cfg.quant_levels) {
    throw UsageError("--emit-pulses needs a discrete --quant (pulse counts are undefined for continuous)");
  }
  cfg.collect_pulses = emit_pulses;

  const auto data = mbp::load_mnist(mbp::resolve_data_dir(f.data_dir));
  const auto result = mbp::run_experiment(cfg, data.train, data.test, progress(cfg.cell_name(), f.quiet));
  mbp::write_run_files(f.out_dir, result);
  if (emit_pulses) {
    write_pulse_histogram(std::filesystem::path(f.out_dir) / (cfg.cell_name() + ".pulses.csv"), result);
  }
  std::cout << summary_line(result) << '\n';
  return 0;
}

int cmd_table1(const CommonFlags& f, bool summarize_only, bool resume) {
  const auto base = base_config(f);
  std::vector<mbp::CellSummary> cells;
  std::optional<mbp::MnistSplits> data;
  for (auto backward : {mbp::BackwardMode::transposed, mbp::BackwardMode::const_random}) {
    for (auto method : {mbp::UpdateKind::times, mbp::UpdateKind::absmin}) {
      for (const auto& q : mbp::table1_quantizations()) {
        auto cfg = base;
        cfg.method = method;
        cfg.backward = backward;
        cfg.quant_levels = q;
        const auto json_path = std::filesystem::path(f.out_dir) / (cfg.cell_name() + ".json");
        if (summarize_only) {
          cells.push_back(mbp::read_summary(json_path));
          continue;
        }
        if (resume && std::filesystem::exists(json_path)) {
          auto done = mbp::read_summary(json_path);
          if (mbp::config_to_json(done.config) == mbp::config_to_json(cfg)) {
            std::cerr << cfg.cell_name() << ": reusing " << json_path.string() << '\n';
            cells.push_back(std::move(done));
            continue;
          }
        }
        if (!data) data = mbp::load_mnist(mbp::resolve_data_dir(f.data_dir));
        const auto result =
            mbp::run_experiment(cfg, data->train, data->test, progress(cfg.cell_name(), f.quiet));
        mbp::write_run_files(f.out_dir, result);
        std::cerr << summary_line(result) << '\n';
        cells.push_back(mbp::read_summary(json_path));
      }
    }
  }
  const std::string table = mbp::format_table1(cells);
  mbp::write_file_atomic(std::filesystem::path(f.out_dir) / "table1.txt", table);
  std::cout << table;
  return 0;
}

int cmd_surface(const mbp::SurfaceSpec& spec, const std::string& out) {
  if (out.empty() || out == "-") {
    mbp::write_surface_csv(std::cout, spec);
    return 0;
  }
  std::ostringstream os;
  mbp::write_surface_csv(os, spec);
  mbp::write_file_atomic(out, os.str());
  return 0;
}

int cmd_check(std::vector<std::string> suites) {
  if (suites.empty()) suites = mbp::check_suite_names();
  bool ok = true;
  std::cout << "suite\tproperty\tstatus\tdetail\n";
  for (const auto& s : suites) {
    const auto r = mbp::run_check(s);
    ok = ok && r.passed;
    std::cout << r.suite << '\t' << r.property << '\t' << (r.passed ? "PASS" : "FAIL") << '\t'
              << r.detail << '\n';
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pulse-coded (absmin) backpropagation experiments on MNIST"};
  app.require_subcommand(1);

  CommonFlags train_flags;
  std::string method = "times", backward = "transposed", quant = "continuous";
  bool emit_pulses = false;
  auto* train = app.add_subcommand("train", "Train one configuration and write CSV/JSON records");
  add_common(train, train_flags);
  train->add_option("--method", method, "Update kernel: times|absmin")->capture_default_str();
  train->add_option("--backward", backward, "Delta routing: transposed|const")->capture_default_str();
  train->add_option("--quant", quant, "Gradations (integer) or 'continuous'")->capture_default_str();
  train->add_flag("--emit-pulses", emit_pulses, "Write a pulse-count histogram of the last epoch");

  CommonFlags table_flags;
  bool summarize_only = false;
  bool resume = false;
  auto* table1 = app.add_subcommand("table1", "Run the 2x2x3 method grid and print the result table");
  add_common(table1, table_flags);
  table1->add_flag("--summarize-only", summarize_only,
                   "Format the table from existing summaries in --out-dir");
  table1->add_flag("--resume", resume, "Reuse cells already written with the same config");

  mbp::SurfaceSpec spec;
  std::string surface_out;
  auto* surface = app.add_subcommand("surface", "Emit x*y vs sign(xy)*min(|x|,|y|) on a grid");
  surface->add_option("--x-min", spec.x_min)->capture_default_str();
  surface->add_option("--x-max", spec.x_max)->capture_default_str();
  surface->add_option("--y-min", spec.y_min)->capture_default_str();
  surface->add_option("--y-max", spec.y_max)->capture_default_str();
  surface->add_option("--resolution", spec.resolution, "Points per axis")->capture_default_str();
  surface->add_option("--out", surface_out, "Output CSV (default stdout)");

  std::vector<std::string> suites;
  auto* check = app.add_subcommand("check", "Run oracle suites and report pass/fail per suite");
  check->add_option("--suite", suites, "gradient|sign|pulse|device (repeatable; default all)")
      ->check(CLI::IsMember(mbp::check_suite_names()));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) return cmd_train(train_flags, method, backward, quant, emit_pulses);
    if (*table1) return cmd_table1(table_flags, summarize_only, resume);
    if (*surface) return cmd_surface(spec, surface_out);
    if (*check) return cmd_check(suites);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
