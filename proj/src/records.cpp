#include "mbp/records.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "mbp/update.hpp"

namespace mbp {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string pct(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", 100.0 * fraction);
  return buf;
}

}  // namespace

void write_epoch_csv(std::ostream& os, const ExperimentResult& result) {
  os << kEpochCsvHeader << '\n';
  for (std::size_t t = 0; t < result.trials.size(); ++t) {
    for (const auto& r : result.trials[t].epochs) {
      os << t << ',' << r.epoch << ',' << num(r.lr) << ',' << num(r.train_error) << ','
         << num(r.test_error) << '\n';
    }
  }
}

nlohmann::json config_to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["method"] = to_string(c.method);
  j["backward"] = to_string(c.backward);
  j["quant"] = c.quant_label();
  j["arch"] = c.arch;
  j["activation"] = to_string(c.hidden_activation);
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["lr0"] = c.lr0;
  j["trials"] = c.trials;
  j["seed"] = c.seed;
  j["reduction"] = to_string(c.reduction);
  j["train_limit"] = c.train_limit;
  return j;
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  c.method = parse_update_kind(j.at("method").get<std::string>());
  c.backward = parse_backward_mode(j.at("backward").get<std::string>());
  const auto q = j.at("quant").get<std::string>();
  if (q != "continuous") c.quant_levels = std::stoi(q);
  c.arch = j.at("arch").get<std::vector<std::size_t>>();
  c.hidden_activation = parse_activation(j.at("activation").get<std::string>());
  c.epochs = j.at("epochs").get<int>();
  c.batch_size = j.at("batch_size").get<std::size_t>();
  c.lr0 = j.at("lr0").get<double>();
  c.trials = j.at("trials").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.reduction = parse_reduction(j.at("reduction").get<std::string>());
  c.train_limit = j.value("train_limit", std::size_t{0});
  return c;
}

nlohmann::json summary_json(const ExperimentResult& result) {
  nlohmann::json j;
  j["config"] = config_to_json(result.config);
  j["mean_test_error"] = result.mean_test_error;
  j["sd_test_error"] = result.sd_test_error;
  nlohmann::json trials = nlohmann::json::array();
  for (const auto& t : result.trials) {
    trials.push_back({{"seed", t.seed}, {"final_test_error", t.final_test_error()}});
  }
  j["trials"] = trials;
  return j;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << text;
    if (!out.flush()) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_run_files(const std::filesystem::path& dir, const ExperimentResult& result) {
  std::ostringstream csv;
  write_epoch_csv(csv, result);
  const std::string cell = result.config.cell_name();
  write_file_atomic(dir / (cell + ".csv"), csv.str());
  write_file_atomic(dir / (cell + ".json"), summary_json(result).dump(2) + "\n");
}

CellSummary read_summary(const std::filesystem::path& json_path) {
  std::ifstream in(json_path);
  if (!in) throw std::runtime_error("cannot open " + json_path.string());
  const auto j = nlohmann::json::parse(in);
  CellSummary s;
  s.config = config_from_json(j.at("config"));
  s.mean = j.at("mean_test_error").get<double>();
  s.sd = j.at("sd_test_error").get<double>();
  for (const auto& t : j.at("trials")) s.finals.push_back(t.at("final_test_error").get<double>());
  return s;
}

std::vector<std::optional<int>> table1_quantizations() { return {std::nullopt, 100, 20}; }

std::string format_table1(const std::vector<CellSummary>& cells) {
  std::map<std::string, const CellSummary*> by_name;
  for (const auto& c : cells) by_name[c.config.cell_name()] = &c;

  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof line, "%-12s| %-16s %-16s| %-16s %-16s\n", "", "transposed", "",
                "const", "");
  os << line;
  std::snprintf(line, sizeof line, "%-12s| %-16s %-16s| %-16s %-16s\n", "", "times", "absmin",
                "times", "absmin");
  os << line;
  os << std::string(80, '-') << '\n';
  for (const auto& q : table1_quantizations()) {
    const std::string qlabel = q ? std::to_string(*q) : "continuous";
    std::vector<std::string> cols;
    for (const char* backward : {"transposed", "const"}) {
      for (const char* method : {"times", "absmin"}) {
        const auto it = by_name.find(std::string(method) + "-" + backward + "-" + qlabel);
        cols.push_back(it == by_name.end() ? "n/a" : pct(it->second->mean) + " ± " + pct(it->second->sd));
      }
    }
    const std::string rlabel = q ? qlabel + " pulses" : qlabel;
    std::snprintf(line, sizeof line, "%-12s| %-16s %-16s| %-16s %-16s\n", rlabel.c_str(),
                  cols[0].c_str(), cols[1].c_str(), cols[2].c_str(), cols[3].c_str());
    os << line;
  }
  return os.str();
}

void write_surface_csv(std::ostream& os, const SurfaceSpec& spec) {
  if (spec.resolution < 2) throw std::invalid_argument("surface: resolution must be >= 2");
  if (!(spec.x_min < spec.x_max) || !(spec.y_min < spec.y_max)) {
    throw std::invalid_argument("surface: degenerate bounds (need min < max on both axes)");
  }
  os << "x,y,times,absmin\n";
  const double n = spec.resolution - 1;
  for (int i = 0; i < spec.resolution; ++i) {
    const double x = spec.x_min + (spec.x_max - spec.x_min) * i / n;
    for (int j = 0; j < spec.resolution; ++j) {
      const double y = spec.y_min + (spec.y_max - spec.y_min) * j / n;
      os << num(x) << ',' << num(y) << ',' << num(times_kernel(x, y)) << ','
         << num(absmin_kernel(x, y)) << '\n';
    }
  }
}

}  // namespace mbp
