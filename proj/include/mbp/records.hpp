#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mbp/trainer.hpp"

namespace mbp {

inline constexpr const char* kEpochCsvHeader = "trial,epoch,lr,train_error,test_error";

/// One row per (trial, epoch), values as fractions with 17 significant digits.
void write_epoch_csv(std::ostream& os, const ExperimentResult& result);

nlohmann::json config_to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const nlohmann::json& j);

/// Keys: config, mean_test_error, sd_test_error, trials (per-trial seed and
/// final test error).
nlohmann::json summary_json(const ExperimentResult& result);

/// Writes <dir>/<cell>.csv and <dir>/<cell>.json via temp-file rename.
void write_run_files(const std::filesystem::path& dir, const ExperimentResult& result);

/// Writes text to path atomically (temp file + rename).
void write_file_atomic(const std::filesystem::path& path, const std::string& text);

struct CellSummary {
  ExperimentConfig config;
  double mean = 0.0;
  double sd = 0.0;
  std::vector<double> finals;
};

CellSummary read_summary(const std::filesystem::path& json_path);

/// Table layout: rows continuous/100/20, columns transposed-times,
/// transposed-absmin, const-times, const-absmin. Cells as "mean% ± sd%".
std::string format_table1(const std::vector<CellSummary>& cells);

/// Both kernels sampled on a regular grid; rows "x,y,times,absmin".
struct SurfaceSpec {
  double x_min = -1.0, x_max = 1.0;
  double y_min = -1.0, y_max = 1.0;
  int resolution = 41;
};
void write_surface_csv(std::ostream& os, const SurfaceSpec& spec);

/// Quantization cells of the grid in row order: continuous, 100, 20.
std::vector<std::optional<int>> table1_quantizations();

}  // namespace mbp
