#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "pathloss/config.hpp"
#include "pathloss/dataset.hpp"
#include "pathloss/metrics.hpp"
#include "pathloss/models.hpp"
#include "pathloss/splits.hpp"

namespace pathloss {

inline constexpr const char* kFsplModel = "fspl";

/// Pool indices per city for one holdout plan.
struct RunSplit {
  std::map<std::string, std::vector<std::size_t>> train;
  std::map<std::string, std::vector<std::size_t>> validation;
  std::vector<std::size_t> test;  ///< holdout city
};

/// Per-run re-subsample of every city, angular split of the non-holdout
/// cities and the holdout test set.
RunSplit make_run_split(const HoldoutPlan& plan, const ExperimentData& data,
                        const ExperimentConfig& config);
/// Link ids of every set, for the run manifest.
nlohmann::json split_to_json(const RunSplit& split, const HoldoutPlan& plan,
                             const ExperimentData& data);

struct ModelRun {
  ModelKind kind = ModelKind::kFcn;
  bool ok = false;
  std::string diagnostic;
  std::size_t best_epoch = 0;
  double best_validation_rmse = 0.0;
  std::vector<nn::EpochRecord> history;
  std::filesystem::path checkpoint;
};

struct RunOutcome {
  HoldoutPlan plan;
  std::vector<ModelRun> models;
  std::vector<EvalReport> reports;  ///< successful models, then the FSPL baseline
};

/// Trains every model kind for one plan, evaluates on the holdout city and
/// writes manifest.json, <model>.ckpt and the report files into `run_dir`.
/// Failures of individual models are recorded, not thrown.
RunOutcome execute_run(const HoldoutPlan& plan, const std::vector<ModelKind>& kinds,
                       const ExperimentData& data, const ExperimentConfig& config,
                       const std::filesystem::path& run_dir, const LogFn& log = {});

struct SummaryCell {
  std::string city;
  std::string model;
  std::size_t runs_expected = 0;
  std::vector<double> rmse;  ///< completed runs in run order
  SummaryStat stat;

  bool complete() const { return rmse.size() == runs_expected; }
};

struct CrossValSummary {
  std::vector<SummaryCell> cells;
  std::vector<CitedBaseline> cited;
  std::vector<RunOutcome> runs;
};

/// Groups reports into (city, model) cells in first-seen order. `expected`
/// maps each city to its planned run count.
std::vector<SummaryCell> summarize_reports(std::span<const EvalReport> reports,
                                           const std::map<std::string, std::size_t>& expected,
                                           const std::vector<std::string>& models);

// summary.csv: holdout_city,model,runs_expected,runs_completed,rmse_mean_db,
// rmse_sd_db,cited_rmse_low_db,cited_rmse_high_db,status
void write_summary_csv(std::ostream& out, const std::vector<SummaryCell>& cells,
                       const std::vector<CitedBaseline>& cited);

std::string run_directory_name(const HoldoutPlan& plan);

/// Runs every plan in order under `out_dir/runs/`, then writes plans.json,
/// runs.csv, summary.csv and pooled histograms into `out_dir`.
CrossValSummary run_cross_validation(const std::vector<HoldoutPlan>& plans,
                                     const std::vector<ModelKind>& kinds,
                                     const ExperimentData& data, const ExperimentConfig& config,
                                     const std::filesystem::path& out_dir, const LogFn& log = {});

/// Rebuilds summary.csv and the pooled histograms of a finished
/// cross-validation from its persisted per-run files.
std::vector<SummaryCell> rebuild_summary(const std::filesystem::path& out_dir);

}  // namespace pathloss
