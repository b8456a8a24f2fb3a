#include "pathloss/crossval.hpp"

#include <fstream>
#include <numeric>

#include "pathloss/csv.hpp"
#include "pathloss/errors.hpp"
#include "pathloss/nn/checkpoint.hpp"
#include "pathloss/report.hpp"

namespace pathloss {

namespace fs = std::filesystem;

namespace {

std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  return idx;
}

void append(nn::Dataset& into, nn::Dataset part) {
  if (into.sample_shape.empty()) into.sample_shape = part.sample_shape;
  if (into.sample_shape != part.sample_shape) throw ShapeError("datasets differ in sample shape");
  into.inputs.insert(into.inputs.end(), part.inputs.begin(), part.inputs.end());
  into.labels.insert(into.labels.end(), part.labels.begin(), part.labels.end());
  into.ids.insert(into.ids.end(), part.ids.begin(), part.ids.end());
}

nn::Dataset gather_sets(ModelKind kind, const std::map<std::string, std::vector<std::size_t>>& sets,
                        const ExperimentData& data) {
  nn::Dataset out;
  for (const auto& pool : data.cities) {
    const auto it = sets.find(pool.name);
    if (it == sets.end()) continue;
    append(out, model_dataset(kind, pool, it->second, data));
  }
  return out;
}

nlohmann::json ids_of(const CityPool& pool, const std::vector<std::size_t>& idx) {
  nlohmann::json ids = nlohmann::json::array();
  for (std::size_t i : idx) ids.push_back(pool.meta[i].link_id);
  return ids;
}

nlohmann::json normalization_json(const NormalizationSpec& spec) {
  return {{"d_max", spec.d_max}, {"f_max", spec.f_max}, {"epsilon", spec.epsilon}};
}

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& fn) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  fn(out);
  if (!out) throw IoError("failed writing " + path.string());
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

// Pools each model's per-link errors over all runs.
std::vector<EvalReport> pool_errors(std::span<const EvalReport> reports,
                                    const std::vector<std::string>& models) {
  std::vector<EvalReport> pooled;
  for (const auto& m : models) {
    EvalReport p;
    p.model = m;
    p.city = "all";
    for (const auto& r : reports) {
      if (r.model != m) continue;
      p.errors.insert(p.errors.end(), r.errors.begin(), r.errors.end());
      p.link_ids.insert(p.link_ids.end(), r.link_ids.begin(), r.link_ids.end());
    }
    p.count = p.errors.size();
    if (p.count > 0) pooled.push_back(std::move(p));
  }
  return pooled;
}

void write_outputs(const fs::path& out_dir, std::span<const EvalReport> reports,
                   const std::vector<SummaryCell>& cells, const std::vector<CitedBaseline>& cited,
                   const std::vector<std::string>& models) {
  write_file(out_dir / "runs.csv", [&](std::ostream& o) { write_report_csv(o, reports); });
  write_file(out_dir / "summary.csv", [&](std::ostream& o) { write_summary_csv(o, cells, cited); });
  const auto pooled = pool_errors(reports, models);
  if (!pooled.empty()) {
    write_file(out_dir / "hist.csv", [&](std::ostream& o) { write_histogram_csv(o, pooled); });
    write_file(out_dir / "hist.svg", [&](std::ostream& o) { write_histogram_svg(o, pooled); });
  }
}

}  // namespace

RunSplit make_run_split(const HoldoutPlan& plan, const ExperimentData& data,
                        const ExperimentConfig& config) {
  RunSplit split;
  bool holdout_found = false;
  for (const auto& pool : data.cities) {
    std::vector<std::size_t> idx =
        config.run_samples_per_stratum
            ? stratified_subsample(pool.meta, *config.run_samples_per_stratum,
                                   derive_seed(plan.subsample_seed, "city:" + pool.name))
            : all_indices(pool.meta.size());
    if (pool.name == plan.holdout_city) {
      split.test = std::move(idx);
      holdout_found = true;
      continue;
    }
    const auto meta = select_meta(pool, idx);
    const auto theta = plan.theta_deg.find(pool.name);
    if (theta == plan.theta_deg.end()) {
      throw ConfigError("plan has no split angle for city " + pool.name);
    }
    const SplitResult s = angular_validation_split(
        meta, pool.tx, SplitConfig{theta->second, config.validation_fraction});
    auto& train = split.train[pool.name];
    auto& val = split.validation[pool.name];
    for (std::size_t k : s.train) train.push_back(idx[k]);
    for (std::size_t k : s.validation) val.push_back(idx[k]);
  }
  if (!holdout_found) throw ConfigError("holdout city " + plan.holdout_city + " has no data");
  return split;
}

nlohmann::json split_to_json(const RunSplit& split, const HoldoutPlan& plan,
                             const ExperimentData& data) {
  nlohmann::json train = nlohmann::json::object();
  nlohmann::json validation = nlohmann::json::object();
  for (const auto& [city, idx] : split.train) train[city] = ids_of(data.city(city), idx);
  for (const auto& [city, idx] : split.validation) validation[city] = ids_of(data.city(city), idx);
  return {{"train", train},
          {"validation", validation},
          {"test", {{plan.holdout_city, ids_of(data.city(plan.holdout_city), split.test)}}}};
}

std::string run_directory_name(const HoldoutPlan& plan) {
  return plan.holdout_city + "-run" + std::to_string(plan.run);
}

RunOutcome execute_run(const HoldoutPlan& plan, const std::vector<ModelKind>& kinds,
                       const ExperimentData& data, const ExperimentConfig& config,
                       const fs::path& run_dir, const LogFn& log) {
  std::error_code ec;
  fs::create_directories(run_dir, ec);
  if (ec) throw IoError("cannot create " + run_dir.string() + ": " + ec.message());

  RunOutcome outcome;
  outcome.plan = plan;
  const RunSplit split = make_run_split(plan, data, config);
  const CityPool& holdout = data.city(plan.holdout_city);
  const auto test_meta = select_meta(holdout, split.test);

  nlohmann::json manifest = {{"plan", plan_to_json(plan)},
                             {"split", split_to_json(split, plan, data)},
                             {"config", to_json(config)},
                             {"normalization", normalization_json(data.spec)},
                             {"models", nlohmann::json::object()}};

  for (ModelKind kind : kinds) {
    const std::string name = model_kind_name(kind);
    ModelRun mr;
    mr.kind = kind;
    try {
      const nn::Dataset train = gather_sets(kind, split.train, data);
      const nn::Dataset validation = gather_sets(kind, split.validation, data);
      nn::TrainConfig cfg = config.train;
      cfg.seed = plan.shuffle_seed;
      nn::Sequential<float> model(
          model_topology(kind, cfg.dropout_rate, static_cast<std::size_t>(data.width)));
      model.initialize(plan.init_seed);
      if (log) {
        log(run_directory_name(plan) + " " + name + ": " + std::to_string(train.size()) +
            " train, " + std::to_string(validation.size()) + " validation, " +
            std::to_string(split.test.size()) + " test");
      }
      nn::TrainResult result = nn::train_model(model, train, validation, cfg, [&](const nn::EpochRecord& e) {
        if (log) {
          log("  epoch " + std::to_string(e.epoch) + " train " + csv::format_double(e.train_rmse) +
              " val " + csv::format_double(e.validation_rmse));
        }
      });
      mr.history = result.history;
      mr.diagnostic = result.diagnostic;
      if (result.best_epoch == 0) throw NumericError("no epoch completed: " + result.diagnostic);
      mr.best_epoch = result.best_epoch;
      mr.best_validation_rmse = result.best_validation_rmse;

      auto& meta = result.best.metadata;
      meta["model"] = name;
      meta["holdout_city"] = plan.holdout_city;
      meta["run"] = plan.run;
      meta["plan_seed"] = plan.seed;
      meta["normalization"] = normalization_json(data.spec);
      if (kind != ModelKind::kFcn) {
        meta["channels"] = std::vector<std::string>(kChannelNames.begin(), kChannelNames.end());
      } else {
        meta["features"] = {"freq_mhz/f_max", "distance_m/d_max", "obstruction_depth_m/d_max"};
      }
      mr.checkpoint = run_dir / (name + ".ckpt");
      nn::save_checkpoint(mr.checkpoint, result.best);

      const nn::Dataset test = model_dataset(kind, holdout, split.test, data);
      const auto preds = nn::predict_dataset(model, test, cfg.micro_batch);
      EvalReport report = compute_metrics(preds, test.labels);
      report.model = name;
      report.city = plan.holdout_city;
      report.run = plan.run;
      report.seed = plan.seed;
      report.link_ids = test.ids;
      outcome.reports.push_back(std::move(report));
      mr.ok = true;
    } catch (const Error& e) {
      mr.ok = false;
      mr.diagnostic = e.what();
      if (log) log(run_directory_name(plan) + " " + name + " failed: " + e.what());
    }
    nlohmann::json history = nlohmann::json::array();
    for (const auto& h : mr.history) {
      history.push_back({{"epoch", h.epoch}, {"train_rmse", h.train_rmse}, {"validation_rmse", h.validation_rmse}});
    }
    manifest["models"][name] = {{"status", mr.ok ? "ok" : "failed"},
                                {"diagnostic", mr.diagnostic},
                                {"best_epoch", mr.best_epoch},
                                {"best_validation_rmse", mr.best_validation_rmse},
                                {"checkpoint", mr.ok ? mr.checkpoint.filename().string() : ""},
                                {"history", history}};
    outcome.models.push_back(std::move(mr));
  }

  std::vector<double> fspl(test_meta.size());
  std::vector<double> labels(test_meta.size());
  for (std::size_t i = 0; i < test_meta.size(); ++i) {
    fspl[i] = fspl_db(test_meta[i].freq_mhz, test_meta[i].distance_m / 1000.0);
    labels[i] = test_meta[i].path_loss_db;
  }
  EvalReport baseline = compute_metrics(fspl, labels);
  baseline.model = kFsplModel;
  baseline.city = plan.holdout_city;
  baseline.run = plan.run;
  baseline.seed = plan.seed;
  for (const auto& m : test_meta) baseline.link_ids.push_back(m.link_id);
  outcome.reports.push_back(std::move(baseline));

  export_report(outcome.reports, run_dir);
  write_file(run_dir / "manifest.json", [&](std::ostream& o) { o << manifest.dump(2) << '\n'; });
  return outcome;
}

std::vector<SummaryCell> summarize_reports(std::span<const EvalReport> reports,
                                           const std::map<std::string, std::size_t>& expected,
                                           const std::vector<std::string>& models) {
  std::vector<std::string> cities;
  for (const auto& r : reports) {
    if (std::find(cities.begin(), cities.end(), r.city) == cities.end()) cities.push_back(r.city);
  }
  for (const auto& [city, n] : expected) {
    if (std::find(cities.begin(), cities.end(), city) == cities.end()) cities.push_back(city);
  }
  std::vector<SummaryCell> cells;
  for (const auto& city : cities) {
    for (const auto& model : models) {
      SummaryCell cell;
      cell.city = city;
      cell.model = model;
      const auto it = expected.find(city);
      cell.runs_expected = it == expected.end() ? 0 : it->second;
      for (const auto& r : reports) {
        if (r.city == city && r.model == model) cell.rmse.push_back(r.rmse);
      }
      if (!cell.rmse.empty()) cell.stat = summarize(cell.rmse);
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryCell>& cells,
                       const std::vector<CitedBaseline>& cited) {
  out << "holdout_city,model,runs_expected,runs_completed,rmse_mean_db,rmse_sd_db,"
         "cited_rmse_low_db,cited_rmse_high_db,status\n";
  for (const auto& c : cells) {
    out << c.city << ',' << c.model << ',' << c.runs_expected << ',' << c.rmse.size() << ',';
    if (c.rmse.empty()) {
      out << ",";
    } else {
      out << csv::format_double(c.stat.mean) << ',' << csv::format_double(c.stat.sd);
    }
    out << ",,," << (c.complete() ? "complete" : "incomplete") << '\n';
  }
  for (const auto& b : cited) {
    out << "all," << b.label << ",0,0,,," << csv::format_double(b.rmse_low_db) << ','
        << csv::format_double(b.rmse_high_db) << ",cited external\n";
  }
}

CrossValSummary run_cross_validation(const std::vector<HoldoutPlan>& plans,
                                     const std::vector<ModelKind>& kinds,
                                     const ExperimentData& data, const ExperimentConfig& config,
                                     const fs::path& out_dir, const LogFn& log) {
  if (plans.empty()) throw EmptyInputError("no holdout plans to run");
  std::error_code ec;
  fs::create_directories(out_dir / "runs", ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

  std::vector<std::string> models;
  for (auto k : kinds) models.emplace_back(model_kind_name(k));
  models.emplace_back(kFsplModel);
  std::map<std::string, std::size_t> expected;
  nlohmann::json plan_list = nlohmann::json::array();
  for (const auto& p : plans) {
    ++expected[p.holdout_city];
    plan_list.push_back(plan_to_json(p));
  }
  nlohmann::json cited = nlohmann::json::array();
  for (const auto& b : config.cited) {
    cited.push_back({{"label", b.label}, {"rmse_low_db", b.rmse_low_db}, {"rmse_high_db", b.rmse_high_db}});
  }
  const nlohmann::json index = {{"models", models}, {"plans", plan_list}, {"cited_baselines", cited}};
  write_file(out_dir / "plans.json", [&](std::ostream& o) { o << index.dump(2) << '\n'; });

  CrossValSummary summary;
  summary.cited = config.cited;
  std::vector<EvalReport> reports;
  for (const auto& plan : plans) {
    RunOutcome outcome;
    try {
      outcome = execute_run(plan, kinds, data, config, out_dir / "runs" / run_directory_name(plan), log);
    } catch (const Error& e) {
      // A run that cannot even be split leaves its cells incomplete.
      if (log) log(run_directory_name(plan) + " failed: " + e.what());
      outcome.plan = plan;
      for (auto k : kinds) {
        ModelRun failed;
        failed.kind = k;
        failed.diagnostic = e.what();
        outcome.models.push_back(std::move(failed));
      }
    }
    reports.insert(reports.end(), outcome.reports.begin(), outcome.reports.end());
    summary.runs.push_back(std::move(outcome));
  }
  summary.cells = summarize_reports(reports, expected, models);
  write_outputs(out_dir, reports, summary.cells, summary.cited, models);
  return summary;
}

std::vector<SummaryCell> rebuild_summary(const fs::path& out_dir) {
  const nlohmann::json index = read_json(out_dir / "plans.json");
  std::vector<std::string> models;
  std::map<std::string, std::size_t> expected;
  std::vector<CitedBaseline> cited;
  std::vector<EvalReport> reports;
  try {
    models = index.at("models").get<std::vector<std::string>>();
    for (const auto& b : index.at("cited_baselines")) {
      cited.push_back({b.at("label").get<std::string>(), b.at("rmse_low_db").get<double>(),
                       b.at("rmse_high_db").get<double>()});
    }
    for (const auto& pj : index.at("plans")) {
      const HoldoutPlan plan = plan_from_json(pj);
      ++expected[plan.holdout_city];
      const fs::path dir = out_dir / "runs" / run_directory_name(plan);
      if (!fs::exists(dir / "report.csv")) continue;
      std::ifstream rin(dir / "report.csv");
      auto rows = read_report_csv(rin);
      std::ifstream ein(dir / "errors.csv");
      if (!ein) throw IoError("missing " + (dir / "errors.csv").string());
      const auto errors = read_errors_csv(ein);
      for (auto& r : rows) {
        for (const auto& e : errors) {
          if (e.model == r.model) {
            r.errors = e.errors;
            r.link_ids = e.link_ids;
          }
        }
        reports.push_back(std::move(r));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("plans.json: ") + e.what());
  }
  auto cells = summarize_reports(reports, expected, models);
  write_outputs(out_dir, reports, cells, cited, models);
  return cells;
}

}  // namespace pathloss
