// Command-line front end: data preparation, training, cross-validation,
// prediction and reporting.
#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "pathloss/config.hpp"
#include "pathloss/crossval.hpp"
#include "pathloss/csv.hpp"
#include "pathloss/dataset.hpp"
#include "pathloss/errors.hpp"
#include "pathloss/models.hpp"
#include "pathloss/nn/checkpoint.hpp"
#include "pathloss/profile.hpp"
#include "pathloss/report.hpp"
#include "pathloss/splits.hpp"
#include "pathloss/synthetic.hpp"

namespace fs = std::filesystem;
using namespace pathloss;

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string dims;
  std::string model;
  std::string city;
  std::string out;
  std::string checkpoint;
  std::string features;
  std::size_t runs = 0;
  std::size_t locations = 0;
  bool quiet = false;
};

void log_line(const Options& o, const std::string& msg) {
  if (!o.quiet) std::cerr << msg << '\n';
}

ExperimentConfig load_config(const Options& o) {
  ExperimentConfig c = load_experiment_config(o.config);
  if (o.seed) c.seed = *o.seed;
  if (o.runs > 0) c.runs_per_holdout = o.runs;
  return c;
}

std::vector<ModelKind> requested_kinds(const Options& o, const ExperimentConfig& c) {
  if (!o.model.empty()) return {parse_model_kind(o.model)};
  if (!o.dims.empty()) return {parse_dims(o.dims) == Dims::k1D ? ModelKind::kCnn1d : ModelKind::kCnn2d};
  return c.models;
}

ModelKind checkpoint_kind(const nn::Checkpoint& ckpt) { return parse_model_kind(ckpt.topology.kind); }

NormalizationSpec checkpoint_spec(const nn::Checkpoint& ckpt, NormalizationSpec fallback) {
  const auto& m = ckpt.metadata;
  if (m.contains("normalization")) {
    const auto& n = m.at("normalization");
    fallback.d_max = n.at("d_max").get<double>();
    fallback.f_max = n.at("f_max").get<double>();
    fallback.epsilon = n.at("epsilon").get<double>();
  }
  return fallback;
}

std::vector<std::size_t> every_index(std::size_t n) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  return idx;
}

fs::path ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir + ": " + ec.message());
  return fs::path(dir);
}

int cmd_synth(const Options& o) {
  synthetic::Spec spec;
  if (o.seed) spec.seed = *o.seed;
  if (o.locations > 0) spec.rx_locations = o.locations;
  const fs::path dir = ensure_dir(o.out);
  const auto out = synthetic::generate(spec, dir);
  const auto full = synthetic::experiment_config(spec, out);
  std::ofstream(dir / "experiment.json") << full.dump(2) << '\n';
  auto smoke = full;
  smoke["train"]["epochs"] = 2;
  smoke["run_samples_per_stratum"] = 20;
  smoke["models"] = {"cnn1d", "fcn"};
  std::ofstream(dir / "smoke.json") << smoke.dump(2) << '\n';
  log_line(o, "wrote synthetic data for " + std::to_string(out.cities.size()) + " cities to " + dir.string());
  return 0;
}

int cmd_extract(const Options& o) {
  const auto config = load_config(o);
  const TxSiteConfig site = load_site_config(config.site_config);
  const CityPool pool = prepare_city(config.city(o.city), site, config.width, config.earth_radius,
                                     std::nullopt, 0);
  const fs::path dir = ensure_dir(o.out);
  std::vector<PathProfile> profiles;
  std::vector<double> depths;
  for (std::size_t i = 0; i < pool.records.size(); ++i) {
    profiles.push_back(earth_curvature_correct(
        extract_profile(pool.index, pool.records[i].geometry(config.width)), config.earth_radius));
    depths.push_back(pool.meta[i].obstruction_depth_m);
  }
  save_profiles(dir / (o.city + ".plprof"), profiles);
  std::ofstream links(dir / (o.city + "_links.csv"));
  write_link_table(links, pool.records, depths);
  log_line(o, o.city + ": " + std::to_string(profiles.size()) + " profiles, " +
                  std::to_string(pool.stats.filtered_out) + " filtered, " +
                  std::to_string(pool.stats.parsed - pool.stats.other_city - pool.stats.filtered_out) +
                  " pass filters, " + std::to_string(pool.stats.extraction_failed) + " outside coverage");
  return 0;
}

int cmd_build_features(const Options& o) {
  const auto config = load_config(o);
  ExperimentConfig one = config;
  one.cities = {config.city(o.city)};
  one.samples_per_stratum.reset();
  auto data = prepare_experiment(one, [&](const std::string& m) { log_line(o, m); });
  if (!config.d_max) {
    // Normalize with the distance range of the whole experiment.
    data.spec.d_max = prepare_experiment(config).spec.d_max;
  }
  const Dims dims = parse_dims(o.dims.empty() ? "2d" : o.dims);
  const auto& pool = data.cities.front();
  const auto table = build_feature_table(pool, every_index(pool.records.size()),
                                         dims_width(dims, static_cast<std::size_t>(config.width)), data);
  const fs::path out(o.out);
  if (out.has_parent_path()) ensure_dir(out.parent_path().string());
  save_feature_table(out, table);
  log_line(o, "wrote " + std::to_string(table.size()) + " samples to " + out.string());
  return 0;
}

int cmd_split(const Options& o) {
  const auto config = load_config(o);
  const auto data = prepare_experiment(config, [&](const std::string& m) { log_line(o, m); });
  const auto plans = build_holdout_plan(config.city_names(), config.runs_per_holdout, config.seed);
  nlohmann::json all = nlohmann::json::array();
  for (const auto& plan : plans) {
    if (!o.city.empty() && plan.holdout_city != o.city) continue;
    const RunSplit split = make_run_split(plan, data, config);
    all.push_back({{"plan", plan_to_json(plan)}, {"split", split_to_json(split, plan, data)}});
  }
  const fs::path dir = ensure_dir(o.out);
  std::ofstream(dir / "splits.json") << all.dump(2) << '\n';
  log_line(o, "wrote " + std::to_string(all.size()) + " split manifests");
  return 0;
}

HoldoutPlan single_plan(const Options& o, const ExperimentConfig& config) {
  const auto plans = build_holdout_plan(config.city_names(), 1, config.seed);
  const std::string holdout = o.city.empty() ? config.cities.front().name : o.city;
  for (const auto& p : plans) {
    if (p.holdout_city == holdout) return p;
  }
  throw ConfigError("unknown city '" + holdout + "'");
}

int cmd_train(const Options& o) {
  const auto config = load_config(o);
  const auto data = prepare_experiment(config, [&](const std::string& m) { log_line(o, m); });
  const HoldoutPlan plan = single_plan(o, config);
  const auto outcome = execute_run(plan, requested_kinds(o, config), data, config, ensure_dir(o.out),
                                   [&](const std::string& m) { log_line(o, m); });
  int status = 0;
  for (const auto& m : outcome.models) {
    if (!m.ok) {
      std::cerr << model_kind_name(m.kind) << " failed: " << m.diagnostic << '\n';
      status = 1;
    }
  }
  for (const auto& r : outcome.reports) {
    std::cout << r.model << " holdout " << r.city << " rmse " << csv::format_double(r.rmse) << " dB\n";
  }
  return status;
}

int cmd_evaluate(const Options& o) {
  const auto config = load_config(o);
  const auto ckpt = nn::load_checkpoint(o.checkpoint);
  ExperimentConfig one = config;
  one.cities = {config.city(o.city)};
  one.samples_per_stratum.reset();
  auto data = prepare_experiment(one, [&](const std::string& m) { log_line(o, m); });
  data.spec = checkpoint_spec(ckpt, data.spec);
  const auto& pool = data.cities.front();
  const auto idx = every_index(pool.records.size());
  const ModelKind kind = checkpoint_kind(ckpt);
  const auto samples = model_dataset(kind, pool, idx, data);
  EvalReport report = compute_metrics(predict(ckpt, samples), samples.labels);
  report.model = model_kind_name(kind);
  report.city = o.city;
  report.seed = ckpt.metadata.value("seed", std::uint64_t{0});
  report.link_ids = samples.ids;
  export_report(std::span<const EvalReport>(&report, 1), o.out);
  std::cout << report.model << " on " << report.city << ": rmse " << csv::format_double(report.rmse)
            << " dB, mean " << csv::format_double(report.mean_error) << " dB, sd "
            << csv::format_double(report.sd_error) << " dB, n " << report.count << '\n';
  return 0;
}

int cmd_cross_validate(const Options& o) {
  const auto config = load_config(o);
  const auto data = prepare_experiment(config, [&](const std::string& m) { log_line(o, m); });
  auto plans = build_holdout_plan(config.city_names(), config.runs_per_holdout, config.seed);
  if (!o.city.empty()) {
    std::erase_if(plans, [&](const HoldoutPlan& p) { return p.holdout_city != o.city; });
    if (plans.empty()) throw ConfigError("unknown city '" + o.city + "'");
  }
  const auto summary = run_cross_validation(plans, requested_kinds(o, config), data, config, o.out,
                                            [&](const std::string& m) { log_line(o, m); });
  bool complete = true;
  for (const auto& c : summary.cells) {
    complete = complete && c.complete();
    std::cout << c.city << ' ' << c.model << ' ' << c.rmse.size() << '/' << c.runs_expected;
    if (!c.rmse.empty()) {
      std::cout << " rmse " << csv::format_double(c.stat.mean) << " +- " << csv::format_double(c.stat.sd);
    }
    std::cout << '\n';
  }
  return complete ? 0 : 1;
}

int cmd_predict(const Options& o) {
  const auto ckpt = nn::load_checkpoint(o.checkpoint);
  const ModelKind kind = checkpoint_kind(ckpt);
  std::vector<SampleMeta> meta;
  nn::Dataset samples;
  if (!o.features.empty()) {
    const FeatureTable table = load_feature_table(o.features);
    meta = table.meta;
    samples = kind == ModelKind::kFcn ? scalar_dataset(table.meta, checkpoint_spec(ckpt, table.spec))
                                      : cnn_dataset(table);
  } else {
    const auto config = load_config(o);
    ExperimentConfig one = config;
    one.cities = {config.city(o.city)};
    one.samples_per_stratum.reset();
    auto data = prepare_experiment(one, [&](const std::string& m) { log_line(o, m); });
    data.spec = checkpoint_spec(ckpt, data.spec);
    const auto& pool = data.cities.front();
    meta = pool.meta;
    samples = model_dataset(kind, pool, every_index(pool.records.size()), data);
  }
  const auto preds = predict(ckpt, samples);
  std::ofstream file;
  if (!o.out.empty()) {
    file.open(o.out);
    if (!file) throw IoError("cannot write " + o.out);
  }
  std::ostream& out = o.out.empty() ? std::cout : file;
  out << "link_id,predicted_pl_db,fspl_db,obstruction_depth_m\n";
  for (std::size_t i = 0; i < preds.size(); ++i) {
    out << meta[i].link_id << ',' << csv::format_double(preds[i]) << ','
        << csv::format_double(fspl_db(meta[i].freq_mhz, meta[i].distance_m / 1000.0)) << ','
        << csv::format_double(meta[i].obstruction_depth_m) << '\n';
  }
  return 0;
}

int cmd_report(const Options& o) {
  const auto cells = rebuild_summary(o.out);
  for (const auto& c : cells) {
    std::cout << c.city << ' ' << c.model << ' ' << c.rmse.size() << '/' << c.runs_expected;
    if (!c.rmse.empty()) {
      std::cout << " rmse " << csv::format_double(c.stat.mean) << " +- " << csv::format_double(c.stat.sd);
    }
    std::cout << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Path loss prediction from surface profiles"};
  app.require_subcommand(1);
  Options o;

  auto add_config = [&](CLI::App* s) {
    s->add_option("--config", o.config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  };
  auto add_seed = [&](CLI::App* s) { s->add_option("--seed", o.seed, "Master seed override"); };
  auto add_out = [&](CLI::App* s, const char* what) { s->add_option("--out", o.out, what)->required(); };
  auto add_dims = [&](CLI::App* s) {
    s->add_option("--dims", o.dims, "CNN dimensionality")->check(CLI::IsMember({"1d", "2d"}));
  };
  auto add_city = [&](CLI::App* s, bool required) {
    auto* opt = s->add_option("--city", o.city, "City name");
    if (required) opt->required();
  };

  auto* synth = app.add_subcommand("synth", "Generate the bundled synthetic two-city dataset");
  add_seed(synth);
  add_out(synth, "Output directory");
  synth->add_option("--locations", o.locations, "Receiver locations per city");

  auto* extract = app.add_subcommand("extract", "Extract curvature-corrected path profiles for a city");
  add_config(extract);
  add_city(extract, true);
  add_out(extract, "Output directory");

  auto* features = app.add_subcommand("build-features", "Build the normalized feature container of a city");
  add_config(features);
  add_city(features, true);
  add_dims(features);
  add_out(features, "Output file");

  auto* split = app.add_subcommand("split", "Write the holdout plans and their angular splits");
  add_config(split);
  add_seed(split);
  add_city(split, false);
  add_out(split, "Output directory");
  split->add_option("--runs", o.runs, "Runs per holdout city");

  auto* train = app.add_subcommand("train", "Train one holdout run");
  add_config(train);
  add_seed(train);
  add_dims(train);
  add_city(train, false);
  add_out(train, "Run directory");
  train->add_option("--model", o.model, "Model kind")
      ->check(CLI::IsMember({"cnn1d", "cnn2d", "fcn"}))
      ->excludes(train->get_option("--dims"));

  auto* evaluate = app.add_subcommand("evaluate", "Evaluate a checkpoint on every link of a city");
  add_config(evaluate);
  add_city(evaluate, true);
  add_out(evaluate, "Report directory");
  evaluate->add_option("--checkpoint", o.checkpoint, "Checkpoint file")->required()->check(CLI::ExistingFile);

  auto* cv = app.add_subcommand("cross-validate", "Run the city holdout cross-validation");
  add_config(cv);
  add_seed(cv);
  add_dims(cv);
  add_city(cv, false);
  add_out(cv, "Output directory");
  cv->add_option("--runs", o.runs, "Runs per holdout city");
  cv->add_option("--model", o.model, "Train only this model kind")->check(CLI::IsMember({"cnn1d", "cnn2d", "fcn"}));

  auto* pred = app.add_subcommand("predict", "Predict path loss with a checkpoint");
  pred->add_option("--checkpoint", o.checkpoint, "Checkpoint file")->required()->check(CLI::ExistingFile);
  auto* feat_opt = pred->add_option("--features", o.features, "Feature container")->check(CLI::ExistingFile);
  auto* cfg_opt = pred->add_option("--config", o.config, "Experiment config")->check(CLI::ExistingFile);
  add_city(pred, false);
  pred->add_option("--out", o.out, "Output CSV (default stdout)");
  feat_opt->excludes(cfg_opt);

  auto* report = app.add_subcommand("report", "Rebuild summary and histograms of a cross-validation");
  add_out(report, "Cross-validation directory");

  for (auto* s : app.get_subcommands({})) {
    s->add_flag("-q,--quiet", o.quiet, "Suppress progress output");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (*synth) return cmd_synth(o);
    if (*extract) return cmd_extract(o);
    if (*features) return cmd_build_features(o);
    if (*split) return cmd_split(o);
    if (*train) return cmd_train(o);
    if (*evaluate) return cmd_evaluate(o);
    if (*cv) return cmd_cross_validate(o);
    if (*pred) {
      if (o.features.empty() && (o.config.empty() || o.city.empty())) {
        std::cerr << "error: predict needs --features or --config with --city\n\n" << pred->help();
        return 2;
      }
      return cmd_predict(o);
    }
    if (*report) return cmd_report(o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
