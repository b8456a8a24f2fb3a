#include "pathloss/config.hpp"

#include <fstream>

#include "pathloss/errors.hpp"

namespace pathloss {

namespace fs = std::filesystem;

std::vector<std::string> ExperimentConfig::city_names() const {
  std::vector<std::string> names;
  for (const auto& c : cities) names.push_back(c.name);
  return names;
}

const CitySource& ExperimentConfig::city(const std::string& name) const {
  for (const auto& c : cities) {
    if (c.name == name) return c;
  }
  throw ConfigError("unknown city '" + name + "'");
}

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  if (path.is_relative() && !base.empty()) return base / path;
  return path;
}

std::optional<std::size_t> optional_count(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<std::size_t>();
}

}  // namespace

ExperimentConfig parse_experiment_config(const nlohmann::json& j, const fs::path& base) {
  ExperimentConfig c;
  try {
    for (const auto& city : j.at("cities")) {
      CitySource s;
      s.name = city.at("name").get<std::string>();
      for (const auto& r : city.at("rasters")) s.rasters.push_back(resolve(base, r.get<std::string>()));
      s.measurements = resolve(base, city.at("measurements").get<std::string>());
      if (city.contains("tx")) {
        const auto& tx = city.at("tx");
        s.tx = Point{tx.at(0).get<double>(), tx.at(1).get<double>()};
      }
      c.cities.push_back(std::move(s));
    }
    c.site_config = resolve(base, j.at("site_config").get<std::string>());
    c.width = j.value("width", c.width);
    if (j.contains("d_max") && !j.at("d_max").is_null()) c.d_max = j.at("d_max").get<double>();
    c.f_max = j.value("f_max", c.f_max);
    c.earth_radius = j.value("earth_radius", c.earth_radius);
    if (j.contains("train")) c.train = nn::train_config_from_json(j.at("train"));
    c.runs_per_holdout = j.value("runs_per_holdout", c.runs_per_holdout);
    c.samples_per_stratum = optional_count(j, "samples_per_stratum");
    c.run_samples_per_stratum = optional_count(j, "run_samples_per_stratum");
    c.validation_fraction = j.value("validation_fraction", c.validation_fraction);
    if (j.contains("models")) {
      c.models.clear();
      for (const auto& m : j.at("models")) c.models.push_back(parse_model_kind(m.get<std::string>()));
    }
    c.seed = j.value("seed", c.seed);
    if (j.contains("cited_baselines")) {
      for (const auto& b : j.at("cited_baselines")) {
        c.cited.push_back({b.at("label").get<std::string>(), b.at("rmse_low_db").get<double>(),
                           b.at("rmse_high_db").get<double>()});
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("experiment config: ") + e.what());
  }
  if (c.cities.empty()) throw ConfigError("experiment config lists no cities");
  if (c.width < 1 || c.width % 2 == 0) throw ConfigError("width must be odd and positive");
  if (c.d_max && !(*c.d_max > 0.0)) throw ConfigError("d_max must be positive");
  if (!(c.f_max > 0.0)) throw ConfigError("f_max must be positive");
  if (c.runs_per_holdout < 1) throw ConfigError("runs_per_holdout must be at least 1");
  if (!(c.validation_fraction > 0.0 && c.validation_fraction < 1.0)) {
    throw ConfigError("validation_fraction must lie in (0, 1)");
  }
  if (c.models.empty()) throw ConfigError("no models requested");
  return c;
}

ExperimentConfig load_experiment_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return parse_experiment_config(j, path.parent_path());
}

nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json cities = nlohmann::json::array();
  for (const auto& s : c.cities) {
    nlohmann::json city = {{"name", s.name}, {"measurements", s.measurements.string()}};
    city["rasters"] = nlohmann::json::array();
    for (const auto& r : s.rasters) city["rasters"].push_back(r.string());
    if (s.tx) city["tx"] = {s.tx->east, s.tx->north};
    cities.push_back(std::move(city));
  }
  nlohmann::json models = nlohmann::json::array();
  for (auto m : c.models) models.push_back(model_kind_name(m));
  nlohmann::json cited = nlohmann::json::array();
  for (const auto& b : c.cited) {
    cited.push_back({{"label", b.label}, {"rmse_low_db", b.rmse_low_db}, {"rmse_high_db", b.rmse_high_db}});
  }
  nlohmann::json j = {{"cities", cities},
                      {"site_config", c.site_config.string()},
                      {"width", c.width},
                      {"d_max", c.d_max ? nlohmann::json(*c.d_max) : nlohmann::json()},
                      {"f_max", c.f_max},
                      {"earth_radius", c.earth_radius},
                      {"train", nn::to_json(c.train)},
                      {"runs_per_holdout", c.runs_per_holdout},
                      {"validation_fraction", c.validation_fraction},
                      {"models", models},
                      {"seed", c.seed},
                      {"cited_baselines", cited}};
  j["samples_per_stratum"] = c.samples_per_stratum ? nlohmann::json(*c.samples_per_stratum) : nlohmann::json();
  j["run_samples_per_stratum"] =
      c.run_samples_per_stratum ? nlohmann::json(*c.run_samples_per_stratum) : nlohmann::json();
  return j;
}

}  // namespace pathloss
