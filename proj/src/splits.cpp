#include "pathloss/splits.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "pathloss/csv.hpp"
#include "pathloss/errors.hpp"
#include "pathloss/rng.hpp"

namespace pathloss {

void SplitConfig::validate() const {
  if (!(theta_deg >= 0.0 && theta_deg < 360.0)) throw ConfigError("theta must lie in [0, 360)");
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw ConfigError("validation fraction must lie in (0, 1)");
  }
}

double bearing_deg(Point tx, Point rx) {
  double a = std::atan2(rx.north - tx.north, rx.east - tx.east) * 180.0 / std::numbers::pi;
  if (a < 0.0) a += 360.0;
  if (a >= 360.0) a -= 360.0;
  return a;
}

std::size_t validation_location_count(double fraction, std::size_t n) {
  const double exact = fraction * static_cast<double>(n);
  const double k = std::ceil(exact - 1e-9 * std::max(1.0, exact));
  return static_cast<std::size_t>(std::clamp(k, 0.0, static_cast<double>(n)));
}

namespace {

struct Location {
  Point rx;
  double key = 0.0;  // (bearing - theta) mod 360
  double range = 0.0;
  std::uint64_t min_link_id = 0;
  std::vector<std::size_t> members;
};

std::vector<Location> group_locations(std::span<const SampleMeta> samples, Point tx) {
  std::map<std::pair<double, double>, std::size_t> slot;
  std::vector<Location> locs;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Point rx = samples[i].rx;
    auto [it, inserted] = slot.try_emplace({rx.east, rx.north}, locs.size());
    if (inserted) {
      Location loc;
      loc.rx = rx;
      loc.range = std::hypot(rx.east - tx.east, rx.north - tx.north);
      loc.min_link_id = samples[i].link_id;
      locs.push_back(std::move(loc));
    }
    Location& loc = locs[it->second];
    loc.members.push_back(i);
    loc.min_link_id = std::min(loc.min_link_id, samples[i].link_id);
  }
  return locs;
}

}  // namespace

SplitResult angular_validation_split(std::span<const SampleMeta> samples, Point tx,
                                     const SplitConfig& config) {
  config.validate();
  auto locs = group_locations(samples, tx);
  for (const auto& loc : locs) {
    if (loc.range == 0.0) {
      throw UndefinedAngleError("Rx location of link " + std::to_string(loc.min_link_id) +
                                " coincides with the Tx; bearing is undefined");
    }
  }
  if (locs.size() < 2) {
    throw InsufficientDataError("angular split needs at least 2 distinct Rx locations");
  }
  for (auto& loc : locs) {
    double k = bearing_deg(tx, loc.rx) - config.theta_deg;
    if (k < 0.0) k += 360.0;
    if (k >= 360.0) k -= 360.0;
    loc.key = k;
  }
  std::sort(locs.begin(), locs.end(), [](const Location& a, const Location& b) {
    if (a.key != b.key) return a.key < b.key;
    if (a.range != b.range) return a.range < b.range;
    return a.min_link_id < b.min_link_id;
  });

  SplitResult result;
  result.location_count = locs.size();
  const std::size_t n_val = validation_location_count(config.validation_fraction, locs.size());
  for (std::size_t k = 0; k < locs.size(); ++k) {
    auto& target = k < n_val ? result.validation : result.train;
    target.insert(target.end(), locs[k].members.begin(), locs[k].members.end());
    if (k < n_val) result.validation_locations.push_back(locs[k].rx);
  }
  std::sort(result.train.begin(), result.train.end());
  std::sort(result.validation.begin(), result.validation.end());
  return result;
}

SplitResult diagnostic_random_split(std::span<const SampleMeta> samples, double fraction,
                                    std::uint64_t seed) {
  std::vector<std::size_t> order(samples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order.begin(), order.end());
  const std::size_t n_val = validation_location_count(fraction, order.size());
  SplitResult result;
  result.location_count = samples.size();
  result.validation.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  result.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
  std::sort(result.train.begin(), result.train.end());
  std::sort(result.validation.begin(), result.validation.end());
  return result;
}

std::vector<std::size_t> stratified_subsample(std::span<const SampleMeta> samples,
                                              std::size_t per_stratum, std::uint64_t seed) {
  std::map<std::pair<std::string, double>, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    strata[{samples[i].city, samples[i].freq_mhz}].push_back(i);
  }
  Rng rng(seed);
  std::vector<std::size_t> out;
  out.reserve(strata.size() * per_stratum);
  for (auto& [key, members] : strata) {
    if (members.size() < per_stratum) {
      throw InsufficientDataError("stratum (" + key.first + ", " + csv::format_double(key.second) +
                                  " MHz) has " + std::to_string(members.size()) +
                                  " samples, need " + std::to_string(per_stratum));
    }
    for (std::size_t k = 0; k < per_stratum; ++k) {
      const std::size_t j = k + static_cast<std::size_t>(rng.below(members.size() - k));
      std::swap(members[k], members[j]);
      out.push_back(members[k]);
    }
  }
  return out;
}

std::vector<HoldoutPlan> build_holdout_plan(const std::vector<std::string>& cities,
                                            std::size_t runs_per_holdout,
                                            std::uint64_t master_seed) {
  if (runs_per_holdout < 1) throw ConfigError("runs_per_holdout must be >= 1");
  if (cities.size() < 2) throw InsufficientDataError("holdout plan needs at least 2 cities");
  if (std::set<std::string>(cities.begin(), cities.end()).size() != cities.size()) {
    throw ConfigError("city names must be unique");
  }
  std::vector<HoldoutPlan> plans;
  for (const auto& holdout : cities) {
    for (std::size_t run = 0; run < runs_per_holdout; ++run) {
      HoldoutPlan p;
      p.holdout_city = holdout;
      p.run = run;
      p.seed = derive_seed(master_seed, "run:" + holdout + ":" + std::to_string(run));
      p.subsample_seed = derive_seed(p.seed, "subsample");
      p.init_seed = derive_seed(p.seed, "init");
      p.shuffle_seed = derive_seed(p.seed, "shuffle");
      for (const auto& c : cities) {
        if (c == holdout) continue;
        Rng rng(derive_seed(p.seed, "theta:" + c));
        p.theta_deg[c] = rng.uniform(0.0, 360.0);
      }
      plans.push_back(std::move(p));
    }
  }
  return plans;
}

nlohmann::json plan_to_json(const HoldoutPlan& p) {
  return {{"holdout_city", p.holdout_city},     {"run", p.run},
          {"seed", p.seed},                     {"subsample_seed", p.subsample_seed},
          {"init_seed", p.init_seed},           {"shuffle_seed", p.shuffle_seed},
          {"theta_deg", p.theta_deg}};
}

HoldoutPlan plan_from_json(const nlohmann::json& j) {
  try {
    HoldoutPlan p;
    p.holdout_city = j.at("holdout_city").get<std::string>();
    p.run = j.at("run").get<std::size_t>();
    p.seed = j.at("seed").get<std::uint64_t>();
    p.subsample_seed = j.at("subsample_seed").get<std::uint64_t>();
    p.init_seed = j.at("init_seed").get<std::uint64_t>();
    p.shuffle_seed = j.at("shuffle_seed").get<std::uint64_t>();
    p.theta_deg = j.at("theta_deg").get<std::map<std::string, double>>();
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("split manifest: ") + e.what());
  }
}

}  // namespace pathloss
