#include "pathloss/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "pathloss/csv.hpp"
#include "pathloss/errors.hpp"
#include "pathloss/rng.hpp"

namespace pathloss::synthetic {

namespace fs = std::filesystem;

namespace {

constexpr double kBucket = 50.0;

double free_space(double freq_mhz, double d_m) {
  return 20.0 * std::log10(d_m) + 20.0 * std::log10(freq_mhz) - 27.55;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

}  // namespace

double City::terrain(Point p) const {
  const double e = p.east - origin.east;
  const double n = p.north - origin.north;
  return base_height + amp1 * std::sin(k1e * e + phase1) * std::cos(k1n * n + phase2) +
         amp2 * std::sin(k2e * e + k2n * n + phase1 * 0.5);
}

void City::index_buildings() {
  bucket_side_ = static_cast<std::size_t>(std::ceil(extent / kBucket));
  bucket_cells_.assign(bucket_side_ * bucket_side_, {});
  const auto cell = [&](double v) {
    return std::min(bucket_side_ - 1, static_cast<std::size_t>(std::max(0.0, std::floor(v / kBucket))));
  };
  for (std::uint32_t k = 0; k < buildings.size(); ++k) {
    const auto& b = buildings[k];
    for (std::size_t r = cell(b.n0); r <= cell(b.n1); ++r) {
      for (std::size_t c = cell(b.e0); c <= cell(b.e1); ++c) bucket_cells_[r * bucket_side_ + c].push_back(k);
    }
  }
}

double City::building_height(Point p) const {
  const double e = p.east - origin.east;
  const double n = p.north - origin.north;
  if (e < 0 || n < 0 || e >= extent || n >= extent || bucket_side_ == 0) return 0.0;
  const auto r = std::min(bucket_side_ - 1, static_cast<std::size_t>(n / kBucket));
  const auto c = std::min(bucket_side_ - 1, static_cast<std::size_t>(e / kBucket));
  double h = 0.0;
  for (std::uint32_t k : bucket_cells_[r * bucket_side_ + c]) {
    const auto& b = buildings[k];
    if (e >= b.e0 && e < b.e1 && n >= b.n0 && n < b.n1) h = std::max(h, b.height);
  }
  return h;
}

double City::surface(Point p) const { return terrain(p) + building_height(p); }

bool City::in_building(Point p) const { return building_height(p) > 0.0; }

City make_city(const Spec& spec, std::size_t index) {
  Rng rng(derive_seed(spec.seed, "city:" + spec.cities.at(index)));
  City c;
  c.name = spec.cities[index];
  c.origin = {500000.0 + 20000.0 * static_cast<double>(index), 200000.0 + 7000.0 * static_cast<double>(index)};
  c.extent = spec.extent;
  c.base_height = rng.uniform(20.0, 80.0);
  c.amp1 = rng.uniform(4.0, 10.0);
  c.amp2 = rng.uniform(1.0, 4.0);
  const double two_pi = 2.0 * std::numbers::pi;
  c.k1e = two_pi / rng.uniform(500.0, 1100.0);
  c.k1n = two_pi / rng.uniform(500.0, 1100.0);
  c.k2e = two_pi / rng.uniform(150.0, 300.0);
  c.k2n = two_pi / rng.uniform(150.0, 300.0);
  c.phase1 = rng.uniform(0.0, two_pi);
  c.phase2 = rng.uniform(0.0, two_pi);
  c.eirp_dbm = rng.uniform(55.0, 62.0);
  c.rx_gain_dbi = rng.uniform(0.0, 3.0);

  const double mid = c.extent / 2.0;
  while (c.buildings.size() < spec.buildings) {
    const double w = rng.uniform(8.0, 30.0);
    const double h = rng.uniform(8.0, 30.0);
    const double e0 = rng.uniform(0.0, c.extent - w);
    const double n0 = rng.uniform(0.0, c.extent - h);
    // Keep the mast clear.
    if (e0 < mid + 40.0 && e0 + w > mid - 40.0 && n0 < mid + 40.0 && n0 + h > mid - 40.0) continue;
    const double height = 4.0 + 22.0 * std::pow(rng.uniform(), 1.6);
    c.buildings.push_back({e0, n0, e0 + w, n0 + h, height});
  }
  c.index_buildings();
  return c;
}

double true_obstruction_depth(const City& city, Point rx, double rx_height) {
  const Point tx = city.tx();
  const double d = std::hypot(rx.east - tx.east, rx.north - tx.north);
  const auto steps = static_cast<std::size_t>(std::floor(d));
  if (steps < 2) return 0.0;
  const double tx_top = city.surface(tx) + city.mast_height;
  const double rx_top = city.surface(rx) + rx_height;
  std::size_t blocked = 0;
  for (std::size_t i = 0; i < steps; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(steps - 1);
    const Point p{tx.east + t * (rx.east - tx.east), tx.north + t * (rx.north - tx.north)};
    if (city.surface(p) > tx_top + t * (rx_top - tx_top)) ++blocked;
  }
  return static_cast<double>(blocked);
}

double true_path_loss(const City& city, Point rx, double rx_height, double freq_mhz) {
  const Point tx = city.tx();
  const double d = std::hypot(rx.east - tx.east, rx.north - tx.north);
  const double depth = true_obstruction_depth(city, rx, rx_height);
  const double excess = 18.0 * std::log10(d / 50.0);
  const double shadow = std::min(40.0, 7.0 * std::log2(1.0 + depth / 3.0) * std::pow(freq_mhz / 1000.0, 0.2));
  return free_space(freq_mhz, d) + excess + shadow;
}

Output generate(const Spec& spec, const fs::path& dir) {
  if (spec.tiles_per_side == 0 || std::fmod(spec.extent, static_cast<double>(spec.tiles_per_side)) != 0.0) {
    throw ConfigError("extent must split evenly into tiles");
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  Output out;
  nlohmann::json sites = {{"default_rx_height_m", spec.rx_height}, {"cities", nlohmann::json::object()}};
  const auto tile = static_cast<std::size_t>(spec.extent) / spec.tiles_per_side;

  for (std::size_t ci = 0; ci < spec.cities.size(); ++ci) {
    const City city = make_city(spec, ci);
    out.cities.push_back(city.name);
    sites["cities"][city.name] = {{"eirp_dbm", city.eirp_dbm}, {"rx_gain_dbi", city.rx_gain_dbi}};

    const fs::path city_dir = dir / city.name;
    fs::create_directories(city_dir, ec);
    if (ec) throw IoError("cannot create " + city_dir.string());
    for (std::size_t tr = 0; tr < spec.tiles_per_side; ++tr) {
      for (std::size_t tc = 0; tc < spec.tiles_per_side; ++tc) {
        const double oe = city.origin.east + static_cast<double>(tc * tile);
        const double on = city.origin.north + static_cast<double>(tr * tile);
        std::vector<float> heights(tile * tile);
        for (std::size_t r = 0; r < tile; ++r) {
          const double n = on + static_cast<double>(tile - 1 - r) + 0.5;
          for (std::size_t c = 0; c < tile; ++c) {
            const double h = city.surface({oe + static_cast<double>(c) + 0.5, n});
            heights[r * tile + c] = static_cast<float>(std::round(h * 100.0) / 100.0);
          }
        }
        save_raster(RasterTile(oe, on, tile, tile, std::move(heights), -9999.0f),
                    city_dir / ("tile_" + std::to_string(tr) + "_" + std::to_string(tc) + ".asc"));
      }
    }

    Rng rng(derive_seed(spec.seed, "rx:" + city.name));
    const Point tx = city.tx();
    std::string csv = "city,freq_mhz,tx_east,tx_north,tx_h,rx_east,rx_north,rx_h,rsl_dbm,noise_floor_dbm\n";
    auto row = [&](double f, Point rx, double rsl) {
      csv += city.name + ',' + csv::format_double(f) + ',' + csv::format_double(tx.east) + ',' +
             csv::format_double(tx.north) + ',' + csv::format_double(city.mast_height) + ',' +
             csv::format_double(rx.east) + ',' + csv::format_double(rx.north) + ',' +
             csv::format_double(spec.rx_height) + ',' + csv::format_double(rsl) + ',' +
             csv::format_double(spec.noise_floor_dbm) + '\n';
    };
    std::size_t placed = 0;
    while (placed < spec.rx_locations) {
      const double bearing = rng.uniform(0.0, 2.0 * std::numbers::pi);
      const double d = rng.uniform(spec.min_distance, spec.max_distance);
      const Point rx{std::round((tx.east + d * std::cos(bearing)) * 100.0) / 100.0,
                     std::round((tx.north + d * std::sin(bearing)) * 100.0) / 100.0};
      if (city.in_building(rx)) continue;
      ++placed;
      for (double f : spec.frequencies_mhz) {
        const double pl = true_path_loss(city, rx, spec.rx_height, f) + spec.noise_sd_db * rng.normal();
        const double rsl = std::round((city.eirp_dbm + city.rx_gain_dbi - pl) * 100.0) / 100.0;
        row(f, rx, rsl);
      }
    }
    // Rows the filters must drop: too close, or too weak.
    for (std::size_t k = 0; k < spec.rejected_rows; ++k) {
      const double bearing = rng.uniform(0.0, 2.0 * std::numbers::pi);
      const double f = spec.frequencies_mhz[k % spec.frequencies_mhz.size()];
      if (k % 2 == 0) {
        const double d = rng.uniform(10.0, 45.0);
        row(f, {tx.east + d * std::cos(bearing), tx.north + d * std::sin(bearing)}, -60.0);
      } else {
        const double d = rng.uniform(spec.min_distance, spec.max_distance);
        row(f, {tx.east + d * std::cos(bearing), tx.north + d * std::sin(bearing)},
            spec.noise_floor_dbm + rng.uniform(0.0, 6.0));
      }
    }
    write_text(dir / ("measurements_" + city.name + ".csv"), csv);
  }
  out.site_config = dir / "sites.json";
  write_text(out.site_config, sites.dump(2) + "\n");
  return out;
}

nlohmann::json experiment_config(const Spec& spec, const Output& out) {
  nlohmann::json cities = nlohmann::json::array();
  for (std::size_t ci = 0; ci < out.cities.size(); ++ci) {
    const City city = make_city(spec, ci);
    nlohmann::json rasters = nlohmann::json::array();
    for (std::size_t tr = 0; tr < spec.tiles_per_side; ++tr) {
      for (std::size_t tc = 0; tc < spec.tiles_per_side; ++tc) {
        rasters.push_back(city.name + "/tile_" + std::to_string(tr) + "_" + std::to_string(tc) + ".asc");
      }
    }
    cities.push_back({{"name", city.name},
                      {"rasters", rasters},
                      {"measurements", "measurements_" + city.name + ".csv"},
                      {"tx", {city.tx().east, city.tx().north}}});
  }
  return {{"cities", cities},
          {"site_config", "sites.json"},
          {"width", 61},
          {"d_max", 1000.0},
          {"f_max", 8000.0},
          {"earth_radius", 6364750.0},
          {"train", {{"learning_rate", 1e-4}, {"batch_size", 32}, {"epochs", 20}, {"dropout_rate", 0.25},
                     {"micro_batch", 32}}},
          {"runs_per_holdout", 1},
          {"samples_per_stratum", nullptr},
          {"run_samples_per_stratum", nullptr},
          {"validation_fraction", 0.2},
          {"models", {"cnn1d", "cnn2d", "fcn"}},
          {"seed", spec.seed},
          {"cited_baselines", {{{"label", "p1812_cited"}, {"rmse_low_db", 8.0}, {"rmse_high_db", 13.0}}}}};
}

}  // namespace pathloss::synthetic
