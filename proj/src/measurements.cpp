#include "pathloss/measurements.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "pathloss/csv.hpp"
#include "pathloss/errors.hpp"
#include "pathloss/rng.hpp"

namespace pathloss {

const CityBudget& TxSiteConfig::budget(const std::string& city) const {
  const auto it = cities.find(city);
  if (it == cities.end()) throw ConfigError("no link budget configured for city '" + city + "'");
  return it->second;
}

TxSiteConfig parse_site_config(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("site config is not valid JSON: ") + e.what());
  }
  TxSiteConfig cfg;
  try {
    cfg.default_rx_height = j.value("default_rx_height_m", 1.5);
    for (const auto& [name, entry] : j.at("cities").items()) {
      cfg.cities[name] = {entry.at("eirp_dbm").get<double>(), entry.value("rx_gain_dbi", 0.0)};
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("site config: ") + e.what());
  }
  return cfg;
}

TxSiteConfig load_site_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open site config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_site_config(ss.str());
}

double DriveTestRecord::distance() const {
  return std::hypot(rx.east - tx.east, rx.north - tx.north);
}

LinkGeometry LinkRecord::geometry(int width) const {
  LinkGeometry g;
  g.link_id = measurement.link_id;
  g.tx = measurement.tx;
  g.rx = measurement.rx;
  g.tx_antenna_height = measurement.tx_height;
  g.rx_antenna_height = measurement.rx_height;
  g.width = width;
  return g;
}

std::uint64_t make_link_id(const std::string& city, std::uint64_t row) {
  return (static_cast<std::uint64_t>(fnv1a32(city)) << 32) | (row & 0xffffffffULL);
}

ParseResult parse_drive_test(std::istream& in, const TxSiteConfig& site) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("measurement file is empty (no header)");
  const auto header = csv::split(line);
  std::unordered_map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;

  static const char* kMandatory[] = {"city",   "freq_mhz", "tx_east", "tx_north",       "tx_h",
                                     "rx_east", "rx_north", "rsl_dbm", "noise_floor_dbm"};
  for (const char* name : kMandatory) {
    if (!col.count(name)) throw FormatError(std::string("measurement file lacks column '") + name + "'");
  }
  const bool has_rx_h = col.count("rx_h") > 0;
  const bool has_id = col.count("link_id") > 0;

  ParseResult result;
  std::uint64_t row = 0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::uint64_t row_index = row++;
    const auto fields = csv::split(line);
    auto skip = [&](const std::string& why) {
      ++result.skipped;
      result.skip_reasons.push_back("row " + std::to_string(row_index) + ": " + why);
    };
    if (fields.size() != header.size()) {
      skip("expected " + std::to_string(header.size()) + " fields, got " + std::to_string(fields.size()));
      continue;
    }
    DriveTestRecord r;
    r.city = fields[col["city"]];
    if (r.city.empty()) {
      skip("empty city");
      continue;
    }
    bool ok = csv::parse_double(fields[col["freq_mhz"]], r.freq_mhz) &&
              csv::parse_double(fields[col["tx_east"]], r.tx.east) &&
              csv::parse_double(fields[col["tx_north"]], r.tx.north) &&
              csv::parse_double(fields[col["tx_h"]], r.tx_height) &&
              csv::parse_double(fields[col["rx_east"]], r.rx.east) &&
              csv::parse_double(fields[col["rx_north"]], r.rx.north) &&
              csv::parse_double(fields[col["rsl_dbm"]], r.rsl_dbm) &&
              csv::parse_double(fields[col["noise_floor_dbm"]], r.noise_floor_dbm);
    if (ok) {
      if (has_rx_h && !fields[col["rx_h"]].empty()) {
        ok = csv::parse_double(fields[col["rx_h"]], r.rx_height);
      } else {
        r.rx_height = site.default_rx_height;
      }
    }
    if (ok && has_id) {
      const auto& f = fields[col["link_id"]];
      auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), r.link_id);
      ok = ec == std::errc() && p == f.data() + f.size();
    } else if (ok) {
      r.link_id = make_link_id(r.city, row_index);
    }
    if (!ok) {
      skip("unparseable field");
      continue;
    }
    result.records.push_back(std::move(r));
  }
  return result;
}

ParseResult parse_drive_test(const std::filesystem::path& path, const TxSiteConfig& site) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open measurement file " + path.string());
  return parse_drive_test(in, site);
}

bool passes_filters(const DriveTestRecord& r) {
  return r.rsl_dbm > r.noise_floor_dbm + kNoiseMarginDb && r.distance() > kMinLinkDistanceM;
}

std::vector<DriveTestRecord> filter_measurements(const std::vector<DriveTestRecord>& records) {
  std::vector<DriveTestRecord> kept;
  for (const auto& r : records) {
    if (passes_filters(r)) kept.push_back(r);
  }
  return kept;
}

double derive_path_loss(const DriveTestRecord& record, const TxSiteConfig& site) {
  const CityBudget& b = site.budget(record.city);
  return b.eirp_dbm + b.rx_gain_dbi - record.rsl_dbm;
}

std::vector<LinkRecord> make_link_records(const std::vector<DriveTestRecord>& records,
                                          const TxSiteConfig& site,
                                          std::vector<DroppedLink>* dropped) {
  std::vector<LinkRecord> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    LinkRecord lr{r, r.distance(), derive_path_loss(r, site)};
    if (!(lr.path_loss_db > 0.0)) {
      if (dropped) dropped->push_back({r.link_id, "non-positive path loss"});
      continue;
    }
    out.push_back(std::move(lr));
  }
  return out;
}

JoinResult link_profiles(const std::vector<LinkRecord>& records, const RasterIndex& index,
                         int width, double earth_radius) {
  JoinResult result;
  for (const auto& r : records) {
    try {
      PathProfile raw = extract_profile(index, r.geometry(width));
      result.samples.push_back({r, earth_curvature_correct(std::move(raw), earth_radius)});
    } catch (const Error& e) {
      result.dropped.push_back({r.measurement.link_id, e.what()});
    }
  }
  return result;
}

namespace {
const char* kLinkTableHeader =
    "link_id,city,freq_mhz,tx_east,tx_north,tx_h,rx_east,rx_north,rx_h,rsl_dbm,noise_floor_dbm,"
    "distance_m,path_loss_db,obstruction_depth_m";
}

void write_link_table(std::ostream& out, const std::vector<LinkRecord>& records,
                      const std::vector<double>& obstruction_depths) {
  out << kLinkTableHeader << '\n';
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    const auto& m = r.measurement;
    out << m.link_id << ',' << m.city;
    for (double v : {m.freq_mhz, m.tx.east, m.tx.north, m.tx_height, m.rx.east, m.rx.north,
                     m.rx_height, m.rsl_dbm, m.noise_floor_dbm, r.distance, r.path_loss_db,
                     i < obstruction_depths.size() ? obstruction_depths[i] : 0.0}) {
      out << ',' << csv::format_double(v);
    }
    out << '\n';
  }
}

std::vector<LinkTableRow> read_link_table(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || csv::trim(line) != kLinkTableHeader) {
    throw FormatError("link table header mismatch");
  }
  std::vector<LinkTableRow> rows;
  while (std::getline(in, line)) {
    if (csv::trim(line).empty()) continue;
    const auto f = csv::split(line);
    if (f.size() != 14) throw FormatError("link table row has wrong field count");
    LinkTableRow row;
    auto& m = row.record.measurement;
    auto [p, ec] = std::from_chars(f[0].data(), f[0].data() + f[0].size(), m.link_id);
    if (ec != std::errc()) throw FormatError("bad link id in link table");
    m.city = f[1];
    double* targets[] = {&m.freq_mhz,  &m.tx.east,      &m.tx.north,
                         &m.tx_height, &m.rx.east,      &m.rx.north,
                         &m.rx_height, &m.rsl_dbm,      &m.noise_floor_dbm,
                         &row.record.distance, &row.record.path_loss_db, &row.obstruction_depth};
    for (std::size_t k = 0; k < 12; ++k) {
      if (!csv::parse_double(f[k + 2], *targets[k])) throw FormatError("bad number in link table");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace pathloss
