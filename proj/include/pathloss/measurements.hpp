#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "pathloss/profile.hpp"
#include "pathloss/raster.hpp"

namespace pathloss {

inline constexpr double kNoiseMarginDb = 6.0;
inline constexpr double kMinLinkDistanceM = 50.0;

struct CityBudget {
  double eirp_dbm = 0.0;
  double rx_gain_dbi = 0.0;
};

/// Per-city link budget used to turn received signal level into path loss.
struct TxSiteConfig {
  std::map<std::string, CityBudget> cities;
  double default_rx_height = 1.5;

  const CityBudget& budget(const std::string& city) const;
};

/// Reads {"default_rx_height_m": h, "cities": {name: {"eirp_dbm": x, "rx_gain_dbi": y}}}.
TxSiteConfig load_site_config(const std::filesystem::path& path);
TxSiteConfig parse_site_config(const std::string& json_text);

struct DriveTestRecord {
  std::uint64_t link_id = 0;
  std::string city;
  double freq_mhz = 0.0;
  Point tx;
  Point rx;
  double tx_height = 0.0;
  double rx_height = 0.0;
  double rsl_dbm = 0.0;
  double noise_floor_dbm = 0.0;

  double distance() const;
};

struct LinkRecord {
  DriveTestRecord measurement;
  double distance = 0.0;
  double path_loss_db = 0.0;

  LinkGeometry geometry(int width) const;
};

struct ParseResult {
  std::vector<DriveTestRecord> records;
  std::size_t skipped = 0;
  std::vector<std::string> skip_reasons;
};

/// Link ids combine a hash of the city name with the data row index so they are
/// unique across cities; an explicit `link_id` column overrides them.
std::uint64_t make_link_id(const std::string& city, std::uint64_t row);

/// Parses the measurement CSV. Columns are matched by header name:
/// city, freq_mhz, tx_east, tx_north, tx_h, rx_east, rx_north, [rx_h],
/// rsl_dbm, noise_floor_dbm, [link_id]. Unparseable rows are skipped and
/// counted. Throws FormatError when a mandatory column is missing.
ParseResult parse_drive_test(std::istream& in, const TxSiteConfig& site);
ParseResult parse_drive_test(const std::filesystem::path& path, const TxSiteConfig& site);

/// Keeps records with rsl > noise floor + 6 dB and planar distance > 50 m.
std::vector<DriveTestRecord> filter_measurements(const std::vector<DriveTestRecord>& records);
bool passes_filters(const DriveTestRecord& record);

/// path loss = EIRP + receive gain - RSL. Throws ConfigError for unknown cities.
double derive_path_loss(const DriveTestRecord& record, const TxSiteConfig& site);

struct DroppedLink {
  std::uint64_t link_id = 0;
  std::string reason;
};

/// Builds LinkRecords; records with a non-positive path loss are dropped.
std::vector<LinkRecord> make_link_records(const std::vector<DriveTestRecord>& records,
                                          const TxSiteConfig& site,
                                          std::vector<DroppedLink>* dropped = nullptr);

struct LinkedSample {
  LinkRecord record;
  PathProfile profile;  ///< curvature corrected, full width
};

struct JoinResult {
  std::vector<LinkedSample> samples;
  std::vector<DroppedLink> dropped;
};

/// Extracts and curvature-corrects one profile per record. Records whose grid
/// leaves coverage or hits nodata are dropped with the reason.
JoinResult link_profiles(const std::vector<LinkRecord>& records, const RasterIndex& index,
                         int width, double earth_radius = kDefaultEarthRadius);

// Label sidecar table: one CSV row per linked sample, keyed by link id.
void write_link_table(std::ostream& out, const std::vector<LinkRecord>& records,
                      const std::vector<double>& obstruction_depths);
struct LinkTableRow {
  LinkRecord record;
  double obstruction_depth = 0.0;
};
std::vector<LinkTableRow> read_link_table(std::istream& in);

}  // namespace pathloss
