#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <unordered_map>
#include <vector>

namespace pathloss {

/// Planar position in projected metres.
struct Point {
  double east = 0.0;
  double north = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

/// A georeferenced 1 m surface height grid. Rows run north to south, so row 0
/// is the northernmost row, matching the ASCII grid layout.
class RasterTile {
 public:
  RasterTile(double origin_easting, double origin_northing, std::size_t n_rows,
             std::size_t n_cols, std::vector<float> heights, float nodata_value,
             double cell_size = 1.0);

  double origin_easting() const { return origin_easting_; }
  double origin_northing() const { return origin_northing_; }
  double cell_size() const { return cell_size_; }
  std::size_t n_rows() const { return n_rows_; }
  std::size_t n_cols() const { return n_cols_; }
  float nodata_value() const { return nodata_; }
  std::span<const float> heights() const { return heights_; }

  float at(std::size_t row, std::size_t col) const { return heights_[row * n_cols_ + col]; }
  bool is_nodata(std::size_t row, std::size_t col) const;

  double min_east() const { return origin_easting_; }
  double max_east() const { return origin_easting_ + static_cast<double>(n_cols_) * cell_size_; }
  double min_north() const { return origin_northing_; }
  double max_north() const { return origin_northing_ + static_cast<double>(n_rows_) * cell_size_; }
  bool contains(Point p) const;

  Point cell_center(std::size_t row, std::size_t col) const;

  /// Row/column of the cell whose center is nearest to `p`. Exact half-cell
  /// ties go to the lower row, then the lower column. `p` must be inside.
  std::pair<std::size_t, std::size_t> nearest_cell(Point p) const;

 private:
  double origin_easting_;
  double origin_northing_;
  double cell_size_;
  std::size_t n_rows_;
  std::size_t n_cols_;
  std::vector<float> heights_;
  float nodata_;
};

/// Reads an ESRI ASCII grid. Throws FormatError on malformed input and
/// UnsupportedResolutionError when cellsize is not 1.
RasterTile load_raster(const std::filesystem::path& path);
RasterTile read_raster(std::istream& in);

/// Writes an ESRI ASCII grid using shortest round-trip float formatting.
void write_raster(const RasterTile& tile, std::ostream& out);
void save_raster(const RasterTile& tile, const std::filesystem::path& path);

/// Collection of tiles queried as one surface. Tiles may abut; where extents
/// overlap, the tile inserted first wins. Immutable once populated.
class RasterIndex {
 public:
  RasterIndex() = default;

  void add(RasterTile tile);
  std::size_t size() const { return tiles_.size(); }
  const RasterTile& tile(std::size_t i) const { return tiles_[i]; }

  /// Index of the tile answering queries at `p`, or -1 outside coverage.
  std::ptrdiff_t find_tile(Point p) const;

  /// Height of the nearest cell center. Throws OutOfCoverageError or NodataError.
  float sample_nearest(Point p) const;
  float sample_nearest(double easting, double northing) const {
    return sample_nearest(Point{easting, northing});
  }

  /// True when `p` is covered and its nearest cell holds data.
  bool has_data(Point p) const;

 private:
  static constexpr double kBucket = 1000.0;
  static std::uint64_t bucket_key(std::int64_t bx, std::int64_t by);

  std::vector<RasterTile> tiles_;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> buckets_;
};

/// Fraction of `points` that are covered and not nodata. Throws EmptyInputError.
double coverage_check(const RasterIndex& index, std::span<const Point> points);

}  // namespace pathloss
