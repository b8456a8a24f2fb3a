#include "pathloss/raster.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "pathloss/errors.hpp"

namespace pathloss {

RasterTile::RasterTile(double origin_easting, double origin_northing, std::size_t n_rows,
                       std::size_t n_cols, std::vector<float> heights, float nodata_value,
                       double cell_size)
    : origin_easting_(origin_easting),
      origin_northing_(origin_northing),
      cell_size_(cell_size),
      n_rows_(n_rows),
      n_cols_(n_cols),
      heights_(std::move(heights)),
      nodata_(nodata_value) {
  if (cell_size_ != 1.0) {
    throw UnsupportedResolutionError("cell size must be 1 m, got " + std::to_string(cell_size_));
  }
  if (n_rows_ == 0 || n_cols_ == 0) throw FormatError("raster must have at least one row and column");
  if (heights_.size() != n_rows_ * n_cols_) {
    throw FormatError("raster has " + std::to_string(heights_.size()) + " values, expected " +
                      std::to_string(n_rows_ * n_cols_));
  }
  for (float h : heights_) {
    if (h != nodata_ && !std::isfinite(h)) throw FormatError("raster contains a non-finite height");
  }
}

bool RasterTile::is_nodata(std::size_t row, std::size_t col) const {
  const float h = at(row, col);
  return h == nodata_ || !std::isfinite(h);
}

bool RasterTile::contains(Point p) const {
  return p.east >= min_east() && p.east <= max_east() && p.north >= min_north() &&
         p.north <= max_north();
}

Point RasterTile::cell_center(std::size_t row, std::size_t col) const {
  return {origin_easting_ + (static_cast<double>(col) + 0.5) * cell_size_,
          max_north() - (static_cast<double>(row) + 0.5) * cell_size_};
}

std::pair<std::size_t, std::size_t> RasterTile::nearest_cell(Point p) const {
  // Cell k spans [k, k+1) in grid units; ceil(u) - 1 sends exact boundaries to
  // the lower index, which is the documented tie rule.
  const double u = (p.east - origin_easting_) / cell_size_;
  const double v = (max_north() - p.north) / cell_size_;
  auto clamp_index = [](double t, std::size_t n) {
    const double k = std::ceil(t) - 1.0;
    if (k < 0.0) return std::size_t{0};
    if (k > static_cast<double>(n - 1)) return n - 1;
    return static_cast<std::size_t>(k);
  };
  return {clamp_index(v, n_rows_), clamp_index(u, n_cols_)};
}

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

template <typename T>
bool parse_number(std::string_view token, T& out) {
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace

RasterTile read_raster(std::istream& in) {
  std::string line;
  double ncols = -1, nrows = -1, cellsize = -1;
  double xll = NAN, yll = NAN;
  bool x_center = false, y_center = false;
  float nodata = -9999.0f;

  // Header: key/value lines until the first line that starts with a number.
  std::vector<std::string_view> tokens;
  std::string data_line;
  bool have_data_line = false;
  while (std::getline(in, line)) {
    tokens = split_ws(line);
    if (tokens.empty()) continue;
    double probe;
    if (parse_number(tokens[0], probe)) {
      data_line = line;
      have_data_line = true;
      break;
    }
    if (tokens.size() != 2) throw FormatError("malformed header line: " + line);
    const std::string key = lower(std::string(tokens[0]));
    double value;
    if (!parse_number(tokens[1], value)) throw FormatError("non-numeric header value: " + line);
    if (key == "ncols") ncols = value;
    else if (key == "nrows") nrows = value;
    else if (key == "xllcorner") xll = value;
    else if (key == "yllcorner") yll = value;
    else if (key == "xllcenter") { xll = value; x_center = true; }
    else if (key == "yllcenter") { yll = value; y_center = true; }
    else if (key == "cellsize") cellsize = value;
    else if (key == "nodata_value") nodata = static_cast<float>(value);
    else throw FormatError("unknown header key: " + std::string(tokens[0]));
  }
  if (ncols < 1 || nrows < 1 || ncols != std::floor(ncols) || nrows != std::floor(nrows)) {
    throw FormatError("header must give positive integer ncols and nrows");
  }
  if (std::isnan(xll) || std::isnan(yll) || cellsize <= 0) {
    throw FormatError("header must give the lower-left corner and cellsize");
  }
  if (cellsize != 1.0) {
    throw UnsupportedResolutionError("cell size must be 1 m, got " + std::to_string(cellsize));
  }
  if (x_center) xll -= cellsize / 2;
  if (y_center) yll -= cellsize / 2;

  const auto cols = static_cast<std::size_t>(ncols);
  const auto rows = static_cast<std::size_t>(nrows);
  std::vector<float> heights;
  heights.reserve(rows * cols);
  std::size_t row = 0;
  auto consume = [&](const std::string& text) {
    const auto values = split_ws(text);
    if (values.empty()) return;
    if (row >= rows) throw FormatError("more data rows than nrows");
    if (values.size() != cols) {
      throw FormatError("row " + std::to_string(row) + " has " + std::to_string(values.size()) +
                        " values, expected " + std::to_string(cols));
    }
    for (auto v : values) {
      float h;
      if (!parse_number(v, h)) throw FormatError("non-numeric height '" + std::string(v) + "'");
      heights.push_back(h);
    }
    ++row;
  };
  if (have_data_line) consume(data_line);
  while (std::getline(in, line)) consume(line);
  if (row != rows) {
    throw FormatError("found " + std::to_string(row) + " data rows, expected " + std::to_string(rows));
  }
  return RasterTile(xll, yll, rows, cols, std::move(heights), nodata, cellsize);
}

RasterTile load_raster(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open raster " + path.string());
  return read_raster(in);
}

namespace {

template <typename T>
void put_number(std::ostream& out, T value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  out.write(buf, ptr - buf);
}

}  // namespace

void write_raster(const RasterTile& tile, std::ostream& out) {
  out << "ncols " << tile.n_cols() << '\n' << "nrows " << tile.n_rows() << '\n';
  out << "xllcorner ";
  put_number(out, tile.origin_easting());
  out << "\nyllcorner ";
  put_number(out, tile.origin_northing());
  out << "\ncellsize ";
  put_number(out, tile.cell_size());
  out << "\nNODATA_value ";
  put_number(out, tile.nodata_value());
  out << '\n';
  const auto h = tile.heights();
  for (std::size_t r = 0; r < tile.n_rows(); ++r) {
    for (std::size_t c = 0; c < tile.n_cols(); ++c) {
      if (c) out << ' ';
      put_number(out, h[r * tile.n_cols() + c]);
    }
    out << '\n';
  }
}

void save_raster(const RasterTile& tile, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write raster " + path.string());
  write_raster(tile, out);
  if (!out) throw IoError("failed writing raster " + path.string());
}

std::uint64_t RasterIndex::bucket_key(std::int64_t bx, std::int64_t by) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(bx)) << 32) |
         static_cast<std::uint32_t>(by);
}

void RasterIndex::add(RasterTile tile) {
  const auto bx0 = static_cast<std::int64_t>(std::floor(tile.min_east() / kBucket));
  const auto bx1 = static_cast<std::int64_t>(std::floor(tile.max_east() / kBucket));
  const auto by0 = static_cast<std::int64_t>(std::floor(tile.min_north() / kBucket));
  const auto by1 = static_cast<std::int64_t>(std::floor(tile.max_north() / kBucket));
  const std::size_t id = tiles_.size();
  tiles_.push_back(std::move(tile));
  for (auto bx = bx0; bx <= bx1; ++bx) {
    for (auto by = by0; by <= by1; ++by) buckets_[bucket_key(bx, by)].push_back(id);
  }
}

std::ptrdiff_t RasterIndex::find_tile(Point p) const {
  if (!std::isfinite(p.east) || !std::isfinite(p.north)) return -1;
  const auto bx = static_cast<std::int64_t>(std::floor(p.east / kBucket));
  const auto by = static_cast<std::int64_t>(std::floor(p.north / kBucket));
  const auto it = buckets_.find(bucket_key(bx, by));
  if (it == buckets_.end()) return -1;
  for (std::size_t id : it->second) {
    if (tiles_[id].contains(p)) return static_cast<std::ptrdiff_t>(id);
  }
  return -1;
}

float RasterIndex::sample_nearest(Point p) const {
  const auto id = find_tile(p);
  if (id < 0) {
    std::ostringstream msg;
    msg.precision(12);
    msg << "point (" << p.east << ", " << p.north << ") is outside raster coverage";
    throw OutOfCoverageError(msg.str());
  }
  const RasterTile& t = tiles_[static_cast<std::size_t>(id)];
  const auto [row, col] = t.nearest_cell(p);
  if (t.is_nodata(row, col)) {
    std::ostringstream msg;
    msg.precision(12);
    msg << "nearest cell to (" << p.east << ", " << p.north << ") is nodata";
    throw NodataError(msg.str());
  }
  return t.at(row, col);
}

bool RasterIndex::has_data(Point p) const {
  const auto id = find_tile(p);
  if (id < 0) return false;
  const RasterTile& t = tiles_[static_cast<std::size_t>(id)];
  const auto [row, col] = t.nearest_cell(p);
  return !t.is_nodata(row, col);
}

double coverage_check(const RasterIndex& index, std::span<const Point> points) {
  if (points.empty()) throw EmptyInputError("coverage_check needs at least one point");
  std::size_t covered = 0;
  for (const Point& p : points) covered += index.has_data(p) ? 1 : 0;
  return static_cast<double>(covered) / static_cast<double>(points.size());
}

}  // namespace pathloss
