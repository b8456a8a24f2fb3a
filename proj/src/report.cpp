#include "pathloss/report.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "pathloss/csv.hpp"
#include "pathloss/errors.hpp"

namespace pathloss {

namespace {

constexpr const char* kReportHeader =
    "model,holdout_city,run,seed,count,rmse_db,mean_error_db,sd_error_db";

std::string series_label(const EvalReport& r, std::span<const EvalReport> all) {
  const auto same_model = std::count_if(all.begin(), all.end(),
                                        [&](const EvalReport& o) { return o.model == r.model; });
  if (same_model <= 1) return r.model;
  return r.model + ":" + r.city + ":" + std::to_string(r.run);
}

std::uint64_t parse_u64(const std::string& s) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw FormatError("bad integer '" + s + "'");
  return v;
}

double parse_number(const std::string& s) {
  double v = 0.0;
  if (!csv::parse_double(s, v)) throw FormatError("bad number '" + s + "'");
  return v;
}

}  // namespace

void write_report_csv(std::ostream& out, std::span<const EvalReport> reports) {
  out << kReportHeader << '\n';
  for (const auto& r : reports) {
    out << r.model << ',' << r.city << ',' << r.run << ',' << r.seed << ',' << r.count << ','
        << csv::format_double(r.rmse) << ',' << csv::format_double(r.mean_error) << ','
        << csv::format_double(r.sd_error) << '\n';
  }
}

std::vector<EvalReport> read_report_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || csv::trim(line) != kReportHeader) {
    throw FormatError("report table header mismatch");
  }
  std::vector<EvalReport> out;
  while (std::getline(in, line)) {
    if (csv::trim(line).empty()) continue;
    const auto f = csv::split(line);
    if (f.size() != 8) throw FormatError("report row needs 8 fields: " + line);
    EvalReport r;
    r.model = f[0];
    r.city = f[1];
    r.run = static_cast<std::size_t>(parse_u64(f[2]));
    r.seed = parse_u64(f[3]);
    r.count = static_cast<std::size_t>(parse_u64(f[4]));
    r.rmse = parse_number(f[5]);
    r.mean_error = parse_number(f[6]);
    r.sd_error = parse_number(f[7]);
    out.push_back(std::move(r));
  }
  return out;
}

void write_errors_csv(std::ostream& out, std::span<const EvalReport> reports) {
  out << "model,link_id,error_db\n";
  for (const auto& r : reports) {
    for (std::size_t i = 0; i < r.errors.size(); ++i) {
      out << r.model << ',' << (i < r.link_ids.size() ? r.link_ids[i] : i) << ','
          << csv::format_double(r.errors[i]) << '\n';
    }
  }
}

std::vector<EvalReport> read_errors_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || csv::trim(line) != "model,link_id,error_db") {
    throw FormatError("error table header mismatch");
  }
  std::vector<EvalReport> out;
  while (std::getline(in, line)) {
    if (csv::trim(line).empty()) continue;
    const auto f = csv::split(line);
    if (f.size() != 3) throw FormatError("error row needs 3 fields: " + line);
    auto it = std::find_if(out.begin(), out.end(), [&](const EvalReport& r) { return r.model == f[0]; });
    if (it == out.end()) {
      out.emplace_back();
      out.back().model = f[0];
      it = out.end() - 1;
    }
    it->link_ids.push_back(parse_u64(f[1]));
    it->errors.push_back(parse_number(f[2]));
    it->count = it->errors.size();
  }
  return out;
}

void write_histogram_csv(std::ostream& out, std::span<const EvalReport> reports) {
  std::vector<Histogram> hists;
  out << "bin_low_db,bin_high_db";
  for (const auto& r : reports) {
    out << ',' << series_label(r, reports);
    hists.push_back(error_histogram(r.errors));
  }
  out << '\n';
  out << "-inf," << Histogram::bin_low(0);
  for (const auto& h : hists) out << ',' << h.underflow;
  out << '\n';
  for (std::size_t k = 0; k < hists.front().counts.size(); ++k) {
    out << Histogram::bin_low(k) << ',' << Histogram::bin_high(k);
    for (const auto& h : hists) out << ',' << h.counts[k];
    out << '\n';
  }
  out << Histogram::bin_high(hists.front().counts.size() - 1) << ",inf";
  for (const auto& h : hists) out << ',' << h.overflow;
  out << '\n';
}

void write_histogram_svg(std::ostream& out, std::span<const EvalReport> reports) {
  static constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                            "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
  constexpr double kWidth = 720, kHeight = 400, kLeft = 60, kRight = 20, kTop = 20, kBottom = 50;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;

  std::vector<Histogram> hists;
  std::size_t peak = 1;
  for (const auto& r : reports) {
    hists.push_back(error_histogram(r.errors));
    for (auto c : hists.back().counts) peak = std::max(peak, c);
  }
  const double span_db = Histogram::kHigh - Histogram::kLow + 1;
  auto x_of = [&](double db) { return kLeft + (db - (Histogram::kLow - 0.5)) / span_db * plot_w; };
  auto y_of = [&](double count) { return kTop + plot_h - count / static_cast<double>(peak) * plot_h; };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + plot_h << "\" x2=\"" << kLeft + plot_w
      << "\" y2=\"" << kTop + plot_h << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
      << kTop + plot_h << "\" stroke=\"black\"/>\n";
  for (int db = Histogram::kLow; db <= Histogram::kHigh; db += 10) {
    out << "<text x=\"" << x_of(db) << "\" y=\"" << kTop + plot_h + 16
        << "\" text-anchor=\"middle\">" << db << "</text>\n";
  }
  out << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 10
      << "\" text-anchor=\"middle\">prediction error (dB)</text>\n";
  out << "<text x=\"" << kLeft - 8 << "\" y=\"" << kTop + 10 << "\" text-anchor=\"end\">" << peak
      << "</text>\n";

  for (std::size_t s = 0; s < hists.size(); ++s) {
    const char* color = kColors[s % std::size(kColors)];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    const auto& h = hists[s];
    out << x_of(Histogram::kLow - 0.5) << ',' << y_of(0);
    for (std::size_t k = 0; k < h.counts.size(); ++k) {
      const double y = y_of(static_cast<double>(h.counts[k]));
      out << ' ' << x_of(Histogram::bin_low(k) + 0.0) << ',' << y << ' '
          << x_of(Histogram::bin_high(k)) << ',' << y;
    }
    out << ' ' << x_of(Histogram::kHigh + 0.5) << ',' << y_of(0) << "\"/>\n";
    out << "<text x=\"" << kLeft + plot_w - 4 << "\" y=\"" << kTop + 14 + 16 * static_cast<double>(s)
        << "\" text-anchor=\"end\" fill=\"" << color << "\">" << series_label(reports[s], reports)
        << " (n=" << h.total() << ")</text>\n";
  }
  out << "</svg>\n";
}

void export_report(std::span<const EvalReport> reports, const std::filesystem::path& dir) {
  if (reports.empty()) throw EmptyInputError("no reports to export");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  auto write = [&](const char* name, auto&& fn) {
    const auto path = dir / name;
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    fn(out);
    if (!out) throw IoError("failed writing " + path.string());
  };
  write("report.csv", [&](std::ostream& o) { write_report_csv(o, reports); });
  write("errors.csv", [&](std::ostream& o) { write_errors_csv(o, reports); });
  write("hist.csv", [&](std::ostream& o) { write_histogram_csv(o, reports); });
  write("hist.svg", [&](std::ostream& o) { write_histogram_svg(o, reports); });
}

}  // namespace pathloss
