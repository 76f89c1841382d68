#pragma once

// Output helpers: CSV tables, binary PGM images and small SVG charts.
// Numbers are printed with a fixed "%.10g" so runs are byte-comparable.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "rrambb/complex_map.hpp"
#include "rrambb/error.hpp"
#include "rrambb/link.hpp"

namespace rrambb {

inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  CsvTable& row() {
    if (!rows_.empty() && rows_.back().size() != header_.size())
      fail(ErrorKind::InvalidArgument, "CSV row has the wrong number of cells");
    rows_.emplace_back();
    return *this;
  }
  CsvTable& cell(const std::string& s) {
    rows_.back().push_back(s);
    return *this;
  }
  CsvTable& cell(double v) { return cell(format_number(v)); }
  CsvTable& cell(std::uint64_t v) { return cell(std::to_string(v)); }
  CsvTable& cell(int v) { return cell(std::to_string(v)); }

  std::size_t size() const { return rows_.size(); }

  std::string str() const {
    std::ostringstream os;
    write_line(os, header_);
    for (const auto& r : rows_) write_line(os, r);
    return os.str();
  }

 private:
  static void write_line(std::ostream& os, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
    os << '\n';
  }

  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::IoError, "cannot write " + path.string());
  f << text;
  if (!f) fail(ErrorKind::IoError, "write failed for " + path.string());
}

inline CsvTable matrix_table(const RealMatrix& m) {
  CsvTable t({"row", "col", "value"});
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      t.row().cell(static_cast<int>(i)).cell(static_cast<int>(j)).cell(m(i, j));
  return t;
}

inline CsvTable constellation_table(const std::vector<ConstellationSample>& samples) {
  CsvTable t({"index", "re", "im", "ideal_re", "ideal_im"});
  for (std::size_t i = 0; i < samples.size(); ++i) {
    t.row()
        .cell(static_cast<std::uint64_t>(i))
        .cell(samples[i].received.real())
        .cell(samples[i].received.imag())
        .cell(samples[i].ideal.real())
        .cell(samples[i].ideal.imag());
  }
  return t;
}

// Binary PGM (P5), maxval 255.

inline GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::IoError, "cannot open image " + path.string());
  auto token = [&]() {
    std::string t;
    while (f >> std::ws && f.peek() == '#') f.ignore(std::numeric_limits<std::streamsize>::max(), '\n');
    f >> t;
    return t;
  };
  if (token() != "P5") fail(ErrorKind::IoError, path.string() + " is not a binary PGM (P5) image");
  GrayImage img;
  try {
    img.width = std::stoi(token());
    img.height = std::stoi(token());
    if (std::stoi(token()) != 255) fail(ErrorKind::IoError, path.string() + ": only maxval 255 is supported");
  } catch (const std::logic_error&) {
    fail(ErrorKind::IoError, path.string() + ": malformed PGM header");
  }
  if (img.width <= 0 || img.height <= 0) fail(ErrorKind::IoError, path.string() + ": empty image");
  f.get();
  img.pixels.resize(static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height));
  f.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
  if (f.gcount() != static_cast<std::streamsize>(img.pixels.size()))
    fail(ErrorKind::IoError, path.string() + ": truncated pixel data");
  return img;
}

inline std::string encode_pgm(const GrayImage& img) {
  std::string s = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  s.append(img.pixels.begin(), img.pixels.end());
  return s;
}

// SVG charts.

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct ChartOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
  bool scatter = false;
};

inline std::string render_svg(const std::vector<Series>& series, const ChartOptions& opt) {
  constexpr double W = 640, H = 440, L = 70, R = 150, T = 40, B = 50;
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
  auto ty = [&](double y) { return opt.log_y ? std::log10(std::max(y, 1e-12)) : y; };

  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.y[i]) || (opt.log_y && s.y[i] <= 0)) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, ty(s.y[i]));
      y1 = std::max(y1, ty(s.y[i]));
    }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (ty(y) - y0) / (y1 - y0) * (H - T - B); };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << opt.title << "</text>\n"
     << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = x0 + (x1 - x0) * i / 4, yv = y0 + (y1 - y0) * i / 4;
    const double yl = H - B - (H - T - B) * i / 4;
    os << "<text x=\"" << px(xv) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\" font-size=\"11\">"
       << format_number(std::round(xv * 100) / 100) << "</text>\n"
       << "<text x=\"" << L - 6 << "\" y=\"" << yl + 4 << "\" text-anchor=\"end\" font-size=\"11\">"
       << (opt.log_y ? "1e" + format_number(std::round(yv * 10) / 10) : format_number(std::round(yv * 100) / 100))
       << "</text>\n";
  }
  os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\" font-size=\"12\">"
     << opt.x_label << "</text>\n"
     << "<text x=\"16\" y=\"" << (T + H - B) / 2
     << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 " << (T + H - B) / 2 << ")\">"
     << opt.y_label << "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* c = colors[s % 6];
    const auto& sr = series[s];
    if (opt.scatter) {
      for (std::size_t i = 0; i < sr.x.size(); ++i)
        os << "<circle cx=\"" << format_number(px(sr.x[i])) << "\" cy=\"" << format_number(py(sr.y[i]))
           << "\" r=\"1.5\" fill=\"" << c << "\"/>\n";
    } else {
      os << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"1.8\" points=\"";
      for (std::size_t i = 0; i < sr.x.size(); ++i) {
        if (!std::isfinite(sr.y[i]) || (opt.log_y && sr.y[i] <= 0)) continue;
        os << format_number(px(sr.x[i])) << "," << format_number(py(sr.y[i])) << " ";
      }
      os << "\"/>\n";
    }
    os << "<text x=\"" << W - R + 10 << "\" y=\"" << T + 16 + 18 * static_cast<double>(s)
       << "\" font-size=\"12\" fill=\"" << c << "\">" << sr.label << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace rrambb
