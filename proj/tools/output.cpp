#include "output.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <system_error>

#include "starkit/common.hpp"

namespace starkit::cli {

std::string num(double v) {
  if (v == 0.0) return "0";  // also folds -0
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_atomic(const std::string& path, const std::string& text) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write " + tmp.string());
    out << text;
    out.flush();
    if (!out) throw ValidationError("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw ValidationError("cannot move artifact into place: " + ec.message());
  }
}

std::string svg_plot(const std::vector<Series>& series, const PlotOptions& opts) {
  constexpr double W = 640, H = 400, L = 70, R = 20, T = 40, B = 50;
  auto tx = [&](double v) { return opts.log_x ? std::log10(std::max(v, 1e-300)) : v; };
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      x0 = std::min(x0, tx(s.x[i]));
      x1 = std::max(x1, tx(s.x[i]));
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  if (!(x1 > x0)) x1 = x0 + 1;
  if (!(y1 > y0)) y1 = y0 + 1;
  auto px = [&](double v) { return L + (tx(v) - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double v) { return H - B - (v - y0) / (y1 - y0) * (H - T - B); };
  static const char* colours[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << opts.title << "</text>\n";
  o << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
    << "\" stroke=\"black\"/>\n";
  o << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double fx = x0 + (x1 - x0) * k / 4, fy = y0 + (y1 - y0) * k / 4;
    const double sx = L + (W - L - R) * k / 4, sy = H - B - (H - T - B) * k / 4;
    o << "<text x=\"" << sx << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\" font-size=\"11\">"
      << (opts.log_x ? "1e" + num(std::round(fx * 10) / 10) : num(fx)) << "</text>\n";
    o << "<text x=\"" << L - 6 << "\" y=\"" << sy + 4 << "\" text-anchor=\"end\" font-size=\"11\">"
      << num(std::round(fy * 1e4) / 1e4) << "</text>\n";
  }
  o << "<text x=\"" << W / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\" font-size=\"12\">"
    << opts.x_label << "</text>\n";
  o << "<text x=\"16\" y=\"" << H / 2 << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 "
    << H / 2 << ")\">" << opts.y_label << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* c = colours[k % 5];
    if (opts.scatter) {
      for (std::size_t i = 0; i < s.x.size(); ++i)
        o << "<circle cx=\"" << num(px(s.x[i])) << "\" cy=\"" << num(py(s.y[i])) << "\" r=\"1.5\" fill=\"" << c
          << "\"/>\n";
    } else {
      o << "<polyline fill=\"none\" stroke=\"" << c << "\" points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i) o << (i ? " " : "") << num(px(s.x[i])) << "," << num(py(s.y[i]));
      o << "\"/>\n";
    }
    o << "<text x=\"" << W - R - 4 << "\" y=\"" << T + 14 * (k + 1) << "\" text-anchor=\"end\" font-size=\"11\" fill=\""
      << c << "\">" << s.label << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace starkit::cli
