#include "ptune/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ptune::report {

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Csv::Csv(std::vector<std::string> header) : header_(std::move(header)) {}

void Csv::add_row(const std::vector<std::string>& cells) {
  if (cells.size() != header_.size()) throw std::invalid_argument("csv row width mismatch");
  rows_.push_back(cells);
}

std::string Csv::str() const {
  std::ostringstream os;
  for (size_t i = 0; i < header_.size(); ++i) os << (i ? "," : "") << header_[i];
  os << "\n";
  for (const auto& row : rows_) {
    for (size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
    os << "\n";
  }
  return os.str();
}

void Csv::write(const std::string& path) const { write_text_file(path, str()); }

std::string render_table(const std::vector<std::string>& header,
                         const std::vector<std::vector<std::string>>& rows) {
  std::vector<size_t> width(header.size());
  for (size_t i = 0; i < header.size(); ++i) width[i] = header[i].size();
  for (const auto& row : rows)
    for (size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());

  std::ostringstream os;
  auto emit = [&](const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
      const size_t pad = width[i] - cells[i].size();
      if (i == 0) {
        os << cells[i] << std::string(pad, ' ');
      } else {
        os << std::string(pad, ' ') << cells[i];
      }
      if (i + 1 < cells.size()) os << "  ";
    }
    os << "\n";
  };
  emit(header);
  size_t total = 0;
  for (size_t i = 0; i < width.size(); ++i) total += width[i] + (i + 1 < width.size() ? 2 : 0);
  os << std::string(total, '-') << "\n";
  for (const auto& row : rows) emit(row);
  return os.str();
}

std::string fmt_short(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const double a = std::fabs(v);
  if (v != 0.0 && (a >= 1e5 || a < 1e-3)) {
    std::snprintf(buf, sizeof buf, "%.4e", v);
  } else {
    std::snprintf(buf, sizeof buf, "%.5g", v);
  }
  return buf;
}

Csv anova_csv(const stats::AnovaTable& table) {
  Csv csv({"SoV", "SS", "DoF", "MS", "Fo", "P-Value"});
  for (const auto& r : table.rows)
    csv.add_row({r.source, fmt(r.ss), fmt(r.dof), fmt(r.ms), fmt(r.f), fmt(r.p)});
  csv.add_row({"Error", fmt(table.error.ss), fmt(table.error.dof), fmt(table.error.ms), "", ""});
  csv.add_row({"Total", fmt(table.total.ss), fmt(table.total.dof), "", "", ""});
  return csv;
}

std::string anova_text(const stats::AnovaTable& table) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : table.rows)
    rows.push_back({r.source, fmt_short(r.ss), fmt_short(r.dof), fmt_short(r.ms), fmt_short(r.f),
                    fmt_short(r.p)});
  rows.push_back({"Error", fmt_short(table.error.ss), fmt_short(table.error.dof),
                  fmt_short(table.error.ms), "", ""});
  rows.push_back({"Total", fmt_short(table.total.ss), fmt_short(table.total.dof), "", "", ""});
  return render_table({"SoV", "SS", "DoF", "MS", "Fo", "P-Value"}, rows);
}

void ensure_directory(const std::string& path) {
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec) throw std::runtime_error("cannot create directory " + path + ": " + ec.message());
}

void write_text_file(const std::string& path, const std::string& content) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) ensure_directory(parent.string());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os << content;
}

std::string read_text_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

uint64_t fnv1a64(const std::string& bytes) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string digest_hex(const std::string& bytes) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

std::string digest_file(const std::string& path) { return digest_hex(read_text_file(path)); }

namespace {
constexpr double kW = 720, kH = 480;
constexpr double kL = 70, kR = 20, kT = 40, kB = 50;

std::string f2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

SvgPlot::SvgPlot(double x_min, double x_max, double y_min, double y_max, std::string title,
                 std::string x_label, std::string y_label)
    : x_min_(x_min), x_max_(x_max), y_min_(y_min), y_max_(y_max),
      title_(std::move(title)), x_label_(std::move(x_label)), y_label_(std::move(y_label)) {
  if (!(x_max_ > x_min_)) x_max_ = x_min_ + 1.0;
  if (!(y_max_ > y_min_)) y_max_ = y_min_ + 1.0;
}

double SvgPlot::px(double x) const { return kL + (x - x_min_) / (x_max_ - x_min_) * (kW - kL - kR); }
double SvgPlot::py(double y) const { return kH - kB - (y - y_min_) / (y_max_ - y_min_) * (kH - kT - kB); }

void SvgPlot::polyline(const Eigen::VectorXd& xs, const Eigen::VectorXd& ys,
                       const std::string& color, double width) {
  std::string pts;
  for (int i = 0; i < xs.size(); ++i) pts += f2(px(xs(i))) + "," + f2(py(ys(i))) + " ";
  body_.push_back("<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"" + f2(width) +
                  "\" points=\"" + pts + "\"/>");
}

void SvgPlot::scatter(const Eigen::VectorXd& xs, const Eigen::VectorXd& ys,
                      const std::string& color, double radius) {
  for (int i = 0; i < xs.size(); ++i)
    body_.push_back("<circle cx=\"" + f2(px(xs(i))) + "\" cy=\"" + f2(py(ys(i))) + "\" r=\"" +
                    f2(radius) + "\" fill=\"" + color + "\"/>");
}

void SvgPlot::label(double x, double y, const std::string& text, const std::string& color) {
  body_.push_back("<text x=\"" + f2(px(x) + 4) + "\" y=\"" + f2(py(y) - 4) +
                  "\" font-size=\"11\" fill=\"" + color + "\">" + xml_escape(text) + "</text>");
}

void SvgPlot::hline(double y, const std::string& color, const std::string& dash) {
  body_.push_back("<line x1=\"" + f2(px(x_min_)) + "\" y1=\"" + f2(py(y)) + "\" x2=\"" +
                  f2(px(x_max_)) + "\" y2=\"" + f2(py(y)) + "\" stroke=\"" + color +
                  "\" stroke-dasharray=\"" + dash + "\"/>");
}

void SvgPlot::cell(double x0, double y0, double x1, double y1, const std::string& color) {
  const double rx = std::min(px(x0), px(x1));
  const double ry = std::min(py(y0), py(y1));
  const double w = std::fabs(px(x1) - px(x0));
  const double h = std::fabs(py(y1) - py(y0));
  body_.push_back("<rect x=\"" + f2(rx) + "\" y=\"" + f2(ry) + "\" width=\"" + f2(w) +
                  "\" height=\"" + f2(h) + "\" fill=\"" + color + "\" stroke=\"none\"/>");
}

void SvgPlot::write(const std::string& path) const {
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
     << "\" viewBox=\"0 0 " << kW << " " << kH << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<rect x=\"" << kL << "\" y=\"" << kT << "\" width=\"" << (kW - kL - kR) << "\" height=\""
     << (kH - kT - kB) << "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double fx = x_min_ + (x_max_ - x_min_) * i / 5.0;
    const double fy = y_min_ + (y_max_ - y_min_) * i / 5.0;
    os << "<text x=\"" << f2(px(fx)) << "\" y=\"" << (kH - kB + 16)
       << "\" font-size=\"10\" text-anchor=\"middle\">" << fmt_short(fx) << "</text>\n";
    os << "<text x=\"" << (kL - 6) << "\" y=\"" << f2(py(fy) + 3)
       << "\" font-size=\"10\" text-anchor=\"end\">" << fmt_short(fy) << "</text>\n";
  }
  os << "<text x=\"" << (kW / 2) << "\" y=\"20\" font-size=\"13\" text-anchor=\"middle\">"
     << xml_escape(title_) << "</text>\n";
  os << "<text x=\"" << (kW / 2) << "\" y=\"" << (kH - 12)
     << "\" font-size=\"11\" text-anchor=\"middle\">" << xml_escape(x_label_) << "</text>\n";
  os << "<text x=\"16\" y=\"" << (kH / 2)
     << "\" font-size=\"11\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << (kH / 2)
     << ")\">" << xml_escape(y_label_) << "</text>\n";
  for (const auto& b : body_) os << b << "\n";
  os << "</svg>\n";
  write_text_file(path, os.str());
}

}  // namespace ptune::report
