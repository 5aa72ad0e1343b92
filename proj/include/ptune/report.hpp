#pragma once

// Artifact writers: CSV, aligned text tables, minimal SVG plots, and the
// file digests the run manifest records.

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ptune/stats.hpp"

namespace ptune::report {

// Shortest round-trip formatting so identical doubles render identically.
std::string fmt(double v);
// Compact display form for text tables.
std::string fmt_short(double v);

class Csv {
 public:
  explicit Csv(std::vector<std::string> header);
  void add_row(const std::vector<std::string>& cells);
  void write(const std::string& path) const;
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

// Fixed-width text rendering with right-aligned numeric columns.
std::string render_table(const std::vector<std::string>& header,
                         const std::vector<std::vector<std::string>>& rows);

// ANOVA rendering in the conventional column order.
Csv anova_csv(const stats::AnovaTable& table);
std::string anova_text(const stats::AnovaTable& table);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

uint64_t fnv1a64(const std::string& bytes);
std::string digest_hex(const std::string& bytes);
std::string digest_file(const std::string& path);

// Minimal SVG scatter/line canvas with linear axes.
class SvgPlot {
 public:
  SvgPlot(double x_min, double x_max, double y_min, double y_max,
          std::string title, std::string x_label, std::string y_label);
  void polyline(const Eigen::VectorXd& xs, const Eigen::VectorXd& ys, const std::string& color,
                double width = 1.0);
  void scatter(const Eigen::VectorXd& xs, const Eigen::VectorXd& ys, const std::string& color,
               double radius = 2.5);
  void label(double x, double y, const std::string& text, const std::string& color = "#333");
  void hline(double y, const std::string& color, const std::string& dash = "4,3");
  void cell(double x0, double y0, double x1, double y1, const std::string& color);
  void write(const std::string& path) const;

 private:
  double px(double x) const;
  double py(double y) const;
  double x_min_, x_max_, y_min_, y_max_;
  std::string title_, x_label_, y_label_;
  std::vector<std::string> body_;
};

void ensure_directory(const std::string& path);

}  // namespace ptune::report
