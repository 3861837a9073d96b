#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "gvs/error.hpp"

namespace gvs::app {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Short form for log messages.
inline std::string brief(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

// Minimal comma-separated writer; numbers use %.17g.
class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path) : path_(path), os_(path, std::ios::binary) {
    if (!os_) throw IoError("cannot open for writing: " + path);
  }
  ~CsvWriter() = default;

  CsvWriter& cell(const std::string& s) {
    if (!first_) os_ << ',';
    os_ << s;
    first_ = false;
    return *this;
  }
  CsvWriter& cell(double v) { return cell(num(v)); }
  CsvWriter& cell(int v) { return cell(std::to_string(v)); }
  CsvWriter& cell(long v) { return cell(std::to_string(v)); }
  CsvWriter& cells(const Eigen::VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) cell(v[i]);
    return *this;
  }
  void end() {
    os_ << '\n';
    first_ = true;
    if (!os_) throw IoError("write failed: " + path_);
  }

 private:
  std::string path_;
  std::ofstream os_;
  bool first_ = true;
};

}  // namespace gvs::app
