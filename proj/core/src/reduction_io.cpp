#include "gvs/reduction_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "gvs/error.hpp"

namespace gvs {

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

namespace {

constexpr const char* kSnapMagic = "GVSSNAP";
constexpr const char* kModesMagic = "GVSMODES";
constexpr int kVersion = 1;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <class Range>
void write_row(std::ostream& os, const char* key, const Range& values) {
  os << key;
  for (double v : values) os << ' ' << fmt(v);
  os << '\n';
}

void write_vector(std::ostream& os, const char* key, const Eigen::VectorXd& v) {
  os << key;
  for (Eigen::Index i = 0; i < v.size(); ++i) os << ' ' << fmt(v[i]);
  os << '\n';
}

void write_meta(std::ostream& os, const std::map<std::string, std::string>& meta) {
  for (const auto& [k, v] : meta) {
    if (k.find_first_of(" \n") != std::string::npos || v.find('\n') != std::string::npos)
      throw IoError("metadata entries must be single-line with space-free keys: " + k);
    os << "meta " << k << ' ' << v << '\n';
  }
}

void write_header(std::ostream& os, const FileHeader& h) {
  os << "config_hash " << (h.config_hash.empty() ? "-" : h.config_hash) << '\n';
  os << "seed " << h.seed << '\n';
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for writing: " + path);
  return os;
}

// Line-oriented reader with the path in every error message.
class Reader {
 public:
  explicit Reader(const std::string& path) : path_(path), is_(path, std::ios::binary) {
    if (!is_) throw IoError("cannot open: " + path);
  }

  std::istringstream line(const std::string& key) {
    std::string text;
    if (!std::getline(is_, text)) fail("unexpected end of file, expected '" + key + "'");
    ++number_;
    std::istringstream ls(text);
    std::string got;
    ls >> got;
    if (got != key) fail("expected '" + key + "', found '" + got + "'");
    return ls;
  }

  bool peek_key(const std::string& key) {
    const auto pos = is_.tellg();
    std::string text;
    if (!std::getline(is_, text)) {
      is_.clear();
      is_.seekg(pos);
      return false;
    }
    is_.seekg(pos);
    std::istringstream ls(text);
    std::string got;
    ls >> got;
    return got == key;
  }

  std::vector<double> numbers(const std::string& key, std::size_t expected) {
    auto ls = line(key);
    std::vector<double> out;
    out.reserve(expected);
    std::string tok;
    while (ls >> tok) out.push_back(parse_double(tok));
    if (out.size() != expected)
      fail("'" + key + "' has " + std::to_string(out.size()) + " values, expected " + std::to_string(expected));
    return out;
  }

  long integer(const std::string& key) {
    auto ls = line(key);
    long v = 0;
    if (!(ls >> v) || v < 0) fail("bad integer for '" + key + "'");
    return v;
  }

  std::string word(const std::string& key) {
    auto ls = line(key);
    std::string v;
    if (!(ls >> v)) fail("missing value for '" + key + "'");
    return v;
  }

  void magic(const char* expected) {
    auto ls = line(expected);
    int version = 0;
    if (!(ls >> version)) fail("missing format version");
    if (version != kVersion) fail("unsupported format version " + std::to_string(version));
  }

  FileHeader header() {
    FileHeader h;
    h.config_hash = word("config_hash");
    if (h.config_hash == "-") h.config_hash.clear();
    auto ls = line("seed");
    if (!(ls >> h.seed)) fail("bad seed");
    return h;
  }

  std::map<std::string, std::string> meta() {
    std::map<std::string, std::string> out;
    while (peek_key("meta")) {
      auto ls = line("meta");
      std::string k, v;
      ls >> k;
      ls >> std::ws;
      std::getline(ls, v);
      out[k] = v;
    }
    return out;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw IoError(path_ + ":" + std::to_string(number_) + ": " + msg);
  }

  double parse_double(const std::string& tok) const {
    try {
      std::size_t used = 0;
      const double v = std::stod(tok, &used);
      if (used != tok.size()) fail("malformed number '" + tok + "'");
      return v;
    } catch (const std::invalid_argument&) {
      fail("malformed number '" + tok + "'");
    } catch (const std::out_of_range&) {
      fail("number out of range '" + tok + "'");
    }
  }

 private:
  std::string path_;
  std::ifstream is_;
  long number_ = 0;
};

SnapshotLayout parse_layout(Reader& r) {
  const std::string name = r.word("layout");
  try {
    return snapshot_layout_from_string(name);
  } catch (const Error&) {
    r.fail("unknown layout '" + name + "'");
  }
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

void write_snapshots(const std::string& path, const SnapshotMatrix& s, const FileHeader& header) {
  if (s.data.rows() % 6 != 0) throw DimensionError("snapshot rows must be a multiple of 6");
  auto os = open_out(path);
  os << kSnapMagic << ' ' << kVersion << '\n';
  os << "layout " << to_string(s.layout) << '\n';
  os << "rows " << s.data.rows() << '\n';
  os << "cols " << s.data.cols() << '\n';
  write_header(os, header);
  write_row(os, "abscissae", s.abscissae);
  write_meta(os, s.metadata);
  for (Eigen::Index j = 0; j < s.data.cols(); ++j) {
    os << "snapshot";
    for (Eigen::Index i = 0; i < s.data.rows(); ++i) os << ' ' << fmt(s.data(i, j));
    os << '\n';
  }
  if (!os) throw IoError("write failed: " + path);
}

SnapshotMatrix read_snapshots(const std::string& path, FileHeader* header) {
  Reader r(path);
  r.magic(kSnapMagic);
  SnapshotMatrix s;
  s.layout = parse_layout(r);
  const long rows = r.integer("rows");
  const long cols = r.integer("cols");
  if (rows % 6 != 0) r.fail("rows must be a multiple of 6");
  const FileHeader h = r.header();
  if (header) *header = h;
  auto ls = r.line("abscissae");
  std::string tok;
  while (ls >> tok) s.abscissae.push_back(r.parse_double(tok));
  s.metadata = r.meta();
  s.data.resize(rows, cols);
  for (long j = 0; j < cols; ++j) s.data.col(j) = to_vector(r.numbers("snapshot", static_cast<std::size_t>(rows)));
  return s;
}

void write_modes(const std::string& path, const ModeFile& m) {
  const ReducedBasis& b = m.basis;
  const Eigen::Index n = b.modes.cols();
  if (b.modes.rows() % 6 != 0) throw DimensionError("mode rows must be a multiple of 6");
  if (b.q_min.size() != n || b.q_max.size() != n) throw DimensionError("mode bounds size mismatch");
  auto os = open_out(path);
  os << kModesMagic << ' ' << kVersion << '\n';
  os << "layout " << to_string(b.layout) << '\n';
  os << "rows " << b.modes.rows() << '\n';
  os << "n " << n << '\n';
  write_header(os, m.header);
  const Eigen::VectorXd& spectrum = m.sigma_all.size() > 0 ? m.sigma_all : b.sigma;
  os << "spectrum " << spectrum.size() << '\n';
  write_vector(os, "sigma", spectrum);
  write_row(os, "abscissae", b.abscissae);
  write_vector(os, "q_min", b.q_min);
  write_vector(os, "q_max", b.q_max);
  write_meta(os, m.metadata);
  for (Eigen::Index j = 0; j < n; ++j) {
    os << "mode";
    for (Eigen::Index i = 0; i < b.modes.rows(); ++i) os << ' ' << fmt(b.modes(i, j));
    os << '\n';
  }
  if (!os) throw IoError("write failed: " + path);
}

ModeFile read_modes(const std::string& path) {
  Reader r(path);
  r.magic(kModesMagic);
  ModeFile m;
  ReducedBasis& b = m.basis;
  b.layout = parse_layout(r);
  const long rows = r.integer("rows");
  const long n = r.integer("n");
  if (rows % 6 != 0) r.fail("rows must be a multiple of 6");
  m.header = r.header();
  const long count = r.integer("spectrum");
  if (count < n) r.fail("spectrum shorter than retained mode count");
  m.sigma_all = to_vector(r.numbers("sigma", static_cast<std::size_t>(count)));
  b.sigma = m.sigma_all.head(n);
  auto ls = r.line("abscissae");
  std::string tok;
  while (ls >> tok) b.abscissae.push_back(r.parse_double(tok));
  b.q_min = to_vector(r.numbers("q_min", static_cast<std::size_t>(n)));
  b.q_max = to_vector(r.numbers("q_max", static_cast<std::size_t>(n)));
  m.metadata = r.meta();
  b.modes.resize(rows, n);
  for (long j = 0; j < n; ++j) b.modes.col(j) = to_vector(r.numbers("mode", static_cast<std::size_t>(rows)));
  return m;
}

}  // namespace gvs
