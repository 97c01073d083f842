#include "wgs/io.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <stdexcept>

namespace wgs::io {

std::string version_string() { return "wgs 0.1.0"; }

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> header_lines(const std::string& kind,
                                      const std::string& config_hash,
                                      std::uint64_t seed) {
  return {
      "kind: " + kind,
      "version: " + version_string(),
      "config_hash: " + config_hash,
      "seed: " + std::to_string(seed),
  };
}

void CsvWriter::open(const std::string& path, const std::vector<std::string>& comments,
                     const std::vector<std::string>& columns) {
  if (columns.empty()) throw std::invalid_argument("CsvWriter: no columns");
  out_.open(path, std::ios::binary);  // binary: identical bytes on every platform
  if (!out_) throw std::runtime_error("CsvWriter: cannot open " + path);
  for (const std::string& line : comments) out_ << "# " << line << "\n";
  for (std::size_t i = 0; i < columns.size(); ++i)
    out_ << columns[i] << (i + 1 < columns.size() ? "," : "\n");
  n_columns_ = columns.size();
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != n_columns_)
    throw std::invalid_argument("CsvWriter: row width != header width");
  for (std::size_t i = 0; i < cells.size(); ++i)
    out_ << cells[i] << (i + 1 < cells.size() ? "," : "\n");
}

void CsvWriter::row_values(const std::vector<double>& values) {
  std::vector<std::string> cells(values.size());
  std::transform(values.begin(), values.end(), cells.begin(), format_double);
  row(cells);
}

void CsvWriter::close() {
  if (out_.is_open()) out_.close();
}

void write_pgm(const std::string& path, const Matrix& image) {
  const double peak = image.maxCoeff();
  const double scale = peak > 0.0 ? 255.0 / peak : 0.0;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_pgm: cannot open " + path);
  out << "P5\n" << image.cols() << " " << image.rows() << "\n255\n";
  for (Eigen::Index r = 0; r < image.rows(); ++r)
    for (Eigen::Index c = 0; c < image.cols(); ++c) {
      const double v = std::clamp(image(r, c) * scale, 0.0, 255.0);
      out.put(static_cast<char>(static_cast<unsigned char>(v + 0.5)));
    }
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_text_file: cannot open " + path);
  out << content;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_text_file: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void ensure_directory(const std::string& path) {
  if (!path.empty()) std::filesystem::create_directories(path);
}

}  // namespace wgs::io
