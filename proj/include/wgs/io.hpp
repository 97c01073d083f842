#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "wgs/sde_model.hpp"

namespace wgs::io {

/// Library version stamped into every artifact header.
std::string version_string();

/// FNV-1a 64-bit hash (used to fingerprint the resolved run configuration).
std::uint64_t fnv1a(std::string_view text);
std::string hex64(std::uint64_t value);

/// 17-significant-digit formatting: parses back to the identical double.
std::string format_double(double v);

/// Self-describing comment block ("# key: value" lines) for CSV artifacts.
std::vector<std::string> header_lines(const std::string& kind,
                                      const std::string& config_hash,
                                      std::uint64_t seed);

/// Streaming CSV with a leading comment block and a fixed column set.
class CsvWriter {
 public:
  void open(const std::string& path, const std::vector<std::string>& comments,
            const std::vector<std::string>& columns);
  void row(const std::vector<std::string>& cells);
  void row_values(const std::vector<double>& values);
  void flush() { out_.flush(); }
  void close();
  bool is_open() const { return out_.is_open(); }

 private:
  std::ofstream out_;
  std::size_t n_columns_ = 0;
};

/**
 * Binary 8-bit PGM (P5).  Row 0 of the matrix is the top image row; values
 * are scaled linearly so the matrix maximum maps to 255 (all-zero input
 * writes a black image).
 */
void write_pgm(const std::string& path, const Matrix& image);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

/// Recursive mkdir; no-op when the directory exists.
void ensure_directory(const std::string& path);

}  // namespace wgs::io
