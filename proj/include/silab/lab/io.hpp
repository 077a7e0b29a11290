#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace silab::lab {

/// Shortest round-trip decimal form.
std::string format_double(double v);

/// Row-oriented CSV text builder.
class CsvWriter {
 public:
  explicit CsvWriter(std::string_view header);

  CsvWriter& cell(double v);
  CsvWriter& cell(std::int64_t v);
  CsvWriter& cell(std::string_view v);
  void end_row();

  const std::string& text() const { return text_; }
  std::string take() { return std::move(text_); }

 private:
  std::string text_;
  bool fresh_ = true;
};

std::string sha256_hex(std::string_view data);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace silab::lab
