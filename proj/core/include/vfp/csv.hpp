#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "vfp/common.hpp"

namespace vfp {

/// Line-oriented CSV reader for the documented schemas: comma separator,
/// no quoting, decimal point, mandatory header row.
class CsvReader {
 public:
  explicit CsvReader(const std::filesystem::path& path);

  /// Reads the next row into fields (views into an internal buffer, valid
  /// until the next call). Returns false at end of file. Blank lines are
  /// skipped.
  bool next(std::vector<std::string_view>& fields);

  /// 1-based line number of the row most recently returned.
  std::size_t line() const { return line_; }
  const std::string& name() const { return name_; }

  /// Reads the header and checks it matches exactly; throws DataError.
  void expect_header(std::string_view header);

 private:
  std::ifstream in_;
  std::string buf_;
  std::string name_;
  std::size_t line_ = 0;
};

class CsvWriter {
 public:
  explicit CsvWriter(const std::filesystem::path& path);

  void raw_line(std::string_view line);
  void field(std::string_view s);
  void field(double v);  // shortest round-trip format; NaN writes empty
  void field(std::int64_t v);
  void end_row();

 private:
  std::ofstream out_;
  std::string name_;
  bool row_started_ = false;
};

}  // namespace vfp
