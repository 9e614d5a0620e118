#include "vfp/csv.hpp"

#include <cmath>

namespace vfp {

CsvReader::CsvReader(const std::filesystem::path& path)
    : in_(path), name_(path.string()) {
  if (!in_) throw DataError("cannot open file: " + name_);
}

bool CsvReader::next(std::vector<std::string_view>& fields) {
  while (std::getline(in_, buf_)) {
    ++line_;
    if (!buf_.empty() && buf_.back() == '\r') buf_.pop_back();
    if (buf_.empty()) continue;
    fields = split(buf_, ',');
    return true;
  }
  return false;
}

void CsvReader::expect_header(std::string_view header) {
  std::vector<std::string_view> fields;
  if (!next(fields))
    throw DataError(name_ + ": missing header row (want \"" +
                    std::string(header) + "\")");
  if (buf_ != header)
    throw DataError(name_ + ":" + std::to_string(line_) +
                    ": unexpected header \"" + buf_ + "\" (want \"" +
                    std::string(header) + "\")");
}

CsvWriter::CsvWriter(const std::filesystem::path& path)
    : out_(path, std::ios::binary), name_(path.string()) {
  if (!out_) throw DataError("cannot open file for writing: " + name_);
}

void CsvWriter::raw_line(std::string_view line) {
  out_ << line << '\n';
}

void CsvWriter::field(std::string_view s) {
  if (row_started_) out_ << ',';
  out_ << s;
  row_started_ = true;
}

void CsvWriter::field(double v) {
  if (row_started_) out_ << ',';
  if (!std::isnan(v)) out_ << format_double(v);
  row_started_ = true;
}

void CsvWriter::field(std::int64_t v) {
  if (row_started_) out_ << ',';
  out_ << v;
  row_started_ = true;
}

void CsvWriter::end_row() {
  out_ << '\n';
  row_started_ = false;
}

}  // namespace vfp
