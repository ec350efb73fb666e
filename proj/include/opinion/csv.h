#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace opinion::csv {

// One parsed record. `line` is the 1-based record number counting the
// header as record 1, which is how ingestion errors name rows.
struct Row {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

// RFC 4180 reader: quoted fields, doubled quotes, embedded separators and
// newlines, CRLF or LF line endings.
std::vector<Row> parse(std::string_view text);

struct Table {
  std::vector<std::string> header;
  std::vector<Row> rows;

  // Column index by name, or throws Error("schema") naming the column.
  std::size_t column(std::string_view name) const;
};

// Reads a CSV file with a mandatory header row. Throws Error("io") if the
// file cannot be read, Error("encoding") naming the row on invalid UTF-8,
// and Error("schema") on ragged rows.
Table read_file(const std::filesystem::path& path);

std::string escape(std::string_view field);

class Writer {
 public:
  explicit Writer(std::vector<std::string> header);
  void add(const std::vector<std::string>& fields);
  const std::string& str() const { return out_; }
  void save(const std::filesystem::path& path) const;

 private:
  std::size_t width_;
  std::string out_;
};

}  // namespace opinion::csv
