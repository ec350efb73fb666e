#include "opinion/csv.h"

#include <fstream>
#include <sstream>

#include "opinion/common.h"
#include "opinion/io.h"
#include "opinion/utf8.h"

namespace opinion::csv {

std::vector<Row> parse(std::string_view text) {
  std::vector<Row> rows;
  Row row;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t record = 1;
  row.line = record;

  auto end_field = [&] {
    row.fields.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    rows.push_back(std::move(row));
    row = Row{};
    row.line = ++record;
  };

  // Skip a UTF-8 byte order mark.
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);

  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && !field_started) {
      in_quotes = true;
      field_started = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\r') {
      if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
      end_row();
    } else if (c == '\n') {
      end_row();
    } else {
      field.push_back(c);
      field_started = true;
    }
  }
  if (in_quotes) {
    throw Error("schema", "unterminated quoted field in record " + std::to_string(row.line));
  }
  if (field_started || !field.empty() || !row.fields.empty()) end_row();
  return rows;
}

std::size_t Table::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw Error("schema", "missing required column '" + std::string(name) + "'");
}

Table read_file(const std::filesystem::path& path) {
  std::string text = read_text(path);
  std::vector<Row> rows = parse(text);
  if (rows.empty()) {
    throw Error("schema", path.string() + ": missing header row");
  }
  Table table;
  table.header = rows.front().fields;
  for (auto& h : table.header) h = std::string(utf8::trim(h));
  for (std::size_t i = 1; i < rows.size(); ++i) {
    Row& r = rows[i];
    // Blank lines carry no record.
    if (r.fields.size() == 1 && r.fields[0].empty()) continue;
    for (std::size_t c = 0; c < r.fields.size(); ++c) {
      if (!utf8::valid(r.fields[c])) {
        std::string col = c < table.header.size() ? table.header[c] : std::to_string(c + 1);
        throw Error("encoding", path.string() + ": row " + std::to_string(r.line) +
                                    ", column '" + col + "': invalid UTF-8");
      }
    }
    if (r.fields.size() != table.header.size()) {
      throw Error("schema", path.string() + ": row " + std::to_string(r.line) + " has " +
                                std::to_string(r.fields.size()) + " fields, expected " +
                                std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(r));
  }
  return table;
}

std::string escape(std::string_view field) {
  bool needs_quotes = field.find_first_of(",\"\r\n") != std::string_view::npos;
  if (!needs_quotes) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

Writer::Writer(std::vector<std::string> header) : width_(header.size()) { add(header); }

void Writer::add(const std::vector<std::string>& fields) {
  if (fields.size() != width_) {
    throw Error("invalid_argument", "csv row width " + std::to_string(fields.size()) +
                                        " does not match header width " + std::to_string(width_));
  }
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out_.push_back(',');
    out_ += escape(fields[i]);
  }
  out_.push_back('\n');
}

void Writer::save(const std::filesystem::path& path) const { write_text(path, out_); }

}  // namespace opinion::csv
