#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace opinion {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string read_text(const fs::path& path);
// Writes via a temporary sibling and rename, creating parent directories.
void write_text(const fs::path& path, std::string_view content);

json read_json(const fs::path& path);
void write_json(const fs::path& path, const json& value);

// Binary matrix layout shared by every model bundle: a flat file of
// row-major little-endian values, with the element count declared in the
// bundle manifest. Supported element types: f32, f64, i32.
void write_f32(const fs::path& path, std::span<const float> values);
void write_f64(const fs::path& path, std::span<const double> values);
void write_i32(const fs::path& path, std::span<const int32_t> values);

// Each reader checks that the file holds exactly `count` elements and
// throws Error("corrupt") otherwise.
std::vector<float> read_f32(const fs::path& path, std::size_t count);
std::vector<double> read_f64(const fs::path& path, std::size_t count);
std::vector<int32_t> read_i32(const fs::path& path, std::size_t count);

// Manifest entry describing one matrix file.
json matrix_entry(std::string_view file, std::string_view dtype, std::size_t rows,
                  std::size_t cols);

// FNV-1a over the file names and bytes of every regular file in a
// directory, visited in sorted order.
std::string hash_directory(const fs::path& dir);

}  // namespace opinion
