#include "opinion/io.h"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "opinion/common.h"

namespace opinion {

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io", "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("io", "cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("io", "short write to " + path.string());
  }
  fs::rename(tmp, path);
}

json read_json(const fs::path& path) {
  std::string text = read_text(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error("corrupt", path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const json& value) {
  write_text(path, value.dump(2) + "\n");
}

namespace {

template <typename T>
void write_raw(const fs::path& path, std::span<const T> values) {
  std::string bytes(values.size() * sizeof(T), '\0');
  for (std::size_t i = 0; i < values.size(); ++i) {
    T v = values[i];
    unsigned char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
    std::memcpy(bytes.data() + i * sizeof(T), buf, sizeof(T));
  }
  write_text(path, bytes);
}

template <typename T>
std::vector<T> read_raw(const fs::path& path, std::size_t count) {
  std::string bytes = read_text(path);
  if (bytes.size() != count * sizeof(T)) {
    throw Error("corrupt", path.string() + ": expected " + std::to_string(count) +
                               " elements (" + std::to_string(count * sizeof(T)) +
                               " bytes), found " + std::to_string(bytes.size()) + " bytes");
  }
  std::vector<T> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    unsigned char buf[sizeof(T)];
    std::memcpy(buf, bytes.data() + i * sizeof(T), sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
    std::memcpy(&out[i], buf, sizeof(T));
  }
  return out;
}

}  // namespace

void write_f32(const fs::path& path, std::span<const float> values) { write_raw(path, values); }
void write_f64(const fs::path& path, std::span<const double> values) { write_raw(path, values); }
void write_i32(const fs::path& path, std::span<const int32_t> values) { write_raw(path, values); }

std::vector<float> read_f32(const fs::path& path, std::size_t count) {
  return read_raw<float>(path, count);
}
std::vector<double> read_f64(const fs::path& path, std::size_t count) {
  return read_raw<double>(path, count);
}
std::vector<int32_t> read_i32(const fs::path& path, std::size_t count) {
  return read_raw<int32_t>(path, count);
}

json matrix_entry(std::string_view file, std::string_view dtype, std::size_t rows,
                  std::size_t cols) {
  return json{{"file", file}, {"dtype", dtype}, {"rows", rows}, {"cols", cols},
              {"length", rows * cols}, {"layout", "row-major-le"}};
}

std::string hash_directory(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error("missing_artifact", dir.string() + " does not exist");
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  uint64_t h = fnv1a64("");
  for (const auto& f : files) {
    h = fnv1a64(fs::relative(f, dir).generic_string(), h);
    h = fnv1a64(read_text(f), h);
  }
  return hex64(h);
}

}  // namespace opinion
