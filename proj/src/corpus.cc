#include "opinion/corpus.h"

#include <algorithm>
#include <charconv>
#include <unordered_map>
#include <unordered_set>

#include "opinion/csv.h"
#include "opinion/utf8.h"

namespace opinion {

std::string_view to_string(EducationLevel level) {
  return level == EducationLevel::undergraduate ? "undergraduate" : "postgraduate";
}

std::string course_key(std::string_view subject_code, std::string_view period) {
  std::string key(subject_code);
  key.push_back('|');
  key.append(period);
  return key;
}

namespace {

[[noreturn]] void row_error(const std::string& code, const std::filesystem::path& path,
                            std::size_t row, std::string_view column, std::string_view what) {
  throw Error(code, path.string() + ": row " + std::to_string(row) + ", column '" +
                        std::string(column) + "': " + std::string(what));
}

std::string required(const csv::Table& t, const csv::Row& r, std::size_t col,
                     const std::filesystem::path& path) {
  std::string v(utf8::trim(r.fields[col]));
  if (v.empty()) row_error("schema", path, r.line, t.header[col], "missing value");
  return v;
}

double parse_real(std::string_view s, const std::filesystem::path& path, std::size_t row,
                  std::string_view column) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    row_error("schema", path, row, column, "not a number: '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

std::vector<Comment> load_comments(const std::filesystem::path& path) {
  csv::Table t = csv::read_file(path);
  std::size_t c_id = t.column("id");
  std::size_t c_subject = t.column("subject_code");
  std::size_t c_period = t.column("period");
  std::size_t c_text = t.column("comment");

  std::vector<Comment> out;
  out.reserve(t.rows.size());
  std::unordered_set<std::string> seen;
  for (const auto& r : t.rows) {
    Comment c;
    c.id = required(t, r, c_id, path);
    c.subject_code = required(t, r, c_subject, path);
    c.period = required(t, r, c_period, path);
    c.text = std::string(utf8::trim(r.fields[c_text]));
    if (c.text.empty()) row_error("schema", path, r.line, "comment", "empty comment text");
    if (!seen.insert(c.id).second) row_error("schema", path, r.line, "id", "duplicate id " + c.id);
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<CourseRecord> load_courses(const std::filesystem::path& path) {
  csv::Table t = csv::read_file(path);
  std::size_t c_subject = t.column("subject_code");
  std::size_t c_period = t.column("period");
  std::size_t c_students = t.column("num_students");
  std::size_t c_ped = t.column("score_pedagogy");
  std::size_t c_eval = t.column("score_evaluation");
  std::size_t c_inter = t.column("score_interpersonal");
  std::size_t c_level = t.column("education_level");

  std::vector<CourseRecord> out;
  std::unordered_set<std::string> seen;
  for (const auto& r : t.rows) {
    CourseRecord c;
    c.subject_code = required(t, r, c_subject, path);
    c.period = required(t, r, c_period, path);
    std::string students = required(t, r, c_students, path);
    auto [ptr, ec] = std::from_chars(students.data(), students.data() + students.size(),
                                     c.num_students);
    if (ec != std::errc() || ptr != students.data() + students.size() || c.num_students < 0) {
      row_error("schema", path, r.line, "num_students", "expected a non-negative integer");
    }
    auto score = [&](std::size_t col) {
      double v = parse_real(required(t, r, col, path), path, r.line, t.header[col]);
      if (!(v >= 1.0 && v <= 5.0)) row_error("schema", path, r.line, t.header[col], "score outside [1, 5]");
      return v;
    };
    c.score_pedagogy = score(c_ped);
    c.score_evaluation = score(c_eval);
    c.score_interpersonal = score(c_inter);
    std::string level = required(t, r, c_level, path);
    if (level == "undergraduate") {
      c.education_level = EducationLevel::undergraduate;
    } else if (level == "postgraduate" || level == "posgraduate" || level == "graduate") {
      c.education_level = EducationLevel::postgraduate;
    } else {
      row_error("schema", path, r.line, "education_level", "unknown level '" + level + "'");
    }
    if (!seen.insert(course_key(c)).second) {
      row_error("schema", path, r.line, "subject_code", "duplicate course " + c.subject_code);
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<LabelRow> load_labels(const std::filesystem::path& path) {
  csv::Table t = csv::read_file(path);
  std::size_t c_id = t.column("comment_id");
  std::size_t c_pol = t.column("polarity");
  std::vector<LabelRow> out;
  for (const auto& r : t.rows) {
    std::string id = required(t, r, c_id, path);
    std::string pol = required(t, r, c_pol, path);
    auto p = parse_polarity(pol);
    if (!p) row_error("schema", path, r.line, "polarity", "unknown polarity '" + pol + "'");
    out.push_back({id, *p});
  }
  return out;
}

void save_comments(const std::filesystem::path& path, const std::vector<Comment>& comments) {
  csv::Writer w({"id", "subject_code", "period", "comment"});
  for (const auto& c : comments) w.add({c.id, c.subject_code, c.period, c.text});
  w.save(path);
}

void save_courses(const std::filesystem::path& path, const std::vector<CourseRecord>& courses) {
  csv::Writer w({"subject_code", "period", "num_students", "score_pedagogy", "score_evaluation",
                 "score_interpersonal", "education_level"});
  for (const auto& c : courses) {
    w.add({c.subject_code, c.period, std::to_string(c.num_students),
           format_double(c.score_pedagogy), format_double(c.score_evaluation),
           format_double(c.score_interpersonal), std::string(to_string(c.education_level))});
  }
  w.save(path);
}

void save_labels(const std::filesystem::path& path, const std::vector<LabelRow>& labels) {
  csv::Writer w({"comment_id", "polarity"});
  for (const auto& l : labels) w.add({l.comment_id, std::string(to_string(l.polarity))});
  w.save(path);
}

void attach_labels(std::vector<Comment>& comments, const std::vector<LabelRow>& labels) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < comments.size(); ++i) index.emplace(comments[i].id, i);
  for (const auto& l : labels) {
    auto it = index.find(l.comment_id);
    if (it == index.end()) {
      throw Error("schema", "label refers to unknown comment id '" + l.comment_id + "'");
    }
    comments[it->second].label = l.polarity;
  }
}

bool passes_quality(std::string_view text) {
  std::string_view trimmed = utf8::trim(text);
  if (utf8::length(trimmed) < kMinChars) return false;
  std::size_t words = 0;
  bool in_word = false;
  for (char c : trimmed) {
    bool ws = c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
    if (!ws && !in_word) ++words;
    in_word = !ws;
  }
  return words >= kMinWords;
}

FilterResult filter_quality(const std::vector<Comment>& comments) {
  FilterResult r;
  for (const auto& c : comments) {
    (passes_quality(c.text) ? r.kept : r.dropped).push_back(c);
  }
  return r;
}

namespace {

// Integer rounding of n * num / den, half away from zero (n >= 0).
std::size_t round_share(std::size_t n, std::size_t num, std::size_t den) {
  return (2 * n * num + den) / (2 * den);
}

// Largest-remainder apportionment of `total` across classes in proportion
// to their sizes; remainders tie-break by class order.
std::array<std::size_t, 3> apportion(const std::array<std::size_t, 3>& sizes, std::size_t n,
                                     std::size_t total, const std::array<std::size_t, 3>& cap) {
  std::array<std::size_t, 3> out{};
  std::array<std::size_t, 3> rem{};
  std::size_t assigned = 0;
  for (int k = 0; k < 3; ++k) {
    std::size_t exact = sizes[k] * total;
    out[k] = std::min(exact / n, cap[k]);
    rem[k] = exact % n;
    assigned += out[k];
  }
  while (assigned < total) {
    int best = -1;
    for (int k = 0; k < 3; ++k) {
      if (out[k] >= cap[k]) continue;
      if (best < 0 || rem[k] > rem[best]) best = k;
    }
    if (best < 0) break;
    ++out[best];
    rem[best] = 0;
    ++assigned;
  }
  return out;
}

}  // namespace

DatasetSplit split(const std::vector<Comment>& comments, uint64_t seed) {
  std::array<std::vector<std::size_t>, 3> by_class;
  for (std::size_t i = 0; i < comments.size(); ++i) {
    if (!comments[i].label) {
      throw Error("invalid_argument", "comment '" + comments[i].id + "' has no label");
    }
    by_class[static_cast<int>(*comments[i].label)].push_back(i);
  }
  std::array<std::size_t, 3> sizes{};
  for (int k = 0; k < 3; ++k) {
    sizes[k] = by_class[k].size();
    if (sizes[k] < 3) {
      throw Error("invalid_argument",
                  "cannot stratify: class '" + std::string(to_string(kPolarities[k])) +
                      "' has " + std::to_string(sizes[k]) + " labeled comments (need >= 3)");
    }
  }
  const std::size_t n = comments.size();
  const std::size_t n_train = round_share(n, 64, 100);
  const std::size_t n_test = round_share(n, 20, 100);

  std::array<std::size_t, 3> train_q = apportion(sizes, n, n_train, sizes);
  std::array<std::size_t, 3> left{};
  for (int k = 0; k < 3; ++k) left[k] = sizes[k] - train_q[k];
  std::array<std::size_t, 3> test_q = apportion(sizes, n, n_test, left);

  Rng rng(derive_seed(seed, "corpus/split"));
  std::vector<int> role(n, 1);  // 0 train, 1 validation, 2 test
  for (int k = 0; k < 3; ++k) {
    std::vector<std::size_t> idx = by_class[k];
    rng.shuffle(idx);
    for (std::size_t j = 0; j < idx.size(); ++j) {
      if (j < train_q[k]) {
        role[idx[j]] = 0;
      } else if (j < train_q[k] + test_q[k]) {
        role[idx[j]] = 2;
      }
    }
  }
  DatasetSplit s;
  s.seed = seed;
  for (std::size_t i = 0; i < n; ++i) {
    auto& dst = role[i] == 0 ? s.train : role[i] == 2 ? s.test : s.validation;
    dst.push_back(comments[i].id);
  }
  return s;
}

std::vector<std::size_t> balance_indices(const std::vector<double>& scores, double pivot,
                                         uint64_t seed) {
  if (scores.empty()) throw Error("invalid_argument", "cannot balance an empty list");
  std::vector<std::size_t> above, below;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    (scores[i] >= pivot ? above : below).push_back(i);
  }
  if (above.empty() || below.empty()) {
    throw Error("invalid_argument", std::string("cannot balance: no items ") +
                                        (above.empty() ? "at or above" : "below") + " pivot " +
                                        format_double(pivot));
  }
  Rng rng(derive_seed(seed, "corpus/balance"));
  auto& major = above.size() > below.size() ? above : below;
  std::size_t keep = std::min(above.size(), below.size());
  rng.shuffle(major);
  major.resize(keep);
  std::vector<std::size_t> out;
  out.reserve(2 * keep);
  out.insert(out.end(), above.begin(), above.end());
  out.insert(out.end(), below.begin(), below.end());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<ScoredItem> balance_courses(const std::vector<ScoredItem>& items, double pivot,
                                        uint64_t seed) {
  std::vector<double> scores;
  scores.reserve(items.size());
  for (const auto& it : items) scores.push_back(it.mean_score);
  std::vector<ScoredItem> out;
  for (std::size_t i : balance_indices(scores, pivot, seed)) out.push_back(items[i]);
  return out;
}

}  // namespace opinion
