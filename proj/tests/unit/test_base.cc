#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "opinion/common.h"
#include "opinion/csv.h"
#include "opinion/io.h"
#include "opinion/stemmer.h"
#include "opinion/utf8.h"
#include "support.h"

using namespace opinion;

TEST_CASE("polarity names round-trip") {
  for (Polarity p : kPolarities) CHECK(parse_polarity(to_string(p)) == p);
  CHECK_FALSE(parse_polarity("Positive").has_value());
  CHECK_FALSE(parse_polarity("").has_value());
}

TEST_CASE("fnv1a64 matches published test vectors") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
  CHECK(hex64(0xabcULL) == "0000000000000abc");
}

TEST_CASE("derive_seed separates labels and masters") {
  CHECK(derive_seed(1, "a") == derive_seed(1, "a"));
  CHECK(derive_seed(1, "a") != derive_seed(1, "b"));
  CHECK(derive_seed(1, "a") != derive_seed(2, "a"));
}

TEST_CASE("Rng draws are reproducible and in range") {
  Rng a(99), b(99);
  for (int i = 0; i < 1000; ++i) {
    double u = a.uniform();
    CHECK(u == b.uniform());
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  Rng r(5);
  std::vector<int> hist(7, 0);
  for (int i = 0; i < 7000; ++i) ++hist[r.below(7)];
  for (int h : hist) CHECK(h > 800);
  for (int i = 0; i < 200; ++i) {
    auto v = r.between(-3, 3);
    CHECK(v >= -3);
    CHECK(v <= 3);
  }
}

TEST_CASE("Rng normal has roughly unit moments") {
  Rng r(11);
  double s = 0.0, s2 = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    double x = r.normal();
    s += x;
    s2 += x * x;
  }
  CHECK(std::abs(s / n) < 0.03);
  CHECK(std::abs(s2 / n - 1.0) < 0.05);
}

TEST_CASE("Rng categorical follows weights and skips zero weights") {
  Rng r(3);
  std::vector<double> w = {0.0, 3.0, 1.0};
  int counts[3] = {0, 0, 0};
  for (int i = 0; i < 4000; ++i) ++counts[r.categorical(w)];
  CHECK(counts[0] == 0);
  CHECK(counts[1] > 2700);
  CHECK(counts[1] < 3300);
}

TEST_CASE("shuffle is a permutation") {
  Rng r(1);
  std::vector<int> v(50);
  for (int i = 0; i < 50; ++i) v[i] = i;
  r.shuffle(v);
  std::set<int> s(v.begin(), v.end());
  CHECK(s.size() == 50);
  CHECK(*s.begin() == 0);
  CHECK(*s.rbegin() == 49);
}

TEST_CASE("format_double round-trips") {
  for (double v : {0.1, 1.0 / 3.0, 4.5, -2.25e-10, 1e300}) {
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(std::nan("")) == "nan");
  CHECK(format_double(INFINITY) == "inf");
}

TEST_CASE("utf8 decode and encode") {
  const std::string s = "niño ¿qué?";
  CHECK(utf8::valid(s));
  CHECK(utf8::length(s) == 10);
  CHECK(utf8::encode(utf8::decode(s)) == s);
  CHECK_FALSE(utf8::valid("\xc3"));
  CHECK_FALSE(utf8::valid("\xff"));
  CHECK(testing::error_code_of([] { utf8::decode("ab\xc3"); }) == "encoding");
}

TEST_CASE("utf8 case folding and letter classes") {
  CHECK(utf8::to_lower(U'Á') == U'á');
  CHECK(utf8::to_lower(U'Ñ') == U'ñ');
  CHECK(utf8::to_lower(U'Z') == U'z');
  CHECK(utf8::is_letter(U'ñ'));
  CHECK_FALSE(utf8::is_letter(U'¿'));
  CHECK_FALSE(utf8::is_letter(U'7'));
  CHECK(utf8::strip_accent(U'é') == U'e');
  CHECK(utf8::strip_accent(U'ñ') == U'n');
  CHECK(utf8::trim("  ab \n") == "ab");
}

TEST_CASE("csv parses quoted fields and line numbers") {
  auto rows = csv::parse("a,b\n\"x,1\",\"he said \"\"hi\"\"\"\n\"multi\nline\",z\r\n");
  REQUIRE(rows.size() == 3);
  CHECK(rows[1].fields[0] == "x,1");
  CHECK(rows[1].fields[1] == "he said \"hi\"");
  CHECK(rows[2].fields[0] == "multi\nline");
  CHECK(rows[2].fields[1] == "z");
  CHECK(rows[2].line == 3);
}

TEST_CASE("csv writer output parses back") {
  csv::Writer w({"k", "v"});
  w.add({"a,b", "say \"x\""});
  w.add({"line\nbreak", ""});
  auto rows = csv::parse(w.str());
  REQUIRE(rows.size() == 3);
  CHECK(rows[1].fields == std::vector<std::string>{"a,b", "say \"x\""});
  CHECK(rows[2].fields == std::vector<std::string>{"line\nbreak", ""});
}

TEST_CASE("csv read_file errors") {
  testing::TempDir dir;
  CHECK(testing::error_code_of([&] { csv::read_file(dir / "absent.csv"); }) == "io");
  auto ragged = dir.write("r.csv", "a,b\n1\n");
  CHECK(testing::error_code_of([&] { csv::read_file(ragged); }) == "schema");
  auto bad = dir.write("e.csv", "a,b\n1,\xff\n");
  auto msg = testing::error_message_of([&] { csv::read_file(bad); });
  CHECK(msg.find("row 2") != std::string::npos);
  auto table = csv::read_file(dir.write("ok.csv", "\xEF\xBB\xBFx,y\n1,2\n"));
  CHECK(table.header[0] == "x");
  CHECK(testing::error_code_of([&] { table.column("nope"); }) == "schema");
}

TEST_CASE("binary matrices round-trip and detect truncation") {
  testing::TempDir dir;
  std::vector<float> f = {1.5f, -2.0f, 3.25f};
  std::vector<double> d = {0.1, 1e-300};
  std::vector<int32_t> i = {-1, 0, 7};
  write_f32(dir / "a.f32", f);
  write_f64(dir / "b.f64", d);
  write_i32(dir / "c.i32", i);
  CHECK(read_f32(dir / "a.f32", 3) == f);
  CHECK(read_f64(dir / "b.f64", 2) == d);
  CHECK(read_i32(dir / "c.i32", 3) == i);
  CHECK(testing::error_code_of([&] { read_f32(dir / "a.f32", 4); }) == "corrupt");
  CHECK(std::filesystem::file_size(dir / "a.f32") == 12);
  auto entry = matrix_entry("a.f32", "f32", 1, 3);
  CHECK(entry["length"] == 3);
}

TEST_CASE("hash_directory depends on names and bytes") {
  testing::TempDir a, b;
  a.write("x", "1");
  b.write("x", "1");
  CHECK(hash_directory(a.path()) == hash_directory(b.path()));
  b.write("x", "2");
  CHECK(hash_directory(a.path()) != hash_directory(b.path()));
}

TEST_CASE("Spanish stemmer matches the reference fixture") {
  std::ifstream in(std::string(OPINION_TEST_DATA) + "/stem_es.tsv");
  REQUIRE(in);
  std::string line;
  int checked = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    REQUIRE(tab != std::string::npos);
    const std::string word = line.substr(0, tab), stem = line.substr(tab + 1);
    CHECK_MESSAGE(stem_spanish(word) == stem, word);
    ++checked;
  }
  CHECK(checked > 200);
}

TEST_CASE("stemmer on short and unusual words") {
  CHECK(stem_spanish("") == "");
  CHECK(stem_spanish("a") == "a");
  CHECK(stem_spanish("profesor") == "profesor");
  CHECK(stem_spanish("explica") == "explic");
  CHECK(stem_spanish("bien") == "bien");
}
