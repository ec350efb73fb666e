#include "opinion/stemmer.h"

#include <array>
#include <initializer_list>

#include "opinion/utf8.h"

namespace opinion {

namespace {

using Word = std::u32string;
using Suffixes = std::initializer_list<std::u32string_view>;

bool is_vowel(char32_t c) {
  switch (c) {
    case U'a': case U'e': case U'i': case U'o': case U'u':
    case U'á': case U'é': case U'í': case U'ó': case U'ú': case U'ü':
      return true;
    default:
      return false;
  }
}

struct Regions {
  std::size_t rv, r1, r2;
};

// Position just past the first vowel at or after `from`, or n.
std::size_t past_vowel(const Word& w, std::size_t from) {
  std::size_t i = from;
  while (i < w.size() && !is_vowel(w[i])) ++i;
  return i < w.size() ? i + 1 : w.size();
}

std::size_t past_consonant(const Word& w, std::size_t from) {
  std::size_t i = from;
  while (i < w.size() && is_vowel(w[i])) ++i;
  return i < w.size() ? i + 1 : w.size();
}

Regions mark_regions(const Word& w) {
  const std::size_t n = w.size();
  Regions r{n, n, n};
  if (n >= 2) {
    if (is_vowel(w[0])) {
      r.rv = is_vowel(w[1]) ? past_consonant(w, 2) : past_vowel(w, 2);
    } else {
      r.rv = is_vowel(w[1]) ? std::min<std::size_t>(3, n) : past_vowel(w, 2);
    }
  }
  r.r1 = past_consonant(w, past_vowel(w, 0));
  r.r2 = past_consonant(w, past_vowel(w, r.r1));
  return r;
}

bool ends_with(const Word& w, std::u32string_view s) {
  return w.size() >= s.size() && std::u32string_view(w).substr(w.size() - s.size()) == s;
}

// Longest suffix from `list` that ends `w` and starts at or after `limit`.
std::u32string_view longest(const Word& w, Suffixes list, std::size_t limit = 0) {
  std::u32string_view best;
  for (auto s : list) {
    if (s.size() > best.size() && ends_with(w, s) && w.size() - s.size() >= limit) best = s;
  }
  return best;
}

std::size_t start_of(const Word& w, std::u32string_view s) { return w.size() - s.size(); }

void chop(Word& w, std::size_t len) { w.resize(w.size() - len); }

// Removes `s` if `w` ends with it and it lies in the region starting at `region`.
bool chop_if(Word& w, std::u32string_view s, std::size_t region) {
  if (ends_with(w, s) && start_of(w, s) >= region) {
    chop(w, s.size());
    return true;
  }
  return false;
}

constexpr Suffixes kPronouns = {U"me", U"se", U"sela", U"selo", U"selas", U"selos", U"la",
                                U"le", U"lo", U"las", U"les", U"los", U"nos"};

void attached_pronoun(Word& w, const Regions& r) {
  auto pronoun = longest(w, kPronouns);
  if (pronoun.empty()) return;
  Word stem = w.substr(0, start_of(w, pronoun));
  auto ending = longest(stem, {U"iéndo", U"ándo", U"ár", U"ér", U"ír", U"ando", U"iendo",
                               U"ar", U"er", U"ir", U"yendo"});
  if (ending.empty() || start_of(stem, ending) < r.rv) return;
  static constexpr std::array<std::pair<std::u32string_view, std::u32string_view>, 5> kAccented = {{
      {U"iéndo", U"iendo"}, {U"ándo", U"ando"}, {U"ár", U"ar"}, {U"ér", U"er"}, {U"ír", U"ir"}}};
  for (const auto& [accented, plain] : kAccented) {
    if (ending == accented) {
      w = stem.substr(0, start_of(stem, ending));
      w.append(plain);
      return;
    }
  }
  if (ending == U"yendo") {
    std::size_t at = start_of(stem, ending);
    if (at == 0 || stem[at - 1] != U'u') return;
  }
  w = stem;
}

bool standard_suffix(Word& w, const Regions& r) {
  static constexpr Suffixes kGroupA = {
      U"anza", U"anzas", U"ico", U"ica", U"icos", U"icas", U"ismo", U"ismos", U"able",
      U"ables", U"ible", U"ibles", U"ista", U"istas", U"oso", U"osa", U"osos", U"osas",
      U"amiento", U"amientos", U"imiento", U"imientos"};
  static constexpr Suffixes kGroupB = {U"adora", U"ador", U"ación", U"adoras", U"adores",
                                       U"aciones", U"ante", U"antes", U"ancia", U"ancias"};
  static constexpr Suffixes kAll = {
      U"anza", U"anzas", U"ico", U"ica", U"icos", U"icas", U"ismo", U"ismos", U"able",
      U"ables", U"ible", U"ibles", U"ista", U"istas", U"oso", U"osa", U"osos", U"osas",
      U"amiento", U"amientos", U"imiento", U"imientos", U"adora", U"ador", U"ación",
      U"adoras", U"adores", U"aciones", U"ante", U"antes", U"ancia", U"ancias", U"logía",
      U"logías", U"ución", U"uciones", U"encia", U"encias", U"amente", U"mente", U"idad",
      U"idades", U"iva", U"ivo", U"ivas", U"ivos"};

  auto s = longest(w, kAll);
  if (s.empty()) return false;
  const std::size_t at = start_of(w, s);
  auto in = [&](std::initializer_list<std::u32string_view> group) {
    for (auto g : group) {
      if (g == s) return true;
    }
    return false;
  };

  if (in(kGroupA)) {
    if (at < r.r2) return false;
    chop(w, s.size());
  } else if (in(kGroupB)) {
    if (at < r.r2) return false;
    chop(w, s.size());
    chop_if(w, U"ic", r.r2);
  } else if (in({U"logía", U"logías"})) {
    if (at < r.r2) return false;
    w.resize(at);
    w.append(U"log");
  } else if (in({U"ución", U"uciones"})) {
    if (at < r.r2) return false;
    w.resize(at);
    w.append(U"u");
  } else if (in({U"encia", U"encias"})) {
    if (at < r.r2) return false;
    w.resize(at);
    w.append(U"ente");
  } else if (s == U"amente") {
    if (at < r.r1) return false;
    chop(w, s.size());
    auto t = longest(w, {U"iv", U"os", U"ic", U"ad"});
    if (!t.empty() && start_of(w, t) >= r.r2) {
      bool was_iv = t == U"iv";
      chop(w, t.size());
      if (was_iv) chop_if(w, U"at", r.r2);
    }
  } else if (s == U"mente") {
    if (at < r.r2) return false;
    chop(w, s.size());
    auto t = longest(w, {U"ante", U"able", U"ible"});
    if (!t.empty() && start_of(w, t) >= r.r2) chop(w, t.size());
  } else if (in({U"idad", U"idades"})) {
    if (at < r.r2) return false;
    chop(w, s.size());
    auto t = longest(w, {U"abil", U"ic", U"iv"});
    if (!t.empty() && start_of(w, t) >= r.r2) chop(w, t.size());
  } else {  // iva ivo ivas ivos
    if (at < r.r2) return false;
    chop(w, s.size());
    chop_if(w, U"at", r.r2);
  }
  return true;
}

bool y_verb_suffix(Word& w, const Regions& r) {
  auto s = longest(w, {U"ya", U"ye", U"yan", U"yen", U"yeron", U"yendo", U"yo", U"yó", U"yas",
                       U"yes", U"yais", U"yamos"},
                   r.rv);
  if (s.empty()) return false;
  std::size_t at = start_of(w, s);
  if (at == 0 || w[at - 1] != U'u') return false;
  chop(w, s.size());
  return true;
}

bool verb_suffix(Word& w, const Regions& r) {
  auto s = longest(
      w,
      {U"en", U"es", U"éis", U"emos", U"arían", U"arías", U"arán", U"arás", U"aríais", U"aría",
       U"aréis", U"aríamos", U"aremos", U"ará", U"aré", U"erían", U"erías", U"erán", U"erás",
       U"eríais", U"ería", U"eréis", U"eríamos", U"eremos", U"erá", U"eré", U"irían", U"irías",
       U"irán", U"irás", U"iríais", U"iría", U"iréis", U"iríamos", U"iremos", U"irá", U"iré",
       U"aba", U"ada", U"ida", U"ía", U"ara", U"iera", U"ad", U"ed", U"id", U"ase", U"iese",
       U"aste", U"iste", U"an", U"aban", U"ían", U"aran", U"ieran", U"asen", U"iesen", U"aron",
       U"ieron", U"ado", U"ido", U"ando", U"iendo", U"ió", U"ar", U"er", U"ir", U"as", U"abas",
       U"adas", U"idas", U"ías", U"aras", U"ieras", U"ases", U"ieses", U"ís", U"áis", U"abais",
       U"íais", U"arais", U"ierais", U"aseis", U"ieseis", U"asteis", U"isteis", U"ados", U"idos",
       U"amos", U"ábamos", U"íamos", U"imos", U"áramos", U"iéramos", U"iésemos", U"ásemos"},
      r.rv);
  if (s.empty()) return false;
  std::size_t at = start_of(w, s);
  bool gu_group = s == U"en" || s == U"es" || s == U"éis" || s == U"emos";
  if (gu_group && at >= 2 && w[at - 1] == U'u' && w[at - 2] == U'g') --at;
  w.resize(at);
  return true;
}

void residual_suffix(Word& w, const Regions& r) {
  auto s = longest(w, {U"os", U"a", U"o", U"á", U"í", U"ó", U"e", U"é"});
  if (s.empty() || start_of(w, s) < r.rv) return;
  bool e_group = s == U"e" || s == U"é";
  chop(w, s.size());
  if (e_group && w.size() >= 2 && w.back() == U'u' && w[w.size() - 2] == U'g' &&
      w.size() - 1 >= r.rv) {
    w.pop_back();
  }
}

void remove_acute(Word& w) {
  for (auto& c : w) {
    switch (c) {
      case U'á': c = U'a'; break;
      case U'é': c = U'e'; break;
      case U'í': c = U'i'; break;
      case U'ó': c = U'o'; break;
      case U'ú': c = U'u'; break;
      default: break;
    }
  }
}

}  // namespace

std::u32string stem_spanish(std::u32string word) {
  const Regions r = mark_regions(word);
  attached_pronoun(word, r);
  if (!standard_suffix(word, r)) {
    if (!y_verb_suffix(word, r)) verb_suffix(word, r);
  }
  residual_suffix(word, r);
  remove_acute(word);
  return word;
}

std::string stem_spanish(std::string_view word) {
  return utf8::encode(stem_spanish(utf8::decode(word)));
}

}  // namespace opinion
