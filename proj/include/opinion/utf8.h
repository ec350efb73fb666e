#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace opinion::utf8 {

bool valid(std::string_view s);

// Decodes valid UTF-8. Throws Error("encoding") on malformed input.
std::u32string decode(std::string_view s);
std::string encode(std::u32string_view s);
void append(std::string& out, char32_t cp);

std::size_t length(std::string_view s);

// Latin-script case folding covering ASCII, Latin-1 and Latin Extended-A.
// Independent of the process locale.
char32_t to_lower(char32_t cp);
bool is_letter(char32_t cp);
bool is_space(char32_t cp);
// Maps accented Latin letters to their base letter (á -> a, ñ -> n, ü -> u).
char32_t strip_accent(char32_t cp);

std::string_view trim(std::string_view s);

}  // namespace opinion::utf8
