#pragma once

#include <string>
#include <string_view>

namespace opinion {

// Spanish suffix-stripping stemmer following the Snowball rule set:
// attached pronouns, standard suffixes, y-verb and verb suffixes, residual
// suffixes, then acute accents are removed. Input is a lowercase UTF-8 word.
std::string stem_spanish(std::string_view word);
std::u32string stem_spanish(std::u32string word);

}  // namespace opinion
