#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace xmb::utf8 {

// Throws DataError on ill-formed UTF-8.
std::u32string decode(std::string_view s);
std::string encode(std::u32string_view s);
std::string encode(char32_t c);

bool is_valid(std::string_view s);
std::size_t length(std::string_view s);  // code points

bool is_whitespace(char32_t c);           // Unicode White_Space
bool is_punct_or_number(char32_t c);      // general category P* or N*
std::string nfc(std::string_view s);

}  // namespace xmb::utf8
