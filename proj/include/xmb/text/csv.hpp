#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace xmb::csv {

struct Row {
  std::vector<std::string> fields;
  std::size_t line = 0;  // 1-based line on which the record starts
};

// RFC 4180 reader. Accepts CRLF or LF record separators; a trailing line
// break at end of file is optional. Throws DataError naming the line for
// unterminated quotes or stray characters after a closing quote.
std::vector<Row> parse(std::string_view text);

// Quotes a field when it contains a comma, quote, CR or LF.
std::string escape(std::string_view field);
std::string join(const std::vector<std::string>& fields);

}  // namespace xmb::csv
