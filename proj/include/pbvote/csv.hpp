#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pbvote::csv {

class ParseError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct Record {
  std::size_t line = 0;  // 1-based line where the record starts
  std::vector<std::string> fields;
};

struct Document {
  std::vector<std::string> header;
  std::vector<Record> records;

  [[nodiscard]] std::optional<std::size_t> column(std::string_view name) const;
};

// RFC 4180: comma separated, double-quote quoting with "" escapes, CRLF or LF line ends.
// A leading UTF-8 BOM is skipped. Blank lines are ignored. Throws ParseError on an
// unterminated quote or an empty header.
Document parse(std::string_view text);

std::string escape_field(std::string_view field);
void write_row(std::ostream& os, const std::vector<std::string>& fields);
std::string write(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows);

}  // namespace pbvote::csv
