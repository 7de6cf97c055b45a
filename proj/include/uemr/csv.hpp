#pragma once

#include <istream>
#include <string>
#include <vector>

namespace uemr {

// Line-oriented delimited reader. Handles CRLF and double-quoted fields with
// "" escapes; multi-line quoted fields are not supported (none of the inputs
// use them).
class DelimReader {
 public:
  explicit DelimReader(std::istream& in, char delim = ',') : in_(in), delim_(delim) {}

  // Returns false at EOF. Fields are cleared and refilled.
  bool next_row(std::vector<std::string>& fields);

  std::size_t line_number() const { return line_no_; }

 private:
  std::istream& in_;
  char delim_;
  std::size_t line_no_ = 0;
};

// Escape a field for CSV output (quotes only when needed).
std::string csv_escape(const std::string& field);

}  // namespace uemr
