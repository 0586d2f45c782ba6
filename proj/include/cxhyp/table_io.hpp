#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace cxhyp::detail {

// Text table shared by the unit-ball and Poincare checkpoint formats:
//   line 1: <tag> <m> <n>
//   lines 2..m+1: <token>\t<2n floats, space separated, 17 significant digits>
// Rows must satisfy sum of squares < 1 (both models live in a unit ball).
struct TableText {
  std::string tag;
  int64_t m = 0;
  int32_t n = 0;
  std::vector<std::string> vocab;
  std::vector<double> values;  // m rows of 2n doubles
};

void save_table_text(const TableText& text, const std::string& path);

// expected_tag may be empty to accept any; the parsed tag is returned in the
// result. Errors name the offending line/token.
TableText load_table_text(const std::string& path,
                          const std::string& expected_tag = "");

}  // namespace cxhyp::detail
