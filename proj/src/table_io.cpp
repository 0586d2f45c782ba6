#include "cxhyp/table_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cxhyp::detail {

void save_table_text(const TableText& text, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out << text.tag << ' ' << text.m << ' ' << text.n << '\n';
  char buf[40];
  const int64_t row_len = 2 * static_cast<int64_t>(text.n);
  for (int64_t i = 0; i < text.m; ++i) {
    out << text.vocab[i];
    const double* row = text.values.data() + i * row_len;
    for (int64_t j = 0; j < row_len; ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", row[j]);
      out << (j == 0 ? '\t' : ' ') << buf;
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

TableText load_table_text(const std::string& path,
                          const std::string& expected_tag) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  TableText text;
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error(path + ": empty checkpoint");
  {
    std::istringstream hs(line);
    if (!(hs >> text.tag >> text.m >> text.n) || text.m < 1 || text.n < 1)
      throw std::runtime_error(path + ": malformed checkpoint header");
    std::string extra;
    if (hs >> extra)
      throw std::runtime_error(path + ": malformed checkpoint header");
  }
  if (!expected_tag.empty() && text.tag != expected_tag)
    throw std::runtime_error(path + ": expected " + expected_tag +
                             " checkpoint, found " + text.tag);

  const int64_t row_len = 2 * static_cast<int64_t>(text.n);
  text.vocab.reserve(text.m);
  text.values.resize(text.m * row_len);
  for (int64_t i = 0; i < text.m; ++i) {
    if (!std::getline(in, line))
      throw std::runtime_error(path + ": truncated checkpoint, " +
                               std::to_string(i) + " of " +
                               std::to_string(text.m) + " rows");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    size_t tab = line.find('\t');
    if (tab == std::string::npos || tab == 0)
      throw std::runtime_error(path + ": row " + std::to_string(i + 1) +
                               ": missing token field");
    text.vocab.push_back(line.substr(0, tab));
    const char* s = line.c_str() + tab + 1;
    double norm_sq = 0.0;
    double* row = text.values.data() + i * row_len;
    for (int64_t j = 0; j < row_len; ++j) {
      char* end = nullptr;
      double v = std::strtod(s, &end);
      if (end == s || !std::isfinite(v))
        throw std::runtime_error(path + ": row " + std::to_string(i + 1) +
                                 " (" + text.vocab.back() +
                                 "): bad float in column " +
                                 std::to_string(j + 1));
      row[j] = v;
      norm_sq += v * v;
      s = end;
    }
    while (*s == ' ' || *s == '\t') ++s;
    if (*s != '\0')
      throw std::runtime_error(path + ": row " + std::to_string(i + 1) + " (" +
                               text.vocab.back() + "): trailing junk");
    if (norm_sq >= 1.0)
      throw std::runtime_error(path + ": row " + std::to_string(i + 1) + " (" +
                               text.vocab.back() +
                               "): norm >= 1, outside the unit ball");
  }
  if (std::getline(in, line) && !line.empty())
    throw std::runtime_error(path + ": trailing data after " +
                             std::to_string(text.m) + " rows");
  return text;
}

}  // namespace cxhyp::detail
