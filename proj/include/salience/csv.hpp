#pragma once

#include <charconv>
#include <cstdio>
#include <string>
#include <vector>

namespace salience {

// Shortest round-trip decimal form, identical across runs. CSV bodies must
// be byte-stable for the golden-file checks.
inline std::string format_double(double x) {
  char buf[40];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  (void)ec;
  return std::string(buf, ptr);
}

inline std::string csv_quote(const std::string& field) {
  bool needs = false;
  for (char c : field) {
    if (c == ',' || c == '"' || c == '\n' || c == '\r') {
      needs = true;
      break;
    }
  }
  if (!needs) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

class CsvWriter {
 public:
  void cell(const std::string& s) {
    if (!at_row_start_) buf_ += ',';
    buf_ += csv_quote(s);
    at_row_start_ = false;
  }
  void cell(const char* s) { cell(std::string(s)); }
  void cell(double x) { cell(format_double(x)); }
  void cell(int x) { cell(std::to_string(x)); }
  void cell(std::size_t x) { cell(std::to_string(x)); }
  void endrow() {
    buf_ += '\n';
    at_row_start_ = true;
  }
  template <typename... Cells>
  void row(const Cells&... cells) {
    (cell(cells), ...);
    endrow();
  }
  void comment(const std::string& line) {
    buf_ += "# " + line + "\n";
  }
  const std::string& str() const { return buf_; }

 private:
  std::string buf_;
  bool at_row_start_ = true;
};

// Minimal RFC-4180-ish reader for the artifacts this tool writes itself.
// Lines starting with '#' are provenance comments and are skipped.
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

}  // namespace salience
