#pragma once

#include <initializer_list>
#include <ostream>
#include <string>
#include <vector>

namespace platoon {

/// Fixed 12-significant-digit rendering so identical inputs give identical bytes.
std::string format_number(double v);
/// Round-trip exact rendering (17 significant digits).
std::string format_exact(double v);

/// CSV with a '#'-prefixed "key=value" metadata block ahead of the header row.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& os) : os_(os) {}

  void meta(const std::string& key, const std::string& value);
  void comment(const std::string& text);
  void header(const std::vector<std::string>& columns);
  void row(const std::vector<double>& values);
  void row(std::initializer_list<double> values) { row(std::vector<double>(values)); }
  void row_text(const std::vector<std::string>& cells);

 private:
  std::ostream& os_;
};

}  // namespace platoon
