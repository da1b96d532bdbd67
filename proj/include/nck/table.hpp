#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nck {

// Column-major table of doubles with a fixed column order; the CSV form is byte-stable.
class Table {
 public:
  void add_column(const std::string& name, std::vector<double> values = {});
  bool has(const std::string& name) const;
  const std::vector<double>& col(const std::string& name) const;
  std::vector<double>& col(const std::string& name);
  const std::vector<std::string>& names() const { return names_; }
  std::size_t rows() const;
  std::size_t cols() const { return names_.size(); }
  void push_row(const std::vector<double>& row);

  // Lines starting with '#' are comments; doubles are written with %.17g, ±inf as "inf"/"-inf".
  void write_csv(std::ostream& os, const std::vector<std::string>& comments = {}) const;
  static Table read_csv(std::istream& is, std::vector<std::string>* comments = nullptr);

 private:
  std::size_t index(const std::string& name) const;
  std::vector<std::string> names_;
  std::vector<std::vector<double>> data_;
};

std::string format_double(double v);

}  // namespace nck
