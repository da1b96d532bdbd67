#include "nck/table.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace nck {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void Table::add_column(const std::string& name, std::vector<double> values) {
  if (has(name)) throw std::invalid_argument("table: duplicate column " + name);
  if (!names_.empty() && values.size() != rows()) throw std::invalid_argument("table: column length mismatch");
  names_.push_back(name);
  data_.push_back(std::move(values));
}

bool Table::has(const std::string& name) const {
  for (const auto& n : names_)
    if (n == name) return true;
  return false;
}

std::size_t Table::index(const std::string& name) const {
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == name) return i;
  throw std::out_of_range("table: no column " + name);
}

const std::vector<double>& Table::col(const std::string& name) const { return data_[index(name)]; }
std::vector<double>& Table::col(const std::string& name) { return data_[index(name)]; }

std::size_t Table::rows() const { return data_.empty() ? 0 : data_.front().size(); }

void Table::push_row(const std::vector<double>& row) {
  if (row.size() != names_.size()) throw std::invalid_argument("table: row width mismatch");
  for (std::size_t i = 0; i < row.size(); ++i) data_[i].push_back(row[i]);
}

void Table::write_csv(std::ostream& os, const std::vector<std::string>& comments) const {
  for (const auto& c : comments) os << "# " << c << '\n';
  for (std::size_t i = 0; i < names_.size(); ++i) os << (i ? "," : "") << names_[i];
  os << '\n';
  for (std::size_t r = 0; r < rows(); ++r) {
    for (std::size_t i = 0; i < names_.size(); ++i) os << (i ? "," : "") << format_double(data_[i][r]);
    os << '\n';
  }
}

namespace {
double parse_cell(const std::string& s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw std::invalid_argument("csv: cannot parse '" + s + "'");
  return v;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}
}  // namespace

Table Table::read_csv(std::istream& is, std::vector<std::string>* comments) {
  Table t;
  std::string line;
  bool header = false;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (comments) comments->push_back(line.size() > 2 ? line.substr(2) : "");
      continue;
    }
    const auto cells = split(line);
    if (!header) {
      for (const auto& c : cells) t.add_column(c);
      header = true;
      continue;
    }
    std::vector<double> row;
    for (const auto& c : cells) row.push_back(parse_cell(c));
    t.push_row(row);
  }
  if (!header) throw std::invalid_argument("csv: missing header");
  return t;
}

}  // namespace nck
