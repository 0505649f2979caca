#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ctiprof {

/// One quoted CSV record terminated by LF. Every field is quoted, embedded
/// quotes doubled, so outputs are byte-stable for golden-file comparison.
std::string csv_row(const std::vector<std::string>& fields);

/// A rectangular result table with optional header comment lines
/// (scope/kind annotations) carried into every output format.
struct Table {
  std::string name;
  std::vector<std::string> notes;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row) { rows.push_back(std::move(row)); }
};

void write_csv(std::ostream& out, const Table& t);
void write_json(std::ostream& out, const Table& t);
void write_markdown(std::ostream& out, const Table& t);

/// Writes the table under dir as <name>.<ext> for each requested format
/// ("csv", "json", "md"). Returns the paths written.
std::vector<std::string> write_table(const std::string& dir, const Table& t,
                                     const std::vector<std::string>& formats);

/// "12.3%" style percentage: one decimal, round half away from zero.
std::string percent(double numerator, double denominator);

/// "148 (97.4%)"
std::string count_with_percent(std::size_t count, std::size_t total);

std::string format_double(double v, int decimals);

}  // namespace ctiprof
