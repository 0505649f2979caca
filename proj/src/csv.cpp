#include "ctiprof/csv.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include "json.hpp"

namespace ctiprof {

std::string csv_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out.push_back(',');
    out.push_back('"');
    for (char c : fields[i]) {
      if (c == '"') out += "\"\"";
      else out.push_back(c);
    }
    out.push_back('"');
  }
  out.push_back('\n');
  return out;
}

void write_csv(std::ostream& out, const Table& t) {
  for (const auto& note : t.notes) out << "# " << note << "\n";
  out << csv_row(t.columns);
  for (const auto& row : t.rows) out << csv_row(row);
}

void write_json(std::ostream& out, const Table& t) {
  nlohmann::json doc;
  doc["table"] = t.name;
  if (!t.notes.empty()) doc["notes"] = t.notes;
  doc["rows"] = nlohmann::json::array();
  for (const auto& row : t.rows) {
    nlohmann::json obj;
    for (std::size_t i = 0; i < t.columns.size() && i < row.size(); ++i) {
      obj[t.columns[i]] = row[i];
    }
    doc["rows"].push_back(std::move(obj));
  }
  out << doc.dump(2) << "\n";
}

void write_markdown(std::ostream& out, const Table& t) {
  out << "## " << t.name << "\n\n";
  for (const auto& note : t.notes) out << "> " << note << "\n";
  if (!t.notes.empty()) out << "\n";
  auto emit_row = [&](const std::vector<std::string>& row) {
    out << "|";
    for (const auto& f : row) out << " " << f << " |";
    out << "\n";
  };
  emit_row(t.columns);
  out << "|";
  for (std::size_t i = 0; i < t.columns.size(); ++i) out << "---|";
  out << "\n";
  for (const auto& row : t.rows) emit_row(row);
}

std::vector<std::string> write_table(const std::string& dir, const Table& t,
                                     const std::vector<std::string>& formats) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> written;
  for (const auto& fmt : formats) {
    std::string path = dir + "/" + t.name + "." + fmt;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    if (fmt == "csv") write_csv(out, t);
    else if (fmt == "json") write_json(out, t);
    else if (fmt == "md") write_markdown(out, t);
    else throw std::runtime_error("unknown output format: " + fmt);
    written.push_back(std::move(path));
  }
  return written;
}

std::string format_double(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

std::string percent(double numerator, double denominator) {
  if (denominator == 0.0) return "-";
  return format_double(100.0 * numerator / denominator, 1) + "%";
}

std::string count_with_percent(std::size_t count, std::size_t total) {
  return std::to_string(count) + " (" +
         percent(static_cast<double>(count), static_cast<double>(total)) + ")";
}

}  // namespace ctiprof
