#include "logitpfa/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "logitpfa/error.hpp"

namespace logitpfa {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

bool parse_double(std::string_view text, double& value) {
  const std::string cell = trim(text);
  if (cell.empty()) return false;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  if (*begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  return ec == std::errc() && ptr == end && std::isfinite(value);
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kParseError, "cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    lines.push_back(std::move(line));
  }
  return lines;
}

std::string where(const std::filesystem::path& path, std::size_t line, std::size_t column) {
  return path.string() + ":" + std::to_string(line) + " column " + std::to_string(column + 1);
}

double parse_label(std::string_view cell, const std::string& context) {
  double v = 0.0;
  if (!parse_double(cell, v) || (v != 0.0 && v != 1.0)) {
    throw Error(ErrorKind::kParseError, context + ": outcome must be 0 or 1, got '" +
                                            trim(cell) + "'");
  }
  return v;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

std::string quote_field(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::vector<std::string> split_csv_record(std::string_view line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        current += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else {
      current += c;
    }
  }
  if (quoted) throw Error(ErrorKind::kParseError, "unterminated quoted field");
  fields.push_back(std::move(current));
  return fields;
}

LabeledData read_labeled_csv(const std::filesystem::path& input, const std::string& label_spec) {
  const std::vector<std::string> lines = read_lines(input);
  if (lines.empty()) throw Error(ErrorKind::kParseError, input.string() + " is empty");

  std::vector<std::string> header = split_csv_record(lines.front());
  for (std::string& h : header) h = trim(h);

  const auto label_it = std::find(header.begin(), header.end(), label_spec);
  const bool label_in_file = label_it != header.end();
  const std::size_t label_col =
      label_in_file ? static_cast<std::size_t>(label_it - header.begin()) : header.size();

  std::vector<double> outcome;
  if (!label_in_file) {
    const std::filesystem::path label_path(label_spec);
    if (!std::filesystem::is_regular_file(label_path)) {
      throw Error(ErrorKind::kParseError,
                  "'" + label_spec + "' is neither a column of " + input.string() +
                      " nor a readable label file");
    }
    const std::vector<std::string> label_lines = read_lines(label_path);
    for (std::size_t i = 0; i < label_lines.size(); ++i) {
      double probe = 0.0;
      if (i == 0 && !parse_double(label_lines[i], probe)) continue;  // header line
      outcome.push_back(parse_label(label_lines[i], where(label_path, i + 1, 0)));
    }
  }

  LabeledData data;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c != label_col) data.labels.push_back(header[c]);
  }
  const std::size_t n = lines.size() - 1;
  const auto p = static_cast<Eigen::Index>(data.labels.size());
  data.x.resize(static_cast<Eigen::Index>(n), p);
  if (label_in_file) outcome.reserve(n);

  for (std::size_t row = 0; row < n; ++row) {
    const std::size_t line_no = row + 2;
    const std::vector<std::string> fields = split_csv_record(lines[row + 1]);
    if (fields.size() != header.size()) {
      throw Error(ErrorKind::kParseError,
                  input.string() + ":" + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " fields, found " +
                      std::to_string(fields.size()));
    }
    Eigen::Index col = 0;
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (c == label_col) {
        outcome.push_back(parse_label(fields[c], where(input, line_no, c)));
        continue;
      }
      double v = 0.0;
      if (!parse_double(fields[c], v)) {
        throw Error(ErrorKind::kParseError, where(input, line_no, c) +
                                                ": missing or non-numeric value '" +
                                                trim(fields[c]) + "'");
      }
      data.x(static_cast<Eigen::Index>(row), col++) = v;
    }
  }

  if (outcome.size() != n) {
    throw Error(ErrorKind::kParseError, "label count " + std::to_string(outcome.size()) +
                                            " does not match row count " + std::to_string(n));
  }
  data.y = Eigen::Map<const Eigen::VectorXd>(outcome.data(), static_cast<Eigen::Index>(n));
  return data;
}

void write_labeled_csv(std::ostream& out, const LabeledData& data) {
  for (const std::string& label : data.labels) out << quote_field(label) << ',';
  out << "y\n";
  for (Eigen::Index i = 0; i < data.x.rows(); ++i) {
    for (Eigen::Index j = 0; j < data.x.cols(); ++j) out << format_double(data.x(i, j)) << ',';
    out << (data.y[i] > 0.5 ? '1' : '0') << '\n';
  }
}

}  // namespace logitpfa
