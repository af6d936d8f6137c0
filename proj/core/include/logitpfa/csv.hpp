#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace logitpfa {

/// Shortest decimal form that round-trips to the same double.
std::string format_double(double value);

/// Wraps a CSV field in quotes when it contains a comma, quote or newline.
std::string quote_field(std::string_view field);

/// Splits one CSV record, honouring double-quoted fields.
std::vector<std::string> split_csv_record(std::string_view line);

/// Predictor matrix plus 0/1 outcome with the predictor column labels.
struct LabeledData {
  std::vector<std::string> labels;  // one per predictor column
  Eigen::MatrixXd x;                // n x p
  Eigen::VectorXd y;
};

/// Reads a header-first CSV of predictors. `label_spec` names either a
/// column of the file holding the outcome or a separate file with one 0/1
/// value per line (an optional non-numeric first line is treated as a
/// header). Empty, NA, NaN and infinite cells are rejected. Throws
/// ParseError.
LabeledData read_labeled_csv(const std::filesystem::path& input, const std::string& label_spec);

/// Writes predictors followed by a final "y" column; values round-trip
/// exactly through read_labeled_csv.
void write_labeled_csv(std::ostream& out, const LabeledData& data);

}  // namespace logitpfa
