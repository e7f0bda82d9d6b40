#pragma once

#include <string>
#include <vector>

#include "fairpsm/csv.hpp"

namespace fairpsm::tools {

// Raw download formats -> the canonical header CSVs the schemas describe.

// UCI adult: headerless ", "-separated files (adult.data, adult.test). The
// test file's comment line and trailing label periods are normalized.
CsvTable convert_adult(const std::vector<std::string>& raw_paths);

// UCI statlog german.data: space-separated codes; attribute 9 folds sex and
// marital status together and is mapped to a plain sex column.
CsvTable convert_german(const std::string& raw_path);

// ProPublica two-year recidivism scores: already a clean CSV; parsed and
// rewritten so quoting is normalized.
CsvTable convert_compas(const std::string& raw_path);

// UCI processed.cleveland.data: 14 headerless numeric columns with '?'
// markers; categorical codes decode to readable labels, the target
// binarizes to 0/1.
CsvTable convert_heart(const std::string& raw_path);

// UCI bank-full.csv: semicolon-separated with quoted headers.
CsvTable convert_bank(const std::string& raw_path);

} // namespace fairpsm::tools
