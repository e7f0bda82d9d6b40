#pragma once

#include <optional>
#include <string>
#include <vector>

namespace fairpsm {

enum class FeatureKind { numeric, categorical };

struct FeatureColumn {
    std::string name;
    FeatureKind kind = FeatureKind::numeric;
    // Fixed category list for one-hot encoding. Empty means "derive from the
    // data, sorted lexicographically"; shipped schemas pin the lists so the
    // encoded width never depends on which rows survived cleaning.
    std::vector<std::string> categories;
};

// Predicate mapping a raw cell to the positive side of a binary attribute.
// Either an exact string match ("male", ">50K") or a numeric comparison
// against a cutoff (age >= 25). matches() is the single source of truth for
// both protected-attribute and label binarization.
struct ValueMatch {
    enum class Op { equals, lt, le, gt, ge };
    Op op = Op::equals;
    std::string text;   // equals
    double cutoff = 0;  // numeric comparisons

    bool matches(const std::string& raw) const;
    std::string describe() const;
};

struct DatasetSchema {
    std::string name;
    std::vector<FeatureColumn> feature_columns;
    std::string protected_attribute;
    ValueMatch privileged_value;   // raw value mapped to PA = 1
    std::string label_column;
    ValueMatch favorable_value;    // raw value mapped to Y = 1
    // Algorithm-1 style: the protected attribute is part of the model input.
    bool include_protected_in_features = true;
    std::vector<std::string> missing_markers = {"", "?"};
    // When true and feature_columns is empty, every column other than the
    // label and protected attribute becomes a feature with inferred kind
    // (used by wide survey data where listing columns is impractical).
    bool auto_features = false;
};

// Reads a schema file. The file may describe several candidate protected
// attributes; `protected_attr` picks one (empty string = the file default).
DatasetSchema load_schema(const std::string& path, const std::string& protected_attr = "");
DatasetSchema parse_schema(const std::string& json_text, const std::string& protected_attr = "");
std::vector<std::string> schema_protected_choices(const std::string& path);

} // namespace fairpsm
