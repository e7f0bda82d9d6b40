#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fairpsm/csv.hpp"
#include "fairpsm/schema.hpp"

namespace fairpsm {

// Dense row-major matrix of doubles. Small by design; the pipelines here are
// dot products and column scans, nothing that warrants a linear algebra
// dependency.
class Matrix {
public:
    Matrix() = default;
    Matrix(size_t rows, size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    size_t rows() const { return rows_; }
    size_t cols() const { return cols_; }
    double& at(size_t r, size_t c) { return data_[r * cols_ + c]; }
    double at(size_t r, size_t c) const { return data_[r * cols_ + c]; }
    std::span<const double> row(size_t r) const { return {data_.data() + r * cols_, cols_}; }
    std::span<double> row(size_t r) { return {data_.data() + r * cols_, cols_}; }
    const std::vector<double>& data() const { return data_; }

private:
    size_t rows_ = 0;
    size_t cols_ = 0;
    std::vector<double> data_;
};

// Encoded, scaled tabular data: features in [0,1], labels and protected
// attribute in {0,1} (1 = favorable / privileged), stable row ids.
struct Dataset {
    Matrix features;
    std::vector<int> labels;
    std::vector<int> pa;
    std::vector<int64_t> row_ids;
    std::vector<std::string> feature_names;
    DatasetSchema schema;

    size_t size() const { return row_ids.size(); }
    Dataset subset(const std::vector<size_t>& positions) const;
    size_t count_pa(int value) const;
    size_t count_label(int value) const;
};

struct LoadReport {
    size_t rows_total = 0;     // data rows in the file
    size_t rows_dropped = 0;   // rows removed for missing values
    size_t encoded_width = 0;  // feature count after one-hot expansion
};

struct SplitPair {
    Dataset train;
    Dataset test;
    uint64_t seed = 0;
    double train_fraction = 0.7;
};

// Per-column min/max fitted before any split (strict mode refits on train).
struct ScalingParams {
    std::vector<double> col_min;
    std::vector<double> col_max;
};

// CSV -> encoded Dataset. Categorical features one-hot encode, the label and
// protected attribute binarize per schema, rows with missing values in used
// columns drop (count surfaced through `report`). Features are NOT scaled
// yet; compose with minmax_scale.
Dataset load_dataset(const std::string& path, const DatasetSchema& schema,
                     LoadReport* report = nullptr);
Dataset encode_table(const CsvTable& table, const DatasetSchema& schema,
                     LoadReport* report = nullptr);

// x -> (x - min) / (max - min) per column; constant columns map to all zeros
// so the encoded width stays stable.
ScalingParams fit_minmax(const Dataset& data);
Dataset apply_minmax(const Dataset& data, const ScalingParams& params);
Dataset minmax_scale(const Dataset& data);

// Seeded shuffle + prefix split. |train| = floor(train_fraction * n).
// Throws DataError when n < 10 or either side loses a protected group.
SplitPair split(const Dataset& data, double train_fraction, uint64_t seed);

// FNV-1a over the row id sequence; used to assert that every method inside a
// harness run saw the identical split.
uint64_t row_id_fingerprint(const Dataset& data);

} // namespace fairpsm
