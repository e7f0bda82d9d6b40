// Synthetic data builders shared by the unit tests.
#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "fairpsm/dataset.hpp"
#include "fairpsm/rng.hpp"
#include "fairpsm/schema.hpp"

namespace helpers {

inline fairpsm::DatasetSchema toy_schema(const std::string& name = "toy") {
    fairpsm::DatasetSchema schema;
    schema.name = name;
    schema.label_column = "label";
    schema.favorable_value = {fairpsm::ValueMatch::Op::equals, "1", 0};
    schema.protected_attribute = "group";
    schema.privileged_value = {fairpsm::ValueMatch::Op::equals, "1", 0};
    schema.feature_columns.push_back({"x", fairpsm::FeatureKind::numeric, {}});
    return schema;
}

// Dataset assembled directly from vectors; features default to one column
// equal to the row index scaled into [0,1].
inline fairpsm::Dataset make_dataset(const std::vector<int>& labels, const std::vector<int>& pa,
                                     std::vector<std::vector<double>> feature_rows = {}) {
    fairpsm::Dataset d;
    d.schema = toy_schema();
    const size_t n = labels.size();
    size_t width = feature_rows.empty() ? 1 : feature_rows[0].size();
    d.features = fairpsm::Matrix(n, width);
    for (size_t i = 0; i < n; ++i) {
        if (feature_rows.empty()) {
            d.features.at(i, 0) = n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 0.0;
        } else {
            for (size_t c = 0; c < width; ++c) d.features.at(i, c) = feature_rows[i][c];
        }
        d.labels.push_back(labels[i]);
        d.pa.push_back(pa[i]);
        d.row_ids.push_back(static_cast<int64_t>(i));
    }
    d.feature_names.assign(width, "x");
    return d;
}

// Random binary-classification data with a planted group bias: privileged
// rows get a positive score bump, so a fitted model discriminates.
inline fairpsm::Dataset biased_dataset(size_t n, uint64_t seed, double bias = 1.5) {
    fairpsm::Rng rng(seed);
    std::vector<int> labels(n), pa(n);
    std::vector<std::vector<double>> rows(n);
    for (size_t i = 0; i < n; ++i) {
        const double x0 = rng.uniform01();
        const double x1 = rng.uniform01();
        pa[i] = rng.uniform01() < 0.6 ? 1 : 0;
        const double z = 3.0 * (x0 - 0.5) + 1.0 * (x1 - 0.5) + (pa[i] ? bias * 0.5 : -bias * 0.5);
        const double p = 1.0 / (1.0 + std::exp(-z));
        labels[i] = rng.uniform01() < p ? 1 : 0;
        rows[i] = {x0, x1, static_cast<double>(pa[i])};
    }
    auto d = make_dataset(labels, pa, rows);
    d.feature_names = {"x0", "x1", "group(pa)"};
    return d;
}

} // namespace helpers
