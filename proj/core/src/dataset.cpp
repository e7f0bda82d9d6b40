#include "fairpsm/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <set>

#include "fairpsm/errors.hpp"
#include "fairpsm/rng.hpp"

namespace fairpsm {

namespace {

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

bool is_missing(const std::string& raw, const std::vector<std::string>& markers) {
    const std::string t = trim(raw);
    return std::find(markers.begin(), markers.end(), t) != markers.end();
}

double parse_numeric(const std::string& raw, const std::string& column, size_t row) {
    const std::string t = trim(raw);
    double value = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
        throw InputError("column \"" + column + "\" row " + std::to_string(row) +
                         ": \"" + raw + "\" is not numeric");
    }
    if (!std::isfinite(value)) {
        throw InputError("column \"" + column + "\" row " + std::to_string(row) + ": non-finite value");
    }
    return value;
}

} // namespace

Dataset Dataset::subset(const std::vector<size_t>& positions) const {
    Dataset out;
    out.schema = schema;
    out.feature_names = feature_names;
    out.features = Matrix(positions.size(), features.cols());
    out.labels.reserve(positions.size());
    out.pa.reserve(positions.size());
    out.row_ids.reserve(positions.size());
    for (size_t i = 0; i < positions.size(); ++i) {
        size_t p = positions[i];
        auto src = features.row(p);
        std::copy(src.begin(), src.end(), out.features.row(i).begin());
        out.labels.push_back(labels[p]);
        out.pa.push_back(pa[p]);
        out.row_ids.push_back(row_ids[p]);
    }
    return out;
}

size_t Dataset::count_pa(int value) const {
    return static_cast<size_t>(std::count(pa.begin(), pa.end(), value));
}

size_t Dataset::count_label(int value) const {
    return static_cast<size_t>(std::count(labels.begin(), labels.end(), value));
}

Dataset encode_table(const CsvTable& table, const DatasetSchema& schema, LoadReport* report) {
    DatasetSchema effective = schema;

    if (effective.feature_columns.empty() && effective.auto_features) {
        // every non-label, non-PA column; kind inferred from the first
        // non-missing cell of each column
        for (size_t c = 0; c < table.header.size(); ++c) {
            const std::string& name = table.header[c];
            if (name == effective.label_column || name == effective.protected_attribute) continue;
            FeatureColumn col;
            col.name = name;
            col.kind = FeatureKind::categorical;
            for (const auto& row : table.rows) {
                if (is_missing(row[c], effective.missing_markers)) continue;
                const std::string t = trim(row[c]);
                double v = 0;
                auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
                col.kind = (ec == std::errc() && ptr == t.data() + t.size())
                               ? FeatureKind::numeric
                               : FeatureKind::categorical;
                break;
            }
            effective.feature_columns.push_back(std::move(col));
        }
    }

    // resolve all column indices up front
    std::vector<int> feature_idx;
    for (const auto& col : effective.feature_columns) {
        int idx = table.column_index(col.name);
        if (idx < 0) throw SchemaError("schema " + effective.name + ": feature column \"" + col.name + "\" not in CSV header");
        feature_idx.push_back(idx);
    }
    const int label_idx = table.column_index(effective.label_column);
    if (label_idx < 0) throw SchemaError("schema " + effective.name + ": label column \"" + effective.label_column + "\" not in CSV header");
    const int pa_idx = table.column_index(effective.protected_attribute);
    if (pa_idx < 0) throw SchemaError("schema " + effective.name + ": protected column \"" + effective.protected_attribute + "\" not in CSV header");

    // drop rows with missing values in any used column
    std::vector<size_t> kept;
    for (size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        bool missing = is_missing(row[label_idx], effective.missing_markers) ||
                       is_missing(row[pa_idx], effective.missing_markers);
        for (size_t f = 0; !missing && f < feature_idx.size(); ++f) {
            missing = is_missing(row[feature_idx[f]], effective.missing_markers);
        }
        if (!missing) kept.push_back(r);
    }
    if (report) {
        report->rows_total = table.rows.size();
        report->rows_dropped = table.rows.size() - kept.size();
    }

    // category lists: fixed by schema, or collected from surviving rows
    std::vector<std::vector<std::string>> categories(effective.feature_columns.size());
    for (size_t f = 0; f < effective.feature_columns.size(); ++f) {
        const auto& col = effective.feature_columns[f];
        if (col.kind != FeatureKind::categorical) continue;
        if (!col.categories.empty()) {
            categories[f] = col.categories;
        } else {
            std::set<std::string> seen;
            for (size_t r : kept) seen.insert(trim(table.rows[r][feature_idx[f]]));
            categories[f].assign(seen.begin(), seen.end());
        }
    }

    // encoded layout
    std::vector<std::string> names;
    std::vector<size_t> offset(effective.feature_columns.size());
    size_t width = 0;
    for (size_t f = 0; f < effective.feature_columns.size(); ++f) {
        const auto& col = effective.feature_columns[f];
        offset[f] = width;
        if (col.kind == FeatureKind::numeric) {
            names.push_back(col.name);
            width += 1;
        } else {
            for (const auto& cat : categories[f]) names.push_back(col.name + "=" + cat);
            width += categories[f].size();
        }
    }
    const bool append_pa =
        effective.include_protected_in_features &&
        std::none_of(effective.feature_columns.begin(), effective.feature_columns.end(),
                     [&](const FeatureColumn& c) { return c.name == effective.protected_attribute; });
    if (append_pa) {
        names.push_back(effective.protected_attribute + "(pa)");
        width += 1;
    }

    Dataset out;
    out.schema = effective;
    out.feature_names = names;
    out.features = Matrix(kept.size(), width);
    out.labels.reserve(kept.size());
    out.pa.reserve(kept.size());
    out.row_ids.reserve(kept.size());

    for (size_t i = 0; i < kept.size(); ++i) {
        const auto& row = table.rows[kept[i]];
        for (size_t f = 0; f < effective.feature_columns.size(); ++f) {
            const auto& col = effective.feature_columns[f];
            const std::string& raw = row[feature_idx[f]];
            if (col.kind == FeatureKind::numeric) {
                out.features.at(i, offset[f]) = parse_numeric(raw, col.name, kept[i] + 2);
            } else {
                const std::string value = trim(raw);
                const auto& cats = categories[f];
                auto it = std::find(cats.begin(), cats.end(), value);
                if (it == cats.end()) {
                    throw SchemaError("schema " + effective.name + ": column \"" + col.name +
                                      "\" has unlisted category \"" + value + "\"");
                }
                out.features.at(i, offset[f] + static_cast<size_t>(it - cats.begin())) = 1.0;
            }
        }
        const int y = effective.favorable_value.matches(row[label_idx]) ? 1 : 0;
        const int p = effective.privileged_value.matches(row[pa_idx]) ? 1 : 0;
        if (append_pa) out.features.at(i, width - 1) = static_cast<double>(p);
        out.labels.push_back(y);
        out.pa.push_back(p);
        out.row_ids.push_back(static_cast<int64_t>(i));
    }

    if (report) report->encoded_width = width;

    if (out.count_label(1) == 0 || out.count_label(0) == 0) {
        throw DataError("dataset " + effective.name + ": label takes a single value after encoding (favorable " +
                        effective.favorable_value.describe() + ")");
    }
    if (out.count_pa(1) == 0 || out.count_pa(0) == 0) {
        throw DataError("dataset " + effective.name + ": protected attribute takes a single value after encoding (privileged " +
                        effective.privileged_value.describe() + ")");
    }
    return out;
}

Dataset load_dataset(const std::string& path, const DatasetSchema& schema, LoadReport* report) {
    return encode_table(read_csv(path), schema, report);
}

ScalingParams fit_minmax(const Dataset& data) {
    ScalingParams params;
    const size_t cols = data.features.cols();
    params.col_min.assign(cols, 0.0);
    params.col_max.assign(cols, 0.0);
    for (size_t c = 0; c < cols; ++c) {
        double lo = data.features.at(0, c), hi = lo;
        for (size_t r = 1; r < data.features.rows(); ++r) {
            lo = std::min(lo, data.features.at(r, c));
            hi = std::max(hi, data.features.at(r, c));
        }
        params.col_min[c] = lo;
        params.col_max[c] = hi;
    }
    return params;
}

Dataset apply_minmax(const Dataset& data, const ScalingParams& params) {
    if (params.col_min.size() != data.features.cols()) {
        throw InputError("scaling parameters fitted on a different width");
    }
    Dataset out = data;
    for (size_t c = 0; c < out.features.cols(); ++c) {
        const double lo = params.col_min[c];
        const double range = params.col_max[c] - lo;
        for (size_t r = 0; r < out.features.rows(); ++r) {
            double& x = out.features.at(r, c);
            x = range > 0 ? (x - lo) / range : 0.0; // constant column -> zeros
            x = std::clamp(x, 0.0, 1.0);            // guard strict-mode extrapolation
        }
    }
    return out;
}

Dataset minmax_scale(const Dataset& data) {
    if (data.size() == 0) return data;
    return apply_minmax(data, fit_minmax(data));
}

SplitPair split(const Dataset& data, double train_fraction, uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw InputError("train_fraction must be in (0,1)");
    }
    const size_t n = data.size();
    if (n < 10) throw DataError("too few rows to split: " + std::to_string(n));

    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    Rng rng(seed);
    shuffle(order, rng);

    const size_t n_train = static_cast<size_t>(std::floor(train_fraction * static_cast<double>(n)));
    std::vector<size_t> train_pos(order.begin(), order.begin() + n_train);
    std::vector<size_t> test_pos(order.begin() + n_train, order.end());

    SplitPair pair;
    pair.seed = seed;
    pair.train_fraction = train_fraction;
    pair.train = data.subset(train_pos);
    pair.test = data.subset(test_pos);

    for (const Dataset* side : {&pair.train, &pair.test}) {
        if (side->count_pa(0) == 0 || side->count_pa(1) == 0) {
            throw DataError("split seed " + std::to_string(seed) +
                            " leaves a protected group empty; use another seed or more data");
        }
    }
    return pair;
}

uint64_t row_id_fingerprint(const Dataset& data) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (int64_t id : data.row_ids) {
        for (int shift = 0; shift < 64; shift += 8) {
            h ^= static_cast<uint64_t>((id >> shift) & 0xff);
            h *= 0x100000001b3ULL;
        }
    }
    return h;
}

} // namespace fairpsm
