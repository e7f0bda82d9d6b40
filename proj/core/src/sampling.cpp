#include "fairpsm/sampling.hpp"

#include <algorithm>
#include <array>
#include <unordered_map>

#include <json.hpp>

#include "fairpsm/errors.hpp"
#include "fairpsm/rng.hpp"

namespace fairpsm {

std::string strategy_name(SamplingStrategy s) {
    switch (s) {
        case SamplingStrategy::class_based: return "class_based";
        case SamplingStrategy::pa_based: return "pa_based";
        case SamplingStrategy::wae: return "wae";
    }
    return "?";
}

namespace {

// Split row ids into cells by a key function, then keep min-cell-size draws
// from every cell. Cells are processed in fixed key order so the RNG stream
// is stable.
SampleSelection balance_cells(const Dataset& test, uint64_t seed, SamplingStrategy strategy,
                              const std::vector<int>& cell_of, size_t n_cells,
                              const char* what) {
    std::vector<std::vector<int64_t>> cells(n_cells);
    for (size_t i = 0; i < test.size(); ++i) {
        cells[static_cast<size_t>(cell_of[i])].push_back(test.row_ids[i]);
    }
    size_t m = SIZE_MAX;
    for (const auto& cell : cells) m = std::min(m, cell.size());
    if (m == 0) throw DataError(std::string("sampling: empty ") + what + " cell in test data");

    Rng rng(seed);
    SampleSelection sel;
    sel.strategy = strategy;
    sel.seed = seed;
    for (auto& cell : cells) {
        std::sort(cell.begin(), cell.end()); // id order, not arrival order
        if (cell.size() == m) {
            sel.selected_ids.insert(sel.selected_ids.end(), cell.begin(), cell.end());
        } else {
            auto draw = sample_without_replacement(cell, m, rng);
            sel.selected_ids.insert(sel.selected_ids.end(), draw.begin(), draw.end());
        }
    }
    std::sort(sel.selected_ids.begin(), sel.selected_ids.end());
    return sel;
}

} // namespace

SampleSelection class_balanced(const Dataset& test, uint64_t seed) {
    if (test.count_label(0) == 0 || test.count_label(1) == 0) {
        throw DataError("class_balanced: test set has a single label value");
    }
    std::vector<int> cell(test.size());
    for (size_t i = 0; i < test.size(); ++i) cell[i] = test.labels[i];
    return balance_cells(test, seed, SamplingStrategy::class_based, cell, 2, "label");
}

SampleSelection pa_balanced(const Dataset& test, uint64_t seed) {
    if (test.count_pa(0) == 0 || test.count_pa(1) == 0) {
        throw DataError("pa_balanced: test set has a single protected value");
    }
    std::vector<int> cell(test.size());
    for (size_t i = 0; i < test.size(); ++i) cell[i] = test.pa[i];
    return balance_cells(test, seed, SamplingStrategy::pa_based, cell, 2, "protected-attribute");
}

SampleSelection wae_balanced(const Dataset& test, uint64_t seed) {
    std::vector<int> cell(test.size());
    for (size_t i = 0; i < test.size(); ++i) cell[i] = test.labels[i] * 2 + test.pa[i];
    return balance_cells(test, seed, SamplingStrategy::wae, cell, 4, "label x protected-attribute");
}

std::vector<size_t> selection_positions(const SampleSelection& sel, const Dataset& test) {
    std::unordered_map<int64_t, size_t> where;
    where.reserve(test.size());
    for (size_t i = 0; i < test.size(); ++i) where[test.row_ids[i]] = i;
    std::vector<size_t> positions;
    positions.reserve(sel.selected_ids.size());
    for (int64_t id : sel.selected_ids) {
        auto it = where.find(id);
        if (it == where.end()) throw InputError("selection refers to a row id outside the test set");
        positions.push_back(it->second);
    }
    return positions;
}

std::string SampleSelection::to_json() const {
    nlohmann::ordered_json j;
    j["strategy"] = strategy_name(strategy);
    j["seed"] = seed;
    j["selected_ids"] = selected_ids;
    return j.dump();
}

} // namespace fairpsm
