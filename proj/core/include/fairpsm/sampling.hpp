#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fairpsm/dataset.hpp"

namespace fairpsm {

enum class SamplingStrategy { class_based, pa_based, wae };

std::string strategy_name(SamplingStrategy s);

struct SampleSelection {
    SamplingStrategy strategy;
    std::vector<int64_t> selected_ids; // sorted, no duplicates
    uint64_t seed = 0;

    std::string to_json() const;
};

// Keep every row of the minority label and a seeded uniform sample of equal
// size from the majority. |selected| = 2 * min(count(Y=1), count(Y=0)).
SampleSelection class_balanced(const Dataset& test, uint64_t seed);

// Same scheme applied to the protected attribute.
SampleSelection pa_balanced(const Dataset& test, uint64_t seed);

// "We're all equal": equalize all four (label x PA) cells at the size of the
// smallest; every cell must be non-empty.
SampleSelection wae_balanced(const Dataset& test, uint64_t seed);

// Positions (not ids) of the selected rows within `test`, for subsetting.
std::vector<size_t> selection_positions(const SampleSelection& sel, const Dataset& test);

} // namespace fairpsm
