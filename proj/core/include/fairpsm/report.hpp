#pragma once

#include <string>

#include "fairpsm/fairtest.hpp"
#include "fairpsm/stats.hpp"

namespace fairpsm {

void write_text_file(const std::string& path, const std::string& content);
std::string format_double(double value, int decimals);

// fraction, mean, std, then one column per sub-sampling seed.
std::string curve_to_csv(const FairnessCurve& curve);

// Standalone line plot with a shaded +-1 std band.
std::string curve_to_svg(const FairnessCurve& curve, const std::string& title);

// Paper-style table: metric scores rounded half away from zero to integers,
// ratios at two decimals.
std::string subgroup_to_csv(const SubgroupReport& report);
std::string subgroup_to_json(const SubgroupReport& report);

// Relative deltas vs. the original test set, with a better/worse flag per
// cell (increase is good for performance metrics, decrease for fairness).
std::string subgroup_deltas_to_csv(const SubgroupReport& report);

// subset x metric tables of the across-report delta mean and std.
std::string delta_table_to_csv(const DeltaTable& table, bool std_dev);

std::string rank_table_to_csv(const RankTable& table);

} // namespace fairpsm
