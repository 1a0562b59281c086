#pragma once

#include <vector>

namespace moeval {

enum class DistributionSide { kResponse, kGold };

// Empirical probability mass over option positions 1..N; mass[i-1] = P(i).
struct PositionDistribution {
    int option_count = 0;
    std::vector<double> mass;
    DistributionSide side = DistributionSide::kResponse;

    double at(int position) const { return mass.at(static_cast<std::size_t>(position - 1)); }
};

}  // namespace moeval
