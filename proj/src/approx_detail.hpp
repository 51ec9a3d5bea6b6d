#pragma once

#include <vector>

#include "staccato/approx.hpp"

namespace staccato::detail {

// Removes the interior of a valid region together with its edges and adds a
// single entry->exit edge carrying `labels`.
Sfa replace_region(const Sfa& sfa, const std::vector<bool>& region, RegionBoundary boundary,
                   std::vector<Label> labels);

// Labels in rank order: probability descending, then string.
void sort_labels(std::vector<Label>& labels);

}  // namespace staccato::detail
