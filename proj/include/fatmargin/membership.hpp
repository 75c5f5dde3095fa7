#pragma once

#include "fatmargin/dataset.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace fatmargin {

struct ClassCenters {
    std::vector<double> positive;
    std::vector<double> negative;
};

struct ClassRadii {
    double positive = 0.0;
    double negative = 0.0;
};

/// Fuzzy weights s_i = 1 - d_i / (r_c + delta), d_i being the distance of
/// sample i to the centre of its own class c.
struct MembershipVector {
    std::vector<double> values;
    std::vector<double> distances;
    double delta = 0.0;
    ClassCenters centers;
    ClassRadii radii;
};

/// Arithmetic mean of each class. Throws DataError if a class is empty.
ClassCenters class_centers(const Dataset& data);

/// Largest Euclidean distance from a class member to its centre.
ClassRadii class_radii(const Dataset& data, const ClassCenters& centers);

/// 1e-4 * max(r+, r-), floored at 1e-12.
double default_delta(const ClassRadii& radii);

/// Throws ConfigError when delta <= 0. With no delta, default_delta() is used.
MembershipVector compute_memberships(const Dataset& data, std::optional<double> delta = std::nullopt);

} // namespace fatmargin
