#include "fatmargin/membership.hpp"

#include "fatmargin/error.hpp"

#include <algorithm>
#include <cmath>

namespace fatmargin {

namespace {

double distance(std::span<const double> a, std::span<const double> b)
{
    double acc = 0.0;
    for (std::size_t d = 0; d < a.size(); ++d) {
        const double diff = a[d] - b[d];
        acc += diff * diff;
    }
    return std::sqrt(acc);
}

const std::vector<double>& center_of(const ClassCenters& c, int label)
{
    return label > 0 ? c.positive : c.negative;
}

} // namespace

ClassCenters class_centers(const Dataset& data)
{
    data.validate();
    const auto n = data.dimension();
    ClassCenters c{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
    std::size_t npos = 0;
    std::size_t nneg = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        auto& target = data.labels[i] > 0 ? c.positive : c.negative;
        (data.labels[i] > 0 ? npos : nneg)++;
        const auto x = data.features.row(i);
        for (std::size_t d = 0; d < n; ++d)
            target[d] += x[d];
    }
    if (npos == 0 || nneg == 0)
        throw DataError("class centres need at least one sample of each class");
    for (std::size_t d = 0; d < n; ++d) {
        c.positive[d] /= static_cast<double>(npos);
        c.negative[d] /= static_cast<double>(nneg);
    }
    return c;
}

ClassRadii class_radii(const Dataset& data, const ClassCenters& centers)
{
    ClassRadii r;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double d = distance(data.features.row(i), center_of(centers, data.labels[i]));
        auto& target = data.labels[i] > 0 ? r.positive : r.negative;
        target = std::max(target, d);
    }
    return r;
}

double default_delta(const ClassRadii& radii)
{
    return std::max(1e-4 * std::max(radii.positive, radii.negative), 1e-12);
}

MembershipVector compute_memberships(const Dataset& data, std::optional<double> delta)
{
    if (delta && !(*delta > 0.0 && std::isfinite(*delta)))
        throw ConfigError("membership delta must be positive");
    MembershipVector mv;
    mv.centers = class_centers(data);
    mv.radii = class_radii(data, mv.centers);
    mv.delta = delta ? *delta : default_delta(mv.radii);
    mv.values.resize(data.size());
    mv.distances.resize(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        const int y = data.labels[i];
        const double d = distance(data.features.row(i), center_of(mv.centers, y));
        const double r = y > 0 ? mv.radii.positive : mv.radii.negative;
        mv.distances[i] = d;
        mv.values[i] = 1.0 - d / (r + mv.delta);
    }
    return mv;
}

} // namespace fatmargin
