#include "digisim/validate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace digisim::validate {

double haversine_miles(double lat1, double lon1, double lat2, double lon2) noexcept {
    constexpr double rad = std::numbers::pi / 180.0;
    const double p1 = lat1 * rad;
    const double p2 = lat2 * rad;
    const double dp = (lat2 - lat1) * rad;
    const double dl = (lon2 - lon1) * rad;
    const double s1 = std::sin(dp / 2);
    const double s2 = std::sin(dl / 2);
    const double a = s1 * s1 + std::cos(p1) * std::cos(p2) * s2 * s2;
    return 2 * kEarthRadiusMiles * std::asin(std::min(1.0, std::sqrt(a)));
}

} // namespace digisim::validate
