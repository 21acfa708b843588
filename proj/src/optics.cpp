#include "qkdlab/optics.hpp"

#include <cmath>

namespace qkd {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

double normalize_angle(double deg) {
    double a = std::fmod(deg, 180.0);
    if (a < 0.0) a += 180.0;
    // fmod of a tiny negative can land exactly on 180 after the correction
    if (a == 180.0) a = 0.0;
    return a;
}

double cos2_deg(double deg) {
    const double a = normalize_angle(deg);
    if (a == 0.0) return 1.0;
    if (a == 90.0) return 0.0;
    const double c = std::cos(a * (kPi / 180.0));
    return c * c;
}

Polarization encode_bit(int bit, Basis basis) {
    if (basis == Basis::Z) return {bit ? 90.0 : 0.0};
    return {bit ? 135.0 : 45.0};
}

Polarization waveplate_rotate(Polarization in, double theta_deg) {
    return {normalize_angle(in.angle - 2.0 * theta_deg)};
}

RoutingProbs detection_probabilities(Polarization pol, Basis basis) {
    const Polarization rotated = waveplate_rotate(pol, waveplate_angle(basis));
    const double p0 = cos2_deg(rotated.angle);
    return {p0, 1.0 - p0};
}

} // namespace qkd
