#pragma once

#include <cstdint>

// Polarization algebra for the four protocol states and the measurement
// waveplate. Angles are linear-polarization orientations in degrees, always
// normalized to [0, 180).
namespace qkd {

enum class Basis : std::uint8_t { Z = 0, X = 1 };

inline Basis other(Basis b) { return b == Basis::Z ? Basis::X : Basis::Z; }

inline const char* basis_name(Basis b) { return b == Basis::Z ? "Z" : "X"; }

// Half-wave plate angle Bob applies in front of the PBS for each basis.
inline double waveplate_angle(Basis b) { return b == Basis::Z ? 0.0 : 22.5; }

struct Polarization {
    double angle = 0.0; // degrees in [0, 180)
};

struct RoutingProbs {
    double d0 = 0.0;
    double d1 = 0.0;
};

double normalize_angle(double deg);

// cos^2 of an angle in degrees; exact 1/0 at exact multiples of 90 so that
// basis-matched states route deterministically.
double cos2_deg(double deg);

// H=0, V=90, D=45, A=135: (0,Z)->H, (1,Z)->V, (0,X)->D, (1,X)->A
Polarization encode_bit(int bit, Basis basis);

// Half-wave plate convention: output angle = input - 2*theta, normalized.
Polarization waveplate_rotate(Polarization in, double theta_deg);

// PBS routing after the basis waveplate: p(D0) = cos^2, p(D1) = 1 - p(D0),
// so the pair always sums to exactly 1.
RoutingProbs detection_probabilities(Polarization pol, Basis basis);

} // namespace qkd
