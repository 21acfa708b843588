#pragma once

#include <cmath>
#include <cstddef>

// Batch numeric kernels: scalar reference implementations plus AVX2 variants
// selected at runtime. The scalar and AVX2 paths are written op-for-op
// identical (explicit fma, identical comparison boundaries), so efficiency
// evaluation, classification counts and rounding are bit-exact across both;
// only the reductions differ in summation order and are compared with a
// tolerance in the equivalence tests.
namespace qkd::kernels {

// Gate efficiency window in evaluation form. window_start/rise/rise_plateau/
// window_len are precomputed so every implementation derives branch
// boundaries from the same doubles.
struct CurveParams {
    double window_start = 0.0; // center - plateau/2 - rise
    double rise = 0.0;
    double rise_plateau = 0.0; // rise + plateau
    double window_len = 0.0;   // rise + plateau + fall
    double fall = 0.0;
    double peak = 0.0;
};

// Taylor coefficients of cos(pi t) in t^2 on [0, 0.5]; shared by the scalar
// and vector evaluations so both run the identical fma chain.
inline constexpr double kCosPiCoeff[12] = {
    1.0,
    -4.934802200544679,
    4.0587121264167685,
    -1.3352627688545895,
    0.2353306303588932,
    -0.02580689139001406,
    0.0019295743094039231,
    -0.0001046381049248457,
    4.303069587032947e-06,
    -1.3878952462213771e-07,
    3.604730797462501e-09,
    -7.700707130601354e-11,
};

// cos(pi*x) for x in [0, 1]: fold onto [0, 0.5] via cos(pi(1-t)) = -cos(pi t),
// then the even Taylor polynomial (degree 22, truncation error < 1e-19).
// Every step is a single IEEE operation so vector lanes reproduce it exactly.
inline double cos_pi_unit(double x) {
    const double* kC = kCosPiCoeff;
    const bool flip = x > 0.5;
    const double t = flip ? 1.0 - x : x;
    const double u = t * t;
    double r = kC[11];
    r = std::fma(r, u, kC[10]);
    r = std::fma(r, u, kC[9]);
    r = std::fma(r, u, kC[8]);
    r = std::fma(r, u, kC[7]);
    r = std::fma(r, u, kC[6]);
    r = std::fma(r, u, kC[5]);
    r = std::fma(r, u, kC[4]);
    r = std::fma(r, u, kC[3]);
    r = std::fma(r, u, kC[2]);
    r = std::fma(r, u, kC[1]);
    r = std::fma(r, u, kC[0]);
    return flip ? -r : r;
}

// raised-cosine smoothstep (1 - cos(pi x))/2, single-rounded
inline double half_raised(double x) { return std::fma(-0.5, cos_pi_unit(x), 0.5); }

// Gate efficiency at time t: 0 outside the window, raised-cosine rise and
// fall edges, flat plateau at exactly `peak`.
inline double efficiency_at(const CurveParams& p, double t) {
    const double local = t - p.window_start;
    if (!(local > 0.0) || !(local < p.window_len)) return 0.0;
    if (local < p.rise) return p.peak * half_raised(local / p.rise);
    if (local <= p.rise_plateau) return p.peak;
    return p.peak * half_raised(1.0 - (local - p.rise_plateau) / p.fall);
}

// Closed-form integral of the window from -inf to t; the calibration scan
// builds expected click counts from differences of this.
double efficiency_integral(const CurveParams& p, double t);

// Mean efficiency over [a, b] (a < b), exact via the integral.
double efficiency_mean(const CurveParams& p, double a, double b);

struct Ops {
    const char* name;
    // out[i] = efficiency_at(p, t[i])
    void (*efficiency)(const CurveParams& p, const double* t, double* out, std::size_t n);
    // plain left-to-right sum and sum of squares (reference); vector variants
    // may reassociate
    void (*sum_sumsq)(const double* x, std::size_t n, double* sum, double* sumsq);
    // number of i with x[i] < threshold
    std::size_t (*count_below)(const double* x, std::size_t n, double threshold);
    // out[i] = resolution * nearbyint(in[i]/resolution); identity when
    // resolution <= 0. Ties round to even in every implementation.
    void (*round_multiple)(const double* in, double* out, std::size_t n, double resolution);
};

const Ops& scalar_ops();

// AVX2+FMA variant, or nullptr when the build or the CPU lacks it.
const Ops* avx2_ops();

// Best available implementation; QKDLAB_KERNELS=scalar|avx2 overrides.
const Ops& active();

} // namespace qkd::kernels
