#include "qkdlab/kernels.hpp"

namespace qkd::kernels {

namespace {
constexpr double kPi = 3.14159265358979323846;

void efficiency_scalar(const CurveParams& p, const double* t, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = efficiency_at(p, t[i]);
}

void sum_sumsq_scalar(const double* x, std::size_t n, double* sum, double* sumsq) {
    double s = 0.0, q = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        s += x[i];
        q += x[i] * x[i];
    }
    *sum = s;
    *sumsq = q;
}

std::size_t count_below_scalar(const double* x, std::size_t n, double threshold) {
    std::size_t c = 0;
    for (std::size_t i = 0; i < n; ++i) c += x[i] < threshold ? 1 : 0;
    return c;
}

void round_multiple_scalar(const double* in, double* out, std::size_t n, double resolution) {
    if (resolution <= 0.0) {
        for (std::size_t i = 0; i < n; ++i) out[i] = in[i];
        return;
    }
    for (std::size_t i = 0; i < n; ++i) out[i] = resolution * std::nearbyint(in[i] / resolution);
}
} // namespace

const Ops& scalar_ops() {
    static const Ops ops{"scalar", efficiency_scalar, sum_sumsq_scalar, count_below_scalar,
                         round_multiple_scalar};
    return ops;
}

double efficiency_integral(const CurveParams& p, double t) {
    const double local = t - p.window_start;
    if (local <= 0.0) return 0.0;
    double acc = 0.0;
    // rising edge: integral of half_raised(s/rise) over s = rise*(x/2 - sin(pi x)/(2 pi))
    if (local < p.rise) {
        const double x = local / p.rise;
        return p.peak * p.rise * (0.5 * x - std::sin(kPi * x) / (2.0 * kPi));
    }
    acc += p.peak * p.rise * 0.5;
    if (local <= p.rise_plateau) return acc + p.peak * (local - p.rise);
    acc += p.peak * (p.rise_plateau - p.rise);
    if (local < p.window_len) {
        // falling edge: integral of half_raised(1 - s/fall) over s
        const double x = (local - p.rise_plateau) / p.fall;
        return acc + p.peak * p.fall * (0.5 * x + (std::sin(kPi * (1.0 - x))) / (2.0 * kPi));
    }
    return acc + p.peak * p.fall * 0.5;
}

double efficiency_mean(const CurveParams& p, double a, double b) {
    if (!(b > a)) return efficiency_at(p, a);
    return (efficiency_integral(p, b) - efficiency_integral(p, a)) / (b - a);
}

} // namespace qkd::kernels
