#include "hsfuse/resample.hpp"

#include "hsfuse/sensor.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace hsfuse {

namespace {

constexpr double kCubicA = -0.5;

int mirror(long i, int n) {
    const long period = 2L * n;
    long m = i % period;
    if (m < 0) m += period;
    if (m >= n) m = period - 1 - m;
    return static_cast<int>(m);
}

double cubic_weight(double d) {
    d = std::abs(d);
    if (d <= 1.0) return (kCubicA + 2.0) * d * d * d - (kCubicA + 3.0) * d * d + 1.0;
    if (d < 2.0) return kCubicA * d * d * d - 5.0 * kCubicA * d * d + 8.0 * kCubicA * d - 4.0 * kCubicA;
    return 0.0;
}

}  // namespace

Interp parse_interp(std::string_view name) {
    if (name == "bilinear") return Interp::bilinear;
    if (name == "bicubic") return Interp::bicubic;
    throw std::invalid_argument("unknown interpolation method '" + std::string(name) + "'");
}

Matrix interp_axis(int n_in, int ratio, int phase, Interp method) {
    if (ratio < 1) throw std::invalid_argument("upsampling ratio must be >= 1");
    if (n_in < 1) throw std::invalid_argument("cannot upsample an empty axis");
    const int n_out = n_in * ratio;
    Matrix op = Matrix::Zero(n_out, n_in);
    for (int o = 0; o < n_out; ++o) {
        const double t = static_cast<double>(o - phase) / ratio;
        const long base = static_cast<long>(std::floor(t));
        const double frac = t - static_cast<double>(base);
        if (frac == 0.0) {
            op(o, mirror(base, n_in)) += 1.0;
            continue;
        }
        if (method == Interp::bilinear) {
            op(o, mirror(base, n_in)) += 1.0 - frac;
            op(o, mirror(base + 1, n_in)) += frac;
        } else {
            for (long k = -1; k <= 2; ++k) op(o, mirror(base + k, n_in)) += cubic_weight(frac - static_cast<double>(k));
        }
    }
    return op;
}

SpectralImage upsample(const SpectralImage& img, int ratio, Interp method, int phase) {
    if (ratio < 1) throw std::invalid_argument("upsampling ratio must be >= 1");
    if (ratio == 1) return img;
    return apply_separable(img, interp_axis(img.height(), ratio, phase, method),
                           interp_axis(img.width(), ratio, phase, method));
}

SpectralImage upsample(const SpectralImage& img, int ratio, Interp method) {
    return upsample(img, ratio, method, default_phase(ratio));
}

}  // namespace hsfuse
