#include "hsfuse/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace hsfuse {

namespace {

constexpr double kLambdaMin = 0.4;
constexpr double kLambdaMax = 2.5;
constexpr int kMaxEndmembers = 9;
constexpr double kSoftmaxGain = 3.0;

}  // namespace

std::vector<double> scene_wavelengths(int bands) {
    if (bands < 1) throw std::invalid_argument("scene needs at least one band");
    std::vector<double> wl(static_cast<std::size_t>(bands));
    for (int k = 0; k < bands; ++k)
        wl[static_cast<std::size_t>(k)] =
            bands == 1 ? 0.5 * (kLambdaMin + kLambdaMax) : kLambdaMin + (kLambdaMax - kLambdaMin) * k / (bands - 1);
    return wl;
}

SyntheticScene synth_scene(std::uint64_t seed, int p, int height, int width, int bands) {
    if (p < 1 || p > kMaxEndmembers)
        throw std::invalid_argument("scene endmember count must lie in [1, " + std::to_string(kMaxEndmembers) + "]");
    if (height < 4 || width < 4) throw std::invalid_argument("scene must be at least 4 x 4");
    if (bands < 1) throw std::invalid_argument("scene needs at least one band");

    std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32), 0x5eedu};
    std::mt19937_64 gen(seq);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const std::vector<double> wl = scene_wavelengths(bands);
    SyntheticScene scene;
    scene.endmembers.resize(bands, p);
    for (int e = 0; e < p; ++e) {
        const double baseline = 0.02 + 0.08 * unit(gen);
        const int bumps = 3 + static_cast<int>(unit(gen) * 3.0);
        std::vector<double> centre(static_cast<std::size_t>(bumps)), width_um(centre.size()), amp(centre.size());
        for (int b = 0; b < bumps; ++b) {
            centre[static_cast<std::size_t>(b)] = kLambdaMin + (kLambdaMax - kLambdaMin) * unit(gen);
            width_um[static_cast<std::size_t>(b)] = 0.08 + 0.32 * unit(gen);
            amp[static_cast<std::size_t>(b)] = 0.1 + 0.5 * unit(gen);
        }
        for (int k = 0; k < bands; ++k) {
            double v = baseline;
            for (int b = 0; b < bumps; ++b) {
                const double z = (wl[static_cast<std::size_t>(k)] - centre[static_cast<std::size_t>(b)]) /
                                 width_um[static_cast<std::size_t>(b)];
                v += amp[static_cast<std::size_t>(b)] * std::exp(-0.5 * z * z);
            }
            scene.endmembers(k, e) = v;
        }
    }

    // Smooth fields: a few low-frequency plane waves per endmember.
    const Eigen::Index n = static_cast<Eigen::Index>(height) * width;
    Matrix fields(p, n);
    for (int e = 0; e < p; ++e) {
        struct Wave {
            double fx, fy, phase, amp;
        };
        std::vector<Wave> waves(4);
        for (Wave& w : waves) {
            w.fx = 0.5 + 2.0 * unit(gen);
            w.fy = 0.5 + 2.0 * unit(gen);
            w.phase = 2.0 * std::numbers::pi * unit(gen);
            w.amp = 0.5 + unit(gen);
        }
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x) {
                double v = 0.0;
                for (const Wave& w : waves)
                    v += w.amp * std::cos(2.0 * std::numbers::pi * (w.fx * x / width + w.fy * y / height) + w.phase);
                fields(e, static_cast<Eigen::Index>(y) * width + x) = v;
            }
    }
    scene.abundances.resize(p, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const Vector f = fields.col(j) * kSoftmaxGain;
        const Vector ex = (f.array() - f.maxCoeff()).exp();
        scene.abundances.col(j) = ex / ex.sum();
    }

    // Pure patches.
    const int side = std::max(2, std::min(height, width) / 4);
    const int slots[kMaxEndmembers][2] = {{0, 0}, {0, 2}, {2, 0}, {2, 2}, {0, 1}, {1, 0}, {1, 2}, {2, 1}, {1, 1}};
    for (int e = 0; e < p; ++e) {
        const int y0 = slots[e][0] == 0 ? 0 : slots[e][0] == 2 ? height - side : (height - side) / 2;
        const int x0 = slots[e][1] == 0 ? 0 : slots[e][1] == 2 ? width - side : (width - side) / 2;
        for (int y = y0; y < y0 + side; ++y)
            for (int x = x0; x < x0 + side; ++x) {
                auto col = scene.abundances.col(static_cast<Eigen::Index>(y) * width + x);
                col.setZero();
                col[e] = 1.0;
            }
    }

    scene.image = SpectralImage(height, width, scene.endmembers * scene.abundances, wl);
    return scene;
}

}  // namespace hsfuse
