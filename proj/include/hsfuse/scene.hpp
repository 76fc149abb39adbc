#pragma once

#include "hsfuse/image.hpp"

#include <cstdint>

namespace hsfuse {

struct SyntheticScene {
    SpectralImage image;  // X = H0 U0
    Matrix endmembers;    // bands x p
    Matrix abundances;    // p x pixels, columns on the simplex
};

/**
 * Linear-mixing scene on a 0.4-2.5 um axis. Spectra are sums of random
 * Gaussian bumps over a small baseline; abundances are a softmax of smooth
 * random fields, with one square pure patch per endmember placed at the
 * corners, then edge midpoints, then the centre (so p <= 9).
 */
SyntheticScene synth_scene(std::uint64_t seed, int p, int height, int width, int bands);

/// Band centres spread evenly over [0.4, 2.5] um.
std::vector<double> scene_wavelengths(int bands);

}  // namespace hsfuse
