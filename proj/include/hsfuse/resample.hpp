#pragma once

#include "hsfuse/image.hpp"

#include <string_view>

namespace hsfuse {

enum class Interp { bilinear, bicubic };

/// Parses "bilinear" / "bicubic"; throws std::invalid_argument otherwise.
Interp parse_interp(std::string_view name);

/**
 * Interpolation matrix for one axis: n_in*ratio x n_in. Coarse sample i sits
 * on fine index i*ratio + phase; samples outside the coarse grid are obtained
 * by mirror extension. Bicubic uses the Catmull-Rom kernel (a = -0.5).
 */
Matrix interp_axis(int n_in, int ratio, int phase, Interp method);

/// Upsamples every band by an integer ratio, aligned with the default decimation phase.
SpectralImage upsample(const SpectralImage& img, int ratio, Interp method);
SpectralImage upsample(const SpectralImage& img, int ratio, Interp method, int phase);

}  // namespace hsfuse
