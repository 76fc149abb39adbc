#pragma once

#include "hsfuse/image.hpp"

#include <vector>

namespace hsfuse {

/// Mean over bands of the Pearson correlation. Throws on a zero-variance band.
double cc(const SpectralImage& estimate, const SpectralImage& reference);

/// Mean spectral angle in degrees. Throws on a zero spectrum.
double sam(const SpectralImage& estimate, const SpectralImage& reference);

/// ||Xhat - X||_F / sqrt(n m).
double rmse(const SpectralImage& estimate, const SpectralImage& reference);

std::vector<double> rmse_per_band(const SpectralImage& estimate, const SpectralImage& reference);

/// Per-pixel l2 error across bands divided by sqrt(bands), as a 1-band image.
SpectralImage rmse_map(const SpectralImage& estimate, const SpectralImage& reference);

/// 100 d sqrt(mean_k (RMSE_k / mean_k)^2); d = PAN resolution / HS resolution. Throws on a zero band mean.
double ergas(const SpectralImage& estimate, const SpectralImage& reference, double d);

struct QualityReport {
    double cc = 0.0;
    double sam_deg = 0.0;
    double rmse = 0.0;
    double ergas = 0.0;
    std::vector<double> rmse_per_band;
    SpectralImage rmse_map;
    double wall_time_s = 0.0;
};

QualityReport evaluate(const SpectralImage& estimate, const SpectralImage& reference, double d);

}  // namespace hsfuse
