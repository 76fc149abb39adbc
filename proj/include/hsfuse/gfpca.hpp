#pragma once

#include "hsfuse/image.hpp"

#include <optional>

namespace hsfuse {

struct GuidedFilterParams {
    int radius = 1;        // window is (2*radius+1)^2, clipped at the borders
    double epsilon = 0.0;  // regularization of the local slope

    void validate() const;
};

/**
 * Guided filter of a height x width grid. Each window fits input ~ a*guide + b
 * by regularized least squares; the output at a pixel averages the fits of
 * all windows covering it. Window statistics come from integral images.
 */
Matrix guided_filter(const Matrix& input, const Matrix& guide, const GuidedFilterParams& params);

/// 1-band convenience overload.
SpectralImage guided_filter(const SpectralImage& input, const SpectralImage& guide, const GuidedFilterParams& params);

/// Per-window linear coefficients (a, b) before averaging.
struct GuidedCoefficients {
    Matrix a;
    Matrix b;
};
GuidedCoefficients guided_coefficients(const Matrix& input, const Matrix& guide, const GuidedFilterParams& params);

/// sign(v) * max(|v| - tau, 0), elementwise.
Matrix soft_threshold(const Matrix& values, double tau);

/// Noise sigma from the median absolute deviation (sigma = MAD / 0.6745).
double mad_sigma(const Matrix& values);

/**
 * Guided-filter PCA fusion. The leading @p components PCs of the HS image
 * are bicubically upsampled and guided-filtered by each guide band (results
 * averaged over guide bands); the remaining PCs are soft-thresholded with
 * @p tau and bicubically upsampled. The inverse PCA gives the fused image.
 */
SpectralImage fuse_gfpca(const SpectralImage& hs, const SpectralImage& guide, int ratio, int components,
                         const GuidedFilterParams& params, double tau);

struct GfpcaOptions {
    std::optional<int> components;  // default: 99.5% variance, at most 10
    std::optional<int> radius;      // default: ratio
    std::optional<double> epsilon;  // default: 1e-4 * (guide range)^2
    std::optional<double> tau;      // default: MAD noise estimate of the discarded PCs
};

SpectralImage fuse_gfpca(const SpectralImage& hs, const SpectralImage& guide, int ratio,
                         const GfpcaOptions& options = {});

}  // namespace hsfuse
