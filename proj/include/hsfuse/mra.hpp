#pragma once

// Multiresolution-analysis fusion: X^k = Yup^k + G_k (x) (P - P_L).

#include "hsfuse/image.hpp"
#include "hsfuse/sensor.hpp"

namespace hsfuse {

enum class InjectionGains { additive, hpm };

/**
 * Detail injection. @p pan and @p pan_low are either 1-band (shared by all
 * bands) or carry one equalized band per HS band. HPM gains are guarded
 * against a vanishing low-pass (gain falls back to 1) and the result is
 * clipped to @p range.
 */
SpectralImage mra_fuse(const SpectralImage& upsampled, const SpectralImage& pan, const SpectralImage& pan_low,
                       InjectionGains gains, const DynamicRange& range);

/// Normalized (2*radius+1)^2 box filter with mirror boundaries.
SpectralImage box_lowpass(const SpectralImage& img, int radius);

/// MTF-matched Gaussian, decimate by ratio, bicubic re-expansion.
SpectralImage glp_lowpass(const SpectralImage& pan, int ratio, double gnyq);

/// Per-band equalization of a PAN/low-pass pair to the upsampled HS statistics.
struct EqualizedPan {
    SpectralImage pan;
    SpectralImage pan_low;
};

/// P_eq^k = (P - mean P) * std(Yup^k) / std(ref) + mean(Yup^k), with the same
/// affine map applied to the low-pass. @p scale_ref selects the std used.
EqualizedPan equalize_pan(const SpectralImage& pan, const SpectralImage& pan_low, const SpectralImage& upsampled,
                          const SpectralImage& scale_ref);

SpectralImage fuse_sfim(const SpectralImage& hs, const SpectralImage& pan, int ratio, const DynamicRange& range);
SpectralImage fuse_mtf_glp(const SpectralImage& hs, const SpectralImage& pan, int ratio, double gnyq,
                           const DynamicRange& range);
SpectralImage fuse_mtf_glp_hpm(const SpectralImage& hs, const SpectralImage& pan, int ratio, double gnyq,
                               const DynamicRange& range);

}  // namespace hsfuse
