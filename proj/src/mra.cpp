#include "hsfuse/mra.hpp"

#include "hsfuse/resample.hpp"

#include <cmath>
#include <stdexcept>

namespace hsfuse {

namespace {

constexpr double kHpmGuard = 1e-8;

void check_pan_grid(const SpectralImage& hs, const SpectralImage& pan, int ratio) {
    if (pan.bands() != 1) throw std::invalid_argument("PAN image must have exactly one band");
    if (ratio < 1 || pan.height() != hs.height() * ratio || pan.width() != hs.width() * ratio)
        throw std::invalid_argument("PAN dimensions must equal HS dimensions times ratio");
}

SpectralImage fuse_glp(const SpectralImage& hs, const SpectralImage& pan, int ratio, double gnyq,
                       InjectionGains gains, const DynamicRange& range) {
    check_pan_grid(hs, pan, ratio);
    const SpectralImage up = upsample(hs, ratio, Interp::bicubic);
    const SpectralImage low = glp_lowpass(pan, ratio, gnyq);
    const EqualizedPan eq = equalize_pan(pan, low, up, low);
    return mra_fuse(up, eq.pan, eq.pan_low, gains, range);
}

}  // namespace

SpectralImage mra_fuse(const SpectralImage& upsampled, const SpectralImage& pan, const SpectralImage& pan_low,
                       InjectionGains gains, const DynamicRange& range) {
    const int m = upsampled.bands();
    if (!upsampled.same_grid(pan) || !upsampled.same_grid(pan_low))
        throw std::invalid_argument("mra_fuse: all images must share the PAN grid");
    if ((pan.bands() != 1 && pan.bands() != m) || pan_low.bands() != pan.bands())
        throw std::invalid_argument("mra_fuse: PAN and low-pass must be 1-band or one band per HS band");

    Matrix fused = upsampled.data();
    const double guard = kHpmGuard * range.span();
    for (int k = 0; k < m; ++k) {
        const int src = pan.bands() == 1 ? 0 : k;
        const auto p = pan.band(src);
        const auto pl = pan_low.band(src);
        if (gains == InjectionGains::additive) {
            fused.row(k) += p - pl;
        } else {
            for (Eigen::Index j = 0; j < fused.cols(); ++j) {
                const double gain = std::abs(pl[j]) < guard ? 1.0 : upsampled.data()(k, j) / pl[j];
                fused(k, j) += gain * (p[j] - pl[j]);
            }
        }
    }
    SpectralImage out = upsampled.with_data(std::move(fused));
    return gains == InjectionGains::hpm ? clip_to_range(out, range) : out;
}

SpectralImage box_lowpass(const SpectralImage& img, int radius) {
    if (radius < 0) throw std::invalid_argument("box radius must be >= 0");
    const int size = 2 * radius + 1;
    return blur(img, BlurKernel(std::vector<double>(size, 1.0 / size)));
}

SpectralImage glp_lowpass(const SpectralImage& pan, int ratio, double gnyq) {
    if (ratio == 1) return blur(pan, kernel_from_mtf(1, gnyq));
    const int phase = default_phase(ratio);
    const SpectralImage coarse = blur_downsample(pan, kernel_from_mtf(ratio, gnyq), ratio, phase);
    return upsample(coarse, ratio, Interp::bicubic, phase);
}

EqualizedPan equalize_pan(const SpectralImage& pan, const SpectralImage& pan_low, const SpectralImage& upsampled,
                          const SpectralImage& scale_ref) {
    const int m = upsampled.bands();
    const BandStats ps = row_stats(pan.band(0));
    const BandStats rs = row_stats(scale_ref.band(0));
    const double ref_std = is_flat(rs) ? 0.0 : std::sqrt(rs.variance);
    Matrix eq(m, pan.pixels());
    Matrix eq_low(m, pan.pixels());
    for (int k = 0; k < m; ++k) {
        const BandStats bs = row_stats(upsampled.band(k));
        const double a = ref_std > 0.0 ? std::sqrt(bs.variance) / ref_std : 0.0;
        eq.row(k) = ((pan.band(0).array() - ps.mean) * a + bs.mean).matrix();
        eq_low.row(k) = ((pan_low.band(0).array() - ps.mean) * a + bs.mean).matrix();
    }
    return {SpectralImage(pan.height(), pan.width(), std::move(eq)),
            SpectralImage(pan.height(), pan.width(), std::move(eq_low))};
}

SpectralImage fuse_sfim(const SpectralImage& hs, const SpectralImage& pan, int ratio, const DynamicRange& range) {
    check_pan_grid(hs, pan, ratio);
    const SpectralImage up = upsample(hs, ratio, Interp::bicubic);
    const SpectralImage low = box_lowpass(pan, ratio);
    const EqualizedPan eq = equalize_pan(pan, low, up, pan);
    return mra_fuse(up, eq.pan, eq.pan_low, InjectionGains::hpm, range);
}

SpectralImage fuse_mtf_glp(const SpectralImage& hs, const SpectralImage& pan, int ratio, double gnyq,
                           const DynamicRange& range) {
    return fuse_glp(hs, pan, ratio, gnyq, InjectionGains::additive, range);
}

SpectralImage fuse_mtf_glp_hpm(const SpectralImage& hs, const SpectralImage& pan, int ratio, double gnyq,
                               const DynamicRange& range) {
    return fuse_glp(hs, pan, ratio, gnyq, InjectionGains::hpm, range);
}

}  // namespace hsfuse
