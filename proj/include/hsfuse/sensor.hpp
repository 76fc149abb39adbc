#pragma once

#include "hsfuse/image.hpp"

#include <cstdint>
#include <string_view>
#include <vector>

namespace hsfuse {

/// Separable, symmetric, odd-length blur kernel normalized to unit sum.
class BlurKernel {
public:
    BlurKernel();  // unit impulse
    explicit BlurKernel(std::vector<double> taps);

    static BlurKernel impulse() { return BlurKernel(); }

    const std::vector<double>& taps() const { return taps_; }
    int radius() const { return static_cast<int>(taps_.size() / 2); }
    int size() const { return static_cast<int>(taps_.size()); }

    friend bool operator==(const BlurKernel&, const BlurKernel&) = default;

private:
    std::vector<double> taps_;
};

/**
 * Gaussian kernel whose frequency response equals @p gnyq at the Nyquist
 * frequency of the grid decimated by @p ratio (omega = pi/ratio).
 * Truncated at +-ceil(4 sigma) and renormalized.
 */
BlurKernel kernel_from_mtf(int ratio, double gnyq);

/// Gaussian standard deviation (in fine-grid pixels) used by kernel_from_mtf.
double mtf_sigma(int ratio, double gnyq);

inline constexpr double kDefaultGnyq = 0.3;

/// Default decimation phase: centre of each ratio x ratio cell.
inline int default_phase(int ratio) { return ratio / 2; }

/**
 * Observation model linking a reference image to its HS and PAN/MS
 * observations: spatial blur + decimation for the HS sensor, spectral
 * response rows for the high resolution sensor, and Gaussian noise levels.
 */
struct SensorModel {
    int ratio = 5;
    int phase = 2;
    BlurKernel blur;
    Matrix spectral_response;          // n_lambda x m_lambda, rows nonnegative and summing to 1
    std::vector<double> hs_noise_std;  // per HS band; empty means noiseless
    double pan_noise_std = 0.0;

    /// Throws std::invalid_argument when an invariant is violated.
    void validate(int hs_bands) const;
};

/**
 * 1-D "filter then keep every ratio-th sample" operator on an axis of
 * length n, as a dense (n/ratio) x n matrix. Boundaries use half-sample
 * symmetric (mirror) extension.
 */
Matrix axis_operator(int n, const BlurKernel& kernel, int ratio, int phase);

/// Same as above for an arbitrary (unnormalized) tap pattern.
Matrix axis_operator(int n, std::span<const double> taps, int ratio, int phase);

/// out_k = rows * grid(band_k) * cols^T for every row of a k x (h*w) sample matrix.
Matrix apply_separable(const Matrix& samples, int height, int width, const Matrix& rows, const Matrix& cols);

/// Applies out_k = rows * band_k * cols^T to every band.
SpectralImage apply_separable(const SpectralImage& img, const Matrix& rows, const Matrix& cols);

/**
 * Blur + decimation (mirror boundaries) on a fixed fine grid, acting on
 * k x pixels sample matrices, together with its adjoint.
 */
class SpatialDegradation {
public:
    SpatialDegradation(int height, int width, const BlurKernel& kernel, int ratio, int phase);

    Matrix apply(const Matrix& fine) const;
    Matrix adjoint(const Matrix& coarse) const;

    int fine_height() const { return height_; }
    int fine_width() const { return width_; }
    int coarse_height() const { return static_cast<int>(rows_.rows()); }
    int coarse_width() const { return static_cast<int>(cols_.rows()); }

    /// Mean of the diagonal of apply^T apply (used for preconditioning).
    double mean_gram_diagonal() const;

private:
    int height_;
    int width_;
    Matrix rows_;
    Matrix cols_;
};

/// Separable blur without decimation.
SpectralImage blur(const SpectralImage& img, const BlurKernel& kernel);

/// Blur every band then keep pixels at indices == phase (mod ratio) on both axes.
SpectralImage blur_downsample(const SpectralImage& img, const BlurKernel& kernel, int ratio, int phase);

/// Adjoint of blur_downsample for a fine grid of the given size.
SpectralImage blur_downsample_adjoint(const SpectralImage& coarse, const BlurKernel& kernel, int ratio,
                                      int phase, int fine_height, int fine_width);

/// P = r^T X for a single response row.
SpectralImage synth_pan(const SpectralImage& img, std::span<const double> response_row);

/// Applies a full n_lambda x m_lambda spectral response.
SpectralImage apply_response(const SpectralImage& img, const Matrix& response);

/**
 * Adds zero-mean Gaussian noise. Band k draws from its own generator seeded
 * with (seed, k), so results do not depend on evaluation order.
 */
SpectralImage add_gaussian_noise(const SpectralImage& img, std::span<const double> std_per_band,
                                 std::uint64_t seed);

/// Noise standard deviation per band giving the requested SNR (dB) w.r.t. mean band power.
std::vector<double> noise_std_for_snr(const SpectralImage& img, double snr_db);

inline constexpr std::string_view kNoiseGenerator = "mt19937_64+seed_seq(seed,band)+normal_distribution";

SpectralImage drop_bands(const SpectralImage& img, const std::vector<bool>& keep_mask);

/**
 * Default PAN response: uniform over bands whose wavelength lies in
 * [0.48, 0.69] um, or over the first half of the bands when the image has
 * no wavelengths (or none fall in the window).
 */
RowVector default_pan_response(const SpectralImage& img);

}  // namespace hsfuse
