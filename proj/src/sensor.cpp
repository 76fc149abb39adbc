#include "hsfuse/sensor.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace hsfuse {

namespace {

constexpr double kKernelSumTol = 1e-12;

int mirror_index(long i, int n) {
    const long period = 2L * n;
    long m = i % period;
    if (m < 0) m += period;
    if (m >= n) m = period - 1 - m;
    return static_cast<int>(m);
}

}  // namespace

BlurKernel::BlurKernel() : taps_{1.0} {}

BlurKernel::BlurKernel(std::vector<double> taps) : taps_(std::move(taps)) {
    if (taps_.empty() || taps_.size() % 2 == 0) throw std::invalid_argument("blur kernel must have odd length");
    double sum = 0.0;
    for (double t : taps_) {
        if (!std::isfinite(t) || t < 0.0) throw std::invalid_argument("blur kernel taps must be finite and nonnegative");
        sum += t;
    }
    if (std::abs(sum - 1.0) > kKernelSumTol) throw std::invalid_argument("blur kernel taps must sum to 1");
    const std::size_t n = taps_.size();
    for (std::size_t i = 0; i < n / 2; ++i)
        if (std::abs(taps_[i] - taps_[n - 1 - i]) > 1e-12) throw std::invalid_argument("blur kernel must be symmetric");
}

double mtf_sigma(int ratio, double gnyq) {
    if (!(gnyq > 0.0 && gnyq < 1.0)) throw std::invalid_argument("gnyq must lie in (0, 1)");
    if (ratio < 1) throw std::invalid_argument("ratio must be >= 1");
    // Continuous Gaussian response exp(-sigma^2 w^2 / 2) equals gnyq at w = pi / ratio.
    return static_cast<double>(ratio) * std::sqrt(-2.0 * std::log(gnyq)) / std::numbers::pi;
}

BlurKernel kernel_from_mtf(int ratio, double gnyq) {
    const double sigma = mtf_sigma(ratio, gnyq);
    const int half = static_cast<int>(std::ceil(4.0 * sigma));
    std::vector<double> taps(2 * half + 1);
    double sum = 0.0;
    for (int i = -half; i <= half; ++i) {
        const double v = sigma > 0.0 ? std::exp(-0.5 * i * i / (sigma * sigma)) : (i == 0 ? 1.0 : 0.0);
        taps[i + half] = v;
        sum += v;
    }
    for (double& t : taps) t /= sum;
    // Exact symmetry after rounding.
    for (int i = 0; i < half; ++i) taps[2 * half - i] = taps[i];
    double total = 0.0;
    for (int i = 0; i < 2 * half + 1; ++i)
        if (i != half) total += taps[i];
    taps[half] = 1.0 - total;
    return BlurKernel(std::move(taps));
}

void SensorModel::validate(int hs_bands) const {
    if (ratio < 1) throw std::invalid_argument("sensor ratio must be >= 1");
    if (phase < 0 || phase >= ratio) throw std::invalid_argument("decimation phase must lie in [0, ratio)");
    if (spectral_response.cols() != hs_bands)
        throw std::invalid_argument("spectral response has " + std::to_string(spectral_response.cols()) +
                                    " columns, expected " + std::to_string(hs_bands));
    if ((spectral_response.array() < 0.0).any()) throw std::invalid_argument("spectral response must be nonnegative");
    for (Eigen::Index r = 0; r < spectral_response.rows(); ++r)
        if (std::abs(spectral_response.row(r).sum() - 1.0) > 1e-9)
            throw std::invalid_argument("spectral response rows must sum to 1");
    if (!hs_noise_std.empty() && static_cast<int>(hs_noise_std.size()) != hs_bands)
        throw std::invalid_argument("hs_noise_std must have one entry per band");
    for (double s : hs_noise_std)
        if (s < 0.0) throw std::invalid_argument("noise std must be nonnegative");
    if (pan_noise_std < 0.0) throw std::invalid_argument("noise std must be nonnegative");
}

Matrix axis_operator(int n, std::span<const double> taps, int ratio, int phase) {
    if (ratio < 1) throw std::invalid_argument("ratio must be >= 1");
    if (n % ratio != 0)
        throw std::invalid_argument("dimension " + std::to_string(n) + " not divisible by ratio " +
                                    std::to_string(ratio));
    if (phase < 0 || phase >= ratio) throw std::invalid_argument("decimation phase must lie in [0, ratio)");
    if (taps.size() % 2 == 0) throw std::invalid_argument("tap pattern must have odd length");
    const int m = n / ratio;
    const int half = static_cast<int>(taps.size() / 2);
    Matrix op = Matrix::Zero(m, n);
    for (int o = 0; o < m; ++o) {
        const long centre = static_cast<long>(o) * ratio + phase;
        for (int t = -half; t <= half; ++t) op(o, mirror_index(centre + t, n)) += taps[t + half];
    }
    return op;
}

Matrix axis_operator(int n, const BlurKernel& kernel, int ratio, int phase) {
    return axis_operator(n, std::span<const double>(kernel.taps()), ratio, phase);
}

Matrix apply_separable(const Matrix& samples, int height, int width, const Matrix& rows, const Matrix& cols) {
    using RowGrid = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    using Strided = Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>;
    if (rows.cols() != height || cols.cols() != width || samples.cols() != static_cast<Eigen::Index>(height) * width)
        throw std::invalid_argument("separable operator does not match image grid");
    const auto k = samples.rows();
    const auto out_h = rows.rows();
    const auto out_w = cols.rows();
    Matrix out(k, out_h * out_w);
    for (Eigen::Index b = 0; b < k; ++b) {
        Eigen::Map<const RowGrid, 0, Strided> grid(samples.data() + b, height, width, Strided(width * k, k));
        Eigen::Map<RowGrid, 0, Strided> dst(out.data() + b, out_h, out_w, Strided(out_w * k, k));
        dst.noalias() = rows * grid * cols.transpose();
    }
    return out;
}

SpectralImage apply_separable(const SpectralImage& img, const Matrix& rows, const Matrix& cols) {
    Matrix out = apply_separable(img.data(), img.height(), img.width(), rows, cols);
    return SpectralImage(static_cast<int>(rows.rows()), static_cast<int>(cols.rows()), std::move(out),
                         img.wavelengths());
}

SpatialDegradation::SpatialDegradation(int height, int width, const BlurKernel& kernel, int ratio, int phase)
    : height_(height),
      width_(width),
      rows_(axis_operator(height, kernel, ratio, phase)),
      cols_(axis_operator(width, kernel, ratio, phase)) {}

Matrix SpatialDegradation::apply(const Matrix& fine) const {
    return apply_separable(fine, height_, width_, rows_, cols_);
}

Matrix SpatialDegradation::adjoint(const Matrix& coarse) const {
    return apply_separable(coarse, coarse_height(), coarse_width(), rows_.transpose(), cols_.transpose());
}

double SpatialDegradation::mean_gram_diagonal() const {
    return rows_.squaredNorm() * cols_.squaredNorm() / (static_cast<double>(height_) * width_);
}

SpectralImage blur(const SpectralImage& img, const BlurKernel& kernel) {
    return apply_separable(img, axis_operator(img.height(), kernel, 1, 0), axis_operator(img.width(), kernel, 1, 0));
}

SpectralImage blur_downsample(const SpectralImage& img, const BlurKernel& kernel, int ratio, int phase) {
    return apply_separable(img, axis_operator(img.height(), kernel, ratio, phase),
                           axis_operator(img.width(), kernel, ratio, phase));
}

SpectralImage blur_downsample_adjoint(const SpectralImage& coarse, const BlurKernel& kernel, int ratio, int phase,
                                      int fine_height, int fine_width) {
    const Matrix rows = axis_operator(fine_height, kernel, ratio, phase);
    const Matrix cols = axis_operator(fine_width, kernel, ratio, phase);
    if (rows.rows() != coarse.height() || cols.rows() != coarse.width())
        throw std::invalid_argument("coarse grid does not match fine grid / ratio");
    return apply_separable(coarse, rows.transpose(), cols.transpose());
}

SpectralImage synth_pan(const SpectralImage& img, std::span<const double> response_row) {
    if (static_cast<int>(response_row.size()) != img.bands())
        throw std::invalid_argument("response length " + std::to_string(response_row.size()) +
                                    " does not match band count " + std::to_string(img.bands()));
    const Eigen::Map<const RowVector> r(response_row.data(), static_cast<Eigen::Index>(response_row.size()));
    Matrix pan = r * img.data();
    return SpectralImage(img.height(), img.width(), std::move(pan));
}

SpectralImage apply_response(const SpectralImage& img, const Matrix& response) {
    if (response.cols() != img.bands()) throw std::invalid_argument("spectral response does not match band count");
    Matrix out = response * img.data();
    return SpectralImage(img.height(), img.width(), std::move(out));
}

SpectralImage add_gaussian_noise(const SpectralImage& img, std::span<const double> std_per_band, std::uint64_t seed) {
    if (static_cast<int>(std_per_band.size()) != img.bands())
        throw std::invalid_argument("need one noise std per band");
    for (double s : std_per_band)
        if (!(s >= 0.0)) throw std::invalid_argument("noise std must be nonnegative");
    Matrix data = img.data();
    for (int k = 0; k < img.bands(); ++k) {
        if (std_per_band[k] == 0.0) continue;
        std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(k)};
        std::mt19937_64 gen(seq);
        std::normal_distribution<double> noise(0.0, std_per_band[k]);
        for (Eigen::Index j = 0; j < data.cols(); ++j) data(k, j) += noise(gen);
    }
    return img.with_data(std::move(data));
}

std::vector<double> noise_std_for_snr(const SpectralImage& img, double snr_db) {
    std::vector<double> out(img.bands());
    const double factor = std::pow(10.0, -snr_db / 10.0);
    for (int k = 0; k < img.bands(); ++k) {
        const double power = img.band(k).squaredNorm() / static_cast<double>(img.pixels());
        out[k] = std::sqrt(power * factor);
    }
    return out;
}

SpectralImage drop_bands(const SpectralImage& img, const std::vector<bool>& keep_mask) {
    if (static_cast<int>(keep_mask.size()) != img.bands()) throw std::invalid_argument("band mask length mismatch");
    std::vector<int> keep;
    for (int k = 0; k < img.bands(); ++k)
        if (keep_mask[k]) keep.push_back(k);
    if (keep.empty()) throw std::invalid_argument("band mask selects no bands");
    Matrix data(static_cast<Eigen::Index>(keep.size()), img.pixels());
    std::vector<double> wl;
    for (std::size_t i = 0; i < keep.size(); ++i) {
        data.row(static_cast<Eigen::Index>(i)) = img.band(keep[i]);
        if (img.has_wavelengths()) wl.push_back(img.wavelengths()[keep[i]]);
    }
    return SpectralImage(img.height(), img.width(), std::move(data), std::move(wl));
}

RowVector default_pan_response(const SpectralImage& img) {
    const int m = img.bands();
    RowVector r = RowVector::Zero(m);
    int count = 0;
    if (img.has_wavelengths()) {
        for (int k = 0; k < m; ++k) {
            const double wl = img.wavelengths()[k];
            if (wl >= 0.48 && wl <= 0.69) {
                r[k] = 1.0;
                ++count;
            }
        }
    }
    if (count == 0) {
        count = std::max(1, m / 2);
        r.head(count).setOnes();
    }
    return r / static_cast<double>(count);
}

}  // namespace hsfuse
