#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace hsfuse {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

/// Valid sample interval, used to clip multiplicative-injection overshoot.
struct DynamicRange {
    double lo = 0.0;
    double hi = 1.0;

    DynamicRange() = default;
    DynamicRange(double lo_, double hi_);
    double span() const { return hi - lo; }
};

/**
 * Band-major spectral raster.
 *
 * Samples are stored as a bands x (height*width) matrix: one row per band,
 * pixels in raster-scan order (index = row*width + col). A panchromatic image
 * is a 1-band instance. Wavelengths (micrometres) are optional; when present
 * there is one per band and they are strictly increasing.
 *
 * Construction validates shape, finiteness and wavelength ordering, so every
 * SpectralImage in circulation satisfies those invariants.
 */
class SpectralImage {
public:
    SpectralImage() = default;
    SpectralImage(int height, int width, Matrix data, std::vector<double> wavelengths = {});

    /// Zero-filled image.
    static SpectralImage zeros(int height, int width, int bands);
    static SpectralImage from_matrix(int height, int width, Matrix data,
                                     std::vector<double> wavelengths = {}) {
        return SpectralImage(height, width, std::move(data), std::move(wavelengths));
    }

    int height() const { return height_; }
    int width() const { return width_; }
    int bands() const { return static_cast<int>(data_.rows()); }
    Eigen::Index pixels() const { return data_.cols(); }

    const Matrix& data() const { return data_; }
    const std::vector<double>& wavelengths() const { return wavelengths_; }
    bool has_wavelengths() const { return !wavelengths_.empty(); }

    /// Band k as a row view.
    auto band(int k) const { return data_.row(k); }
    double at(int band, int row, int col) const { return data_(band, static_cast<Eigen::Index>(row) * width_ + col); }

    /// Band k reshaped to a height x width matrix (copy).
    Matrix band_grid(int k) const;

    /// Same geometry and wavelengths, new samples.
    SpectralImage with_data(Matrix data) const;

    bool same_grid(const SpectralImage& other) const {
        return height_ == other.height_ && width_ == other.width_;
    }

    friend bool operator==(const SpectralImage& a, const SpectralImage& b) {
        return a.height_ == b.height_ && a.width_ == b.width_ && a.wavelengths_ == b.wavelengths_ &&
               a.data_.rows() == b.data_.rows() && a.data_ == b.data_;
    }

private:
    int height_ = 0;
    int width_ = 0;
    Matrix data_;
    std::vector<double> wavelengths_;
};

/// Read-only bands x pixels view of the stored samples.
inline const Matrix& as_matrix(const SpectralImage& img) { return img.data(); }

/// Builds an image from a height x width grid (one band).
SpectralImage single_band(const Matrix& grid);

SpectralImage clip_to_range(const SpectralImage& img, const DynamicRange& range);

struct BandStats {
    double mean = 0.0;
    double variance = 0.0;  // population (1/n)
};

/// True when the spread is at rounding level relative to the mean (a constant band up to round-off).
inline bool is_flat(const BandStats& s) { return s.variance <= 1e-24 * s.mean * s.mean; }

/// Mean and population variance of band k. Throws std::out_of_range.
BandStats band_stats(const SpectralImage& img, int k);

/// Mean and population variance of an arbitrary sample row.
BandStats row_stats(const Eigen::Ref<const RowVector>& row);

/// Population covariance of two equally sized rows.
double row_covariance(const Eigen::Ref<const RowVector>& a, const Eigen::Ref<const RowVector>& b);

}  // namespace hsfuse
