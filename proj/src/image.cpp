#include "hsfuse/image.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace hsfuse {

DynamicRange::DynamicRange(double lo_, double hi_) : lo(lo_), hi(hi_) {
    if (!(lo < hi)) throw std::invalid_argument("dynamic range requires lo < hi");
}

SpectralImage::SpectralImage(int height, int width, Matrix data, std::vector<double> wavelengths)
    : height_(height), width_(width), data_(std::move(data)), wavelengths_(std::move(wavelengths)) {
    if (height < 0 || width < 0) throw std::invalid_argument("negative image dimensions");
    if (data_.cols() != static_cast<Eigen::Index>(height) * width)
        throw std::invalid_argument("sample matrix has " + std::to_string(data_.cols()) +
                                    " columns, expected height*width = " +
                                    std::to_string(static_cast<long long>(height) * width));
    if (!wavelengths_.empty()) {
        if (static_cast<Eigen::Index>(wavelengths_.size()) != data_.rows())
            throw std::invalid_argument("wavelength count does not match band count");
        for (std::size_t i = 1; i < wavelengths_.size(); ++i)
            if (!(wavelengths_[i] > wavelengths_[i - 1]))
                throw std::invalid_argument("wavelengths must be strictly increasing");
    }
    if (!data_.allFinite()) throw std::invalid_argument("image contains non-finite samples");
}

SpectralImage SpectralImage::zeros(int height, int width, int bands) {
    return SpectralImage(height, width, Matrix::Zero(bands, static_cast<Eigen::Index>(height) * width));
}

Matrix SpectralImage::band_grid(int k) const {
    Matrix grid(height_, width_);
    for (int r = 0; r < height_; ++r)
        for (int c = 0; c < width_; ++c) grid(r, c) = data_(k, static_cast<Eigen::Index>(r) * width_ + c);
    return grid;
}

SpectralImage SpectralImage::with_data(Matrix data) const {
    auto wl = static_cast<Eigen::Index>(wavelengths_.size()) == data.rows() ? wavelengths_ : std::vector<double>{};
    return SpectralImage(height_, width_, std::move(data), std::move(wl));
}

SpectralImage single_band(const Matrix& grid) {
    const auto h = static_cast<int>(grid.rows());
    const auto w = static_cast<int>(grid.cols());
    Matrix data(1, static_cast<Eigen::Index>(h) * w);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) data(0, static_cast<Eigen::Index>(r) * w + c) = grid(r, c);
    return SpectralImage(h, w, std::move(data));
}

SpectralImage clip_to_range(const SpectralImage& img, const DynamicRange& range) {
    return img.with_data(img.data().cwiseMax(range.lo).cwiseMin(range.hi));
}

BandStats row_stats(const Eigen::Ref<const RowVector>& row) {
    const auto n = row.size();
    if (n == 0) throw std::invalid_argument("statistics of an empty band");
    if (row.minCoeff() == row.maxCoeff()) return {row[0], 0.0};
    const double mean = row.sum() / static_cast<double>(n);
    const double var = (row.array() - mean).square().sum() / static_cast<double>(n);
    return {mean, var};
}

double row_covariance(const Eigen::Ref<const RowVector>& a, const Eigen::Ref<const RowVector>& b) {
    if (a.size() != b.size() || a.size() == 0) throw std::invalid_argument("covariance of mismatched rows");
    const double n = static_cast<double>(a.size());
    const double ma = a.sum() / n;
    const double mb = b.sum() / n;
    return ((a.array() - ma) * (b.array() - mb)).sum() / n;
}

BandStats band_stats(const SpectralImage& img, int k) {
    if (k < 0 || k >= img.bands())
        throw std::out_of_range("band index " + std::to_string(k) + " out of range [0, " +
                                std::to_string(img.bands()) + ")");
    return row_stats(img.band(k));
}

}  // namespace hsfuse
