#include "hsfuse/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace hsfuse {

namespace {

void check_same_shape(const SpectralImage& a, const SpectralImage& b) {
    if (!a.same_grid(b) || a.bands() != b.bands())
        throw std::invalid_argument("images differ in shape: " + std::to_string(a.bands()) + "x" +
                                    std::to_string(a.height()) + "x" + std::to_string(a.width()) + " vs " +
                                    std::to_string(b.bands()) + "x" + std::to_string(b.height()) + "x" +
                                    std::to_string(b.width()));
    if (a.pixels() == 0 || a.bands() == 0) throw std::invalid_argument("metrics need non-empty images");
}

}  // namespace

double cc(const SpectralImage& estimate, const SpectralImage& reference) {
    check_same_shape(estimate, reference);
    double total = 0.0;
    for (int k = 0; k < reference.bands(); ++k) {
        const RowVector a = estimate.band(k).array() - estimate.band(k).mean();
        const RowVector b = reference.band(k).array() - reference.band(k).mean();
        const double saa = a.squaredNorm();
        const double sbb = b.squaredNorm();
        if (saa == 0.0 || sbb == 0.0) throw std::domain_error("undefined correlation: band " + std::to_string(k) + " is constant");
        total += a.dot(b) / std::sqrt(saa * sbb);
    }
    return total / reference.bands();
}

double sam(const SpectralImage& estimate, const SpectralImage& reference) {
    check_same_shape(estimate, reference);
    const Matrix& a = estimate.data();
    const Matrix& b = reference.data();
    double total = 0.0;
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
        const double na = a.col(j).norm();
        const double nb = b.col(j).norm();
        if (na == 0.0 || nb == 0.0) throw std::domain_error("spectral angle undefined: zero spectrum at pixel " + std::to_string(j));
        // Same angle as acos of the normalized inner product, without its loss of precision near 0.
        const Vector ua = a.col(j) / na;
        const Vector ub = b.col(j) / nb;
        total += 2.0 * std::atan2((ua - ub).norm(), (ua + ub).norm());
    }
    return total / static_cast<double>(a.cols()) * 180.0 / std::numbers::pi;
}

double rmse(const SpectralImage& estimate, const SpectralImage& reference) {
    check_same_shape(estimate, reference);
    return (estimate.data() - reference.data()).norm() / std::sqrt(static_cast<double>(reference.data().size()));
}

std::vector<double> rmse_per_band(const SpectralImage& estimate, const SpectralImage& reference) {
    check_same_shape(estimate, reference);
    std::vector<double> out(static_cast<std::size_t>(reference.bands()));
    for (int k = 0; k < reference.bands(); ++k)
        out[static_cast<std::size_t>(k)] =
            (estimate.band(k) - reference.band(k)).norm() / std::sqrt(static_cast<double>(reference.pixels()));
    return out;
}

SpectralImage rmse_map(const SpectralImage& estimate, const SpectralImage& reference) {
    check_same_shape(estimate, reference);
    const RowVector err =
        (estimate.data() - reference.data()).colwise().norm() / std::sqrt(static_cast<double>(reference.bands()));
    return SpectralImage(reference.height(), reference.width(), Matrix(err));
}

double ergas(const SpectralImage& estimate, const SpectralImage& reference, double d) {
    const std::vector<double> per_band = rmse_per_band(estimate, reference);
    double acc = 0.0;
    for (int k = 0; k < reference.bands(); ++k) {
        const double mu = reference.band(k).mean();
        if (mu == 0.0) throw std::domain_error("ERGAS undefined: band " + std::to_string(k) + " has zero mean");
        const double ratio = per_band[static_cast<std::size_t>(k)] / mu;
        acc += ratio * ratio;
    }
    return 100.0 * d * std::sqrt(acc / reference.bands());
}

QualityReport evaluate(const SpectralImage& estimate, const SpectralImage& reference, double d) {
    QualityReport r;
    r.cc = cc(estimate, reference);
    r.sam_deg = sam(estimate, reference);
    r.rmse = rmse(estimate, reference);
    r.ergas = ergas(estimate, reference, d);
    r.rmse_per_band = rmse_per_band(estimate, reference);
    r.rmse_map = rmse_map(estimate, reference);
    return r;
}

}  // namespace hsfuse
