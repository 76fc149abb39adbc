#include "hsfuse/cs.hpp"

#include "hsfuse/resample.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace hsfuse {

namespace {

void check_pan_grid(const SpectralImage& hs, const SpectralImage& pan, int ratio) {
    if (pan.bands() != 1) throw std::invalid_argument("PAN image must have exactly one band");
    if (ratio < 1 || pan.height() != hs.height() * ratio || pan.width() != hs.width() * ratio)
        throw std::invalid_argument("PAN dimensions must equal HS dimensions times ratio");
}

}  // namespace

SpectralImage match_moments(const SpectralImage& pan, const Eigen::Ref<const RowVector>& target) {
    if (pan.bands() != 1 || pan.pixels() != target.size())
        throw std::invalid_argument("histogram matching needs a 1-band image of the target size");
    const BandStats src = row_stats(pan.band(0));
    const BandStats dst = row_stats(target);
    Matrix out(1, pan.pixels());
    if (!is_flat(src)) {
        const double scale = std::sqrt(dst.variance / src.variance);
        out.row(0) = ((pan.band(0).array() - src.mean) * scale + dst.mean).matrix();
    } else {
        out.setConstant(dst.mean);
    }
    return pan.with_data(std::move(out));
}

SpectralImage cs_fuse(const SpectralImage& upsampled, const SpectralImage& pan, const CsWeights& weights,
                      bool match_histogram) {
    const int m = upsampled.bands();
    if (!upsampled.same_grid(pan) || pan.bands() != 1)
        throw std::invalid_argument("cs_fuse: upsampled HS and PAN must share one grid, PAN must be 1-band");
    if (weights.w.size() != m || weights.g.size() != m)
        throw std::invalid_argument("cs_fuse: weights and gains must have one entry per band");
    if (!weights.w.allFinite() || !weights.g.allFinite()) throw std::invalid_argument("cs_fuse: non-finite weights");

    const RowVector intensity = weights.w.transpose() * upsampled.data();
    const RowVector detail =
        (match_histogram ? match_moments(pan, intensity).band(0) : pan.band(0)) - intensity;
    Matrix fused = upsampled.data() + weights.g * detail;
    return upsampled.with_data(std::move(fused));
}

PcaTransform PcaTransform::fit(const Matrix& samples) {
    const auto m = samples.rows();
    const auto n = samples.cols();
    if (m == 0 || n == 0) throw std::invalid_argument("PCA of empty data");
    PcaTransform t;
    t.means_ = samples.rowwise().mean();
    const Matrix centred = samples.colwise() - t.means_;
    const Matrix cov = centred * centred.transpose() / static_cast<double>(n);

    Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
    if (eig.info() != Eigen::Success) throw std::runtime_error("degenerate PCA");
    const Vector& values = eig.eigenvalues();  // ascending
    const double scale = samples.cwiseAbs().maxCoeff();
    if (!(values[m - 1] > 1e-24 * scale * scale) || values[m - 1] == 0.0) throw std::runtime_error("degenerate PCA");

    t.loadings_.resize(m, m);
    t.variances_.resize(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        RowVector row = eig.eigenvectors().col(m - 1 - i).transpose();
        Eigen::Index big = 0;
        row.cwiseAbs().maxCoeff(&big);
        if (row[big] < 0.0) row = -row;
        t.loadings_.row(i) = row;
        t.variances_[i] = std::max(0.0, values[m - 1 - i]);
    }
    return t;
}

Matrix PcaTransform::forward(const Matrix& samples) const {
    return loadings_ * (samples.colwise() - means_);
}

Matrix PcaTransform::inverse(const Matrix& components) const {
    return (loadings_.transpose() * components).colwise() + means_;
}

int PcaTransform::components_for(double fraction) const {
    const double total = variances_.sum();
    if (total <= 0.0) return 1;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < variances_.size(); ++i) {
        acc += variances_[i];
        if (acc >= fraction * total) return static_cast<int>(i + 1);
    }
    return static_cast<int>(variances_.size());
}

SpectralImage fuse_pca(const SpectralImage& hs, const SpectralImage& pan, int ratio) {
    check_pan_grid(hs, pan, ratio);
    const SpectralImage up = upsample(hs, ratio, Interp::bicubic);
    const PcaTransform pca = PcaTransform::fit(up.data());
    // Replacing PC1 by the matched PAN and inverting is the injection scheme with
    // w = g = first loading row.
    const Vector first = pca.loadings().row(0).transpose();
    return cs_fuse(up, pan, CsWeights{first, first}, true);
}

Vector gs_gains(const SpectralImage& upsampled, const Eigen::Ref<const RowVector>& intensity) {
    const double var = row_stats(intensity).variance;
    if (!(var > 0.0)) throw std::runtime_error("intensity component has zero variance");
    Vector g(upsampled.bands());
    for (int k = 0; k < upsampled.bands(); ++k) g[k] = row_covariance(upsampled.band(k), intensity) / var;
    return g;
}

SpectralImage fuse_gs(const SpectralImage& hs, const SpectralImage& pan, int ratio) {
    check_pan_grid(hs, pan, ratio);
    const SpectralImage up = upsample(hs, ratio, Interp::bicubic);
    const Vector w = Vector::Constant(hs.bands(), 1.0 / hs.bands());
    const RowVector intensity = w.transpose() * up.data();
    return cs_fuse(up, pan, CsWeights{w, gs_gains(up, intensity)}, true);
}

Vector gsa_weights(const SpectralImage& hs, const SpectralImage& pan, int ratio, const BlurKernel& blur, int phase) {
    check_pan_grid(hs, pan, ratio);
    const SpectralImage degraded = blur_downsample(pan, blur, ratio, phase);
    const Matrix& y = hs.data();
    Matrix normal = y * y.transpose();
    const Vector rhs = y * degraded.band(0).transpose();

    Eigen::SelfAdjointEigenSolver<Matrix> eig(normal, Eigen::EigenvaluesOnly);
    const Vector& ev = eig.eigenvalues();
    if (ev[0] <= 1e-12 * std::max(ev[ev.size() - 1], 1e-300)) {
        const double ridge = 1e-8 * std::max(normal.trace() / static_cast<double>(normal.rows()), 1e-300);
        normal.diagonal().array() += ridge;
    }
    return normal.ldlt().solve(rhs);
}

SpectralImage fuse_gsa(const SpectralImage& hs, const SpectralImage& pan, int ratio, const BlurKernel& blur) {
    const Vector w = gsa_weights(hs, pan, ratio, blur, default_phase(ratio));
    const SpectralImage up = upsample(hs, ratio, Interp::bicubic);
    const RowVector intensity = w.transpose() * up.data();
    return cs_fuse(up, pan, CsWeights{w, gs_gains(up, intensity)}, true);
}

}  // namespace hsfuse
