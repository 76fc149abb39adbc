#pragma once

// Component-substitution fusion: X^k = Yup^k + g_k (P - O_L), O_L = sum_i w_i Yup^i.

#include "hsfuse/image.hpp"
#include "hsfuse/sensor.hpp"

namespace hsfuse {

struct CsWeights {
    Vector w;  // spectral weights forming the intensity component O_L
    Vector g;  // per-band injection gains
};

/// Affine map of @p pan giving it the mean and population variance of @p target.
/// A constant pan maps to the constant mean of the target.
SpectralImage match_moments(const SpectralImage& pan, const Eigen::Ref<const RowVector>& target);

/// Generic injection scheme on an already upsampled HS image.
SpectralImage cs_fuse(const SpectralImage& upsampled, const SpectralImage& pan, const CsWeights& weights,
                      bool match_histogram);

/// Principal components of a bands x pixels sample matrix.
class PcaTransform {
public:
    /// Throws std::runtime_error("degenerate PCA") when all pixels are identical.
    static PcaTransform fit(const Matrix& samples);

    /// Rows are components sorted by descending variance.
    const Matrix& loadings() const { return loadings_; }
    const Vector& band_means() const { return means_; }
    const Vector& variances() const { return variances_; }

    Matrix forward(const Matrix& samples) const;
    Matrix inverse(const Matrix& components) const;

    /// Smallest number of leading components whose variance share reaches @p fraction.
    int components_for(double fraction) const;

private:
    Matrix loadings_;
    Vector means_;
    Vector variances_;
};

SpectralImage fuse_pca(const SpectralImage& hs, const SpectralImage& pan, int ratio);

/// g_k = cov(Yup^k, O_L) / var(O_L). Throws when var(O_L) == 0.
Vector gs_gains(const SpectralImage& upsampled, const Eigen::Ref<const RowVector>& intensity);

SpectralImage fuse_gs(const SpectralImage& hs, const SpectralImage& pan, int ratio);

/// Least-squares weights relating the HS bands to the degraded PAN.
Vector gsa_weights(const SpectralImage& hs, const SpectralImage& pan, int ratio, const BlurKernel& blur, int phase);

SpectralImage fuse_gsa(const SpectralImage& hs, const SpectralImage& pan, int ratio, const BlurKernel& blur);

}  // namespace hsfuse
