#include "hsfuse/gfpca.hpp"

#include "hsfuse/cs.hpp"
#include "hsfuse/resample.hpp"
#include "hsfuse/sensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace hsfuse {

namespace {

constexpr int kMaxDefaultComponents = 10;
constexpr double kDefaultVarianceShare = 0.995;

/// Sums over clipped (2r+1)^2 windows, plus the window pixel counts.
class BoxSums {
public:
    BoxSums(int h, int w, int r) : h_(h), w_(w), r_(r), table_((h + 1) * (w + 1)) {}

    Matrix sum(const Matrix& g) {
        std::fill(table_.begin(), table_.end(), 0.0);
        for (int y = 0; y < h_; ++y) {
            double row = 0.0;
            for (int x = 0; x < w_; ++x) {
                row += g(y, x);
                at(y + 1, x + 1) = at(y, x + 1) + row;
            }
        }
        Matrix out(h_, w_);
        for (int y = 0; y < h_; ++y) {
            const int y0 = std::max(0, y - r_);
            const int y1 = std::min(h_ - 1, y + r_);
            for (int x = 0; x < w_; ++x) {
                const int x0 = std::max(0, x - r_);
                const int x1 = std::min(w_ - 1, x + r_);
                out(y, x) = at(y1 + 1, x1 + 1) - at(y0, x1 + 1) - at(y1 + 1, x0) + at(y0, x0);
            }
        }
        return out;
    }

    Matrix counts() const {
        Matrix n(h_, w_);
        for (int y = 0; y < h_; ++y)
            for (int x = 0; x < w_; ++x)
                n(y, x) = static_cast<double>((std::min(h_ - 1, y + r_) - std::max(0, y - r_) + 1) *
                                              (std::min(w_ - 1, x + r_) - std::max(0, x - r_) + 1));
        return n;
    }

private:
    double& at(int y, int x) { return table_[static_cast<std::size_t>(y) * (w_ + 1) + x]; }

    int h_, w_, r_;
    std::vector<double> table_;
};

}  // namespace

void GuidedFilterParams::validate() const {
    if (radius < 1) throw std::invalid_argument("guided filter radius must be >= 1");
    if (!(epsilon >= 0.0)) throw std::invalid_argument("guided filter epsilon must be >= 0");
}

GuidedCoefficients guided_coefficients(const Matrix& input, const Matrix& guide, const GuidedFilterParams& params) {
    params.validate();
    if (input.rows() != guide.rows() || input.cols() != guide.cols())
        throw std::invalid_argument("guided filter input and guide must have the same dimensions");
    const auto h = static_cast<int>(input.rows());
    const auto w = static_cast<int>(input.cols());

    // Centring keeps the integral-image differences well conditioned.
    const Matrix g = guide.array() - guide.mean();
    const double p_mean = input.mean();
    const Matrix p = input.array() - p_mean;

    BoxSums box(h, w, params.radius);
    const Matrix n = box.counts();
    const Matrix mean_g = box.sum(g).cwiseQuotient(n);
    const Matrix mean_p = box.sum(p).cwiseQuotient(n);
    const Matrix corr_gp = box.sum(g.cwiseProduct(p)).cwiseQuotient(n);
    const Matrix corr_gg = box.sum(g.cwiseProduct(g)).cwiseQuotient(n);

    const double global_var = g.squaredNorm() / static_cast<double>(std::max<Eigen::Index>(1, g.size()));
    const double var_floor = 1e-12 * global_var;

    GuidedCoefficients c{Matrix(h, w), Matrix(h, w)};
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double var = corr_gg(y, x) - mean_g(y, x) * mean_g(y, x);
            if (var <= var_floor) var = 0.0;
            const double cov = corr_gp(y, x) - mean_g(y, x) * mean_p(y, x);
            const double denom = var + params.epsilon;
            const double a = denom > 0.0 ? cov / denom : 0.0;
            c.a(y, x) = a;
            // b expressed for the uncentred guide and input.
            c.b(y, x) = mean_p(y, x) + p_mean - a * (mean_g(y, x) + guide.mean());
        }
    }
    return c;
}

Matrix guided_filter(const Matrix& input, const Matrix& guide, const GuidedFilterParams& params) {
    const GuidedCoefficients c = guided_coefficients(input, guide, params);
    const auto h = static_cast<int>(input.rows());
    const auto w = static_cast<int>(input.cols());
    BoxSums box(h, w, params.radius);
    const Matrix n = box.counts();
    const double g_mean = guide.mean();
    // Average a around the centred guide to limit cancellation.
    const Matrix b_centred = c.b.array() + c.a.array() * g_mean;
    const Matrix mean_a = box.sum(c.a).cwiseQuotient(n);
    const Matrix mean_b = box.sum(b_centred).cwiseQuotient(n);
    return mean_a.cwiseProduct((guide.array() - g_mean).matrix()) + mean_b;
}

SpectralImage guided_filter(const SpectralImage& input, const SpectralImage& guide, const GuidedFilterParams& params) {
    if (input.bands() != 1 || guide.bands() != 1) throw std::invalid_argument("guided filter works on 1-band images");
    if (!input.same_grid(guide)) throw std::invalid_argument("guided filter input and guide must have the same dimensions");
    return single_band(guided_filter(input.band_grid(0), guide.band_grid(0), params));
}

Matrix soft_threshold(const Matrix& values, double tau) {
    if (!(tau >= 0.0)) throw std::invalid_argument("soft threshold requires tau >= 0");
    return values.unaryExpr([tau](double v) {
        const double mag = std::abs(v) - tau;
        return mag > 0.0 ? std::copysign(mag, v) : 0.0;
    });
}

double mad_sigma(const Matrix& values) {
    if (values.size() == 0) return 0.0;
    std::vector<double> v(values.data(), values.data() + values.size());
    auto median = [](std::vector<double>& xs) {
        const std::size_t mid = xs.size() / 2;
        std::nth_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(mid), xs.end());
        double med = xs[mid];
        if (xs.size() % 2 == 0) {
            med = 0.5 * (med + *std::max_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(mid)));
        }
        return med;
    };
    const double centre = median(v);
    for (double& x : v) x = std::abs(x - centre);
    return median(v) / 0.6745;
}

SpectralImage fuse_gfpca(const SpectralImage& hs, const SpectralImage& guide, int ratio, int components,
                         const GuidedFilterParams& params, double tau) {
    params.validate();
    const int m = hs.bands();
    if (components < 1 || components > m) throw std::invalid_argument("GFPCA component count must lie in [1, bands]");
    if (guide.bands() < 1) throw std::invalid_argument("GFPCA guide needs at least one band");
    if (ratio < 1 || guide.height() != hs.height() * ratio || guide.width() != hs.width() * ratio)
        throw std::invalid_argument("guide dimensions must equal HS dimensions times ratio");
    if (!(tau >= 0.0)) throw std::invalid_argument("soft threshold requires tau >= 0");

    const PcaTransform pca = PcaTransform::fit(hs.data());
    const Matrix pcs = pca.forward(hs.data());
    const SpectralImage pc_image(hs.height(), hs.width(), pcs);

    Matrix rest = pcs.bottomRows(m - components);
    if (rest.size() > 0) rest = soft_threshold(rest, tau);
    Matrix low = pcs;
    low.bottomRows(m - components) = rest;

    const SpectralImage up = upsample(pc_image.with_data(low), ratio, Interp::bicubic);
    Matrix fused_pcs = up.data();

    std::vector<Matrix> guides;
    for (int g = 0; g < guide.bands(); ++g) guides.push_back(guide.band_grid(g));

    for (int i = 0; i < components; ++i) {
        const Matrix channel = up.band_grid(i);
        Matrix acc = Matrix::Zero(channel.rows(), channel.cols());
        for (const Matrix& g : guides) acc += guided_filter(channel, g, params);
        acc /= static_cast<double>(guides.size());
        fused_pcs.row(i) = single_band(acc).band(0);
    }
    return SpectralImage(guide.height(), guide.width(), pca.inverse(fused_pcs), hs.wavelengths());
}

SpectralImage fuse_gfpca(const SpectralImage& hs, const SpectralImage& guide, int ratio, const GfpcaOptions& options) {
    int p = 0;
    std::optional<PcaTransform> pca;
    if (options.components) {
        p = *options.components;
    } else {
        pca = PcaTransform::fit(hs.data());
        p = std::min({pca->components_for(kDefaultVarianceShare), kMaxDefaultComponents, hs.bands()});
    }
    GuidedFilterParams params;
    params.radius = options.radius.value_or(ratio);
    if (options.epsilon) {
        params.epsilon = *options.epsilon;
    } else {
        const double span = guide.data().maxCoeff() - guide.data().minCoeff();
        params.epsilon = 1e-4 * span * span;
    }
    double tau = 0.0;
    if (options.tau) {
        tau = *options.tau;
    } else if (p < hs.bands()) {
        if (!pca) pca = PcaTransform::fit(hs.data());
        tau = mad_sigma(pca->forward(hs.data()).bottomRows(hs.bands() - p));
    }
    return fuse_gfpca(hs, guide, ratio, p, params, tau);
}

}  // namespace hsfuse
