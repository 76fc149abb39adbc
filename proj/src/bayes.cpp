#include "hsfuse/bayes.hpp"

#include "hsfuse/cs.hpp"
#include "hsfuse/resample.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace hsfuse {

namespace {

constexpr int kMaxDefaultSubspace = 10;
constexpr double kDefaultEnergyShare = 0.999;

void check_shapes(const SpectralImage& hs, const SpectralImage& ms, const SensorModel& model,
                  const SubspaceBasis& basis) {
    model.validate(hs.bands());
    if (basis.H.rows() != hs.bands() || basis.offset.size() != hs.bands())
        throw std::invalid_argument("subspace basis does not match the HS band count");
    if (ms.bands() != model.spectral_response.rows())
        throw std::invalid_argument("high resolution image has " + std::to_string(ms.bands()) +
                                    " bands, spectral response has " +
                                    std::to_string(model.spectral_response.rows()) + " rows");
    if (ms.height() != hs.height() * model.ratio || ms.width() != hs.width() * model.ratio)
        throw std::invalid_argument("high resolution grid must equal the HS grid times the ratio");
}

/// Quadratic data terms in subspace coordinates, with the offset removed from the observations.
struct DataTerms {
    SpatialDegradation deg;
    Matrix H;
    Matrix RH;
    Vector wh;
    Vector wm;
    Matrix yh;  // m x n_h
    Matrix ym;  // n_lambda x n
    Matrix GH;  // H^T W_H H
    Matrix GM;  // (RH)^T W_M RH

    DataTerms(const SpectralImage& hs, const SpectralImage& ms, const SensorModel& model, const SubspaceBasis& basis,
              double noise_floor)
        : deg(ms.height(), ms.width(), model.blur, model.ratio, model.phase) {
        check_shapes(hs, ms, model, basis);
        H = basis.H;
        RH = model.spectral_response * H;
        const NoiseWeights w = noise_weights(model, hs, ms.bands(), noise_floor);
        wh = w.hs;
        wm = w.ms;
        // Blur rows sum to one, so the constant offset passes through B S unchanged.
        yh = hs.data().colwise() - basis.offset;
        ym = ms.data().colwise() - model.spectral_response * basis.offset;
        GH = H.transpose() * wh.asDiagonal() * H;
        GM = RH.transpose() * wm.asDiagonal() * RH;
    }

    double value(const Matrix& U) const {
        const Matrix rh = yh - H * deg.apply(U);
        const Matrix rm = ym - RH * U;
        return 0.5 * (wh.transpose() * rh.rowwise().squaredNorm()).value() +
               0.5 * (wm.transpose() * rm.rowwise().squaredNorm()).value();
    }

    Matrix gradient(const Matrix& U) const {
        const Matrix rh = H * deg.apply(U) - yh;
        const Matrix rm = RH * U - ym;
        return deg.adjoint(H.transpose() * wh.asDiagonal() * rh) + RH.transpose() * wm.asDiagonal() * rm;
    }

    /// Linear part of the gradient.
    Matrix normal(const Matrix& U) const { return deg.adjoint(GH * deg.apply(U)) + GM * U; }

    /// Constant part of the gradient, negated.
    Matrix rhs() const {
        return deg.adjoint(H.transpose() * wh.asDiagonal() * yh) + RH.transpose() * wm.asDiagonal() * ym;
    }
};

Matrix inverse_spd(const Matrix& sigma) {
    Eigen::LLT<Matrix> llt(sigma);
    if (llt.info() != Eigen::Success) throw std::invalid_argument("prior covariance must be positive definite");
    return llt.solve(Matrix::Identity(sigma.rows(), sigma.cols()));
}

void check_priors(const BayesNaivePriors& priors, int p, Eigen::Index n) {
    if (priors.mu.rows() != p || priors.mu.cols() != n)
        throw std::invalid_argument("prior means must be p x pixels");
    if (priors.sigma.rows() != p || priors.sigma.cols() != p)
        throw std::invalid_argument("prior covariance must be p x p");
    if (!priors.sigma.isApprox(priors.sigma.transpose(), 1e-12))
        throw std::invalid_argument("prior covariance must be symmetric");
}

struct CgOutcome {
    Matrix U;
    int iterations = 0;
    double ratio = 0.0;
};

/**
 * Preconditioned CG on the normal equations, solved for the correction
 * delta = U - mu: N(delta) = -grad(mu). Working around mu keeps the large
 * prior term lambda Sigma^-1 mu out of the residual.
 */
CgOutcome solve_normal(const DataTerms& terms, const Matrix& sigma_inv, double lambda, const Matrix& mu,
                       double tol, int max_iters) {
    const Matrix prior_op = lambda * sigma_inv;
    auto apply = [&](const Matrix& delta) -> Matrix { return terms.normal(delta) + prior_op * delta; };
    const Matrix b = terms.rhs() - terms.normal(mu);

    const Matrix block = terms.deg.mean_gram_diagonal() * terms.GH + terms.GM + prior_op;
    const Eigen::LDLT<Matrix> precond(block);
    if (precond.info() != Eigen::Success) throw std::runtime_error("preconditioner factorization failed");

    CgOutcome out;
    Matrix delta = Matrix::Zero(mu.rows(), mu.cols());
    Matrix r = b;
    const double r0 = r.norm();
    double rnorm = r0;
    if (r0 > 0.0) {
        const double target = tol * r0;
        Matrix z = precond.solve(r);
        Matrix d = z;
        double rz = (r.array() * z.array()).sum();
        while (out.iterations < max_iters) {
            const Matrix Ad = apply(d);
            const double curvature = (d.array() * Ad.array()).sum();
            if (!(curvature > 0.0)) break;
            const double alpha = rz / curvature;
            delta += alpha * d;
            r -= alpha * Ad;
            ++out.iterations;
            rnorm = r.norm();
            if (rnorm <= target) {
                // Guard against drift of the recursive residual.
                r = b - apply(delta);
                rnorm = r.norm();
                if (rnorm <= target) break;
                z = precond.solve(r);
                d = z;
                rz = (r.array() * z.array()).sum();
                continue;
            }
            z = precond.solve(r);
            const double rz_next = (r.array() * z.array()).sum();
            d = z + (rz_next / rz) * d;
            rz = rz_next;
        }
        out.ratio = rnorm / r0;
        if (rnorm > target)
            throw ConvergenceError("naive Bayesian solve did not converge (gradient ratio " +
                                       std::to_string(out.ratio) + ")",
                                   out.ratio);
    }
    out.U = mu + delta;
    return out;
}

}  // namespace

SubspaceBasis learn_subspace(const SpectralImage& hs, int p) {
    if (p < 1 || p > hs.bands())
        throw std::invalid_argument("subspace dimension " + std::to_string(p) + " outside [1, " +
                                    std::to_string(hs.bands()) + "]");
    const PcaTransform pca = PcaTransform::fit(hs.data());
    return SubspaceBasis{pca.loadings().topRows(p).transpose(), pca.band_means()};
}

int default_subspace_dim(const SpectralImage& hs) {
    const PcaTransform pca = PcaTransform::fit(hs.data());
    return std::min({kMaxDefaultSubspace, pca.components_for(kDefaultEnergyShare), hs.bands()});
}

NoiseWeights noise_weights(const SensorModel& model, const SpectralImage& hs, int ms_bands, double floor_rel) {
    if (!(floor_rel > 0.0)) throw std::invalid_argument("noise floor must be positive");
    const double rms = std::sqrt(hs.data().squaredNorm() / static_cast<double>(std::max<Eigen::Index>(1, hs.data().size())));
    double floor = floor_rel * rms;
    if (!(floor > 0.0)) floor = floor_rel;
    auto weight = [floor](double s) {
        const double e = std::max(s, floor);
        return 1.0 / (e * e);
    };
    NoiseWeights w{Vector(hs.bands()), Vector(ms_bands)};
    for (int k = 0; k < hs.bands(); ++k)
        w.hs[k] = weight(model.hs_noise_std.empty() ? 0.0 : model.hs_noise_std[static_cast<std::size_t>(k)]);
    w.ms.setConstant(weight(model.pan_noise_std));
    return w;
}

double negative_log_posterior(const Matrix& U, const SpectralImage& hs, const SpectralImage& ms,
                              const SensorModel& model, const SubspaceBasis& basis,
                              const std::function<double(const Matrix&)>& regularizer, double lambda,
                              double noise_floor) {
    const DataTerms terms(hs, ms, model, basis, noise_floor);
    if (U.rows() != basis.dim() || U.cols() != ms.pixels())
        throw std::invalid_argument("coefficient matrix must be p x pixels");
    double value = terms.value(U);
    if (regularizer && lambda != 0.0) value += lambda * regularizer(U);
    return value;
}

BayesNaivePriors naive_priors(const SpectralImage& hs, const SubspaceBasis& basis, int ratio, int phase) {
    const SpectralImage up = upsample(hs, ratio, Interp::bicubic, phase);
    BayesNaivePriors priors;
    priors.mu = basis.project(up.data());
    const Matrix centred = priors.mu.colwise() - priors.mu.rowwise().mean();
    priors.sigma = centred * centred.transpose() / static_cast<double>(centred.cols());
    const double trace = priors.sigma.trace();
    const auto p = priors.sigma.rows();
    if (trace > 0.0)
        priors.sigma.diagonal().array() += 1e-6 * trace / static_cast<double>(p);
    else
        priors.sigma = Matrix::Identity(p, p);
    return priors;
}

double gaussian_prior_energy(const Matrix& U, const BayesNaivePriors& priors) {
    check_priors(priors, static_cast<int>(U.rows()), U.cols());
    const Matrix diff = U - priors.mu;
    Eigen::LLT<Matrix> llt(priors.sigma);
    if (llt.info() != Eigen::Success) throw std::invalid_argument("prior covariance must be positive definite");
    return 0.5 * (diff.array() * llt.solve(diff).array()).sum();
}

Matrix naive_gradient(const Matrix& U, const SpectralImage& hs, const SpectralImage& ms, const SensorModel& model,
                      const SubspaceBasis& basis, const BayesNaivePriors& priors, double lambda, double noise_floor) {
    const DataTerms terms(hs, ms, model, basis, noise_floor);
    check_priors(priors, basis.dim(), ms.pixels());
    if (U.rows() != basis.dim() || U.cols() != ms.pixels())
        throw std::invalid_argument("coefficient matrix must be p x pixels");
    return terms.gradient(U) + lambda * inverse_spd(priors.sigma) * (U - priors.mu);
}

BayesNaiveResult solve_bayes_naive(const SpectralImage& hs, const SpectralImage& ms, const SensorModel& model,
                                   const SubspaceBasis& basis, const BayesNaivePriors& priors,
                                   const BayesNaiveOptions& options) {
    if (!(options.lambda > 0.0)) throw std::invalid_argument("prior weight must be positive");
    if (!(options.tol > 0.0) || options.max_iters < 1) throw std::invalid_argument("invalid solver budget");
    if (options.sigma_rounds < 0 || !(options.sigma_ridge > 0.0))
        throw std::invalid_argument("invalid covariance re-estimation settings");
    const DataTerms terms(hs, ms, model, basis, options.noise_floor);
    const int p = basis.dim();
    check_priors(priors, p, ms.pixels());

    Matrix sigma = priors.sigma;
    CgOutcome cg = solve_normal(terms, inverse_spd(sigma), options.lambda, priors.mu, options.tol, options.max_iters);
    for (int round = 0; round < options.sigma_rounds; ++round) {
        const Matrix diff = cg.U - priors.mu;
        Matrix next = diff * diff.transpose() / static_cast<double>(diff.cols());
        const double trace = next.trace();
        if (!(trace > 0.0)) break;
        next.diagonal().array() += options.sigma_ridge * trace / static_cast<double>(p);
        sigma = 0.5 * (next + next.transpose());
        cg = solve_normal(terms, inverse_spd(sigma), options.lambda, priors.mu, options.tol, options.max_iters);
    }

    BayesNaiveResult result;
    result.U = std::move(cg.U);
    result.fused = SpectralImage(ms.height(), ms.width(), basis.reconstruct(result.U), hs.wavelengths());
    result.sigma = std::move(sigma);
    result.iterations = cg.iterations;
    result.gradient_ratio = cg.ratio;
    return result;
}

SpectralImage fuse_bayes_naive(const SpectralImage& hs, const SpectralImage& ms, const SensorModel& model,
                               const SubspaceBasis& basis, const BayesNaivePriors& priors,
                               const BayesNaiveOptions& options) {
    return solve_bayes_naive(hs, ms, model, basis, priors, options).fused;
}

}  // namespace hsfuse
