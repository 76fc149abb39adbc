#pragma once

// Subspace Bayesian fusion: X = offset 1^T + H U with the observation model
//   Y_H = X B S + N_H,   Y_M = R X + N_M.

#include "hsfuse/image.hpp"
#include "hsfuse/sensor.hpp"

#include <functional>
#include <stdexcept>
#include <string>

namespace hsfuse {

/// Orthonormal basis of the (mean-centred) signal subspace.
struct SubspaceBasis {
    Matrix H;       // m_lambda x p, orthonormal columns
    Vector offset;  // band means removed before projecting

    int dim() const { return static_cast<int>(H.cols()); }
    /// Coefficients of a bands x pixels matrix.
    Matrix project(const Matrix& samples) const { return H.transpose() * (samples.colwise() - offset); }
    Matrix reconstruct(const Matrix& coeffs) const { return (H * coeffs).colwise() + offset; }
};

/// Top-p principal directions of the HS image (sign: largest entry positive).
SubspaceBasis learn_subspace(const SpectralImage& hs, int p);

/// min(10, components carrying 99.9% of the centred energy).
int default_subspace_dim(const SpectralImage& hs);

/// Raised when an iterative solver exhausts its budget.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double residual) : std::runtime_error(what), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

/// Per-band inverse noise variances used by the data terms.
struct NoiseWeights {
    Vector hs;  // m_lambda
    Vector ms;  // n_lambda
};

/**
 * Inverse variances from the model noise levels. Levels below
 * floor_rel * rms(Y_H) are raised to that floor so that noiseless
 * observations keep finite weights.
 */
NoiseWeights noise_weights(const SensorModel& model, const SpectralImage& hs, int ms_bands, double floor_rel);

inline constexpr double kDefaultNoiseFloor = 1e-3;

/**
 * Negative log-posterior up to a constant:
 *   1/2 ||W_H^1/2 (Y_H - X(U) B S)||^2 + 1/2 ||W_M^1/2 (Y_M - R X(U))||^2 + lambda phi(U)
 * with X(U) = offset + H U.
 */
double negative_log_posterior(const Matrix& U, const SpectralImage& hs, const SpectralImage& ms,
                              const SensorModel& model, const SubspaceBasis& basis,
                              const std::function<double(const Matrix&)>& regularizer, double lambda,
                              double noise_floor = kDefaultNoiseFloor);

struct BayesNaivePriors {
    Matrix mu;     // p x n prior means
    Matrix sigma;  // p x p covariance shared by every pixel
};

/// Means from the projected bicubic upsampled HS; covariance from their spread plus a ridge.
BayesNaivePriors naive_priors(const SpectralImage& hs, const SubspaceBasis& basis, int ratio, int phase);

/// phi(U) = 1/2 sum_i (u_i - mu_i)^T Sigma^-1 (u_i - mu_i).
double gaussian_prior_energy(const Matrix& U, const BayesNaivePriors& priors);

struct BayesNaiveOptions {
    double lambda = 1.0;         // prior weight
    double tol = 1e-9;           // relative gradient norm target
    int max_iters = 5000;        // conjugate-gradient iterations per solve
    int sigma_rounds = 5;        // covariance re-estimations; 0 keeps priors.sigma fixed
    double sigma_ridge = 1e-6;   // relative ridge added to re-estimated covariances
    double noise_floor = kDefaultNoiseFloor;
};

struct BayesNaiveResult {
    SpectralImage fused;
    Matrix U;
    Matrix sigma;           // covariance used by the final solve
    int iterations = 0;     // CG iterations of the final solve
    double gradient_ratio = 0.0;  // final / initial gradient norm of the final solve
};

/**
 * MAP estimate under the naive Gaussian prior. Each solve is a
 * preconditioned conjugate gradient on the (linear) normal equations; the
 * covariance is re-estimated from U - mu between solves.
 * Throws ConvergenceError when a solve exhausts max_iters.
 */
BayesNaiveResult solve_bayes_naive(const SpectralImage& hs, const SpectralImage& ms, const SensorModel& model,
                                   const SubspaceBasis& basis, const BayesNaivePriors& priors,
                                   const BayesNaiveOptions& options = {});

SpectralImage fuse_bayes_naive(const SpectralImage& hs, const SpectralImage& ms, const SensorModel& model,
                               const SubspaceBasis& basis, const BayesNaivePriors& priors,
                               const BayesNaiveOptions& options = {});

/// Gradient of the naive objective (prior weight lambda, covariance sigma) at U.
Matrix naive_gradient(const Matrix& U, const SpectralImage& hs, const SpectralImage& ms, const SensorModel& model,
                      const SubspaceBasis& basis, const BayesNaivePriors& priors, double lambda,
                      double noise_floor = kDefaultNoiseFloor);

}  // namespace hsfuse
