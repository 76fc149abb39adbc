#pragma once

// Subspace fusion with a vector total variation prior, solved by ADMM with
// periodic convolutions, plus blind estimation of the blur and spectral response.

#include "hsfuse/bayes.hpp"
#include "hsfuse/image.hpp"
#include "hsfuse/sensor.hpp"

#include <optional>
#include <vector>

namespace hsfuse {

/// sum_j sqrt(sum_k (Dh u^k)_j^2 + (Dv u^k)_j^2) with periodic forward differences.
double vtv(const SpectralImage& coeffs);
double vtv(const Matrix& coeffs, int height, int width);

struct HySureParams {
    double lambda_m = 1.0;                // weight of the high resolution data term
    std::optional<double> lambda_phi;     // VTV weight; default 5e-3 * rms(Y_H)
    double admm_mu = 0.05;
    int max_iters = 200;
    double tol = 1e-4;                    // relative change of the coefficients
    std::optional<DynamicRange> range;    // output clipping; none keeps the raw estimate

    /// Throws std::invalid_argument on non-positive weights or budgets (lambda_phi may be 0).
    void validate() const;
};

inline constexpr double kDefaultVtvWeight = 5e-3;

/// Resolved VTV weight for a given HS image.
double hysure_lambda_phi(const HySureParams& params, const SpectralImage& hs);

struct HySureResult {
    SpectralImage fused;
    Matrix U;                        // p x n subspace coefficients
    std::vector<double> objective;   // objective after each iteration, preceded by its initial value
    int iterations = 0;
    bool converged = false;
    double lambda_phi = 0.0;
};

/**
 * Objective minimized by fuse_hysure, with B applied as a cyclic convolution:
 *   1/2 ||Y_H - X(U) B S||^2 + lambda_m/2 ||Y_M - R X(U)||^2 + lambda_phi vtv(U)
 * where X(U) = offset + H U.
 */
double hysure_objective(const Matrix& U, const SpectralImage& hs, const SpectralImage& ms, const SensorModel& model,
                        const SubspaceBasis& basis, double lambda_m, double lambda_phi);

HySureResult solve_hysure(const SpectralImage& hs, const SpectralImage& ms, const SubspaceBasis& basis,
                          const SensorModel& model, const HySureParams& params = {});

SpectralImage fuse_hysure(const SpectralImage& hs, const SpectralImage& ms, const SubspaceBasis& basis,
                          const SensorModel& model, const HySureParams& params = {});

/// Cyclic (periodic) 2-D separable convolution by the model blur followed by decimation.
Matrix periodic_blur_downsample(const Matrix& samples, int height, int width, const BlurKernel& kernel, int ratio,
                                int phase);

struct SensorEstimate {
    BlurKernel kernel;                // separable taps (marginal of the 2-D estimate)
    Matrix kernel_2d;                 // support x support estimate before separation
    Matrix response;                  // n_lambda x m_lambda, rows on the simplex
    std::vector<double> objective;    // after each alternation, preceded by the initial value
    int alternations = 0;
};

/**
 * Alternating minimization of
 *   ||R Y_H - Y_M B S||^2 + lambda_b ||grad B||^2 + lambda_r ||R D||^2
 * over a symmetric kernel with odd @p kernel_support (unit sum) and response
 * rows constrained to the simplex. D takes first differences along the
 * wavelength axis. The ratio is inferred from the image sizes.
 */
SensorEstimate estimate_sensor(const SpectralImage& hs, const SpectralImage& ms, int kernel_support, double lambda_b,
                               double lambda_r, int phase, int max_alternations = 20, double tol = 1e-6);

}  // namespace hsfuse
