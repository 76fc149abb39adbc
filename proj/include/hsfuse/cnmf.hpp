#pragma once

// Coupled nonnegative matrix factorization: X = H U with U_H = U B S and H_M = R H.

#include "hsfuse/image.hpp"
#include "hsfuse/sensor.hpp"

#include <cstdint>
#include <vector>

namespace hsfuse {

/**
 * Vertex component analysis (projective variant). Returns p columns of @p Y
 * (m x n, nonnegative) picked by projecting onto random directions
 * orthogonal to the endmembers found so far. Deterministic for a seed.
 * Throws when Y has rank below p.
 */
Matrix vca(const Matrix& Y, int p, std::uint64_t seed);

/// Pixel indices chosen by vca, in selection order.
std::vector<Eigen::Index> vca_indices(const Matrix& Y, int p, std::uint64_t seed);

inline constexpr double kNmfGuard = 1e-12;

/// H <- H .* (Y U^T) ./ (H U U^T + eps).
Matrix nmf_update_spectra(const Matrix& H, const Matrix& U, const Matrix& Y);

/// U <- U .* (H^T Y) ./ (H^T H U + eps).
Matrix nmf_update_abundances(const Matrix& H, const Matrix& U, const Matrix& Y);

/// ||Y - H U||_F^2 with a row of delta appended to Y and H (delta = 0 gives the plain objective).
double nmf_objective(const Matrix& H, const Matrix& U, const Matrix& Y, double delta);

struct CnmfOptions {
    int endmembers = 3;
    int outer_iters = 2;
    int inner_iters = 100;
    double delta = 10.0;     // weight of the sum-to-one row
    double tol = 1e-6;       // relative objective change ending an inner loop
    std::uint64_t seed = 0;  // VCA directions
};

/// Objective values of one unmixing stage, starting with the value before the first update.
struct CnmfStageTrace {
    bool high_resolution = false;  // false: HS stage, true: PAN/MS stage
    std::vector<double> objective;
};

struct CnmfResult {
    SpectralImage fused;
    Matrix H;   // m x p spectra
    Matrix U;   // p x n abundances
    Matrix U_H; // p x n_h abundances of the last HS stage
    std::vector<CnmfStageTrace> stages;  // abundance warm start, then HS and PAN/MS stages per outer pass
};

/**
 * Two-stage coupled unmixing. Abundance updates use the sum-to-one
 * augmentation; stage objectives are the augmented ones, which the
 * multiplicative rules decrease.
 */
CnmfResult solve_cnmf(const SpectralImage& hs, const SpectralImage& ms, const SensorModel& model,
                      const CnmfOptions& options = {});

SpectralImage fuse_cnmf(const SpectralImage& hs, const SpectralImage& ms, const SensorModel& model,
                        const CnmfOptions& options = {});

}  // namespace hsfuse
