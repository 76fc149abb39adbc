#include "hsfuse/cnmf.hpp"

#include "hsfuse/resample.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace hsfuse {

namespace {

void require_nonnegative(const Matrix& m, const char* what) {
    if (!m.allFinite() || (m.array() < 0.0).any())
        throw std::invalid_argument(std::string(what) + " must be finite and nonnegative");
}

Matrix augment(const Matrix& m, double delta) {
    Matrix out(m.rows() + 1, m.cols());
    out.topRows(m.rows()) = m;
    out.row(m.rows()).setConstant(delta);
    return out;
}

/// Runs abundance updates (and optionally spectra updates) until the relative change is below tol.
void unmix(Matrix& H, Matrix& U, const Matrix& Y, double delta, int iters, double tol, bool update_spectra,
           CnmfStageTrace& trace) {
    const Matrix Ya = augment(Y, delta);
    trace.objective.push_back(nmf_objective(H, U, Y, delta));
    for (int it = 0; it < iters; ++it) {
        const double before = trace.objective.back();
        U = nmf_update_abundances(augment(H, delta), U, Ya);
        trace.objective.push_back(nmf_objective(H, U, Y, delta));
        if (update_spectra) {
            H = nmf_update_spectra(H, U, Y);
            trace.objective.push_back(nmf_objective(H, U, Y, delta));
        }
        const double after = trace.objective.back();
        if (std::abs(before - after) <= tol * std::max(before, 1e-300)) break;
    }
}

}  // namespace

std::vector<Eigen::Index> vca_indices(const Matrix& Y, int p, std::uint64_t seed) {
    const auto m = Y.rows();
    const auto n = Y.cols();
    if (p < 1 || p > m || p > n)
        throw std::invalid_argument("VCA needs 1 <= p <= min(bands, pixels), got p = " + std::to_string(p));
    require_nonnegative(Y, "VCA input");

    const Matrix corr = Y * Y.transpose() / static_cast<double>(n);
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(corr);
    if (eig.info() != Eigen::Success) throw std::runtime_error("VCA eigendecomposition failed");
    const Vector& values = eig.eigenvalues();  // ascending
    const double top = values[m - 1];
    if (!(top > 0.0) || !(values[m - p] > 1e-12 * top))
        throw std::runtime_error("VCA: data rank is below " + std::to_string(p));
    const Matrix Ud = eig.eigenvectors().rightCols(p).rowwise().reverse();

    std::vector<Eigen::Index> picked;
    if (p == 1) {
        Eigen::Index idx = 0;
        (Ud.col(0).transpose() * Y).cwiseAbs().maxCoeff(&idx);
        picked.push_back(idx);
        return picked;
    }

    const Matrix X = Ud.transpose() * Y;  // p x n
    const Vector u = X.rowwise().mean();
    const RowVector scale = u.transpose() * X;
    if ((scale.array() <= 0.0).any()) throw std::runtime_error("VCA: projective normalization failed");
    const Matrix Yp = X.array().rowwise() / scale.array();

    std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32)};
    std::mt19937_64 gen(seq);
    std::normal_distribution<double> normal(0.0, 1.0);

    Matrix A = Matrix::Zero(p, p);
    A(p - 1, 0) = 1.0;
    for (int i = 0; i < p; ++i) {
        Vector w(p);
        for (int k = 0; k < p; ++k) w[k] = normal(gen);
        const Matrix proj = A * A.completeOrthogonalDecomposition().pseudoInverse();
        Vector f = w - proj * w;
        const double fn = f.norm();
        if (!(fn > 0.0)) throw std::runtime_error("VCA: degenerate search direction");
        f /= fn;
        Eigen::Index idx = 0;
        (f.transpose() * Yp).cwiseAbs().maxCoeff(&idx);
        A.col(i) = Yp.col(idx);
        picked.push_back(idx);
    }
    return picked;
}

Matrix vca(const Matrix& Y, int p, std::uint64_t seed) {
    const std::vector<Eigen::Index> idx = vca_indices(Y, p, seed);
    Matrix out(Y.rows(), p);
    for (int i = 0; i < p; ++i) out.col(i) = Y.col(idx[static_cast<std::size_t>(i)]);
    return out;
}

Matrix nmf_update_spectra(const Matrix& H, const Matrix& U, const Matrix& Y) {
    if (H.cols() != U.rows() || H.rows() != Y.rows() || U.cols() != Y.cols())
        throw std::invalid_argument("NMF shapes do not agree");
    const Matrix num = Y * U.transpose();
    const Matrix den = (H * (U * U.transpose())).array() + kNmfGuard;
    return H.cwiseProduct(num.cwiseQuotient(den));
}

Matrix nmf_update_abundances(const Matrix& H, const Matrix& U, const Matrix& Y) {
    if (H.cols() != U.rows() || H.rows() != Y.rows() || U.cols() != Y.cols())
        throw std::invalid_argument("NMF shapes do not agree");
    const Matrix num = H.transpose() * Y;
    const Matrix den = ((H.transpose() * H) * U).array() + kNmfGuard;
    return U.cwiseProduct(num.cwiseQuotient(den));
}

double nmf_objective(const Matrix& H, const Matrix& U, const Matrix& Y, double delta) {
    double value = (Y - H * U).squaredNorm();
    if (delta != 0.0) value += delta * delta * (U.colwise().sum().array() - 1.0).square().sum();
    return value;
}

CnmfResult solve_cnmf(const SpectralImage& hs, const SpectralImage& ms, const SensorModel& model,
                      const CnmfOptions& options) {
    model.validate(hs.bands());
    if (options.endmembers < 1) throw std::invalid_argument("CNMF needs at least one endmember");
    if (options.outer_iters < 1 || options.inner_iters < 1) throw std::invalid_argument("CNMF iteration counts must be positive");
    if (!(options.delta >= 0.0) || !(options.tol >= 0.0)) throw std::invalid_argument("invalid CNMF weights");
    if (ms.bands() != model.spectral_response.rows())
        throw std::invalid_argument("high resolution band count does not match the spectral response");
    if (ms.height() != hs.height() * model.ratio || ms.width() != hs.width() * model.ratio)
        throw std::invalid_argument("high resolution grid must equal the HS grid times the ratio");
    if (!hs.data().allFinite() || !ms.data().allFinite()) throw std::invalid_argument("CNMF inputs must be finite");
    // Noise can push samples below zero; the factorization works on the nonnegative part.
    const Matrix yh = hs.data().cwiseMax(0.0);
    const Matrix ym = ms.data().cwiseMax(0.0);

    const int p = options.endmembers;
    const SpatialDegradation deg(ms.height(), ms.width(), model.blur, model.ratio, model.phase);

    CnmfResult result;
    result.H = vca(yh, p, options.seed);
    result.U_H = Matrix::Constant(p, hs.pixels(), 1.0 / p);

    // Abundances for the VCA spectra first, so the alternation does not start from flat U_H.
    CnmfStageTrace warm;
    unmix(result.H, result.U_H, yh, options.delta, options.inner_iters, options.tol, false, warm);
    result.stages.push_back(std::move(warm));

    for (int outer = 0; outer < options.outer_iters; ++outer) {
        if (outer > 0) result.U_H = deg.apply(result.U).cwiseMax(0.0);
        CnmfStageTrace hs_stage;
        unmix(result.H, result.U_H, yh, options.delta, options.inner_iters, options.tol, true, hs_stage);
        result.stages.push_back(std::move(hs_stage));

        const Matrix H_M = model.spectral_response * result.H;
        if (outer == 0) {
            const SpectralImage coarse(hs.height(), hs.width(), result.U_H);
            result.U = upsample(coarse, model.ratio, Interp::bilinear, model.phase).data().cwiseMax(0.0);
        }
        CnmfStageTrace ms_stage;
        ms_stage.high_resolution = true;
        Matrix H_M_copy = H_M;
        unmix(H_M_copy, result.U, ym, options.delta, options.inner_iters, options.tol, false, ms_stage);
        result.stages.push_back(std::move(ms_stage));
    }

    result.fused = SpectralImage(ms.height(), ms.width(), result.H * result.U, hs.wavelengths());
    return result;
}

SpectralImage fuse_cnmf(const SpectralImage& hs, const SpectralImage& ms, const SensorModel& model,
                        const CnmfOptions& options) {
    return solve_cnmf(hs, ms, model, options).fused;
}

}  // namespace hsfuse
