#include "hsfuse/hysure.hpp"

#include "hsfuse/resample.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace hsfuse {

namespace {

using CMatrix = Eigen::MatrixXcd;

std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

/// In-place 2-D complex FFT on a height x width raster, applied row by row to p x n sample matrices.
class Fft2 {
public:
    Fft2(int height, int width) : n_(static_cast<std::size_t>(height) * width) {
        buf_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n_));
        if (buf_ == nullptr) throw std::bad_alloc();
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        fwd_ = fftw_plan_dft_2d(height, width, buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
        bwd_ = fftw_plan_dft_2d(height, width, buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
        if (fwd_ == nullptr || bwd_ == nullptr) {
            if (fwd_ != nullptr) fftw_destroy_plan(fwd_);
            if (bwd_ != nullptr) fftw_destroy_plan(bwd_);
            fftw_free(buf_);
            throw std::runtime_error("FFTW planning failed");
        }
    }
    ~Fft2() {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
        fftw_free(buf_);
    }
    Fft2(const Fft2&) = delete;
    Fft2& operator=(const Fft2&) = delete;

    CMatrix forward(const Matrix& x) {
        CMatrix out(x.rows(), x.cols());
        for (Eigen::Index k = 0; k < x.rows(); ++k) {
            for (std::size_t j = 0; j < n_; ++j) {
                buf_[j][0] = x(k, static_cast<Eigen::Index>(j));
                buf_[j][1] = 0.0;
            }
            fftw_execute(fwd_);
            for (std::size_t j = 0; j < n_; ++j) out(k, static_cast<Eigen::Index>(j)) = {buf_[j][0], buf_[j][1]};
        }
        return out;
    }

    /// Real part of the normalized inverse transform.
    Matrix inverse(const CMatrix& x) {
        Matrix out(x.rows(), x.cols());
        const double scale = 1.0 / static_cast<double>(n_);
        for (Eigen::Index k = 0; k < x.rows(); ++k) {
            for (std::size_t j = 0; j < n_; ++j) {
                const std::complex<double> v = x(k, static_cast<Eigen::Index>(j));
                buf_[j][0] = v.real();
                buf_[j][1] = v.imag();
            }
            fftw_execute(bwd_);
            for (std::size_t j = 0; j < n_; ++j) out(k, static_cast<Eigen::Index>(j)) = buf_[j][0] * scale;
        }
        return out;
    }

private:
    std::size_t n_;
    fftw_complex* buf_ = nullptr;
    fftw_plan fwd_ = nullptr;
    fftw_plan bwd_ = nullptr;
};

/// DFT of a centred symmetric tap vector wrapped onto a period of n.
Vector taps_spectrum(const std::vector<double>& taps, int n) {
    const int half = static_cast<int>(taps.size() / 2);
    Vector out(n);
    for (int k = 0; k < n; ++k) {
        double v = 0.0;
        for (int t = -half; t <= half; ++t)
            v += taps[static_cast<std::size_t>(t + half)] * std::cos(2.0 * std::numbers::pi * k * t / n);
        out[k] = v;
    }
    return out;
}

/// Periodic conv + decimation along one axis as a dense matrix.
Matrix periodic_axis_operator(int n, const std::vector<double>& taps, int ratio, int phase) {
    if (ratio < 1 || n % ratio != 0) throw std::invalid_argument("dimension not divisible by ratio");
    if (phase < 0 || phase >= ratio) throw std::invalid_argument("decimation phase must lie in [0, ratio)");
    const int m = n / ratio;
    const int half = static_cast<int>(taps.size() / 2);
    Matrix op = Matrix::Zero(m, n);
    for (int o = 0; o < m; ++o) {
        const long centre = static_cast<long>(o) * ratio + phase;
        for (int t = -half; t <= half; ++t) {
            long idx = (centre + t) % n;
            if (idx < 0) idx += n;
            op(o, idx) += taps[static_cast<std::size_t>(t + half)];
        }
    }
    return op;
}

/// Periodic forward differences along columns (horizontal) and rows (vertical).
Matrix diff_h(const Matrix& z, int h, int w) {
    Matrix out(z.rows(), z.cols());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const Eigen::Index j = static_cast<Eigen::Index>(y) * w + x;
            out.col(j) = z.col(static_cast<Eigen::Index>(y) * w + (x + 1) % w) - z.col(j);
        }
    return out;
}

Matrix diff_v(const Matrix& z, int h, int w) {
    Matrix out(z.rows(), z.cols());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const Eigen::Index j = static_cast<Eigen::Index>(y) * w + x;
            out.col(j) = z.col(static_cast<Eigen::Index>((y + 1) % h) * w + x) - z.col(j);
        }
    return out;
}

Matrix diff_h_adjoint(const Matrix& v, int h, int w) {
    Matrix out(v.rows(), v.cols());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const Eigen::Index j = static_cast<Eigen::Index>(y) * w + x;
            out.col(j) = v.col(static_cast<Eigen::Index>(y) * w + (x + w - 1) % w) - v.col(j);
        }
    return out;
}

Matrix diff_v_adjoint(const Matrix& v, int h, int w) {
    Matrix out(v.rows(), v.cols());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const Eigen::Index j = static_cast<Eigen::Index>(y) * w + x;
            out.col(j) = v.col(static_cast<Eigen::Index>((y + h - 1) % h) * w + x) - v.col(j);
        }
    return out;
}

void check_inputs(const SpectralImage& hs, const SpectralImage& ms, const SensorModel& model,
                  const SubspaceBasis& basis) {
    model.validate(hs.bands());
    if (basis.H.rows() != hs.bands() || basis.offset.size() != hs.bands())
        throw std::invalid_argument("subspace basis does not match the HS band count");
    if (ms.bands() != model.spectral_response.rows())
        throw std::invalid_argument("high resolution band count does not match the spectral response");
    if (ms.height() != hs.height() * model.ratio || ms.width() != hs.width() * model.ratio)
        throw std::invalid_argument("high resolution grid must equal the HS grid times the ratio");
}

}  // namespace

double vtv(const Matrix& coeffs, int height, int width) {
    if (coeffs.cols() != static_cast<Eigen::Index>(height) * width)
        throw std::invalid_argument("coefficient matrix does not match the grid");
    const Matrix dh = diff_h(coeffs, height, width);
    const Matrix dv = diff_v(coeffs, height, width);
    double total = 0.0;
    for (Eigen::Index j = 0; j < coeffs.cols(); ++j) total += std::sqrt(dh.col(j).squaredNorm() + dv.col(j).squaredNorm());
    return total;
}

double vtv(const SpectralImage& coeffs) { return vtv(coeffs.data(), coeffs.height(), coeffs.width()); }

void HySureParams::validate() const {
    if (!(lambda_m > 0.0)) throw std::invalid_argument("lambda_m must be positive");
    if (lambda_phi && !(*lambda_phi >= 0.0)) throw std::invalid_argument("lambda_phi must be nonnegative");
    if (!(admm_mu > 0.0)) throw std::invalid_argument("admm_mu must be positive");
    if (max_iters < 1) throw std::invalid_argument("max_iters must be positive");
    if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
}

double hysure_lambda_phi(const HySureParams& params, const SpectralImage& hs) {
    if (params.lambda_phi) return *params.lambda_phi;
    const double rms =
        std::sqrt(hs.data().squaredNorm() / static_cast<double>(std::max<Eigen::Index>(1, hs.data().size())));
    return kDefaultVtvWeight * rms;
}

Matrix periodic_blur_downsample(const Matrix& samples, int height, int width, const BlurKernel& kernel, int ratio,
                                int phase) {
    return apply_separable(samples, height, width, periodic_axis_operator(height, kernel.taps(), ratio, phase),
                           periodic_axis_operator(width, kernel.taps(), ratio, phase));
}

double hysure_objective(const Matrix& U, const SpectralImage& hs, const SpectralImage& ms, const SensorModel& model,
                        const SubspaceBasis& basis, double lambda_m, double lambda_phi) {
    check_inputs(hs, ms, model, basis);
    if (U.rows() != basis.dim() || U.cols() != ms.pixels())
        throw std::invalid_argument("coefficient matrix must be p x pixels");
    const Matrix low = periodic_blur_downsample(U, ms.height(), ms.width(), model.blur, model.ratio, model.phase);
    const Matrix rh = (hs.data().colwise() - basis.offset) - basis.H * low;
    const Matrix rm =
        (ms.data().colwise() - model.spectral_response * basis.offset) - model.spectral_response * basis.H * U;
    double value = 0.5 * rh.squaredNorm() + 0.5 * lambda_m * rm.squaredNorm();
    if (lambda_phi != 0.0) value += lambda_phi * vtv(U, ms.height(), ms.width());
    return value;
}

HySureResult solve_hysure(const SpectralImage& hs, const SpectralImage& ms, const SubspaceBasis& basis,
                          const SensorModel& model, const HySureParams& params) {
    params.validate();
    check_inputs(hs, ms, model, basis);
    const int h = ms.height();
    const int w = ms.width();
    const int p = basis.dim();
    const Eigen::Index n = ms.pixels();
    const double lambda_m = params.lambda_m;
    const double lambda_phi = hysure_lambda_phi(params, hs);
    const double mu = params.admm_mu;

    // Observations in subspace coordinates.
    const Matrix RH = model.spectral_response * basis.H;
    const Matrix ym = ms.data().colwise() - model.spectral_response * basis.offset;
    const Matrix yh_sub = basis.H.transpose() * (hs.data().colwise() - basis.offset);

    // HS samples sit on the decimation lattice of the fine grid.
    Matrix yh_fine = Matrix::Zero(p, n);
    RowVector mask = RowVector::Zero(n);
    for (int y = 0; y < hs.height(); ++y)
        for (int x = 0; x < hs.width(); ++x) {
            const Eigen::Index j = static_cast<Eigen::Index>(y * model.ratio + model.phase) * w + x * model.ratio +
                                   model.phase;
            yh_fine.col(j) = yh_sub.col(static_cast<Eigen::Index>(y) * hs.width() + x);
            mask[j] = 1.0;
        }

    // Frequency responses.
    const Vector by = taps_spectrum(model.blur.taps(), h);
    const Vector bx = taps_spectrum(model.blur.taps(), w);
    RowVector b_hat(n);
    RowVector s_hat(n);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const Eigen::Index j = static_cast<Eigen::Index>(y) * w + x;
            b_hat[j] = by[y] * bx[x];
            s_hat[j] = b_hat[j] * b_hat[j] + (2.0 - 2.0 * std::cos(2.0 * std::numbers::pi * x / w)) +
                       (2.0 - 2.0 * std::cos(2.0 * std::numbers::pi * y / h));
        }
    const Eigen::SelfAdjointEigenSolver<Matrix> q_eig(RH.transpose() * RH);
    const Matrix& W = q_eig.eigenvectors();
    const Vector q = q_eig.eigenvalues().cwiseMax(0.0);

    Fft2 fft(h, w);
    const Matrix data_rhs = lambda_m * RH.transpose() * ym;

    auto blur_full = [&](const CMatrix& z_hat) {
        CMatrix prod = z_hat;
        for (Eigen::Index j = 0; j < n; ++j) prod.col(j) *= b_hat[j];
        return fft.inverse(prod);
    };

    Matrix Z = basis.project(upsample(hs, model.ratio, Interp::bicubic, model.phase).data());
    Matrix ZB = blur_full(fft.forward(Z));
    Matrix V1 = ZB;
    Matrix V2 = diff_h(Z, h, w);
    Matrix V3 = diff_v(Z, h, w);
    Matrix A1 = Matrix::Zero(p, n), A2 = Matrix::Zero(p, n), A3 = Matrix::Zero(p, n);

    HySureResult result;
    result.lambda_phi = lambda_phi;
    result.objective.push_back(hysure_objective(Z, hs, ms, model, basis, lambda_m, lambda_phi));

    const double shrink = lambda_phi / mu;
    for (int it = 0; it < params.max_iters; ++it) {
        // U-step: quadratic, diagonal in frequency after rotating by the eigenvectors of (RH)^T RH.
        const Matrix spatial_rhs =
            data_rhs + mu * (diff_h_adjoint(V2 + A2, h, w) + diff_v_adjoint(V3 + A3, h, w));
        CMatrix rhs = fft.forward(spatial_rhs);
        const CMatrix blur_rhs = fft.forward(V1 + A1);
        for (Eigen::Index j = 0; j < n; ++j) rhs.col(j) += mu * b_hat[j] * blur_rhs.col(j);
        CMatrix rotated = W.transpose().cast<std::complex<double>>() * rhs;
        for (Eigen::Index j = 0; j < n; ++j)
            for (int i = 0; i < p; ++i) rotated(i, j) /= lambda_m * q[i] + mu * s_hat[j];
        const CMatrix z_hat = W.cast<std::complex<double>>() * rotated;
        const Matrix Z_prev = Z;
        Z = fft.inverse(z_hat);
        ZB = blur_full(z_hat);
        const Matrix ZDh = diff_h(Z, h, w);
        const Matrix ZDv = diff_v(Z, h, w);

        // Data split: exact where HS samples exist, pure proximity elsewhere.
        const Matrix t1 = ZB - A1;
        for (Eigen::Index j = 0; j < n; ++j)
            V1.col(j) = (mask[j] * yh_fine.col(j) + mu * t1.col(j)) / (mask[j] + mu);

        // Joint soft threshold of both differences over all coefficients.
        const Matrix t2 = ZDh - A2;
        const Matrix t3 = ZDv - A3;
        for (Eigen::Index j = 0; j < n; ++j) {
            const double mag = std::sqrt(t2.col(j).squaredNorm() + t3.col(j).squaredNorm());
            const double keep = mag > shrink ? (mag - shrink) / mag : 0.0;
            V2.col(j) = keep * t2.col(j);
            V3.col(j) = keep * t3.col(j);
        }

        A1 -= ZB - V1;
        A2 -= ZDh - V2;
        A3 -= ZDv - V3;

        ++result.iterations;
        result.objective.push_back(hysure_objective(Z, hs, ms, model, basis, lambda_m, lambda_phi));
        const double prev_norm = Z_prev.norm();
        const double change = (Z - Z_prev).norm() / (prev_norm > 0.0 ? prev_norm : 1.0);
        if (change < params.tol) {
            result.converged = true;
            break;
        }
    }

    SpectralImage fused(h, w, basis.reconstruct(Z), hs.wavelengths());
    result.fused = params.range ? clip_to_range(fused, *params.range) : std::move(fused);
    result.U = std::move(Z);
    return result;
}

SpectralImage fuse_hysure(const SpectralImage& hs, const SpectralImage& ms, const SubspaceBasis& basis,
                          const SensorModel& model, const HySureParams& params) {
    return solve_hysure(hs, ms, basis, model, params).fused;
}

// ---------------------------------------------------------------------------
// Blind sensor estimation

namespace {

/// Euclidean projection of a row onto the probability simplex.
RowVector project_simplex(const RowVector& v) {
    std::vector<double> u(v.data(), v.data() + v.size());
    std::sort(u.begin(), u.end(), std::greater<>());
    double cumulative = 0.0;
    double theta = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        cumulative += u[i];
        const double t = (cumulative - 1.0) / static_cast<double>(i + 1);
        if (u[i] - t > 0.0) theta = t;
    }
    return (v.array() - theta).cwiseMax(0.0).matrix();
}

/// Minimizes r C r^T - 2 d r^T over the simplex by FISTA with adaptive restart.
RowVector simplex_quadratic(const Matrix& C, const RowVector& d, RowVector r, double lipschitz) {
    auto value = [&](const RowVector& x) { return (x * C * x.transpose()).value() - 2.0 * d.dot(x); };
    const double step = 1.0 / lipschitz;
    RowVector y = r;
    double t = 1.0;
    double f = value(r);
    for (int it = 0; it < 5000; ++it) {
        const RowVector grad = 2.0 * (y * C - d);
        const RowVector next = project_simplex(y - step * grad);
        const double f_next = value(next);
        if (f_next > f) {
            // Restart momentum from the current iterate.
            y = r;
            t = 1.0;
            const RowVector plain = project_simplex(r - step * 2.0 * (r * C - d));
            const double f_plain = value(plain);
            if (f_plain > f) break;
            const double move = (plain - r).norm();
            r = plain;
            f = f_plain;
            y = r;
            if (move <= 1e-15 * std::max(1.0, r.norm())) break;
            continue;
        }
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        const double move = (next - r).norm();
        y = next + ((t - 1.0) / t_next) * (next - r);
        r = next;
        f = f_next;
        t = t_next;
        if (move <= 1e-15 * std::max(1.0, r.norm())) break;
    }
    return r;
}

}  // namespace

SensorEstimate estimate_sensor(const SpectralImage& hs, const SpectralImage& ms, int kernel_support, double lambda_b,
                               double lambda_r, int phase, int max_alternations, double tol) {
    if (kernel_support < 1 || kernel_support % 2 == 0) throw std::invalid_argument("kernel support must be odd");
    if (!(lambda_b >= 0.0) || !(lambda_r >= 0.0)) throw std::invalid_argument("regularization weights must be >= 0");
    if (max_alternations < 1 || !(tol > 0.0)) throw std::invalid_argument("invalid alternation budget");
    if (hs.height() == 0 || ms.height() % hs.height() != 0 || ms.width() % hs.width() != 0 ||
        ms.height() / hs.height() != ms.width() / hs.width())
        throw std::invalid_argument("high resolution grid must be an integer multiple of the HS grid");
    const int ratio = ms.height() / hs.height();
    if (phase < 0 || phase >= ratio) throw std::invalid_argument("decimation phase must lie in [0, ratio)");

    auto degenerate = [](const Matrix& d) {
        const Matrix centred = d.colwise() - d.rowwise().mean();
        return !(centred.squaredNorm() > 1e-24 * std::max(1.0, d.squaredNorm()));
    };
    if (degenerate(hs.data()) || degenerate(ms.data()))
        throw std::invalid_argument("sensor estimation needs non-constant images");

    const int m = hs.bands();
    const int nl = ms.bands();
    const int s = kernel_support / 2;
    const int side = kernel_support;
    const Matrix& yh = hs.data();

    // Orbit classes (i <= j) of the dihedral group acting on kernel offsets.
    struct OrbitClass {
        int i, j;
    };
    std::vector<OrbitClass> classes;
    for (int i = 0; i <= s; ++i)
        for (int j = i; j <= s; ++j) classes.push_back({i, j});
    const int nc = static_cast<int>(classes.size());

    // Kernel grid (row-major side x side) as a function of the class parameters.
    Matrix T = Matrix::Zero(side * side, nc);
    for (int c = 0; c < nc; ++c)
        for (int dy = -s; dy <= s; ++dy)
            for (int dx = -s; dx <= s; ++dx) {
                const int a = std::abs(dy), b = std::abs(dx);
                if (std::min(a, b) == classes[c].i && std::max(a, b) == classes[c].j)
                    T((dy + s) * side + dx + s, c) = 1.0;
            }
    const Vector orbit_sizes = T.colwise().sum().transpose();

    // First differences inside the kernel support.
    std::vector<std::pair<int, int>> pairs;
    for (int y = 0; y < side; ++y)
        for (int x = 0; x < side; ++x) {
            if (x + 1 < side) pairs.emplace_back(y * side + x, y * side + x + 1);
            if (y + 1 < side) pairs.emplace_back(y * side + x, (y + 1) * side + x);
        }
    Matrix Dk = Matrix::Zero(static_cast<Eigen::Index>(pairs.size()), side * side);
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        Dk(static_cast<Eigen::Index>(k), pairs[k].first) = -1.0;
        Dk(static_cast<Eigen::Index>(k), pairs[k].second) = 1.0;
    }
    const Matrix kernel_penalty = (Dk * T).transpose() * (Dk * T);

    // Degraded high resolution features, one per orbit class.
    auto pattern = [&](int i) {
        std::vector<double> taps(static_cast<std::size_t>(side), 0.0);
        taps[static_cast<std::size_t>(s + i)] = 1.0;
        taps[static_cast<std::size_t>(s - i)] = 1.0;
        return taps;
    };
    std::vector<Matrix> row_ops, col_ops;
    for (int i = 0; i <= s; ++i) {
        const std::vector<double> taps = pattern(i);
        row_ops.push_back(axis_operator(ms.height(), std::span<const double>(taps), ratio, phase));
        col_ops.push_back(axis_operator(ms.width(), std::span<const double>(taps), ratio, phase));
    }
    std::vector<Matrix> features;
    for (const OrbitClass& oc : classes) {
        Matrix f = apply_separable(ms.data(), ms.height(), ms.width(), row_ops[oc.i], col_ops[oc.j]);
        if (oc.i != oc.j) f += apply_separable(ms.data(), ms.height(), ms.width(), row_ops[oc.j], col_ops[oc.i]);
        features.push_back(std::move(f));
    }
    Matrix gram(nc, nc);
    for (int a = 0; a < nc; ++a)
        for (int b = a; b < nc; ++b) gram(a, b) = gram(b, a) = (features[a].array() * features[b].array()).sum();

    // Spectral smoothness D D^T (path Laplacian).
    Matrix lap = Matrix::Zero(m, m);
    for (int k = 0; k + 1 < m; ++k) {
        lap(k, k) += 1.0;
        lap(k + 1, k + 1) += 1.0;
        lap(k, k + 1) -= 1.0;
        lap(k + 1, k) -= 1.0;
    }
    const Matrix C = yh * yh.transpose() + lambda_r * lap;
    const double lipschitz = 2.0 * Eigen::SelfAdjointEigenSolver<Matrix>(C, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();

    auto blurred = [&](const Vector& theta) {
        Matrix out = Matrix::Zero(nl, hs.pixels());
        for (int c = 0; c < nc; ++c) out += theta[c] * features[c];
        return out;
    };
    auto objective = [&](const Vector& theta, const Matrix& R) {
        double v = (R * yh - blurred(theta)).squaredNorm() + lambda_b * theta.dot(kernel_penalty * theta);
        if (m > 1) v += lambda_r * (R * lap * R.transpose()).trace();
        return v;
    };

    Vector theta = Vector::Zero(nc);
    theta[0] = 1.0;  // impulse
    Matrix R = Matrix::Constant(nl, m, 1.0 / m);

    SensorEstimate est;
    est.objective.push_back(objective(theta, R));
    for (int it = 0; it < max_alternations; ++it) {
        // Kernel step: equality-constrained least squares.
        const Matrix target = R * yh;
        Vector g(nc);
        for (int c = 0; c < nc; ++c) g[c] = (features[c].array() * target.array()).sum();
        Matrix kkt = Matrix::Zero(nc + 1, nc + 1);
        kkt.topLeftCorner(nc, nc) = gram + lambda_b * kernel_penalty;
        kkt.topRightCorner(nc, 1) = orbit_sizes;
        kkt.bottomLeftCorner(1, nc) = orbit_sizes.transpose();
        Vector rhs(nc + 1);
        rhs.head(nc) = g;
        rhs[nc] = 1.0;
        const Vector sol = kkt.fullPivLu().solve(rhs);
        Vector theta_next = sol.head(nc);
        // Keep the previous kernel if the solve does not improve the objective (rank-deficient features).
        if (!theta_next.allFinite() || objective(theta_next, R) > objective(theta, R)) theta_next = theta;

        // Response step: each row independently on the simplex.
        const Matrix blurred_ms = blurred(theta_next);
        Matrix R_next = R;
        for (int l = 0; l < nl; ++l) {
            const RowVector d = blurred_ms.row(l) * yh.transpose();
            R_next.row(l) = simplex_quadratic(C, d, R.row(l), lipschitz);
        }

        const double dtheta = (theta_next - theta).norm() / std::max(theta.norm(), 1e-300);
        const double dR = (R_next - R).norm() / std::max(R.norm(), 1e-300);
        theta = theta_next;
        R = R_next;
        ++est.alternations;
        est.objective.push_back(objective(theta, R));
        if (std::max(dtheta, dR) < tol) break;
    }

    est.response = R;
    Matrix k2(side, side);
    const Vector kvec = T * theta;
    for (int y = 0; y < side; ++y)
        for (int x = 0; x < side; ++x) k2(y, x) = kvec[y * side + x];
    est.kernel_2d = k2;

    std::vector<double> taps(static_cast<std::size_t>(side));
    for (int y = 0; y < side; ++y) taps[static_cast<std::size_t>(y)] = std::max(0.0, k2.row(y).sum());
    for (int y = 0; y < s; ++y) {
        const double avg = 0.5 * (taps[static_cast<std::size_t>(y)] + taps[static_cast<std::size_t>(side - 1 - y)]);
        taps[static_cast<std::size_t>(y)] = taps[static_cast<std::size_t>(side - 1 - y)] = avg;
    }
    double total = 0.0;
    for (double t : taps) total += t;
    if (!(total > 0.0)) throw std::runtime_error("estimated kernel has no positive mass");
    for (double& t : taps) t /= total;
    double off_centre = 0.0;
    for (int y = 0; y < side; ++y)
        if (y != s) off_centre += taps[static_cast<std::size_t>(y)];
    taps[static_cast<std::size_t>(s)] = 1.0 - off_centre;
    est.kernel = BlurKernel(std::move(taps));
    return est;
}

}  // namespace hsfuse
