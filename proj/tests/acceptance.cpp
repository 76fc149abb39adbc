// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include "oracles.hpp"

#include "hsfuse/bayes.hpp"
#include "hsfuse/cnmf.hpp"
#include "hsfuse/cs.hpp"
#include "hsfuse/gfpca.hpp"
#include "hsfuse/hysure.hpp"
#include "hsfuse/metrics.hpp"
#include "hsfuse/mra.hpp"
#include "hsfuse/resample.hpp"
#include "hsfuse/scene.hpp"
#include "hsfuse/sensor.hpp"
#include "hsfuse/wald.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#ifndef HSFUSE_CLI_PATH
#define HSFUSE_CLI_PATH "hsfuse"
#endif

using namespace hsfuse;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double rel_fro(const Matrix& a, const Matrix& b) { return (a - b).norm() / b.norm(); }

bool non_increasing(const std::vector<double>& v, double slack, double* worst = nullptr) {
    bool ok = true;
    double w = 0.0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        const double rise = (v[i] - v[i - 1]) / std::max(std::abs(v[i - 1]), 1e-300);
        w = std::max(w, rise);
        if (rise > slack) ok = false;
    }
    if (worst) *worst = w;
    return ok;
}

SensorModel pan_model(int ratio, double gnyq, const Matrix& response) {
    SensorModel m;
    m.ratio = ratio;
    m.phase = default_phase(ratio);
    m.blur = kernel_from_mtf(ratio, gnyq);
    m.spectral_response = response;
    return m;
}

// 1 --------------------------------------------------------------------------
Outcome metric_oracles() {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 gen(1);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const SpectralImage a = oracle::random_image(4, 8, 8, gen, 0.1, 1.1);
        const SpectralImage b = oracle::random_image(4, 8, 8, gen, 0.1, 1.1);
        worst = std::max({worst, oracle::rel_diff(cc(a, b), oracle::cc(a, b)),
                          oracle::rel_diff(sam(a, b), oracle::sam_deg(a, b)),
                          oracle::rel_diff(rmse(a, b), oracle::rmse(a, b)),
                          oracle::rel_diff(ergas(a, b, 0.2), oracle::ergas(a, b, 0.2))});
        o.require(cc(a, a) == 1.0 && sam(a, a) == 0.0 && rmse(a, a) == 0.0 && ergas(a, a, 0.2) == 0.0,
                  "ideal values not exact");
    }
    const double elapsed = seconds_since(t0);
    o.require(worst <= 1e-12, "oracle mismatch " + fmt("%.3g", worst));
    o.require(elapsed < 1.0, "runtime " + fmt("%.3g s", elapsed));
    o.detail = (o.pass ? "" : o.detail + "; ") + "max rel diff " + fmt("%.2g", worst) + ", " + fmt("%.3f s", elapsed);
    return o;
}

// 2 --------------------------------------------------------------------------
Outcome degradation_oracles() {
    Outcome o;
    std::mt19937_64 gen(2);
    double worst = 0.0;
    const std::vector<std::pair<int, BlurKernel>> cases = {
        {5, BlurKernel({0.25, 0.5, 0.25})}, {5, kernel_from_mtf(5, 0.3)}, {2, kernel_from_mtf(2, 0.3)}};
    for (const auto& [ratio, kernel] : cases) {
        const SpectralImage x = oracle::random_image(3, 10, 10, gen);
        for (int phase = 0; phase < ratio; ++phase) {
            const SpectralImage low = blur_downsample(x, kernel, ratio, phase);
            for (int k = 0; k < 3; ++k) {
                const Matrix ref = oracle::conv_decimate(x.band_grid(k), kernel.taps(), ratio, phase);
                worst = std::max(worst, (low.band_grid(k) - ref).cwiseAbs().maxCoeff() / ref.cwiseAbs().maxCoeff());
            }
        }
    }
    const SpectralImage x = oracle::random_image(4, 10, 10, gen);
    std::vector<double> r = {0.1, 0.4, 0.2, 0.3};
    const SpectralImage p = synth_pan(x, r);
    const Matrix pref = oracle::pan(x, r);
    worst = std::max(worst, (p.band_grid(0) - pref).cwiseAbs().maxCoeff() / pref.cwiseAbs().maxCoeff());
    o.require(worst <= 1e-12, "oracle mismatch " + fmt("%.3g", worst));

    const double response = oracle::dtft(kernel_from_mtf(5, 0.3).taps(), std::numbers::pi / 5.0);
    o.require(std::abs(response - 0.3) <= 0.02, "Nyquist response " + fmt("%.4f", response));
    if (o.pass) o.detail = "max rel diff " + fmt("%.2g", worst) + ", Nyquist response " + fmt("%.4f", response);
    return o;
}

// 3 --------------------------------------------------------------------------
Outcome zero_detail() {
    Outcome o;
    std::mt19937_64 gen(3);
    const int ratio = 5;
    const SpectralImage hs = oracle::random_image(6, 6, 6, gen, 0.2, 1.0);
    const SpectralImage up = upsample(hs, ratio, Interp::bicubic);
    const DynamicRange wide(-100.0, 100.0);
    const SpectralImage flat(30, 30, Matrix::Constant(1, 900, 0.55));

    // CS: a constant PAN cannot equal the matched intensity of a non-flat HS image, so the
    // PAN is taken as a positive affine copy of the intensity itself (P == matched O_L).
    auto affine = [](const RowVector& intensity) {
        return SpectralImage(30, 30, Matrix((2.0 * intensity.array() + 0.3).matrix()));
    };
    const Vector uniform = Vector::Constant(6, 1.0 / 6.0);
    const SpectralImage pan_gs = affine(uniform.transpose() * up.data());
    const Vector first = PcaTransform::fit(up.data()).loadings().row(0).transpose();
    const SpectralImage pan_pca = affine(first.transpose() * up.data());
    const RowVector r = (Vector(6) << 0.1, 0.3, 0.05, 0.25, 0.2, 0.1).finished().transpose();
    const SpectralImage pan_gsa(30, 30, Matrix(r * up.data()));

    const std::vector<std::pair<std::string, std::function<SpectralImage()>>> methods = {
        {"PCA", [&] { return fuse_pca(hs, pan_pca, ratio); }},
        {"GS", [&] { return fuse_gs(hs, pan_gs, ratio); }},
        {"GSA", [&] { return fuse_gsa(hs, pan_gsa, ratio, BlurKernel::impulse()); }},
        {"SFIM", [&] { return fuse_sfim(hs, flat, ratio, wide); }},
        {"MTF-GLP", [&] { return fuse_mtf_glp(hs, flat, ratio, 0.3, wide); }},
        {"MTF-GLP-HPM", [&] { return fuse_mtf_glp_hpm(hs, flat, ratio, 0.3, wide); }},
    };
    double worst = 0.0;
    for (const auto& [name, run] : methods) {
        try {
            const double err = (run().data() - up.data()).cwiseAbs().maxCoeff();
            worst = std::max(worst, err);
            o.require(err <= 1e-10, name + " deviates by " + fmt("%.3g", err));
        } catch (const std::exception& e) {
            o.require(false, name + " threw: " + e.what());
        }
    }
    if (o.pass) o.detail = "6 methods, max deviation " + fmt("%.2g", worst);
    return o;
}

// 4 --------------------------------------------------------------------------
Outcome gsa_weight_recovery() {
    Outcome o;
    const int ratio = 5;
    // Five endmembers over five bands: the scene has full spectral rank, so r is identifiable.
    const SpectralImage xr = synth_scene(4, 5, 40, 40, 5).image;
    const std::vector<double> r = {0.05, 0.35, 0.3, 0.2, 0.1};
    const SpectralImage pan = synth_pan(xr, r);
    const SpectralImage hs = blur_downsample(xr, BlurKernel::impulse(), ratio, default_phase(ratio));
    const Vector w = gsa_weights(hs, pan, ratio, BlurKernel::impulse(), default_phase(ratio));
    double err = 0.0;
    for (int k = 0; k < 5; ++k) err = std::max(err, std::abs(w[k] - r[static_cast<std::size_t>(k)]));
    o.require(err <= 1e-6, "weight error " + fmt("%.3g", err));
    o.detail = (o.pass ? std::string() : o.detail + "; ") + "linf " + fmt("%.2g", err);
    return o;
}

// 5 --------------------------------------------------------------------------
Outcome guided_filter_oracle() {
    Outcome o;
    std::mt19937_64 gen(5);
    double worst = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
        const Matrix p = oracle::random_matrix(8, 8, gen);
        const Matrix g = oracle::random_matrix(8, 8, gen);
        for (double eps : {0.0, 0.01}) {
            const Matrix out = guided_filter(p, g, GuidedFilterParams{1, eps});
            const Matrix ref = oracle::guided_filter(p, g, 1, eps);
            worst = std::max(worst, (out - ref).cwiseAbs().maxCoeff());
        }
    }
    o.require(worst <= 1e-10, "oracle mismatch " + fmt("%.3g", worst));

    // 2x2 image with radius 1: every pixel sees the one full window.
    Matrix g(2, 2), p(2, 2);
    g << 0.0, 1.0, 2.0, 3.0;
    p << 0.25, 0.25, 0.75, 1.75;  // 0.5 g plus a residual orthogonal to g and 1
    const GuidedCoefficients c = guided_coefficients(p, g, GuidedFilterParams{1, 0.0});
    const Matrix out = guided_filter(p, g, GuidedFilterParams{1, 0.0});
    const double a = c.a(0, 0);
    bool exact = (c.a.array() == a).all();
    exact = exact && out(0, 1) - out(0, 0) == a * (g(0, 1) - g(0, 0));
    exact = exact && out(1, 0) - out(0, 0) == a * (g(1, 0) - g(0, 0));
    exact = exact && out(1, 1) - out(1, 0) == a * (g(1, 1) - g(1, 0));
    o.require(exact, "gradient identity not exact on the single-window instance");
    if (o.pass) o.detail = "max abs diff " + fmt("%.2g", worst) + ", single-window a = " + fmt("%.6g", a);
    return o;
}

// 6 --------------------------------------------------------------------------
Outcome cnmf_check() {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    const int ratio = 5;
    // Every pixel pure: three diagonal bands of the generator's spectra. Only two materials
    // meet at any interface, so the single PAN band separates them.
    const SyntheticScene scene = synth_scene(6, 3, 40, 40, 30);
    Matrix U = Matrix::Zero(3, 1600);
    for (int y = 0; y < 40; ++y)
        for (int x = 0; x < 40; ++x) U(x + y < 27 ? 0 : x + y < 53 ? 1 : 2, y * 40 + x) = 1.0;
    const SpectralImage x(40, 40, scene.endmembers * U, scene.image.wavelengths());
    const SensorModel model = pan_model(ratio, 0.3, default_pan_response(x));
    const SpectralImage hs = blur_downsample(x, model.blur, ratio, model.phase);
    const SpectralImage pan = apply_response(x, model.spectral_response);

    CnmfOptions mono;
    mono.inner_iters = 100;
    mono.tol = 0.0;  // run all 100 iterations of every stage
    const CnmfResult traced = solve_cnmf(hs, pan, model, mono);
    double worst = 0.0;
    for (const CnmfStageTrace& st : traced.stages) {
        double w = 0.0;
        o.require(st.objective.size() >= 101, "stage stopped early");
        o.require(non_increasing(st.objective, 1e-9, &w), "objective increased");
        worst = std::max(worst, w);
    }

    CnmfOptions opt;
    opt.outer_iters = 4;
    opt.inner_iters = 3000;
    opt.tol = 1e-9;
    const CnmfResult res = solve_cnmf(hs, pan, model, opt);
    const double range = x.data().maxCoeff() - x.data().minCoeff();
    const double err = rmse(res.fused, x);
    const double elapsed = seconds_since(t0);
    o.require(err <= 0.01 * range, "RMSE " + fmt("%.4g", err / range) + " of range");
    o.require(elapsed < 30.0, "runtime " + fmt("%.3g s", elapsed));
    o.detail = (o.pass ? std::string() : o.detail + "; ") + "RMSE " + fmt("%.3g", 100.0 * err / range) +
               "% of range, " + std::to_string(traced.stages.size()) + " traced stages, worst rise " +
               fmt("%.2g", worst) + ", " + fmt("%.2f s", elapsed);
    return o;
}

// 7 --------------------------------------------------------------------------
Outcome bayes_exactness() {
    Outcome o;
    const int ratio = 5;
    // Three endmembers mixed as abar + d t(x) with zero-sum d and a white texture t(x):
    // the scene varies along one abundance direction, which the PAN observes.
    const SyntheticScene scene = synth_scene(7, 3, 40, 40, 30);
    std::mt19937_64 tex_gen(7);
    const Matrix texture = oracle::random_matrix(1, 1600, tex_gen, -1.0, 1.0);
    const Vector abar = (Vector(3) << 0.4, 0.35, 0.25).finished();
    const Vector d = (Vector(3) << 0.15, -0.05, -0.1).finished();
    const Matrix abundances = abar.replicate(1, 1600) + d * texture;
    const SpectralImage x(40, 40, scene.endmembers * abundances, scene.image.wavelengths());
    const SensorModel model = pan_model(ratio, 0.3, default_pan_response(x));
    const SpectralImage hs = blur_downsample(x, model.blur, ratio, model.phase);
    const SpectralImage pan = apply_response(x, model.spectral_response);
    // Sum-to-one abundances of 3 endmembers span a 2-D affine subspace.
    const SubspaceBasis basis = learn_subspace(hs, 2);
    const Matrix residual = x.data() - basis.reconstruct(basis.project(x.data()));
    o.require(residual.norm() <= 1e-8 * x.data().norm(), "reference not in the learned subspace");

    const BayesNaivePriors priors = naive_priors(hs, basis, ratio, model.phase);
    BayesNaiveResult res;
    try {
        res = solve_bayes_naive(hs, pan, model, basis, priors);
    } catch (const std::exception& e) {
        o.require(false, std::string("solver threw: ") + e.what());
        return o;
    }
    const double rel = rel_fro(res.fused.data(), x.data());
    o.require(rel <= 1e-3, "relative RMSE " + fmt("%.3g", rel));

    const BayesNaivePriors final_priors{priors.mu, res.sigma};
    const double lambda = BayesNaiveOptions{}.lambda;
    const double g_end = naive_gradient(res.U, hs, pan, model, basis, final_priors, lambda).norm();
    const double g_start = naive_gradient(priors.mu, hs, pan, model, basis, final_priors, lambda).norm();
    o.require(g_end <= 1e-6 * g_start, "gradient ratio " + fmt("%.3g", g_end / g_start));

    // Finite-difference spot check of the analytic gradient on 5 coordinates.
    auto reg = [&](const Matrix& U) { return gaussian_prior_energy(U, final_priors); };
    auto f = [&](const Matrix& U) { return negative_log_posterior(U, hs, pan, model, basis, reg, lambda); };
    const Matrix U0 = priors.mu;
    const Matrix g0 = naive_gradient(U0, hs, pan, model, basis, final_priors, lambda);
    std::mt19937_64 gen(7);
    std::uniform_int_distribution<Eigen::Index> pick(0, U0.size() - 1);
    double fd_worst = 0.0;
    for (int t = 0; t < 5; ++t) {
        const Eigen::Index idx = pick(gen);
        const double step = 1e-4 * std::max(1.0, std::abs(U0(idx)));
        Matrix up = U0, dn = U0;
        up(idx) += step;
        dn(idx) -= step;
        const double fd = (f(up) - f(dn)) / (2.0 * step);
        fd_worst = std::max(fd_worst, std::abs(fd - g0(idx)) / std::max(std::abs(g0(idx)), 1e-8 * g0.norm()));
    }
    o.require(fd_worst <= 1e-4, "finite-difference mismatch " + fmt("%.3g", fd_worst));
    o.detail = (o.pass ? std::string() : o.detail + "; ") + "relative RMSE " + fmt("%.2g", rel) +
               ", gradient ratio " + fmt("%.2g", g_end / g_start) + ", fd rel err " + fmt("%.2g", fd_worst);
    return o;
}

// 8 --------------------------------------------------------------------------

/// Dense minimizer of the lambda_phi = 0 objective, built from explicit operator matrices.

Outcome hysure_check() {
    Outcome o;
    const int ratio = 4;
    const SyntheticScene scene = synth_scene(8, 3, 16, 16, 12);
    const SpectralImage& x = scene.image;
    Matrix R = Matrix::Zero(2, 12);
    R.row(0).head(6).setConstant(1.0 / 6.0);
    R.row(1).tail(6).setConstant(1.0 / 6.0);
    const SensorModel model = pan_model(ratio, 0.3, R);
    std::mt19937_64 gen(8);
    const SpectralImage hs_clean = blur_downsample(x, model.blur, ratio, model.phase);
    const SpectralImage hs = hs_clean.with_data(hs_clean.data() + 1e-3 * oracle::random_matrix(12, 16, gen, -1, 1));
    const SpectralImage ms0 = apply_response(x, R);
    const SpectralImage ms = ms0.with_data(ms0.data() + 1e-3 * oracle::random_matrix(2, 256, gen, -1, 1));
    const SubspaceBasis basis = learn_subspace(hs, 2);

    HySureParams params;
    params.lambda_phi = 0.0;
    params.max_iters = 5000;
    params.tol = 1e-12;
    const HySureResult res = solve_hysure(hs, ms, basis, model, params);
    const Matrix ref = oracle::subspace_least_squares(hs, ms, model.blur.taps(), model.ratio, model.phase,
                                                        model.spectral_response, basis.H, basis.offset,
                                                        params.lambda_m);
    const double rel = rel_fro(res.fused.data(), ref);
    o.require(rel <= 1e-4, "oracle mismatch " + fmt("%.3g", rel));

    double rise0 = 0.0, rise1 = 0.0;
    o.require(non_increasing(res.objective, 1e-7, &rise0), "objective trace rises (lambda_phi = 0)");
    HySureParams def;
    const HySureResult res_tv = solve_hysure(hs, ms, basis, model, def);
    o.require(non_increasing(res_tv.objective, 1e-7, &rise1), "objective trace rises (default lambda_phi)");

    // Vector total variation hand values.
    o.require(vtv(Matrix::Constant(3, 64, 2.5), 8, 8) == 0.0, "vtv of a constant image is not 0");
    Matrix step = Matrix::Zero(1, 64);
    for (int y = 0; y < 8; ++y)
        for (int xx = 4; xx < 8; ++xx) step(0, y * 8 + xx) = 3.5;
    o.require(vtv(step, 8, 8) == 2.0 * 8 * 3.5, "step edge vtv " + fmt("%.17g", vtv(step, 8, 8)));
    o.detail = (o.pass ? std::string() : o.detail + "; ") + "oracle rel err " + fmt("%.2g", rel) + " (" +
               std::to_string(res.iterations) + " it), worst rise " + fmt("%.2g", std::max(rise0, rise1));
    return o;
}

// 9 --------------------------------------------------------------------------
Outcome sensor_estimation() {
    Outcome o;
    const int ratio = 4;
    const int bands = 8;
    // Full-rank smooth random reference so that the response is identifiable.
    std::mt19937_64 gen(9);
    const SpectralImage noise = oracle::random_image(bands, 12, 12, gen);
    const SpectralImage x = upsample(noise, ratio, Interp::bicubic);
    const BlurKernel truth({0.05, 0.25, 0.4, 0.25, 0.05});
    RowVector r = RowVector::Constant(bands, 1.0 / bands);
    const SpectralImage hs = blur_downsample(x, truth, ratio, default_phase(ratio));
    const SpectralImage ms = apply_response(x, r);
    const SensorEstimate est = estimate_sensor(hs, ms, 5, 0.0, 1e-3, default_phase(ratio));
    double kerr = 0.0;
    for (int t = 0; t < 5; ++t) kerr = std::max(kerr, std::abs(est.kernel.taps()[t] - truth.taps()[t]));
    const double rerr = (est.response - r).cwiseAbs().maxCoeff();
    o.require(kerr <= 1e-3, "kernel error " + fmt("%.3g", kerr));
    o.require(rerr <= 1e-3, "response error " + fmt("%.3g", rerr));
    o.detail = (o.pass ? std::string() : o.detail + "; ") + "kernel linf " + fmt("%.2g", kerr) + ", response linf " +
               fmt("%.2g", rerr) + ", " + std::to_string(est.alternations) + " alternations";
    return o;
}

// 10 -------------------------------------------------------------------------
Outcome wald_consistency() {
    Outcome o;
    RunConfig c = default_config();
    c.hs_noise = NoiseSpec{};
    c.pan_noise = NoiseSpec{};
    const WaldInputs in = degrade_reference(load_reference(c), c);
    std::string summary;
    for (const char* name : {"BayesNaive", "HySure", "CNMF"}) {
        try {
            MethodSpec spec{name, {}};
            if (std::string(name) == "CNMF") spec.params["endmembers"] = c.scene_endmembers;
            const SpectralImage fused = run_method(spec, in.hs, in.pan, in.model, in.range, c.gnyq, 0);
            const SpectralImage low = blur_downsample(fused, in.model.blur, in.model.ratio, in.model.phase);
            const double rel = rel_fro(low.data(), in.hs.data());
            o.require(rel <= 0.05, std::string(name) + " consistency " + fmt("%.3g", rel));
            summary += std::string(summary.empty() ? "" : ", ") + name + " " + fmt("%.2g", rel);
        } catch (const std::exception& e) {
            o.require(false, std::string(name) + " threw: " + e.what());
        }
    }
    o.detail = (o.pass ? std::string() : o.detail + "; ") + summary;
    return o;
}

// 11 -------------------------------------------------------------------------
Outcome benchmark_ordering() {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    const BenchmarkReport report = run_wald(default_config());
    const double elapsed = seconds_since(t0);
    auto score = [&](const std::string& name) {
        for (const MethodOutcome& m : report.methods)
            if (m.name == name) {
                if (!m.ok) throw std::runtime_error(name + " failed: " + m.error);
                return m.quality.rmse;
            }
        throw std::runtime_error(name + " missing from the report");
    };
    try {
        const double bayes = score("BayesNaive"), pca = score("PCA"), gfpca = score("GFPCA"), cnmf = score("CNMF");
        o.require(bayes < pca, "BayesNaive not below PCA");
        o.require(bayes < gfpca, "BayesNaive not below GFPCA");
        o.require(cnmf < pca, "CNMF not below PCA");
        o.require(report.all_ok(), "some method failed");
        o.detail = (o.pass ? std::string() : o.detail + "; ") + "RMSE BayesNaive " + fmt("%.4g", bayes) + ", PCA " +
                   fmt("%.4g", pca) + ", GFPCA " + fmt("%.4g", gfpca) + ", CNMF " + fmt("%.4g", cnmf);
    } catch (const std::exception& e) {
        o.require(false, e.what());
    }
    o.require(elapsed < 120.0, "benchmark took " + fmt("%.1f s", elapsed));
    o.detail += ", " + fmt("%.1f s", elapsed);
    return o;
}

// 12 -------------------------------------------------------------------------
std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome determinism() {
    Outcome o;
    const std::filesystem::path root = std::filesystem::temp_directory_path() / "hsfuse_acceptance_determinism";
    std::filesystem::remove_all(root);
    std::vector<std::string> reports;
    for (const char* run : {"a", "b"}) {
        const std::filesystem::path dir = root / run;
        const std::string cmd = std::string("\"") + HSFUSE_CLI_PATH + "\" bench --seed 11 --threads 2 --timing off " +
                                "--output-dir \"" + dir.string() + "\" > /dev/null 2>&1";
        const int rc = std::system(cmd.c_str());
        o.require(rc == 0, std::string("bench run ") + run + " exited with " + std::to_string(rc));
        reports.push_back(slurp(dir / "report.csv"));
    }
    o.require(!reports[0].empty(), "empty report");
    o.require(reports[0] == reports[1], "reports differ");
    std::filesystem::remove_all(root);
    if (o.pass) o.detail = std::to_string(reports[0].size()) + " identical bytes";
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"metric oracle equivalence", metric_oracles},
        {"degradation oracle", degradation_oracles},
        {"zero-detail fixed points", zero_detail},
        {"GSA weight recovery", gsa_weight_recovery},
        {"guided-filter oracle", guided_filter_oracle},
        {"CNMF monotonicity and recovery", cnmf_check},
        {"naive Bayesian exactness", bayes_exactness},
        {"HySure oracle, monotonicity, VTV", hysure_check},
        {"blind sensor estimation", sensor_estimation},
        {"Wald consistency", wald_consistency},
        {"benchmark ordering and runtime", benchmark_ordering},
        {"end-to-end determinism", determinism},
    };
    int failed = 0;
    int index = 0;
    for (const auto& [name, check] : criteria) {
        ++index;
        Outcome out;
        try {
            out = check();
        } catch (const std::exception& e) {
            out.pass = false;
            out.detail = std::string("exception: ") + e.what();
        }
        if (!out.pass) ++failed;
        std::printf("%s %2d %s: %s\n", out.pass ? "PASS" : "FAIL", index, name, out.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
