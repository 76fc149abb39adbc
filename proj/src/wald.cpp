#include "hsfuse/wald.hpp"

#include "hsfuse/bayes.hpp"
#include "hsfuse/cnmf.hpp"
#include "hsfuse/cs.hpp"
#include "hsfuse/gfpca.hpp"
#include "hsfuse/hysure.hpp"
#include "hsfuse/mra.hpp"
#include "hsfuse/raster_io.hpp"
#include "hsfuse/scene.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <thread>

namespace hsfuse {

namespace {

double param(const MethodSpec& m, const std::string& key, double fallback) {
    const auto it = m.params.find(key);
    return it == m.params.end() ? fallback : it->second;
}

int int_param(const MethodSpec& m, const std::string& key, int fallback) {
    const double v = param(m, key, fallback);
    if (v != std::floor(v)) throw ConfigError("method " + m.name + ": parameter '" + key + "' must be an integer");
    return static_cast<int>(v);
}

std::vector<double> noise_levels(const NoiseSpec& spec, const SpectralImage& img) {
    switch (spec.kind) {
        case NoiseSpec::Kind::none: return std::vector<double>(static_cast<std::size_t>(img.bands()), 0.0);
        case NoiseSpec::Kind::snr: return noise_std_for_snr(img, spec.value);
        case NoiseSpec::Kind::std: return std::vector<double>(static_cast<std::size_t>(img.bands()), spec.value);
    }
    return {};
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

RowVector resolve_pan_response(const PanResponseSpec& spec, const SpectralImage& img) {
    const int m = img.bands();
    switch (spec.kind) {
        case PanResponseSpec::Kind::automatic: return default_pan_response(img);
        case PanResponseSpec::Kind::range: {
            if (!img.has_wavelengths()) throw ConfigError("pan_response range needs band wavelengths");
            RowVector r = RowVector::Zero(m);
            for (int k = 0; k < m; ++k) {
                const double wl = img.wavelengths()[static_cast<std::size_t>(k)];
                if (wl >= spec.lo && wl <= spec.hi) r[k] = 1.0;
            }
            if (r.sum() == 0.0) throw ConfigError("pan_response range selects no band");
            return r / r.sum();
        }
        case PanResponseSpec::Kind::weights: {
            if (static_cast<int>(spec.weights.size()) != m)
                throw ConfigError("pan_response lists " + std::to_string(spec.weights.size()) + " weights for " +
                                  std::to_string(m) + " bands");
            RowVector r = Eigen::Map<const RowVector>(spec.weights.data(), m);
            if (!(r.sum() > 0.0)) throw ConfigError("pan_response weights sum to zero");
            return r / r.sum();
        }
    }
    return default_pan_response(img);
}

DynamicRange default_range(const SpectralImage& hs) {
    const double lo = std::min(0.0, hs.data().minCoeff());
    const double hi = hs.data().maxCoeff();
    return DynamicRange(lo, hi > lo ? hi + (hi - lo) : lo + 1.0);
}

SpectralImage load_reference(const RunConfig& config) {
    if (config.input == "synthetic")
        return synth_scene(config.seed, config.scene_endmembers, config.scene_height, config.scene_width,
                           config.scene_bands)
            .image;
    return load_raster(config.input);
}

WaldInputs degrade_reference(const SpectralImage& reference, const RunConfig& config) {
    if (config.ratio < 2) throw ConfigError("ratio must be >= 2 for fusion runs");
    if (reference.height() % config.ratio != 0 || reference.width() % config.ratio != 0)
        throw ConfigError("reference dimensions " + std::to_string(reference.height()) + "x" +
                          std::to_string(reference.width()) + " are not divisible by ratio " +
                          std::to_string(config.ratio));
    WaldInputs in;
    in.reference = reference;
    in.model.ratio = config.ratio;
    in.model.phase = default_phase(config.ratio);
    in.model.blur = kernel_from_mtf(config.ratio, config.gnyq);
    in.model.spectral_response = resolve_pan_response(config.pan_response, reference);

    const SpectralImage hs_clean = blur_downsample(reference, in.model.blur, in.model.ratio, in.model.phase);
    const SpectralImage pan_clean = apply_response(reference, in.model.spectral_response);
    in.model.hs_noise_std = noise_levels(config.hs_noise, hs_clean);
    in.model.pan_noise_std = noise_levels(config.pan_noise, pan_clean).front();
    in.hs = add_gaussian_noise(hs_clean, in.model.hs_noise_std, derive_seed(config.seed, 0x100));
    const std::vector<double> pan_std{in.model.pan_noise_std};
    in.pan = add_gaussian_noise(pan_clean, pan_std, derive_seed(config.seed, 0x101));
    in.range = config.range ? *config.range : default_range(in.hs);
    return in;
}

SpectralImage run_method(const MethodSpec& method, const SpectralImage& hs, const SpectralImage& pan,
                         const SensorModel& model, const DynamicRange& range, double gnyq, std::uint64_t seed,
                         std::map<std::string, double>* settings) {
    std::map<std::string, double> used;
    const int ratio = model.ratio;
    SpectralImage out;
    const std::string& name = method.name;
    if (name == "SFIM") {
        out = fuse_sfim(hs, pan, ratio, range);
    } else if (name == "MTF-GLP" || name == "MTF-GLP-HPM") {
        const double g = param(method, "gnyq", gnyq);
        used["gnyq"] = g;
        out = name == "MTF-GLP" ? fuse_mtf_glp(hs, pan, ratio, g, range) : fuse_mtf_glp_hpm(hs, pan, ratio, g, range);
    } else if (name == "GS") {
        out = fuse_gs(hs, pan, ratio);
    } else if (name == "GSA") {
        out = fuse_gsa(hs, pan, ratio, model.blur);
    } else if (name == "PCA") {
        out = fuse_pca(hs, pan, ratio);
    } else if (name == "GFPCA") {
        GfpcaOptions opt;
        if (method.params.count("components")) opt.components = int_param(method, "components", 0);
        if (method.params.count("radius")) opt.radius = int_param(method, "radius", 0);
        if (method.params.count("epsilon")) opt.epsilon = param(method, "epsilon", 0.0);
        if (method.params.count("tau")) opt.tau = param(method, "tau", 0.0);
        for (const auto& [k, v] : method.params) used[k] = v;
        out = fuse_gfpca(hs, pan, ratio, opt);
    } else if (name == "CNMF") {
        CnmfOptions opt;
        opt.endmembers = int_param(method, "endmembers", opt.endmembers);
        opt.outer_iters = int_param(method, "outer_iters", opt.outer_iters);
        opt.inner_iters = int_param(method, "inner_iters", opt.inner_iters);
        opt.delta = param(method, "delta", opt.delta);
        opt.tol = param(method, "tol", opt.tol);
        opt.seed = seed;
        used = {{"endmembers", opt.endmembers}, {"outer_iters", opt.outer_iters}, {"inner_iters", opt.inner_iters},
                {"delta", opt.delta}, {"tol", opt.tol}};
        out = fuse_cnmf(hs, pan, model, opt);
    } else if (name == "BayesNaive") {
        const int p = int_param(method, "subspace", default_subspace_dim(hs));
        BayesNaiveOptions opt;
        opt.lambda = param(method, "lambda", opt.lambda);
        opt.tol = param(method, "tol", opt.tol);
        opt.max_iters = int_param(method, "max_iters", opt.max_iters);
        opt.sigma_rounds = int_param(method, "sigma_rounds", opt.sigma_rounds);
        opt.noise_floor = param(method, "noise_floor", opt.noise_floor);
        used = {{"subspace", p},
                {"lambda", opt.lambda},
                {"tol", opt.tol},
                {"max_iters", opt.max_iters},
                {"sigma_rounds", opt.sigma_rounds},
                {"noise_floor", opt.noise_floor}};
        const SubspaceBasis basis = learn_subspace(hs, p);
        const BayesNaivePriors priors = naive_priors(hs, basis, ratio, model.phase);
        out = fuse_bayes_naive(hs, pan, model, basis, priors, opt);
    } else if (name == "HySure") {
        const int p = int_param(method, "subspace", default_subspace_dim(hs));
        HySureParams hp;
        hp.lambda_m = param(method, "lambda_m", hp.lambda_m);
        if (method.params.count("lambda_phi")) hp.lambda_phi = param(method, "lambda_phi", 0.0);
        hp.admm_mu = param(method, "admm_mu", hp.admm_mu);
        hp.max_iters = int_param(method, "max_iters", hp.max_iters);
        hp.tol = param(method, "tol", hp.tol);
        hp.range = range;
        const SubspaceBasis basis = learn_subspace(hs, p);
        used = {{"subspace", p},
                {"lambda_m", hp.lambda_m},
                {"lambda_phi", hysure_lambda_phi(hp, hs)},
                {"admm_mu", hp.admm_mu},
                {"max_iters", hp.max_iters},
                {"tol", hp.tol}};
        out = fuse_hysure(hs, pan, basis, model, hp);
    } else {
        throw ConfigError("unknown method '" + name + "'");
    }
    if (settings) *settings = std::move(used);
    return out;
}

PercentileSpectrum percentile_spectrum(const SpectralImage& estimate, const SpectralImage& reference,
                                       const SpectralImage& error_map, double q) {
    if (error_map.bands() != 1 || error_map.pixels() != reference.pixels() || estimate.pixels() != reference.pixels())
        throw std::invalid_argument("percentile selection needs matching images and a 1-band error map");
    const RowVector& values = error_map.data().row(0);
    std::vector<double> sorted(values.data(), values.data() + values.size());
    std::sort(sorted.begin(), sorted.end());
    const auto n = static_cast<long>(sorted.size());
    long rank = static_cast<long>(std::ceil(q / 100.0 * static_cast<double>(n)));
    rank = std::clamp(rank, 1L, n);
    const double target = sorted[static_cast<std::size_t>(rank - 1)];
    PercentileSpectrum out;
    out.q = q;
    out.error = target;
    for (Eigen::Index j = 0; j < values.size(); ++j)
        if (values[j] == target) {
            out.pixel = j;
            break;
        }
    for (int k = 0; k < reference.bands(); ++k) {
        out.reference.push_back(reference.data()(k, out.pixel));
        out.estimate.push_back(estimate.data()(k, out.pixel));
    }
    return out;
}

bool BenchmarkReport::all_ok() const {
    return std::all_of(methods.begin(), methods.end(), [](const MethodOutcome& m) { return m.ok; });
}

BenchmarkReport run_wald(const RunConfig& config) {
    config.validate();
    const SpectralImage reference = load_reference(config);
    return run_wald(config, degrade_reference(reference, config));
}

BenchmarkReport run_wald(const RunConfig& config, const WaldInputs& inputs) {
    config.validate();
    BenchmarkReport report;
    report.config = config;
    report.noise_generator = std::string(kNoiseGenerator);
    report.methods.resize(config.methods.size());

    // Defaults that depend on the run rather than on the images.
    std::vector<MethodSpec> specs = config.methods;
    for (MethodSpec& m : specs)
        if (m.name == "CNMF" && !m.params.count("endmembers") && config.input == "synthetic")
            m.params["endmembers"] = config.scene_endmembers;

    const double d = 1.0 / config.ratio;
    auto work = [&](std::size_t i) {
        MethodOutcome& out = report.methods[i];
        out.name = specs[i].name;
        try {
            const auto start = std::chrono::steady_clock::now();
            out.fused = run_method(specs[i], inputs.hs, inputs.pan, inputs.model, inputs.range, config.gnyq,
                                   derive_seed(config.seed, i), &out.settings);
            const auto stop = std::chrono::steady_clock::now();
            out.quality = evaluate(out.fused, inputs.reference, d);
            out.quality.wall_time_s = config.timing ? std::chrono::duration<double>(stop - start).count() : 0.0;
            for (double q : {10.0, 50.0, 90.0})
                out.percentiles.push_back(percentile_spectrum(out.fused, inputs.reference, out.quality.rmse_map, q));
            const bool finite = std::isfinite(out.quality.cc) && std::isfinite(out.quality.sam_deg) &&
                                std::isfinite(out.quality.rmse) && std::isfinite(out.quality.ergas);
            if (!finite) throw std::runtime_error("non-finite quality metrics");
            out.ok = true;
        } catch (const std::exception& e) {
            out.ok = false;
            out.error = e.what();
        }
    };

    const std::size_t count = specs.size();
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(config.threads), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) work(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < workers; ++t)
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < count; i = next++) work(i);
            });
        for (std::thread& th : pool) th.join();
    }
    return report;
}

}  // namespace hsfuse
