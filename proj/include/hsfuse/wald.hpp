#pragma once

#include "hsfuse/config.hpp"
#include "hsfuse/image.hpp"
#include "hsfuse/metrics.hpp"
#include "hsfuse/sensor.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace hsfuse {

/// Reference image and its simulated observations.
struct WaldInputs {
    SpectralImage reference;
    SpectralImage hs;
    SpectralImage pan;
    SensorModel model;
    DynamicRange range;
};

/// PAN response row for an image under a config spec.
RowVector resolve_pan_response(const PanResponseSpec& spec, const SpectralImage& img);

/// Default clipping range: [min(0, min Y_H), max Y_H + (max Y_H - lo)].
DynamicRange default_range(const SpectralImage& hs);

/// Blur + decimate + noise for the HS image, spectral response + noise for the PAN.
WaldInputs degrade_reference(const SpectralImage& reference, const RunConfig& config);

/// Reference image named by the config (synthetic scene or raster).
SpectralImage load_reference(const RunConfig& config);

/// Seed for stream @p index derived from the run seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

/// Runs one registered method. @p settings receives the resolved solver settings.
SpectralImage run_method(const MethodSpec& method, const SpectralImage& hs, const SpectralImage& pan,
                         const SensorModel& model, const DynamicRange& range, double gnyq, std::uint64_t seed,
                         std::map<std::string, double>* settings = nullptr);

struct PercentileSpectrum {
    double q = 0.0;
    Eigen::Index pixel = 0;
    double error = 0.0;
    std::vector<double> reference;
    std::vector<double> estimate;
};

/// Nearest-rank percentile pixel of @p error_map (ties: lowest index) with both spectra there.
PercentileSpectrum percentile_spectrum(const SpectralImage& estimate, const SpectralImage& reference,
                                       const SpectralImage& error_map, double q);

struct MethodOutcome {
    std::string name;
    bool ok = false;
    std::string error;
    QualityReport quality;
    std::map<std::string, double> settings;
    std::vector<PercentileSpectrum> percentiles;  // q = 10, 50, 90
    SpectralImage fused;
};

struct BenchmarkReport {
    RunConfig config;
    std::string noise_generator;
    std::vector<MethodOutcome> methods;

    bool all_ok() const;
};

BenchmarkReport run_wald(const RunConfig& config);
BenchmarkReport run_wald(const RunConfig& config, const WaldInputs& inputs);

}  // namespace hsfuse
