#pragma once

#include "hsfuse/image.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hsfuse {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct MethodInfo {
    std::string_view name;
    std::vector<std::string_view> params;  // accepted per-method keys
};

/// Fusion methods known to the harness, in report order.
const std::vector<MethodInfo>& method_registry();
const MethodInfo* find_method(std::string_view name);

/// "none", "snr:<dB>" or "std:<value>".
struct NoiseSpec {
    enum class Kind { none, snr, std } kind = Kind::none;
    double value = 0.0;

    static NoiseSpec parse(const std::string& text);
    std::string str() const;
    friend bool operator==(const NoiseSpec&, const NoiseSpec&) = default;
};

/// "auto", "range:<lo>-<hi>" (um) or "weights:<w1>,<w2>,...".
struct PanResponseSpec {
    enum class Kind { automatic, range, weights } kind = Kind::automatic;
    double lo = 0.0;
    double hi = 0.0;
    std::vector<double> weights;

    static PanResponseSpec parse(const std::string& text);
    std::string str() const;
    friend bool operator==(const PanResponseSpec&, const PanResponseSpec&) = default;
};

struct MethodSpec {
    std::string name;
    std::map<std::string, double> params;
    friend bool operator==(const MethodSpec&, const MethodSpec&) = default;
};

struct RunConfig {
    std::string input = "synthetic";  // "synthetic" or an ENVI header path
    int scene_endmembers = 3;
    int scene_height = 100;
    int scene_width = 100;
    int scene_bands = 60;
    int ratio = 5;
    double gnyq = 0.3;
    PanResponseSpec pan_response;
    NoiseSpec hs_noise{NoiseSpec::Kind::snr, 30.0};
    NoiseSpec pan_noise{NoiseSpec::Kind::snr, 30.0};
    std::vector<MethodSpec> methods;
    std::uint64_t seed = 0;
    std::string output_dir = ".";
    int threads = 1;
    bool timing = true;                  // false writes time_s = 0 for byte-stable reports
    std::optional<DynamicRange> range;   // clipping range; default derived from the HS image

    /// Throws ConfigError when a field is out of range.
    void validate() const;
    const MethodSpec* method(std::string_view name) const;

    friend bool operator==(const RunConfig& a, const RunConfig& b);
};

/// Config with every registered method and all defaults.
RunConfig default_config();

/// Line-oriented "key = value" text; "[Method]" opens a method section; '#' and ';' start comments.
RunConfig parse_config(std::istream& in);
RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

/// Sets one top-level key as if it appeared in a config file.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);

/// Canonical text that parses back to an equal config.
std::string echo_config(const RunConfig& config);

}  // namespace hsfuse
