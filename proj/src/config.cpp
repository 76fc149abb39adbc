#include "hsfuse/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <istream>
#include <sstream>

namespace hsfuse {

namespace {

std::string trim(std::string s) {
    auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double to_double(const std::string& key, const std::string& text) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected a number, got '" + text + "'");
    }
}

long long to_int(const std::string& key, const std::string& text) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected an integer, got '" + text + "'");
    }
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, sep)) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

bool to_bool(const std::string& key, const std::string& text) {
    if (text == "true" || text == "on" || text == "1" || text == "wall") return true;
    if (text == "false" || text == "off" || text == "0") return false;
    throw ConfigError("key '" + key + "': expected on/off, got '" + text + "'");
}

}  // namespace

const std::vector<MethodInfo>& method_registry() {
    static const std::vector<MethodInfo> registry = {
        {"SFIM", {}},
        {"MTF-GLP", {"gnyq"}},
        {"MTF-GLP-HPM", {"gnyq"}},
        {"GS", {}},
        {"GSA", {}},
        {"PCA", {}},
        {"GFPCA", {"components", "radius", "epsilon", "tau"}},
        {"CNMF", {"endmembers", "outer_iters", "inner_iters", "delta", "tol"}},
        {"BayesNaive", {"subspace", "lambda", "tol", "max_iters", "sigma_rounds", "noise_floor"}},
        {"HySure", {"subspace", "lambda_m", "lambda_phi", "admm_mu", "max_iters", "tol"}},
    };
    return registry;
}

const MethodInfo* find_method(std::string_view name) {
    for (const MethodInfo& m : method_registry())
        if (m.name == name) return &m;
    return nullptr;
}

NoiseSpec NoiseSpec::parse(const std::string& text) {
    const std::string t = trim(text);
    if (t == "none") return {};
    const auto colon = t.find(':');
    if (colon != std::string::npos) {
        const std::string kind = t.substr(0, colon);
        const double v = to_double("noise", trim(t.substr(colon + 1)));
        if (!(v >= 0.0) && kind == "std") throw ConfigError("noise std must be nonnegative");
        if (kind == "snr") return {Kind::snr, v};
        if (kind == "std") return {Kind::std, v};
    }
    throw ConfigError("noise spec must be none, snr:<dB> or std:<value>, got '" + t + "'");
}

std::string NoiseSpec::str() const {
    switch (kind) {
        case Kind::none: return "none";
        case Kind::snr: return "snr:" + fmt(value);
        case Kind::std: return "std:" + fmt(value);
    }
    return "none";
}

PanResponseSpec PanResponseSpec::parse(const std::string& text) {
    const std::string t = trim(text);
    PanResponseSpec s;
    if (t == "auto") return s;
    if (t.rfind("range:", 0) == 0) {
        const std::string body = t.substr(6);
        const auto dash = body.find('-', 1);
        if (dash == std::string::npos) throw ConfigError("pan_response range must be range:<lo>-<hi>");
        s.kind = Kind::range;
        s.lo = to_double("pan_response", trim(body.substr(0, dash)));
        s.hi = to_double("pan_response", trim(body.substr(dash + 1)));
        if (!(s.lo < s.hi)) throw ConfigError("pan_response range must have lo < hi");
        return s;
    }
    if (t.rfind("weights:", 0) == 0) {
        s.kind = Kind::weights;
        for (const std::string& w : split(t.substr(8), ',')) {
            const double v = to_double("pan_response", w);
            if (!(v >= 0.0)) throw ConfigError("pan_response weights must be nonnegative");
            s.weights.push_back(v);
        }
        if (s.weights.empty()) throw ConfigError("pan_response weights list is empty");
        return s;
    }
    throw ConfigError("pan_response must be auto, range:<lo>-<hi> or weights:<list>, got '" + t + "'");
}

std::string PanResponseSpec::str() const {
    switch (kind) {
        case Kind::automatic: return "auto";
        case Kind::range: return "range:" + fmt(lo) + "-" + fmt(hi);
        case Kind::weights: {
            std::string out = "weights:";
            for (std::size_t i = 0; i < weights.size(); ++i) out += (i ? "," : "") + fmt(weights[i]);
            return out;
        }
    }
    return "auto";
}

bool operator==(const RunConfig& a, const RunConfig& b) {
    auto range_eq = [](const std::optional<DynamicRange>& x, const std::optional<DynamicRange>& y) {
        if (x.has_value() != y.has_value()) return false;
        return !x || (x->lo == y->lo && x->hi == y->hi);
    };
    return a.input == b.input && a.scene_endmembers == b.scene_endmembers && a.scene_height == b.scene_height &&
           a.scene_width == b.scene_width && a.scene_bands == b.scene_bands && a.ratio == b.ratio &&
           a.gnyq == b.gnyq && a.pan_response == b.pan_response && a.hs_noise == b.hs_noise &&
           a.pan_noise == b.pan_noise && a.methods == b.methods && a.seed == b.seed && a.output_dir == b.output_dir &&
           a.threads == b.threads && a.timing == b.timing && range_eq(a.range, b.range);
}

void RunConfig::validate() const {
    if (ratio < 2) throw ConfigError("ratio must be >= 2 for fusion runs");
    if (!(gnyq > 0.0 && gnyq < 1.0)) throw ConfigError("gnyq must lie in (0, 1)");
    if (threads < 1) throw ConfigError("threads must be >= 1");
    if (input == "synthetic") {
        if (scene_endmembers < 1) throw ConfigError("scene_endmembers must be >= 1");
        if (scene_height % ratio != 0 || scene_width % ratio != 0)
            throw ConfigError("scene dimensions must be divisible by the ratio");
        if (scene_bands < 1) throw ConfigError("scene_bands must be >= 1");
    }
    for (const MethodSpec& m : methods) {
        const MethodInfo* info = find_method(m.name);
        if (info == nullptr) throw ConfigError("unknown method '" + m.name + "'");
        for (const auto& [key, value] : m.params) {
            if (std::find(info->params.begin(), info->params.end(), key) == info->params.end())
                throw ConfigError("method " + m.name + " has no parameter '" + key + "'");
        }
    }
}

const MethodSpec* RunConfig::method(std::string_view name) const {
    for (const MethodSpec& m : methods)
        if (m.name == name) return &m;
    return nullptr;
}

RunConfig default_config() {
    RunConfig c;
    for (const MethodInfo& m : method_registry()) c.methods.push_back({std::string(m.name), {}});
    return c;
}

void apply_setting(RunConfig& c, const std::string& key, const std::string& raw) {
    const std::string value = trim(raw);
    if (key == "input") {
        if (value.empty()) throw ConfigError("key 'input' is empty");
        c.input = value;
    } else if (key == "scene_endmembers") {
        c.scene_endmembers = static_cast<int>(to_int(key, value));
    } else if (key == "scene_height") {
        c.scene_height = static_cast<int>(to_int(key, value));
    } else if (key == "scene_width") {
        c.scene_width = static_cast<int>(to_int(key, value));
    } else if (key == "scene_bands") {
        c.scene_bands = static_cast<int>(to_int(key, value));
    } else if (key == "ratio") {
        c.ratio = static_cast<int>(to_int(key, value));
    } else if (key == "gnyq") {
        c.gnyq = to_double(key, value);
    } else if (key == "pan_response") {
        c.pan_response = PanResponseSpec::parse(value);
    } else if (key == "hs_noise") {
        c.hs_noise = NoiseSpec::parse(value);
    } else if (key == "pan_noise") {
        c.pan_noise = NoiseSpec::parse(value);
    } else if (key == "methods") {
        std::vector<MethodSpec> methods;
        for (const std::string& name : split(value, ',')) {
            if (find_method(name) == nullptr) throw ConfigError("unknown method '" + name + "'");
            const MethodSpec* existing = c.method(name);
            methods.push_back(existing ? *existing : MethodSpec{name, {}});
        }
        c.methods = std::move(methods);
    } else if (key == "seed") {
        const long long s = to_int(key, value);
        if (s < 0) throw ConfigError("seed must be nonnegative");
        c.seed = static_cast<std::uint64_t>(s);
    } else if (key == "output_dir") {
        c.output_dir = value;
    } else if (key == "threads") {
        c.threads = static_cast<int>(to_int(key, value));
    } else if (key == "timing") {
        c.timing = to_bool(key, value);
    } else if (key == "range") {
        if (value == "auto") {
            c.range.reset();
        } else {
            const std::vector<std::string> parts = split(value, ',');
            if (parts.size() != 2) throw ConfigError("range must be auto or <lo>,<hi>");
            const double lo = to_double(key, parts[0]);
            const double hi = to_double(key, parts[1]);
            if (!(lo < hi)) throw ConfigError("range must have lo < hi");
            c.range = DynamicRange(lo, hi);
        }
    } else {
        throw ConfigError("unknown key '" + key + "'");
    }
}

RunConfig parse_config(std::istream& in) {
    RunConfig c = default_config();
    std::map<std::string, std::map<std::string, double>> sections;
    std::string section;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto comment = line.find_first_of("#;");
        if (comment != std::string::npos) line.erase(comment);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("line " + std::to_string(line_no) + ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            const MethodInfo* info = find_method(section);
            if (info == nullptr) throw ConfigError("line " + std::to_string(line_no) + ": unknown method '" + section + "'");
            sections[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            if (section.empty()) {
                apply_setting(c, key, value);
            } else {
                const MethodInfo* info = find_method(section);
                if (std::find(info->params.begin(), info->params.end(), key) == info->params.end())
                    throw ConfigError("method " + section + " has no parameter '" + key + "'");
                sections[section][key] = to_double(key, value);
            }
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    for (MethodSpec& m : c.methods) {
        const auto it = sections.find(m.name);
        if (it != sections.end()) m.params = it->second;
    }
    c.validate();
    return c;
}

RunConfig parse_config_text(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    return parse_config(in);
}

std::string echo_config(const RunConfig& c) {
    std::ostringstream out;
    out << "input = " << c.input << "\n";
    out << "scene_endmembers = " << c.scene_endmembers << "\n";
    out << "scene_height = " << c.scene_height << "\n";
    out << "scene_width = " << c.scene_width << "\n";
    out << "scene_bands = " << c.scene_bands << "\n";
    out << "ratio = " << c.ratio << "\n";
    out << "gnyq = " << fmt(c.gnyq) << "\n";
    out << "pan_response = " << c.pan_response.str() << "\n";
    out << "hs_noise = " << c.hs_noise.str() << "\n";
    out << "pan_noise = " << c.pan_noise.str() << "\n";
    out << "methods = ";
    for (std::size_t i = 0; i < c.methods.size(); ++i) out << (i ? ", " : "") << c.methods[i].name;
    out << "\n";
    out << "seed = " << c.seed << "\n";
    out << "output_dir = " << c.output_dir << "\n";
    out << "threads = " << c.threads << "\n";
    out << "timing = " << (c.timing ? "on" : "off") << "\n";
    out << "range = " << (c.range ? fmt(c.range->lo) + "," + fmt(c.range->hi) : std::string("auto")) << "\n";
    for (const MethodSpec& m : c.methods) {
        if (m.params.empty()) continue;
        out << "\n[" << m.name << "]\n";
        for (const auto& [key, value] : m.params) out << key << " = " << fmt(value) << "\n";
    }
    return out.str();
}

}  // namespace hsfuse
