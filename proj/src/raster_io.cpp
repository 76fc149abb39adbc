#include "hsfuse/raster_io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <vector>

namespace hsfuse {

static_assert(std::endian::native == std::endian::little, "raster I/O assumes a little-endian host");

namespace {

std::string trim(std::string s) {
    auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::map<std::string, std::string> parse_header(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw RasterError("cannot open header " + path.string());
    std::string line;
    if (!std::getline(in, line) || trim(line) != "ENVI") throw RasterError(path.string() + ": missing ENVI magic line");
    std::map<std::string, std::string> fields;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw RasterError(path.string() + ": malformed header line '" + trim(line) + "'");
        const std::string key = lower(trim(line.substr(0, eq)));
        std::string value = trim(line.substr(eq + 1));
        if (!value.empty() && value.front() == '{') {
            while (value.find('}') == std::string::npos) {
                std::string more;
                if (!std::getline(in, more)) throw RasterError(path.string() + ": unterminated block for key '" + key + "'");
                value += " " + trim(more);
            }
            value = trim(value.substr(1, value.find('}') - 1));
        }
        fields[key] = value;
    }
    return fields;
}

long parse_int(const std::map<std::string, std::string>& fields, const std::string& key, std::optional<long> fallback) {
    const auto it = fields.find(key);
    if (it == fields.end()) {
        if (fallback) return *fallback;
        throw RasterError("header key '" + key + "' is missing");
    }
    try {
        std::size_t used = 0;
        const long v = std::stol(it->second, &used);
        if (used != it->second.size()) throw std::invalid_argument(key);
        return v;
    } catch (const std::exception&) {
        throw RasterError("header key '" + key + "' has non-integer value '" + it->second + "'");
    }
}

std::vector<double> parse_list(const std::string& key, const std::string& value) {
    std::vector<double> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw RasterError("header key '" + key + "' has non-numeric entry '" + item + "'");
        }
    }
    return out;
}

std::filesystem::path find_payload(const std::filesystem::path& header) {
    std::filesystem::path stem = header;
    stem.replace_extension();
    for (const std::filesystem::path& candidate :
         {std::filesystem::path(stem).replace_extension(".img"), stem, std::filesystem::path(stem).replace_extension(".dat")}) {
        if (candidate != header && std::filesystem::is_regular_file(candidate)) return candidate;
    }
    throw RasterError("no payload found next to " + header.string());
}

}  // namespace

std::filesystem::path raster_payload_path(const std::filesystem::path& header_path) {
    std::filesystem::path p = header_path;
    p.replace_extension(".img");
    return p;
}

SpectralImage load_raster(const std::filesystem::path& header_path) {
    const auto fields = parse_header(header_path);
    const long samples = parse_int(fields, "samples", std::nullopt);
    const long lines = parse_int(fields, "lines", std::nullopt);
    const long bands = parse_int(fields, "bands", std::nullopt);
    if (samples < 1) throw RasterError("header key 'samples' must be positive");
    if (lines < 1) throw RasterError("header key 'lines' must be positive");
    if (bands < 1) throw RasterError("header key 'bands' must be positive");
    const long type = parse_int(fields, "data type", std::nullopt);
    if (type != 4 && type != 5) throw RasterError("header key 'data type' has unsupported value " + std::to_string(type));
    const long order = parse_int(fields, "byte order", 0L);
    if (order != 0) throw RasterError("header key 'byte order' has unsupported value " + std::to_string(order));
    const long offset = parse_int(fields, "header offset", 0L);
    if (offset < 0) throw RasterError("header key 'header offset' must be nonnegative");
    if (const auto it = fields.find("interleave"); it != fields.end() && lower(it->second) != "bsq")
        throw RasterError("header key 'interleave' has unsupported value '" + it->second + "'");

    std::vector<double> wavelengths;
    if (const auto it = fields.find("wavelength"); it != fields.end()) {
        wavelengths = parse_list("wavelength", it->second);
        if (static_cast<long>(wavelengths.size()) != bands)
            throw RasterError("header key 'wavelength' lists " + std::to_string(wavelengths.size()) +
                              " values for " + std::to_string(bands) + " bands");
        if (const auto u = fields.find("wavelength units"); u != fields.end()) {
            const std::string units = lower(u->second);
            if (units == "nanometers" || units == "nanometres" || units == "nm") {
                for (double& w : wavelengths) w /= 1000.0;
            } else if (units != "micrometers" && units != "micrometres" && units != "um" && units != "microns") {
                throw RasterError("header key 'wavelength units' has unsupported value '" + u->second + "'");
            }
        }
    }

    const std::filesystem::path payload = find_payload(header_path);
    const std::size_t sample_size = type == 4 ? 4 : 8;
    const std::uintmax_t count = static_cast<std::uintmax_t>(samples) * lines * bands;
    const std::uintmax_t expected = static_cast<std::uintmax_t>(offset) + count * sample_size;
    const std::uintmax_t actual = std::filesystem::file_size(payload);
    if (actual != expected)
        throw RasterError("payload " + payload.string() + " has " + std::to_string(actual) + " bytes, header implies " +
                          std::to_string(expected));

    std::ifstream in(payload, std::ios::binary);
    if (!in) throw RasterError("cannot open payload " + payload.string());
    in.seekg(offset);
    std::vector<char> bytes(count * sample_size);
    in.read(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!in) throw RasterError("short read from " + payload.string());

    const long pixels = samples * lines;
    Matrix data(bands, pixels);
    for (long b = 0; b < bands; ++b)
        for (long j = 0; j < pixels; ++j) {
            const std::size_t idx = static_cast<std::size_t>(b * pixels + j);
            if (type == 4) {
                float v;
                std::memcpy(&v, bytes.data() + idx * 4, 4);
                data(b, j) = static_cast<double>(v);
            } else {
                double v;
                std::memcpy(&v, bytes.data() + idx * 8, 8);
                data(b, j) = v;
            }
        }
    try {
        return SpectralImage(static_cast<int>(lines), static_cast<int>(samples), std::move(data), std::move(wavelengths));
    } catch (const std::invalid_argument& e) {
        throw RasterError(header_path.string() + ": " + e.what());
    }
}

void save_raster(const SpectralImage& img, const std::filesystem::path& header_path, SampleType type) {
    const int code = static_cast<int>(type);
    {
        std::ofstream out(header_path, std::ios::binary | std::ios::trunc);
        if (!out) throw RasterError("cannot write header " + header_path.string());
        out << "ENVI\n";
        out << "samples = " << img.width() << "\n";
        out << "lines = " << img.height() << "\n";
        out << "bands = " << img.bands() << "\n";
        out << "header offset = 0\n";
        out << "file type = ENVI Standard\n";
        out << "data type = " << code << "\n";
        out << "interleave = bsq\n";
        out << "byte order = 0\n";
        if (img.has_wavelengths()) {
            out << "wavelength units = Micrometers\n";
            out << "wavelength = {";
            char buf[32];
            for (std::size_t k = 0; k < img.wavelengths().size(); ++k) {
                std::snprintf(buf, sizeof buf, "%.17g", img.wavelengths()[k]);
                out << (k == 0 ? "" : ", ") << buf;
            }
            out << "}\n";
        }
        if (!out) throw RasterError("failed writing header " + header_path.string());
    }
    const std::filesystem::path payload = raster_payload_path(header_path);
    std::ofstream out(payload, std::ios::binary | std::ios::trunc);
    if (!out) throw RasterError("cannot write payload " + payload.string());
    const Matrix& d = img.data();
    const std::size_t size = type == SampleType::float32 ? 4 : 8;
    std::vector<char> bytes(static_cast<std::size_t>(d.size()) * size);
    for (Eigen::Index b = 0; b < d.rows(); ++b)
        for (Eigen::Index j = 0; j < d.cols(); ++j) {
            const std::size_t idx = static_cast<std::size_t>(b * d.cols() + j);
            if (type == SampleType::float32) {
                const float v = static_cast<float>(d(b, j));
                std::memcpy(bytes.data() + idx * 4, &v, 4);
            } else {
                const double v = d(b, j);
                std::memcpy(bytes.data() + idx * 8, &v, 8);
            }
        }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw RasterError("failed writing payload " + payload.string());
}

}  // namespace hsfuse
