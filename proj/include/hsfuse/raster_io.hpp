#pragma once

#include "hsfuse/image.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>

namespace hsfuse {

/// Malformed header, unsupported value, or payload/size mismatch.
class RasterError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class SampleType { float32 = 4, float64 = 5 };

/**
 * Reads an ENVI-style header (samples, lines, bands, data type 4 or 5,
 * interleave bsq, byte order 0, optional header offset and wavelength block)
 * and its little-endian payload. The payload is looked up next to the
 * header as <stem>.img, <stem> or <stem>.dat. Wavelengths in nanometres are
 * converted to micrometres.
 */
SpectralImage load_raster(const std::filesystem::path& header_path);

/// Writes <header_path> and <stem>.img. Output bytes depend only on the image.
void save_raster(const SpectralImage& img, const std::filesystem::path& header_path,
                 SampleType type = SampleType::float64);

/// Payload path written by save_raster for a header path.
std::filesystem::path raster_payload_path(const std::filesystem::path& header_path);

}  // namespace hsfuse
