#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace svtas {

struct RgbImage {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<std::uint8_t> pixels; // interleaved RGB, row-major
};

// Any PNG colour type is converted to 8-bit RGB. DataError on failure.
RgbImage read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const RgbImage& image);

} // namespace svtas
