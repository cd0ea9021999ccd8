#include "svtas/png_io.hpp"

#include <cstring>
#include <png.h>

#include "svtas/errors.hpp"

namespace svtas {

RgbImage read_png(const std::filesystem::path& path) {
    png_image img;
    std::memset(&img, 0, sizeof img);
    img.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&img, path.c_str()))
        throw DataError("cannot read PNG " + path.string() + ": " + img.message);
    img.format = PNG_FORMAT_RGB;
    RgbImage out;
    out.height = img.height;
    out.width = img.width;
    out.pixels.resize(PNG_IMAGE_SIZE(img));
    if (!png_image_finish_read(&img, nullptr, out.pixels.data(), 0, nullptr)) {
        std::string msg = img.message;
        png_image_free(&img);
        throw DataError("cannot decode PNG " + path.string() + ": " + msg);
    }
    return out;
}

void write_png(const std::filesystem::path& path, const RgbImage& image) {
    if (image.pixels.size() != image.height * image.width * 3)
        throw DataError("write_png: pixel buffer does not match " + std::to_string(image.height) + "x" +
                        std::to_string(image.width));
    png_image img;
    std::memset(&img, 0, sizeof img);
    img.version = PNG_IMAGE_VERSION;
    img.width = png_uint_32(image.width);
    img.height = png_uint_32(image.height);
    img.format = PNG_FORMAT_RGB;
    if (!png_image_write_to_file(&img, path.c_str(), 0, image.pixels.data(), 0, nullptr))
        throw DataError("cannot write PNG " + path.string() + ": " + img.message);
}

} // namespace svtas
