#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "protoflow/geometry.hpp"

namespace protoflow {

struct Rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;

    friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// "#rrggbb", lowercase.
std::string to_hex(Rgb color);
/// Accepts "#rrggbb" in either case.
Rgb parse_hex(std::string_view text);
/// True iff `text` matches ^#[0-9a-f]{6}$.
bool is_hex_color(std::string_view text);

/// 8-bit RGB raster, row-major, no padding.
class RasterImage {
public:
    RasterImage() = default;
    RasterImage(int width, int height, Rgb fill = {});
    RasterImage(int width, int height, std::vector<std::uint8_t> pixels);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    bool empty() const noexcept { return width_ == 0 || height_ == 0; }

    Rgb at(int x, int y) const;
    void set(int x, int y, Rgb color);
    /// Fills the intersection of `rect` with the image.
    void fill_rect(const BBox& rect, Rgb color);
    /// Copies out `rect`; throws if it is empty or leaves the image.
    RasterImage crop(const BBox& rect) const;

    std::span<const std::uint8_t> pixels() const noexcept { return pixels_; }

    friend bool operator==(const RasterImage&, const RasterImage&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> pixels_;
};

std::vector<std::uint8_t> encode_png(const RasterImage& image);
RasterImage decode_png(std::span<const std::uint8_t> data);

std::string base64_encode(std::span<const std::uint8_t> data);
std::vector<std::uint8_t> base64_decode(std::string_view text);

inline std::string png_base64(const RasterImage& image) {
    return base64_encode(encode_png(image));
}

inline RasterImage image_from_png_base64(std::string_view text) {
    return decode_png(base64_decode(text));
}

}  // namespace protoflow
