#include "protoflow/image.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cstring>

#include "protoflow/error.hpp"

namespace protoflow {

namespace {

int hex_digit(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

// (a * num + den / 2) / den, for non-negative a.
int scale_round_half_up(int a, int num, int den) {
    const long long scaled = 2LL * a * num + den;
    return static_cast<int>(scaled / (2LL * den));
}

}  // namespace

BBox scale_to_image(const BBox& box, const Canvas& canvas, int image_width, int image_height) {
    if (canvas.width <= 0 || canvas.height <= 0) throw ValidationError("canvas must be positive", "canvas");
    auto x0 = std::clamp(scale_round_half_up(box.x, image_width, canvas.width), 0, image_width);
    auto y0 = std::clamp(scale_round_half_up(box.y, image_height, canvas.height), 0, image_height);
    auto x1 = std::clamp(scale_round_half_up(box.x + box.w, image_width, canvas.width), 0, image_width);
    auto y1 = std::clamp(scale_round_half_up(box.y + box.h, image_height, canvas.height), 0, image_height);
    return {x0, y0, std::max(0, x1 - x0), std::max(0, y1 - y0)};
}

std::string to_hex(Rgb color) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out = "#000000";
    const std::array<std::uint8_t, 3> channels{color.r, color.g, color.b};
    for (std::size_t i = 0; i < 3; ++i) {
        out[1 + 2 * i] = digits[channels[i] >> 4];
        out[2 + 2 * i] = digits[channels[i] & 0xf];
    }
    return out;
}

Rgb parse_hex(std::string_view text) {
    if (text.size() != 7 || text[0] != '#') throw ValidationError("invalid hex color '" + std::string(text) + "'");
    std::array<std::uint8_t, 3> channels{};
    for (std::size_t i = 0; i < 3; ++i) {
        const int hi = hex_digit(text[1 + 2 * i]);
        const int lo = hex_digit(text[2 + 2 * i]);
        if (hi < 0 || lo < 0) throw ValidationError("invalid hex color '" + std::string(text) + "'");
        channels[i] = static_cast<std::uint8_t>(hi * 16 + lo);
    }
    return {channels[0], channels[1], channels[2]};
}

bool is_hex_color(std::string_view text) {
    if (text.size() != 7 || text[0] != '#') return false;
    return std::all_of(text.begin() + 1, text.end(),
                       [](char c) { return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'); });
}

RasterImage::RasterImage(int width, int height, Rgb fill) : width_(width), height_(height) {
    if (width < 0 || height < 0) throw ValidationError("image size must be non-negative");
    pixels_.resize(static_cast<std::size_t>(width) * height * 3);
    for (std::size_t i = 0; i < pixels_.size(); i += 3) {
        pixels_[i] = fill.r;
        pixels_[i + 1] = fill.g;
        pixels_[i + 2] = fill.b;
    }
}

RasterImage::RasterImage(int width, int height, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
    if (width < 0 || height < 0 || pixels_.size() != static_cast<std::size_t>(width) * height * 3)
        throw ValidationError("pixel buffer does not match image size");
}

Rgb RasterImage::at(int x, int y) const {
    const auto i = (static_cast<std::size_t>(y) * width_ + x) * 3;
    return {pixels_[i], pixels_[i + 1], pixels_[i + 2]};
}

void RasterImage::set(int x, int y, Rgb color) {
    const auto i = (static_cast<std::size_t>(y) * width_ + x) * 3;
    pixels_[i] = color.r;
    pixels_[i + 1] = color.g;
    pixels_[i + 2] = color.b;
}

void RasterImage::fill_rect(const BBox& rect, Rgb color) {
    const int x0 = std::max(0, rect.x), y0 = std::max(0, rect.y);
    const int x1 = std::min(width_, rect.x + rect.w), y1 = std::min(height_, rect.y + rect.h);
    for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) set(x, y, color);
}

RasterImage RasterImage::crop(const BBox& rect) const {
    if (rect.w < 1 || rect.h < 1) throw ValidationError("degenerate crop region");
    if (rect.x < 0 || rect.y < 0 || rect.x + rect.w > width_ || rect.y + rect.h > height_)
        throw ValidationError("crop region outside image");
    std::vector<std::uint8_t> out(static_cast<std::size_t>(rect.w) * rect.h * 3);
    const auto row_bytes = static_cast<std::size_t>(rect.w) * 3;
    for (int y = 0; y < rect.h; ++y) {
        const auto src = (static_cast<std::size_t>(rect.y + y) * width_ + rect.x) * 3;
        std::memcpy(out.data() + y * row_bytes, pixels_.data() + src, row_bytes);
    }
    return RasterImage(rect.w, rect.h, std::move(out));
}

namespace {

struct PngReadCursor {
    std::span<const std::uint8_t> data;
    std::size_t offset = 0;
};

void png_write_to_vector(png_structp png, png_bytep data, png_size_t length) {
    auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
    out->insert(out->end(), data, data + length);
}

void png_read_from_span(png_structp png, png_bytep data, png_size_t length) {
    auto* cursor = static_cast<PngReadCursor*>(png_get_io_ptr(png));
    if (cursor->offset + length > cursor->data.size()) png_error(png, "truncated PNG stream");
    std::memcpy(data, cursor->data.data() + cursor->offset, length);
    cursor->offset += length;
}

}  // namespace

std::vector<std::uint8_t> encode_png(const RasterImage& image) {
    if (image.empty()) throw ValidationError("cannot encode an empty image");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw Error("png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    std::vector<std::uint8_t> out;
    if (!info || setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw Error("PNG encoding failed");
    }
    png_set_write_fn(png, &out, png_write_to_vector, nullptr);
    png_set_IHDR(png, info, static_cast<png_uint_32>(image.width()), static_cast<png_uint_32>(image.height()), 8,
                 PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    const auto pixels = image.pixels();
    const auto row_bytes = static_cast<std::size_t>(image.width()) * 3;
    for (int y = 0; y < image.height(); ++y)
        png_write_row(png, const_cast<png_bytep>(pixels.data() + y * row_bytes));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return out;
}

RasterImage decode_png(std::span<const std::uint8_t> data) {
    if (data.size() < 8 || png_sig_cmp(data.data(), 0, 8) != 0) throw ValidationError("not a PNG stream");
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw Error("png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    PngReadCursor cursor{data, 0};
    std::vector<std::uint8_t> pixels;
    png_uint_32 width = 0, height = 0;
    if (!info || setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw ValidationError("corrupt PNG stream");
    }
    png_set_read_fn(png, &cursor, png_read_from_span);
    png_read_info(png, info);
    width = png_get_image_width(png, info);
    height = png_get_image_height(png, info);
    const auto color_type = png_get_color_type(png, info);
    if (png_get_bit_depth(png, info) == 16) png_set_strip_16(png);
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_gray_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_strip_alpha(png);
    png_read_update_info(png, info);
    const auto row_bytes = static_cast<std::size_t>(width) * 3;
    if (png_get_rowbytes(png, info) != row_bytes) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw ValidationError("unsupported PNG pixel layout");
    }
    pixels.resize(row_bytes * height);
    std::vector<png_bytep> rows(height);
    for (png_uint_32 y = 0; y < height; ++y) rows[y] = pixels.data() + y * row_bytes;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return RasterImage(static_cast<int>(width), static_cast<int>(height), std::move(pixels));
}

namespace {
constexpr std::string_view kBase64Alphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
}

std::string base64_encode(std::span<const std::uint8_t> data) {
    std::string out;
    out.reserve((data.size() + 2) / 3 * 4);
    std::size_t i = 0;
    for (; i + 2 < data.size(); i += 3) {
        const std::uint32_t v = (data[i] << 16) | (data[i + 1] << 8) | data[i + 2];
        out += kBase64Alphabet[(v >> 18) & 63];
        out += kBase64Alphabet[(v >> 12) & 63];
        out += kBase64Alphabet[(v >> 6) & 63];
        out += kBase64Alphabet[v & 63];
    }
    if (i + 1 == data.size()) {
        const std::uint32_t v = data[i] << 16;
        out += kBase64Alphabet[(v >> 18) & 63];
        out += kBase64Alphabet[(v >> 12) & 63];
        out += "==";
    } else if (i + 2 == data.size()) {
        const std::uint32_t v = (data[i] << 16) | (data[i + 1] << 8);
        out += kBase64Alphabet[(v >> 18) & 63];
        out += kBase64Alphabet[(v >> 12) & 63];
        out += kBase64Alphabet[(v >> 6) & 63];
        out += '=';
    }
    return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
    std::vector<std::uint8_t> out;
    out.reserve(text.size() / 4 * 3);
    std::uint32_t acc = 0;
    int bits = 0;
    for (char c : text) {
        if (c == '=') break;
        if (c == '\n' || c == '\r' || c == ' ') continue;
        const auto pos = kBase64Alphabet.find(c);
        if (pos == std::string_view::npos) throw ValidationError("invalid base64 character");
        acc = (acc << 6) | static_cast<std::uint32_t>(pos);
        bits += 6;
        if (bits >= 8) {
            bits -= 8;
            out.push_back(static_cast<std::uint8_t>((acc >> bits) & 0xff));
        }
    }
    return out;
}

}  // namespace protoflow
