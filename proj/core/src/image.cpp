#include "chromex/image.hpp"

#include <png.h>

#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>

#include "chromex/error.hpp"

namespace chromex {

RgbImage::RgbImage(int width, int height, Rgb8 fill) : width_(width), height_(height) {
  if (width < 1 || height < 1) {
    throw Error(ErrorCode::invalid_argument, "image dimensions must be positive");
  }
  pixels_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

namespace {

struct PngContext {
  std::span<const std::uint8_t> input;
  std::size_t offset = 0;
  std::vector<std::uint8_t>* output = nullptr;
  char message[256] = {};
};

void read_callback(png_structp png, png_bytep out, png_size_t count) {
  auto* ctx = static_cast<PngContext*>(png_get_io_ptr(png));
  if (ctx->offset + count > ctx->input.size()) png_error(png, "truncated PNG stream");
  std::memcpy(out, ctx->input.data() + ctx->offset, count);
  ctx->offset += count;
}

void write_callback(png_structp png, png_bytep data, png_size_t count) {
  auto* ctx = static_cast<PngContext*>(png_get_io_ptr(png));
  ctx->output->insert(ctx->output->end(), data, data + count);
}

void flush_callback(png_structp) {}

void png_error_handler(png_structp png, png_const_charp msg) {
  auto* ctx = static_cast<PngContext*>(png_get_error_ptr(png));
  std::snprintf(ctx->message, sizeof(ctx->message), "%s", msg);
  png_longjmp(png, 1);
}

void png_warning_handler(png_structp, png_const_charp) {}

std::uint8_t blend_over_white(std::uint8_t c, std::uint8_t alpha) {
  const int v = (c * alpha + 255 * (255 - alpha) + 127) / 255;
  return static_cast<std::uint8_t>(v);
}

}  // namespace

RgbImage decode_png(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
    throw Error(ErrorCode::corrupt, "not a PNG file");
  }
  PngContext ctx;
  ctx.input = bytes;
  std::vector<png_byte> pixels;
  std::vector<png_bytep> rows;
  png_uint_32 width = 0;
  png_uint_32 height = 0;

  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, &ctx, png_error_handler, png_warning_handler);
  if (!png) throw Error(ErrorCode::io, "png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw Error(ErrorCode::io, "png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::corrupt, std::string("PNG: ") + ctx.message);
  }

  png_set_read_fn(png, &ctx, read_callback);
  png_read_info(png, info);
  const png_byte color_type = png_get_color_type(png, info);
  const png_byte bit_depth = png_get_bit_depth(png, info);
  if (bit_depth == 16) png_set_strip_16(png);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  const bool has_trns = png_get_valid(png, info, PNG_INFO_tRNS) != 0;
  if (has_trns) png_set_tRNS_to_alpha(png);
  if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA) {
    png_set_gray_to_rgb(png);
  }
  if (!(color_type & PNG_COLOR_MASK_ALPHA) && !has_trns) {
    png_set_filler(png, 0xFF, PNG_FILLER_AFTER);
  }
  png_read_update_info(png, info);
  width = png_get_image_width(png, info);
  height = png_get_image_height(png, info);
  if (png_get_rowbytes(png, info) != 4 * static_cast<std::size_t>(width)) {
    png_error(png, "unsupported pixel layout");
  }
  pixels.resize(4 * static_cast<std::size_t>(width) * height);
  rows.resize(height);
  for (png_uint_32 y = 0; y < height; ++y) rows[y] = pixels.data() + 4 * std::size_t{width} * y;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  RgbImage img(static_cast<int>(width), static_cast<int>(height));
  auto out = img.pixels();
  for (std::size_t i = 0; i < out.size(); ++i) {
    const png_byte* p = pixels.data() + 4 * i;
    out[i] = {blend_over_white(p[0], p[3]), blend_over_white(p[1], p[3]),
              blend_over_white(p[2], p[3])};
  }
  return img;
}

RgbImage read_png(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::not_found, "cannot open image '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  try {
    return decode_png(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode_png(const RgbImage& img) {
  if (img.empty()) throw Error(ErrorCode::invalid_argument, "cannot encode an empty image");
  static_assert(sizeof(Rgb8) == 3);
  std::vector<std::uint8_t> out;
  PngContext ctx;
  ctx.output = &out;
  std::vector<png_bytep> rows(static_cast<std::size_t>(img.height()));
  for (int y = 0; y < img.height(); ++y) {
    rows[static_cast<std::size_t>(y)] = reinterpret_cast<png_bytep>(
        const_cast<Rgb8*>(img.pixels().data() + static_cast<std::size_t>(y) * img.width()));
  }

  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, &ctx, png_error_handler, png_warning_handler);
  if (!png) throw Error(ErrorCode::io, "png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw Error(ErrorCode::io, "png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::io, std::string("PNG: ") + ctx.message);
  }
  png_set_write_fn(png, &ctx, write_callback, flush_callback);
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width()),
               static_cast<png_uint_32>(img.height()), 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

void write_png(const std::filesystem::path& path, const RgbImage& img) {
  const auto bytes = encode_png(img);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io, "cannot write image '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::io, "short write to '" + path.string() + "'");
}

RgbImage rotate90(const RgbImage& img) {
  RgbImage out(img.height(), img.width());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) out.at(img.height() - 1 - y, x) = img.at(x, y);
  }
  return out;
}

RgbImage rotate180(const RgbImage& img) {
  RgbImage out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      out.at(img.width() - 1 - x, img.height() - 1 - y) = img.at(x, y);
    }
  }
  return out;
}

RgbImage rotate270(const RgbImage& img) { return rotate90(rotate180(img)); }

RgbImage mirror_x(const RgbImage& img) {
  RgbImage out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) out.at(img.width() - 1 - x, y) = img.at(x, y);
  }
  return out;
}

RgbImage upscale_nearest(const RgbImage& img, int factor) {
  if (factor < 1) throw Error(ErrorCode::invalid_argument, "upscale factor must be >= 1");
  RgbImage out(img.width() * factor, img.height() * factor);
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) out.at(x, y) = img.at(x / factor, y / factor);
  }
  return out;
}

RgbImage to_rgb_image(const ColormapImage& legend) {
  RgbImage out(ColormapImage::kCols, ColormapImage::kRows);
  for (int r = 0; r < ColormapImage::kRows; ++r) {
    for (int c = 0; c < ColormapImage::kCols; ++c) out.at(c, r) = legend.at(r, c);
  }
  return out;
}

}  // namespace chromex
