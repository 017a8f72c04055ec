#include <png.h>

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>
#include <vector>

#include "rwz/errors.hpp"
#include "rwz/image.hpp"

namespace rwz {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

std::uint8_t quantize(double v) {
  const long q = std::lround(v * 255.0);
  return static_cast<std::uint8_t>(q < 0 ? 0 : (q > 255 ? 255 : q));
}

// --- PPM / PGM ------------------------------------------------------------

int pnm_next_int(std::FILE* f) {
  int ch = std::fgetc(f);
  while (ch != EOF) {
    if (ch == '#') {
      while (ch != EOF && ch != '\n') ch = std::fgetc(f);
    } else if (!std::isspace(ch)) {
      break;
    }
    ch = std::fgetc(f);
  }
  if (ch == EOF || !std::isdigit(ch)) throw IoError("malformed PNM header");
  int value = 0;
  while (ch != EOF && std::isdigit(ch)) {
    value = value * 10 + (ch - '0');
    if (value > 1 << 30) throw IoError("PNM header value out of range");
    ch = std::fgetc(f);
  }
  if (ch == EOF) throw IoError("truncated PNM header");
  return value;
}

Image load_pnm(std::FILE* f, int channels, const std::string& path) {
  const int w = pnm_next_int(f);
  const int h = pnm_next_int(f);
  const int maxval = pnm_next_int(f);
  if (maxval <= 0 || maxval > 255)
    throw IoError(path + ": only 8-bit PNM supported");
  const std::size_t n = static_cast<std::size_t>(h) * w * channels;
  std::vector<std::uint8_t> raw(n);
  if (std::fread(raw.data(), 1, n, f) != n)
    throw IoError(path + ": truncated PNM pixel data");
  std::vector<double> samples(n);
  const double inv = 1.0 / maxval;
  for (std::size_t i = 0; i < n; ++i) samples[i] = raw[i] * inv;
  return Image(h, w, channels, std::move(samples));
}

void save_pnm(const Image& img, const std::string& path, int channels) {
  if (img.channels() != channels)
    throw IoError(path + ": channel count does not match format");
  FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f) throw IoError("cannot open " + path + " for writing");
  std::fprintf(f.get(), "%s\n%d %d\n255\n", channels == 3 ? "P6" : "P5",
               img.width(), img.height());
  std::vector<std::uint8_t> row(static_cast<std::size_t>(img.width()) *
                                channels);
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x)
      for (int c = 0; c < channels; ++c)
        row[static_cast<std::size_t>(x) * channels + c] =
            quantize(img.at(y, x, c));
    if (std::fwrite(row.data(), 1, row.size(), f.get()) != row.size())
      throw IoError("short write to " + path);
  }
}

// --- PNG ------------------------------------------------------------------

Image load_png(std::FILE* f, const std::string& path) {
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("png reader allocation failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("png reader allocation failed");
  }
  std::vector<std::uint8_t> buffer;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError(path + ": png decode failed");
  }
  png_init_io(png, f);
  png_read_info(png, info);

  const png_uint_32 w = png_get_image_width(png, info);
  const png_uint_32 h = png_get_image_height(png, info);
  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);

  if (depth == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color == PNG_COLOR_TYPE_RGB_ALPHA || color == PNG_COLOR_TYPE_GRAY_ALPHA)
    png_set_strip_alpha(png);
  png_read_update_info(png, info);

  const int channels = png_get_channels(png, info);
  if (channels != 1 && channels != 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError(path + ": unsupported png channel layout");
  }

  const std::size_t stride = png_get_rowbytes(png, info);
  buffer.resize(stride * h);
  rows.resize(h);
  for (png_uint_32 y = 0; y < h; ++y) rows[y] = buffer.data() + y * stride;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  std::vector<double> samples(static_cast<std::size_t>(h) * w * channels);
  for (png_uint_32 y = 0; y < h; ++y) {
    const std::uint8_t* src = buffer.data() + y * stride;
    double* dst = samples.data() + static_cast<std::size_t>(y) * w * channels;
    for (std::size_t i = 0; i < static_cast<std::size_t>(w) * channels; ++i)
      dst[i] = src[i] / 255.0;
  }
  return Image(static_cast<int>(h), static_cast<int>(w), channels,
               std::move(samples));
}

void save_png(const Image& img, const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f) throw IoError("cannot open " + path + " for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                            nullptr, nullptr);
  if (!png) throw IoError("png writer allocation failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("png writer allocation failed");
  }
  std::vector<std::uint8_t> buffer;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError(path + ": png encode failed");
  }
  png_init_io(png, f.get());
  const int color = img.channels() == 3 ? PNG_COLOR_TYPE_RGB
                                        : PNG_COLOR_TYPE_GRAY;
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width()),
               static_cast<png_uint_32>(img.height()), 8, color,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  const std::size_t stride =
      static_cast<std::size_t>(img.width()) * img.channels();
  buffer.resize(stride * img.height());
  rows.resize(static_cast<std::size_t>(img.height()));
  for (int y = 0; y < img.height(); ++y) {
    std::uint8_t* dst = buffer.data() + static_cast<std::size_t>(y) * stride;
    for (int x = 0; x < img.width(); ++x)
      for (int c = 0; c < img.channels(); ++c)
        dst[static_cast<std::size_t>(x) * img.channels() + c] =
            quantize(img.at(y, x, c));
    rows[static_cast<std::size_t>(y)] = dst;
  }
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

bool has_suffix(const std::string& s, const char* suf) {
  const std::size_t n = std::strlen(suf);
  return s.size() >= n && s.compare(s.size() - n, n, suf) == 0;
}

}  // namespace

Image load_image(const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) throw IoError("cannot open " + path);
  unsigned char magic[8] = {0};
  const std::size_t got = std::fread(magic, 1, sizeof magic, f.get());
  std::rewind(f.get());
  if (got >= 8 && png_sig_cmp(magic, 0, 8) == 0) return load_png(f.get(), path);
  if (got >= 2 && magic[0] == 'P' && (magic[1] == '5' || magic[1] == '6')) {
    std::fseek(f.get(), 2, SEEK_SET);
    return load_pnm(f.get(), magic[1] == '6' ? 3 : 1, path);
  }
  throw IoError(path + ": unrecognized image format");
}

void save_image(const Image& img, const std::string& path) {
  if (img.empty()) throw IoError("refusing to save an empty image");
  if (has_suffix(path, ".png")) {
    save_png(img, path);
  } else if (has_suffix(path, ".ppm")) {
    save_pnm(img, path, 3);
  } else if (has_suffix(path, ".pgm")) {
    save_pnm(img, path, 1);
  } else {
    throw IoError(path + ": unsupported output extension");
  }
}

}  // namespace rwz
