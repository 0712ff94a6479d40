#pragma once

#include <png.h>

#include <cctype>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "vtalign/raster.hpp"

namespace vtalign {

struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

struct FormatError : std::runtime_error {
  explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

namespace detail {

inline bool has_suffix(const std::string& s, const std::string& suf) {
  if (s.size() < suf.size()) return false;
  std::string tail = s.substr(s.size() - suf.size());
  for (auto& c : tail) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return tail == suf;
}

// Skips PNM whitespace and '#' comment lines.
inline int pnm_next_token(std::istream& in, const std::string& path) {
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
    } else if (!std::isspace(c)) {
      break;
    }
  }
  if (c == EOF) throw FormatError(path + ": truncated PGM header");
  int value = 0;
  bool any = false;
  while (c != EOF && std::isdigit(c)) {
    value = value * 10 + (c - '0');
    any = true;
    c = in.get();
  }
  if (!any) throw FormatError(path + ": expected integer in PGM header");
  return value;
}

inline Raster load_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path + ": cannot open for reading");
  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (magic[0] != 'P' || (magic[1] != '2' && magic[1] != '5'))
    throw FormatError(path + ": not a P2/P5 PGM file");
  const bool binary = magic[1] == '5';
  const int w = pnm_next_token(in, path);
  const int h = pnm_next_token(in, path);
  const int maxval = pnm_next_token(in, path);
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535)
    throw FormatError(path + ": bad PGM dimensions or maxval");
  Raster r(w, h);
  if (binary) {
    const bool wide = maxval > 255;
    std::vector<unsigned char> buf(r.pixel_count() * (wide ? 2 : 1));
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (static_cast<size_t>(in.gcount()) != buf.size())
      throw FormatError(path + ": truncated PGM pixel data");
    for (size_t i = 0; i < r.pixel_count(); ++i)
      r.data[i] = wide ? double(buf[2 * i] << 8 | buf[2 * i + 1]) : double(buf[i]);
  } else {
    for (size_t i = 0; i < r.pixel_count(); ++i) r.data[i] = pnm_next_token(in, path);
  }
  return r;
}

struct PngReadCloser {
  png_structp png = nullptr;
  png_infop info = nullptr;
  FILE* fp = nullptr;
  ~PngReadCloser() {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    if (fp) std::fclose(fp);
  }
};

inline Raster load_png(const std::string& path) {
  PngReadCloser c;
  c.fp = std::fopen(path.c_str(), "rb");
  if (!c.fp) throw IoError(path + ": cannot open for reading");
  unsigned char sig[8];
  if (std::fread(sig, 1, 8, c.fp) != 8 || png_sig_cmp(sig, 0, 8))
    throw FormatError(path + ": not a PNG file");
  c.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  c.info = png_create_info_struct(c.png);
  if (!c.png || !c.info) throw IoError(path + ": libpng init failed");
  if (setjmp(png_jmpbuf(c.png))) throw FormatError(path + ": PNG decode error");
  png_init_io(c.png, c.fp);
  png_set_sig_bytes(c.png, 8);
  png_read_info(c.png, c.info);

  const png_uint_32 w = png_get_image_width(c.png, c.info);
  const png_uint_32 h = png_get_image_height(c.png, c.info);
  int depth = png_get_bit_depth(c.png, c.info);
  int color = png_get_color_type(c.png, c.info);

  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(c.png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(c.png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(c.png);
  png_read_update_info(c.png, c.info);
  depth = png_get_bit_depth(c.png, c.info);
  color = png_get_color_type(c.png, c.info);

  const int channels = (color == PNG_COLOR_TYPE_RGB) ? 3 : 1;
  if (color != PNG_COLOR_TYPE_GRAY && color != PNG_COLOR_TYPE_RGB)
    throw FormatError(path + ": unsupported PNG color type");
  if (depth != 8 && depth != 16) throw FormatError(path + ": unsupported PNG bit depth");
  if (channels == 3 && depth == 16) throw FormatError(path + ": 16-bit RGB PNG not supported");

  std::vector<unsigned char> row(static_cast<size_t>(w) * channels * (depth / 8));
  Raster r(static_cast<int>(w), static_cast<int>(h));
  for (png_uint_32 y = 0; y < h; ++y) {
    png_read_row(c.png, row.data(), nullptr);
    for (png_uint_32 x = 0; x < w; ++x) {
      double v;
      if (channels == 3) {
        // Rec.601 luma
        v = 0.299 * row[3 * x] + 0.587 * row[3 * x + 1] + 0.114 * row[3 * x + 2];
      } else if (depth == 16) {
        v = double(row[2 * x] << 8 | row[2 * x + 1]);
      } else {
        v = double(row[x]);
      }
      r.at(static_cast<int>(x), static_cast<int>(y)) = v;
    }
  }
  return r;
}

struct PngWriteCloser {
  png_structp png = nullptr;
  png_infop info = nullptr;
  FILE* fp = nullptr;
  ~PngWriteCloser() {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
    if (fp) std::fclose(fp);
  }
};

inline unsigned char clamp_u8(double v) {
  // round half-up after clamping
  if (v <= 0.0) return 0;
  if (v >= 255.0) return 255;
  return static_cast<unsigned char>(std::floor(v + 0.5));
}

inline void save_png_gray8(const Raster& r, const std::string& path) {
  PngWriteCloser c;
  c.fp = std::fopen(path.c_str(), "wb");
  if (!c.fp) throw IoError(path + ": cannot open for writing");
  c.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  c.info = png_create_info_struct(c.png);
  if (!c.png || !c.info) throw IoError(path + ": libpng init failed");
  if (setjmp(png_jmpbuf(c.png))) throw IoError(path + ": PNG write error");
  png_init_io(c.png, c.fp);
  png_set_IHDR(c.png, c.info, static_cast<png_uint_32>(r.width), static_cast<png_uint_32>(r.height),
               8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(c.png, c.info);
  std::vector<unsigned char> row(static_cast<size_t>(r.width));
  for (int y = 0; y < r.height; ++y) {
    for (int x = 0; x < r.width; ++x) row[static_cast<size_t>(x)] = clamp_u8(r.at(x, y));
    png_write_row(c.png, row.data());
  }
  png_write_end(c.png, c.info);
}

// 8-bit RGB writer used by the red-cyan overlay.
inline void save_png_rgb8(const std::vector<unsigned char>& rgb, int w, int h,
                          const std::string& path) {
  if (rgb.size() != static_cast<size_t>(w) * h * 3)
    throw std::invalid_argument("save_png_rgb8: buffer size mismatch");
  PngWriteCloser c;
  c.fp = std::fopen(path.c_str(), "wb");
  if (!c.fp) throw IoError(path + ": cannot open for writing");
  c.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  c.info = png_create_info_struct(c.png);
  if (!c.png || !c.info) throw IoError(path + ": libpng init failed");
  if (setjmp(png_jmpbuf(c.png))) throw IoError(path + ": PNG write error");
  png_init_io(c.png, c.fp);
  png_set_IHDR(c.png, c.info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), 8,
               PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(c.png, c.info);
  for (int y = 0; y < h; ++y)
    png_write_row(c.png, const_cast<png_bytep>(rgb.data() + static_cast<size_t>(y) * w * 3));
  png_write_end(c.png, c.info);
}

inline void save_pgm(const Raster& r, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path + ": cannot open for writing");
  out << "P5\n" << r.width << " " << r.height << "\n255\n";
  std::vector<unsigned char> buf(r.pixel_count());
  for (size_t i = 0; i < r.pixel_count(); ++i) buf[i] = clamp_u8(r.data[i]);
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError(path + ": write failed");
}

}  // namespace detail

inline Raster load_image(const std::string& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw IoError(path + ": file does not exist or is unreadable");
  char magic[2] = {0, 0};
  probe.read(magic, 2);
  probe.close();
  if (magic[0] == 'P' && (magic[1] == '2' || magic[1] == '5')) return detail::load_pgm(path);
  if (static_cast<unsigned char>(magic[0]) == 0x89 && magic[1] == 'P') return detail::load_png(path);
  throw FormatError(path + ": unsupported image format (expected PGM P2/P5 or PNG)");
}

inline void save_image(const Raster& r, const std::string& path) {
  if (detail::has_suffix(path, ".pgm")) {
    detail::save_pgm(r, path);
  } else if (detail::has_suffix(path, ".png")) {
    detail::save_png_gray8(r, path);
  } else {
    throw FormatError(path + ": unsupported output extension (use .png or .pgm)");
  }
}

}  // namespace vtalign
