#include "nlretinex/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <memory>
#include <vector>

namespace nlretinex {
namespace {

using FilePtr = std::unique_ptr<std::FILE, int (*)(std::FILE*)>;

std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

[[noreturn]] void fail(const std::filesystem::path& path, const std::string& reason) {
  throw ImageIoError(path.string() + ": " + reason);
}

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode), &std::fclose);
  if (!f) fail(path, mode[0] == 'r' ? "cannot open for reading" : "cannot open for writing");
  return f;
}

void png_error_handler(png_structp png, png_const_charp msg) {
  auto* reason = static_cast<std::string*>(png_get_error_ptr(png));
  if (reason) *reason = msg;
  png_longjmp(png, 1);
}

void png_warning_handler(png_structp, png_const_charp) {}

ColorImage load_png(const std::filesystem::path& path) {
  FilePtr file = open_file(path, "rb");
  unsigned char sig[8];
  if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) fail(path, "not a PNG file");

  std::string reason = "corrupt PNG";
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &reason, png_error_handler, png_warning_handler);
  if (!png) fail(path, "libpng initialisation failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    fail(path, "libpng initialisation failed");
  }

  std::vector<unsigned char> buffer;
  std::vector<png_bytep> rows;
  int width = 0, height = 0, channels = 0, depth = 0;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(path, reason);
  }

  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  const int color_type = png_get_color_type(png, info);
  depth = png_get_bit_depth(png, info);
  if (color_type == PNG_COLOR_TYPE_PALETTE) {
    png_set_palette_to_rgb(png);
    depth = 8;
  }
  if (color_type == PNG_COLOR_TYPE_GRAY && depth < 8) {
    png_set_expand_gray_1_2_4_to_8(png);
    depth = 8;
  }
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color_type & PNG_COLOR_MASK_ALPHA || png_get_valid(png, info, PNG_INFO_tRNS)) png_set_strip_alpha(png);
  if (depth == 16) png_set_swap(png);  // little-endian host order
  png_read_update_info(png, info);

  width = static_cast<int>(png_get_image_width(png, info));
  height = static_cast<int>(png_get_image_height(png, info));
  channels = png_get_channels(png, info);
  depth = png_get_bit_depth(png, info);
  if (channels != 1 && channels != 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(path, "unsupported channel layout");
  }

  const std::size_t row_bytes = png_get_rowbytes(png, info);
  buffer.resize(row_bytes * height);
  rows.resize(height);
  for (int y = 0; y < height; ++y) rows[y] = buffer.data() + y * row_bytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  ColorImage img(channels, Grid{width, height});
  const double scale = depth == 16 ? 65535.0 : 255.0;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      for (int k = 0; k < channels; ++k) {
        const std::size_t s = static_cast<std::size_t>(x) * channels + k;
        double v;
        if (depth == 16) {
          const auto* row = reinterpret_cast<const std::uint16_t*>(rows[y]);
          v = row[s];
        } else {
          v = rows[y][s];
        }
        img.at(k, img.grid().index(x, y)) = v / scale;
      }
    }
  }
  return img;
}

void save_png(const ColorImage& img, const std::filesystem::path& path, BitDepth depth) {
  if (img.channels() != 1 && img.channels() != 3) fail(path, "PNG output needs 1 or 3 channels");
  FilePtr file = open_file(path, "wb");

  std::string reason = "PNG write failed";
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &reason, png_error_handler, png_warning_handler);
  if (!png) fail(path, "libpng initialisation failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    fail(path, "libpng initialisation failed");
  }

  const int bits = static_cast<int>(depth);
  const int channels = img.channels();
  const int width = img.width();
  const int height = img.height();
  const double scale = bits == 16 ? 65535.0 : 255.0;
  const std::size_t bytes_per_sample = bits / 8;
  std::vector<unsigned char> buffer(static_cast<std::size_t>(width) * height * channels * bytes_per_sample);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      for (int k = 0; k < channels; ++k) {
        const double v = std::clamp(img.at(k, img.grid().index(x, y)), 0.0, 1.0);
        const auto code = static_cast<unsigned>(std::lround(v * scale));
        const std::size_t s = ((static_cast<std::size_t>(y) * width + x) * channels + k) * bytes_per_sample;
        if (bits == 16) {
          buffer[s] = static_cast<unsigned char>(code >> 8);  // PNG is big-endian
          buffer[s + 1] = static_cast<unsigned char>(code & 0xff);
        } else {
          buffer[s] = static_cast<unsigned char>(code);
        }
      }
    }
  }
  std::vector<png_bytep> rows(height);
  const std::size_t row_bytes = static_cast<std::size_t>(width) * channels * bytes_per_sample;
  for (int y = 0; y < height; ++y) rows[y] = buffer.data() + y * row_bytes;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    fail(path, reason);
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, width, height, bits, channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

// Netpbm header token reader: skips whitespace and '#' comments.
bool read_token(std::istream& in, std::string& token) {
  token.clear();
  char c;
  while (in.get(c)) {
    if (c == '#') {
      std::string ignored;
      std::getline(in, ignored);
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      token.push_back(c);
      break;
    }
  }
  while (in.get(c)) {
    if (std::isspace(static_cast<unsigned char>(c))) break;
    token.push_back(c);
  }
  return !token.empty();
}

ColorImage load_pnm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "cannot open for reading");
  std::string magic, w, h, maxval;
  if (!read_token(in, magic) || (magic != "P5" && magic != "P6")) fail(path, "unsupported netpbm variant");
  if (!read_token(in, w) || !read_token(in, h) || !read_token(in, maxval)) fail(path, "truncated netpbm header");
  int width = 0, height = 0, max = 0;
  try {
    width = std::stoi(w);
    height = std::stoi(h);
    max = std::stoi(maxval);
  } catch (const std::exception&) {
    fail(path, "malformed netpbm header");
  }
  if (width < 1 || height < 1 || max < 1 || max > 65535) fail(path, "invalid netpbm dimensions");

  const int channels = magic == "P6" ? 3 : 1;
  const std::size_t bytes_per_sample = max > 255 ? 2 : 1;
  std::vector<unsigned char> buffer(static_cast<std::size_t>(width) * height * channels * bytes_per_sample);
  in.read(reinterpret_cast<char*>(buffer.data()), static_cast<std::streamsize>(buffer.size()));
  if (in.gcount() != static_cast<std::streamsize>(buffer.size())) fail(path, "truncated pixel data");

  ColorImage img(channels, Grid{width, height});
  for (std::size_t i = 0; i < img.pixels(); ++i) {
    for (int k = 0; k < channels; ++k) {
      const std::size_t s = (i * channels + k) * bytes_per_sample;
      const unsigned v = bytes_per_sample == 2 ? (unsigned{buffer[s]} << 8) | buffer[s + 1] : buffer[s];
      img.at(k, i) = static_cast<double>(v) / max;
    }
  }
  return img;
}

void save_pnm(const ColorImage& img, const std::filesystem::path& path, BitDepth depth, bool want_color) {
  if (want_color != (img.channels() == 3)) fail(path, want_color ? "PPM needs 3 channels" : "PGM needs 1 channel");
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(path, "cannot open for writing");
  const unsigned max = depth == BitDepth::k16 ? 65535u : 255u;
  out << (want_color ? "P6" : "P5") << '\n' << img.width() << ' ' << img.height() << '\n' << max << '\n';
  const std::size_t bytes_per_sample = depth == BitDepth::k16 ? 2 : 1;
  std::vector<unsigned char> buffer(img.size() * bytes_per_sample);
  for (std::size_t i = 0; i < img.pixels(); ++i) {
    for (int k = 0; k < img.channels(); ++k) {
      const auto code = static_cast<unsigned>(std::lround(std::clamp(img.at(k, i), 0.0, 1.0) * max));
      const std::size_t s = (i * img.channels() + k) * bytes_per_sample;
      if (bytes_per_sample == 2) {
        buffer[s] = static_cast<unsigned char>(code >> 8);
        buffer[s + 1] = static_cast<unsigned char>(code & 0xff);
      } else {
        buffer[s] = static_cast<unsigned char>(code);
      }
    }
  }
  out.write(reinterpret_cast<const char*>(buffer.data()), static_cast<std::streamsize>(buffer.size()));
  if (!out) fail(path, "write failed");
}

}  // namespace

ColorImage load_image(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) fail(path, "file does not exist");
  const std::string ext = lower_extension(path);
  if (ext == ".png") return load_png(path);
  if (ext == ".ppm" || ext == ".pgm" || ext == ".pnm") return load_pnm(path);
  fail(path, "unsupported format '" + ext + "'");
}

void save_image(const ColorImage& img, const std::filesystem::path& path, BitDepth depth) {
  const std::string ext = lower_extension(path);
  if (ext == ".png") return save_png(img, path, depth);
  if (ext == ".ppm") return save_pnm(img, path, depth, true);
  if (ext == ".pgm") return save_pnm(img, path, depth, false);
  fail(path, "unsupported format '" + ext + "'");
}

}  // namespace nlretinex
