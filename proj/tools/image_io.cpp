#include "image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <vector>

namespace compactseg::io {
namespace {

std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.string().c_str(), mode));
  if (!f) throw IoError("cannot open '" + path.string() + "'");
  return f;
}

[[noreturn]] void png_error_handler(png_structp, png_const_charp msg) { throw IoError(std::string("png: ") + msg); }
void png_warning_handler(png_structp, png_const_charp) {}

ScalarField read_png(const std::filesystem::path& path) {
  FilePtr file = open_file(path, "rb");
  unsigned char sig[8];
  if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw IoError("'" + path.string() + "' is not a PNG file");
  }
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_handler, png_warning_handler);
  if (!png) throw IoError("png: out of memory");
  png_infop info = png_create_info_struct(png);
  struct Guard {
    png_structp* p;
    png_infop* i;
    ~Guard() { png_destroy_read_struct(p, i, nullptr); }
  } guard{&png, &info};
  if (!info) throw IoError("png: out of memory");

  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  const png_byte color = png_get_color_type(png, info);
  const png_byte depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (depth == 16) png_set_strip_16(png);
  if (color & PNG_COLOR_MASK_ALPHA || png_get_valid(png, info, PNG_INFO_tRNS)) png_set_strip_alpha(png);
  if (color == PNG_COLOR_TYPE_RGB || color == PNG_COLOR_TYPE_RGB_ALPHA || color == PNG_COLOR_TYPE_PALETTE) {
    png_set_rgb_to_gray_fixed(png, 1, -1, -1);
  }
  png_read_update_info(png, info);

  const auto w = static_cast<int>(png_get_image_width(png, info));
  const auto h = static_cast<int>(png_get_image_height(png, info));
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  if (rowbytes != static_cast<std::size_t>(w)) throw IoError("png: unexpected row layout in '" + path.string() + "'");

  std::vector<png_byte> pixels(rowbytes * static_cast<std::size_t>(h));
  std::vector<png_bytep> rows(static_cast<std::size_t>(h));
  for (int y = 0; y < h; ++y) rows[static_cast<std::size_t>(y)] = pixels.data() + rowbytes * static_cast<std::size_t>(y);
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);

  ScalarField out(w, h);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = pixels[i] / 255.0;
  return out;
}

void write_png(const std::filesystem::path& path, const std::vector<std::uint8_t>& gray, int w, int h) {
  FilePtr file = open_file(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_handler, png_warning_handler);
  if (!png) throw IoError("png: out of memory");
  png_infop info = png_create_info_struct(png);
  struct Guard {
    png_structp* p;
    png_infop* i;
    ~Guard() { png_destroy_write_struct(p, i); }
  } guard{&png, &info};
  if (!info) throw IoError("png: out of memory");

  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), 8, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < h; ++y) {
    png_write_row(png, gray.data() + static_cast<std::size_t>(y) * static_cast<std::size_t>(w));
  }
  png_write_end(png, nullptr);
}

void skip_pgm_space(std::istream& in) {
  for (;;) {
    const int c = in.peek();
    if (c == '#') {
      std::string comment;
      std::getline(in, comment);
    } else if (c != EOF && std::isspace(c)) {
      in.get();
    } else {
      return;
    }
  }
}

ScalarField read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::string magic;
  in >> magic;
  if (magic != "P5") throw IoError("'" + path.string() + "' is not a binary PGM (P5)");
  int w = 0, h = 0, maxval = 0;
  skip_pgm_space(in);
  in >> w;
  skip_pgm_space(in);
  in >> h;
  skip_pgm_space(in);
  in >> maxval;
  if (!in || w < 1 || h < 1 || maxval < 1 || maxval > 65535) throw IoError("bad PGM header in '" + path.string() + "'");
  in.get();  // single whitespace before the raster

  ScalarField out(w, h);
  const int bytes = maxval > 255 ? 2 : 1;
  std::vector<unsigned char> raster(out.size() * static_cast<std::size_t>(bytes));
  in.read(reinterpret_cast<char*>(raster.data()), static_cast<std::streamsize>(raster.size()));
  if (in.gcount() != static_cast<std::streamsize>(raster.size())) throw IoError("truncated PGM '" + path.string() + "'");
  for (std::size_t i = 0; i < out.size(); ++i) {
    const unsigned v = bytes == 2 ? (raster[2 * i] << 8u) | raster[2 * i + 1] : raster[i];
    out[i] = std::min(1.0, static_cast<double>(v) / maxval);
  }
  return out;
}

void write_pgm(const std::filesystem::path& path, const std::vector<std::uint8_t>& gray, int w, int h) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << "P5\n" << w << ' ' << h << "\n255\n";
  out.write(reinterpret_cast<const char*>(gray.data()), static_cast<std::streamsize>(gray.size()));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

void write_gray(const std::filesystem::path& path, const std::vector<std::uint8_t>& gray, int w, int h) {
  const std::string ext = lower_extension(path);
  if (ext == ".png") {
    write_png(path, gray, w, h);
  } else if (ext == ".pgm") {
    write_pgm(path, gray, w, h);
  } else {
    throw IoError("unsupported output format '" + ext + "' (use .png or .pgm)");
  }
}

}  // namespace

ScalarField read_image(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("no such file '" + path.string() + "'");
  const std::string ext = lower_extension(path);
  if (ext == ".png") return read_png(path);
  if (ext == ".pgm") return read_pgm(path);
  throw IoError("unsupported image format '" + ext + "' (use .png or .pgm)");
}

BinaryMask read_mask(const std::filesystem::path& path) { return threshold(read_image(path), 0.5); }

void write_image(const std::filesystem::path& path, const ScalarField& field) {
  std::vector<std::uint8_t> gray(field.size());
  for (std::size_t i = 0; i < field.size(); ++i) {
    gray[i] = static_cast<std::uint8_t>(std::lround(std::clamp(field[i], 0.0, 1.0) * 255.0));
  }
  write_gray(path, gray, field.width(), field.height());
}

void write_mask(const std::filesystem::path& path, const BinaryMask& mask) {
  std::vector<std::uint8_t> gray(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) gray[i] = mask[i] ? 255 : 0;
  write_gray(path, gray, mask.width(), mask.height());
}

}  // namespace compactseg::io
