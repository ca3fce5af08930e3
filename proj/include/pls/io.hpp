#pragma once

// Image file I/O: 8/16-bit PNG (via libpng) and 32-bit float PFM.
//
// PNG samples are mapped to [0, 1] (declared range [0, 1]). PFM keeps raw
// float samples and declares the observed min/max (widened slightly when the
// image is constant, so the declared range always has positive span).
// PFM layout follows the usual convention: 'Pf' gray / 'PF' RGB header,
// rows stored bottom-to-top, negative scale meaning little-endian data.

#include "pls/image.hpp"

#include <png.h>

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>

namespace pls {

enum class ImageFileKind { png8, png16, pfm };

namespace detail {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

inline void widen_if_degenerate(Range<double>& r) {
  if (!(r.lo < r.hi)) {
    const double eps = std::max(1e-6, std::abs(r.lo) * 1e-6);
    r.hi = r.lo + eps;
  }
}

// --- PNG ---------------------------------------------------------------

template <typename Scalar>
Image<Scalar> load_png(std::FILE* fp, const std::string& path, ImageFileKind& kind) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("png: out of memory reading " + path);
  }

  std::vector<png_byte> data;
  std::vector<png_bytep> rows;
  int w = 0, h = 0, channels = 0, depth = 0;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError("png: failed to decode " + path);
  }

  png_init_io(png, fp);
  png_read_info(png, info);

  depth = png_get_bit_depth(png, info);
  const int color = png_get_color_type(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (depth == 16 && std::endian::native == std::endian::little) png_set_swap(png);
  png_read_update_info(png, info);

  w = int(png_get_image_width(png, info));
  h = int(png_get_image_height(png, info));
  depth = png_get_bit_depth(png, info);
  channels = png_get_channels(png, info);
  if ((depth != 8 && depth != 16) || (channels != 1 && channels != 3)) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError("png: unsupported depth/channel combination in " + path);
  }

  const size_t rowbytes = png_get_rowbytes(png, info);
  data.resize(rowbytes * size_t(h));
  rows.resize(h);
  for (int y = 0; y < h; ++y) rows[y] = data.data() + rowbytes * size_t(y);
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  kind = depth == 8 ? ImageFileKind::png8 : ImageFileKind::png16;
  Image<Scalar> img(w, h, channels);
  const Scalar denom = depth == 8 ? Scalar(255) : Scalar(65535);
  for (int y = 0; y < h; ++y) {
    if (depth == 8) {
      const png_byte* r = rows[y];
      for (int x = 0; x < w; ++x)
        for (int c = 0; c < channels; ++c)
          img.planes[c](y, x) = Scalar(r[x * channels + c]) / denom;
    } else {
      const std::uint16_t* r = reinterpret_cast<const std::uint16_t*>(rows[y]);
      for (int x = 0; x < w; ++x)
        for (int c = 0; c < channels; ++c)
          img.planes[c](y, x) = Scalar(r[x * channels + c]) / denom;
    }
  }
  img.declared_range = {Scalar(0), Scalar(1)};
  return img;
}

template <typename Scalar>
void save_png(const Image<Scalar>& img, const std::string& path, int depth) {
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw IoError("cannot open for writing: " + path);

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw IoError("png: out of memory writing " + path);
  }

  const int w = img.width(), h = img.height(), channels = img.channels();
  const double peak = depth == 8 ? 255.0 : 65535.0;
  std::vector<std::uint16_t> row16(size_t(w) * channels);
  std::vector<png_byte> row8(size_t(w) * channels);

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("png: failed to encode " + path);
  }

  png_init_io(png, fp.get());
  png_set_IHDR(png, info, w, h, depth,
               channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  if (depth == 16 && std::endian::native == std::endian::little) png_set_swap(png);

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < channels; ++c) {
        // Clamp to [0, 1], then round half away from zero.
        const double v = clamp01(double(img.planes[c](y, x))) * peak;
        const long q = std::lround(v);
        if (depth == 8)
          row8[size_t(x) * channels + c] = png_byte(q);
        else
          row16[size_t(x) * channels + c] = std::uint16_t(q);
      }
    png_write_row(png, depth == 8 ? row8.data() : reinterpret_cast<png_bytep>(row16.data()));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

// --- PFM ---------------------------------------------------------------

inline void byteswap32(char* p, size_t count) {
  for (size_t i = 0; i < count; ++i, p += 4) {
    std::swap(p[0], p[3]);
    std::swap(p[1], p[2]);
  }
}

template <typename Scalar>
Image<Scalar> load_pfm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);

  std::string magic;
  int w = 0, h = 0;
  double scale = 0;
  in >> magic >> w >> h >> scale;
  if (!in || (magic != "PF" && magic != "Pf") || w <= 0 || h <= 0 || scale == 0)
    throw FormatError("pfm: bad header in " + path);
  in.get();  // single whitespace separating header from raster

  const int channels = magic == "PF" ? 3 : 1;
  std::vector<float> raster(size_t(w) * h * channels);
  in.read(reinterpret_cast<char*>(raster.data()), std::streamsize(raster.size() * 4));
  if (!in) throw FormatError("pfm: truncated raster in " + path);

  const bool file_little = scale < 0;
  const bool host_little = std::endian::native == std::endian::little;
  if (file_little != host_little)
    byteswap32(reinterpret_cast<char*>(raster.data()), raster.size());

  Image<Scalar> img(w, h, channels);
  for (int y = 0; y < h; ++y) {
    const float* row = raster.data() + size_t(w) * channels * size_t(h - 1 - y);
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < channels; ++c) {
        const float v = row[size_t(x) * channels + c];
        if (!std::isfinite(v)) throw FormatError("pfm: non-finite sample in " + path);
        img.planes[c](y, x) = Scalar(v);
      }
  }
  Range<double> r{double(observed_range(img).lo), double(observed_range(img).hi)};
  widen_if_degenerate(r);
  img.declared_range = {Scalar(r.lo), Scalar(r.hi)};
  return img;
}

template <typename Scalar>
void save_pfm(const Image<Scalar>& img, const std::string& path) {
  if (img.channels() != 1 && img.channels() != 3)
    throw FormatError("pfm: only 1- or 3-channel images");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);

  const int w = img.width(), h = img.height(), channels = img.channels();
  out << (channels == 3 ? "PF" : "Pf") << "\n" << w << " " << h << "\n" << "-1.0" << "\n";

  std::vector<float> row(size_t(w) * channels);
  const bool host_little = std::endian::native == std::endian::little;
  for (int y = h - 1; y >= 0; --y) {
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < channels; ++c) row[size_t(x) * channels + c] = float(img.planes[c](y, x));
    if (!host_little) byteswap32(reinterpret_cast<char*>(row.data()), row.size());
    out.write(reinterpret_cast<const char*>(row.data()), std::streamsize(row.size() * 4));
  }
  if (!out) throw IoError("pfm: write failed: " + path);
}

}  // namespace detail

// Load an image, inferring the file format from its content. Optionally
// reports which format was found.
template <typename Scalar = double>
Image<Scalar> load_image(const std::string& path, ImageFileKind* kind_out = nullptr) {
  detail::FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw IoError("cannot open: " + path);

  unsigned char magic[8] = {};
  const size_t got = std::fread(magic, 1, sizeof magic, fp.get());
  if (got >= 2 && magic[0] == 'P' && (magic[1] == 'F' || magic[1] == 'f')) {
    fp.reset();
    if (kind_out) *kind_out = ImageFileKind::pfm;
    return detail::load_pfm<Scalar>(path);
  }
  if (got == 8 && png_sig_cmp(magic, 0, 8) == 0) {
    std::rewind(fp.get());
    ImageFileKind k{};
    auto img = detail::load_png<Scalar>(fp.get(), path, k);
    if (kind_out) *kind_out = k;
    return img;
  }
  throw FormatError("unrecognized image format: " + path);
}

template <typename Scalar>
void save_image(const Image<Scalar>& img, const std::string& path, ImageFileKind kind) {
  if (img.channels() != 1 && img.channels() != 3)
    throw FormatError("save_image: only 1- or 3-channel images");
  switch (kind) {
    case ImageFileKind::png8: detail::save_png(img, path, 8); break;
    case ImageFileKind::png16: detail::save_png(img, path, 16); break;
    case ImageFileKind::pfm: detail::save_pfm(img, path); break;
  }
}

// Pick an output format from a file extension: .pfm -> pfm, else 8-bit PNG.
inline ImageFileKind kind_from_extension(const std::string& path) {
  const auto dot = path.find_last_of('.');
  std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
  for (auto& ch : ext) ch = char(std::tolower(static_cast<unsigned char>(ch)));
  return ext == "pfm" ? ImageFileKind::pfm : ImageFileKind::png8;
}

}  // namespace pls
