#include "evsplat/image_io.hpp"

#include "binio.hpp"

#include <png.h>

#include <cstdio>
#include <filesystem>
#include <memory>
#include <vector>

namespace evsplat {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

// write to a temp file first so readers never observe a partial file
class AtomicFile {
 public:
  explicit AtomicFile(const std::string& path)
      : final_path_(path), tmp_path_(path + ".tmp") {}
  const std::string& tmp_path() const { return tmp_path_; }
  void commit() {
    std::error_code ec;
    std::filesystem::rename(tmp_path_, final_path_, ec);
    if (ec) throw IoError("rename " + tmp_path_ + " -> " + final_path_ + ": " + ec.message());
  }

 private:
  std::string final_path_;
  std::string tmp_path_;
};

}  // namespace

void write_png(const std::string& path, const Image& linear) {
  if (linear.empty()) throw ContractViolation("write_png: empty image");
  if (linear.channels != 1 && linear.channels != 3)
    throw ContractViolation("write_png: need 1 or 3 channels");

  AtomicFile atomic(path);
  FilePtr fp(std::fopen(atomic.tmp_path().c_str(), "wb"));
  if (!fp) throw IoError("cannot open " + path + " for writing");

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("libpng error while writing " + path);
  }

  png_init_io(png, fp.get());
  png_set_IHDR(png, info, linear.width, linear.height, 8,
               linear.channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  std::vector<png_byte> row(static_cast<std::size_t>(linear.width) * linear.channels);
  for (int y = 0; y < linear.height; ++y) {
    for (int x = 0; x < linear.width; ++x)
      for (int c = 0; c < linear.channels; ++c) {
        const double d = linear_to_display(linear.at(x, y, c));
        row[static_cast<std::size_t>(x) * linear.channels + c] =
            static_cast<png_byte>(std::lround(d * 255.0));
      }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  fp.reset();
  atomic.commit();
}

Image read_png(const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw IoError("cannot open " + path);

  png_byte header[8];
  if (std::fread(header, 1, 8, fp.get()) != 8 || png_sig_cmp(header, 0, 8))
    throw IoError(path + " is not a PNG file");

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("libpng error while reading " + path);
  }

  png_init_io(png, fp.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  // normalize to 8-bit RGB or gray
  png_set_strip_16(png);
  png_set_packing(png);
  if (png_get_color_type(png, info) == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (png_get_color_type(png, info) & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  png_read_update_info(png, info);

  const int width = static_cast<int>(png_get_image_width(png, info));
  const int height = static_cast<int>(png_get_image_height(png, info));
  const int channels = static_cast<int>(png_get_channels(png, info));
  if (channels != 1 && channels != 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError(path + ": unsupported channel count after normalization");
  }

  Image img = Image::zeros(width, height, channels);
  std::vector<png_byte> row(static_cast<std::size_t>(width) * channels);
  for (int y = 0; y < height; ++y) {
    png_read_row(png, row.data(), nullptr);
    for (int x = 0; x < width; ++x)
      for (int c = 0; c < channels; ++c)
        img.at(x, y, c) =
            display_to_linear(row[static_cast<std::size_t>(x) * channels + c] / 255.0);
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

namespace {
constexpr char kRawMagic[] = "EVSRAW01";
}

void write_raw(const std::string& path, const Image& img) {
  if (img.empty()) throw ContractViolation("write_raw: empty image");
  AtomicFile atomic(path);
  std::ofstream os(atomic.tmp_path(), std::ios::binary);
  if (!os) throw IoError("cannot open " + path + " for writing");
  os.write(kRawMagic, 8);
  binio::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(img.width));
  binio::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(img.height));
  binio::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(img.channels));
  for (double v : img.data) binio::write_le<float>(os, static_cast<float>(v));
  if (!os) throw IoError("write failed for " + path);
  os.close();
  atomic.commit();
}

Image read_raw(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  binio::expect_magic(is, kRawMagic, path);
  const auto width = binio::read_le<std::uint32_t>(is, "width");
  const auto height = binio::read_le<std::uint32_t>(is, "height");
  const auto channels = binio::read_le<std::uint32_t>(is, "channels");
  if (width == 0 || height == 0 || channels == 0 || width > 1u << 16 || height > 1u << 16 ||
      channels > 4)
    throw IoError(path + ": implausible raw header");
  Image img = Image::zeros(static_cast<int>(width), static_cast<int>(height),
                           static_cast<int>(channels));
  for (double& v : img.data) v = binio::read_le<float>(is, "raw pixel data");
  return img;
}

}  // namespace evsplat
