#include "evsplat/image_io.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <string>

using namespace evsplat;

namespace {

Image random_image(int w, int h, int c, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  Image img = Image::zeros(w, h, c);
  for (double& v : img.data) v = u(rng);
  return img;
}

struct TempPath {
  std::string path;
  explicit TempPath(std::string p) : path(std::move(p)) {}
  ~TempPath() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("display curve is the inverse of its inverse on [0, 1]") {
  for (double v = 0.0; v <= 1.0; v += 0.01) {
    CHECK(display_to_linear(linear_to_display(v)) == doctest::Approx(v).epsilon(1e-12));
    CHECK(linear_to_display(display_to_linear(v)) == doctest::Approx(v).epsilon(1e-12));
  }
  CHECK(linear_to_display(-0.5) == 0.0);
  CHECK(linear_to_display(2.0) == 1.0);
  CHECK(linear_to_display(0.0) == 0.0);
  CHECK(linear_to_display(1.0) == 1.0);
}

TEST_CASE("image log applies the floor") {
  Image img = Image::zeros(2, 1, 1);
  img.at(0, 0, 0) = 0.5;
  img.at(1, 0, 0) = 0.0;
  const Image lg = img.log(1e-5);
  CHECK(lg.at(0, 0, 0) == std::log(0.5));
  CHECK(lg.at(1, 0, 0) == std::log(1e-5));
}

TEST_CASE("max_abs_diff and all_finite behave") {
  Image a = random_image(4, 3, 3, 1);
  Image b = a;
  CHECK(a.max_abs_diff(b) == 0.0);
  b.at(2, 1, 0) += 0.25;
  CHECK(a.max_abs_diff(b) == doctest::Approx(0.25));
  CHECK(a.all_finite());
  b.at(0, 0, 1) = std::nan("");
  CHECK_FALSE(b.all_finite());
}

TEST_CASE("raw files round trip with float precision") {
  const Image img = random_image(13, 7, 3, 42, -3.0, 3.0);
  TempPath tmp("test_io_roundtrip.raw");
  write_raw(tmp.path, img);
  const Image back = read_raw(tmp.path);
  REQUIRE(back.same_shape(img));
  for (std::size_t i = 0; i < img.data.size(); ++i)
    CHECK(back.data[i] == static_cast<double>(static_cast<float>(img.data[i])));
}

TEST_CASE("png files round trip within the 8-bit display quantum") {
  const Image img = random_image(16, 12, 3, 7);
  TempPath tmp("test_io_roundtrip.png");
  write_png(tmp.path, img);
  const Image back = read_png(tmp.path);
  REQUIRE(back.same_shape(img));
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    const double display = linear_to_display(img.data[i]);
    const double display_back = linear_to_display(back.data[i]);
    CHECK(std::abs(display - display_back) <= 0.5 / 255.0 + 1e-9);
  }
}

TEST_CASE("single-channel pngs are supported") {
  const Image img = random_image(9, 9, 1, 3);
  TempPath tmp("test_io_gray.png");
  write_png(tmp.path, img);
  const Image back = read_png(tmp.path);
  CHECK(back.channels == 1);
  CHECK(back.width == 9);
}

TEST_CASE("two-channel images are rejected by png io") {
  const Image img = random_image(4, 4, 2, 3);
  CHECK_THROWS_AS(write_png("test_io_bad.png", img), ContractViolation);
}

TEST_CASE("corrupt raw headers are reported as io errors") {
  TempPath tmp("test_io_corrupt.raw");
  {
    std::ofstream os(tmp.path, std::ios::binary);
    os << "NOTMAGIC then some garbage";
  }
  CHECK_THROWS_AS(read_raw(tmp.path), IoError);
  CHECK_THROWS_AS(read_raw("missing_file.raw"), IoError);
  CHECK_THROWS_AS(read_png("missing_file.png"), IoError);
}

TEST_CASE("truncated raw payloads are reported") {
  const Image img = random_image(8, 8, 3, 11);
  TempPath tmp("test_io_trunc.raw");
  write_raw(tmp.path, img);
  // chop the file short
  std::ifstream is(tmp.path, std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  is.close();
  {
    std::ofstream os(tmp.path, std::ios::binary | std::ios::trunc);
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
  }
  CHECK_THROWS_AS(read_raw(tmp.path), IoError);
}
