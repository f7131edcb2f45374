// Copyright 2026 The roiqa Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "roiqa/image_io.hpp"

#include <openssl/evp.h>
#include <openssl/sha.h>
#include <png.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "roiqa/records.hpp"

namespace roiqa {

namespace {

std::uint8_t to_byte(double v) {
  const double c = std::isnan(v) ? 0.0 : std::min(1.0, std::max(0.0, v));
  return static_cast<std::uint8_t>(std::lround(c * 255.0));
}

class PngImage {
 public:
  PngImage() {
    std::memset(&image_, 0, sizeof(image_));
    image_.version = PNG_IMAGE_VERSION;
  }
  ~PngImage() { png_image_free(&image_); }
  PngImage(const PngImage&) = delete;
  PngImage& operator=(const PngImage&) = delete;

  png_image* get() { return &image_; }

 private:
  png_image image_;
};

Bytes write_png_memory(PngImage& img, const std::uint8_t* pixels, std::size_t stride) {
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(img.get(), nullptr, &size, 0, pixels,
                                 static_cast<png_int_32>(stride), nullptr)) {
    throw Error(std::string("PNG encode failed: ") + img.get()->message);
  }
  Bytes out(size);
  if (!png_image_write_to_memory(img.get(), out.data(), &size, 0, pixels,
                                 static_cast<png_int_32>(stride), nullptr)) {
    throw Error(std::string("PNG encode failed: ") + img.get()->message);
  }
  out.resize(size);
  return out;
}

std::vector<std::uint8_t> read_png_memory(std::span<const std::uint8_t> bytes,
                                          png_uint_32 format, std::size_t& height,
                                          std::size_t& width) {
  PngImage img;
  if (!png_image_begin_read_from_memory(img.get(), bytes.data(), bytes.size())) {
    throw Error(std::string("PNG decode failed: ") + img.get()->message);
  }
  img.get()->format = format;
  std::vector<std::uint8_t> pixels(PNG_IMAGE_SIZE(*img.get()));
  if (!png_image_finish_read(img.get(), nullptr, pixels.data(), 0, nullptr)) {
    throw Error(std::string("PNG decode failed: ") + img.get()->message);
  }
  height = img.get()->height;
  width = img.get()->width;
  return pixels;
}

}  // namespace

bool looks_like_png(std::span<const std::uint8_t> bytes) {
  static constexpr std::uint8_t kSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  return bytes.size() >= 8 && std::memcmp(bytes.data(), kSig, 8) == 0;
}

Bytes encode_png(const ImageBuffer& image) {
  if (image.empty()) throw Error("encode_png: empty image");
  std::vector<std::uint8_t> pixels(image.data().size());
  for (std::size_t i = 0; i < pixels.size(); ++i) pixels[i] = to_byte(image.data()[i]);
  PngImage img;
  img.get()->width = static_cast<png_uint_32>(image.width());
  img.get()->height = static_cast<png_uint_32>(image.height());
  img.get()->format = PNG_FORMAT_RGB;
  return write_png_memory(img, pixels.data(), image.width() * 3);
}

ImageBuffer decode_png(std::span<const std::uint8_t> bytes) {
  std::size_t h = 0;
  std::size_t w = 0;
  const auto pixels = read_png_memory(bytes, PNG_FORMAT_RGB, h, w);
  std::vector<double> data(pixels.size());
  for (std::size_t i = 0; i < pixels.size(); ++i) data[i] = pixels[i] / 255.0;
  return ImageBuffer(h, w, std::move(data));
}

Bytes encode_mask_png(const RegionMask& mask) {
  std::vector<std::uint8_t> pixels(mask.bits().size());
  for (std::size_t i = 0; i < pixels.size(); ++i) pixels[i] = mask.bits()[i] ? 255 : 0;
  PngImage img;
  img.get()->width = static_cast<png_uint_32>(mask.width());
  img.get()->height = static_cast<png_uint_32>(mask.height());
  img.get()->format = PNG_FORMAT_GRAY;
  return write_png_memory(img, pixels.data(), mask.width());
}

RegionMask decode_mask_png(std::span<const std::uint8_t> bytes) {
  std::size_t h = 0;
  std::size_t w = 0;
  auto pixels = read_png_memory(bytes, PNG_FORMAT_GRAY, h, w);
  return RegionMask(h, w, std::move(pixels));
}

Bytes read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

ImageBuffer read_png(const std::filesystem::path& path) {
  const Bytes bytes = read_bytes(path);
  try {
    return decode_png(bytes);
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

void write_png(const std::filesystem::path& path, const ImageBuffer& image) {
  const Bytes bytes = encode_png(image);
  write_file_atomic(path, std::string_view(reinterpret_cast<const char*>(bytes.data()),
                                           bytes.size()));
}

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
  std::uint8_t digest[SHA256_DIGEST_LENGTH];
  unsigned int len = 0;
  if (!EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr)) {
    throw Error("SHA-256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xf]);
  }
  return out;
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

ImageBuffer quantize_8bit(const ImageBuffer& image) {
  ImageBuffer out = image;
  for (double& v : out.data()) v = to_byte(v) / 255.0;
  return out;
}

}  // namespace roiqa
