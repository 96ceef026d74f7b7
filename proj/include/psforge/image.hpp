#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace psforge {

// Row-major 8-bit image, 1 or 3 channels.
struct RawImage {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<std::uint8_t> data;

  std::uint8_t at(int x, int y, int c) const {
    return data[(static_cast<size_t>(y) * width + x) * channels + c];
  }
  std::uint8_t& at(int x, int y, int c) {
    return data[(static_cast<size_t>(y) * width + x) * channels + c];
  }
};

RawImage make_image(int width, int height, int channels, std::uint8_t fill = 0);

// Binary PGM (P5) / PPM (P6), maxval 255.
RawImage read_pnm(const std::string& path);
void write_pnm(const RawImage& image, const std::string& path);

}  // namespace psforge
