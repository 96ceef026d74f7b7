#include "psforge/image.hpp"

#include <fstream>

#include "psforge/errors.hpp"

namespace psforge {

RawImage make_image(int width, int height, int channels, std::uint8_t fill) {
  RawImage img;
  img.width = width;
  img.height = height;
  img.channels = channels;
  img.data.assign(static_cast<size_t>(width) * height * channels, fill);
  return img;
}

namespace {

// Reads the next header token, skipping whitespace and '#' comments.
std::string next_header_token(std::istream& stream, const std::string& path) {
  std::string token;
  int c;
  while ((c = stream.get()) != EOF) {
    if (c == '#') {
      while ((c = stream.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (!std::isspace(c)) {
      token.push_back(static_cast<char>(c));
      while ((c = stream.peek()) != EOF && !std::isspace(c) && c != '#') {
        token.push_back(static_cast<char>(stream.get()));
      }
      return token;
    }
  }
  throw FormatError(path + ": truncated PNM header");
}

int header_int(std::istream& stream, const std::string& path, const char* what) {
  const std::string token = next_header_token(stream, path);
  try {
    size_t pos = 0;
    const int value = std::stoi(token, &pos);
    if (pos != token.size() || value < 0) throw std::invalid_argument(token);
    return value;
  } catch (const std::exception&) {
    throw FormatError(path + ": bad PNM " + what + " '" + token + "'");
  }
}

}  // namespace

RawImage read_pnm(const std::string& path) {
  std::ifstream stream(path, std::ios::binary);
  if (!stream) {
    throw FormatError(path + ": cannot open image");
  }
  const std::string magic = next_header_token(stream, path);
  int channels = 0;
  if (magic == "P5") {
    channels = 1;
  } else if (magic == "P6") {
    channels = 3;
  } else {
    throw FormatError(path + ": unsupported PNM magic '" + magic + "' (need P5 or P6)");
  }
  RawImage img;
  img.channels = channels;
  img.width = header_int(stream, path, "width");
  img.height = header_int(stream, path, "height");
  const int maxval = header_int(stream, path, "maxval");
  if (maxval != 255) {
    throw FormatError(path + ": only maxval 255 is supported");
  }
  stream.get();  // single whitespace after maxval
  img.data.resize(static_cast<size_t>(img.width) * img.height * channels);
  stream.read(reinterpret_cast<char*>(img.data.data()),
              static_cast<std::streamsize>(img.data.size()));
  if (static_cast<size_t>(stream.gcount()) != img.data.size()) {
    throw FormatError(path + ": truncated pixel data");
  }
  return img;
}

void write_pnm(const RawImage& image, const std::string& path) {
  if (image.channels != 1 && image.channels != 3) {
    throw ContractViolation("write_pnm: channels must be 1 or 3");
  }
  std::ofstream stream(path, std::ios::binary);
  if (!stream) {
    throw Error("cannot write " + path);
  }
  stream << (image.channels == 1 ? "P5" : "P6") << "\n"
         << image.width << " " << image.height << "\n255\n";
  stream.write(reinterpret_cast<const char*>(image.data.data()),
               static_cast<std::streamsize>(image.data.size()));
}

}  // namespace psforge
