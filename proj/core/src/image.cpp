#include "dasa/image.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <stdexcept>

namespace dasa {

namespace {

constexpr const char* kExpectedFormats = "PNG, binary PPM (P6) or binary PGM (P5)";

[[noreturn]] void fail_load(const std::string& path, const std::string& why) {
  throw std::runtime_error("load_image: cannot read '" + path + "' (" + why +
                           "); expected formats: " + kExpectedFormats);
}

// --- netpbm ----------------------------------------------------------------

int pnm_next_token(std::istream& in, std::string& tok) {
  tok.clear();
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') {
        c = in.get();
      }
    } else if (std::isspace(c)) {
      c = in.get();
    } else {
      break;
    }
  }
  while (c != EOF && !std::isspace(c)) {
    tok.push_back(static_cast<char>(c));
    c = in.get();
  }
  return tok.empty() ? EOF : 0;
}

RasterImage load_pnm(const std::string& path, std::ifstream& in, bool color) {
  std::string tok;
  std::size_t dims[3];
  for (std::size_t i = 0; i < 3; ++i) {
    if (pnm_next_token(in, tok) == EOF) {
      fail_load(path, "truncated netpbm header");
    }
    try {
      dims[i] = std::stoul(tok);
    } catch (const std::exception&) {
      fail_load(path, "bad netpbm header token '" + tok + "'");
    }
  }
  const std::size_t width = dims[0];
  const std::size_t height = dims[1];
  const std::size_t maxval = dims[2];
  if (width == 0 || height == 0 || maxval == 0 || maxval > 65535) {
    fail_load(path, "bad netpbm dimensions");
  }
  // header ends with exactly one whitespace byte, already consumed by the
  // tokenizer's trailing get()

  const std::size_t channels = color ? 3 : 1;
  const std::size_t count = width * height * channels;
  const bool wide = maxval > 255;
  std::vector<unsigned char> raw(count * (wide ? 2 : 1));
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size()) {
    fail_load(path, "truncated netpbm pixel data");
  }

  RasterImage img = RasterImage::make(width, height, channels);
  const double depth = static_cast<double>(maxval);
  for (std::size_t i = 0; i < count; ++i) {
    std::size_t v;
    if (wide) {
      v = (static_cast<std::size_t>(raw[2 * i]) << 8) | raw[2 * i + 1];
    } else {
      v = raw[i];
    }
    img.pixels[i] = static_cast<double>(v) / depth;
  }
  return img;
}

// --- png -------------------------------------------------------------------

struct PngReadCloser {
  png_structp png = nullptr;
  png_infop info = nullptr;
  std::FILE* fp = nullptr;
  ~PngReadCloser() {
    if (png != nullptr) {
      png_destroy_read_struct(&png, info != nullptr ? &info : nullptr, nullptr);
    }
    if (fp != nullptr) {
      std::fclose(fp);
    }
  }
};

RasterImage load_png(const std::string& path) {
  PngReadCloser h;
  h.fp = std::fopen(path.c_str(), "rb");
  if (h.fp == nullptr) {
    fail_load(path, "cannot open file");
  }
  h.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (h.png == nullptr) {
    fail_load(path, "libpng init failed");
  }
  h.info = png_create_info_struct(h.png);
  if (h.info == nullptr) {
    fail_load(path, "libpng init failed");
  }
  if (setjmp(png_jmpbuf(h.png))) {
    fail_load(path, "libpng decode error");
  }
  png_init_io(h.png, h.fp);
  png_read_info(h.png, h.info);

  png_set_palette_to_rgb(h.png);
  png_set_expand_gray_1_2_4_to_8(h.png);
  if (png_get_valid(h.png, h.info, PNG_INFO_tRNS)) {
    png_set_tRNS_to_alpha(h.png);
  }
  png_set_strip_alpha(h.png);
  png_read_update_info(h.png, h.info);

  const std::size_t width = png_get_image_width(h.png, h.info);
  const std::size_t height = png_get_image_height(h.png, h.info);
  const int depth = png_get_bit_depth(h.png, h.info);
  const int color_type = png_get_color_type(h.png, h.info);

  std::size_t channels;
  if (color_type == PNG_COLOR_TYPE_GRAY) {
    channels = 1;
  } else if (color_type == PNG_COLOR_TYPE_RGB) {
    channels = 3;
  } else {
    fail_load(path, "unsupported png color type " + std::to_string(color_type));
  }

  const std::size_t rowbytes = png_get_rowbytes(h.png, h.info);
  std::vector<unsigned char> data(rowbytes * height);
  std::vector<png_bytep> rows(height);
  for (std::size_t y = 0; y < height; ++y) {
    rows[y] = data.data() + y * rowbytes;
  }
  png_read_image(h.png, rows.data());

  RasterImage img = RasterImage::make(width, height, channels);
  if (depth == 16) {
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
      const std::size_t v =
          (static_cast<std::size_t>(data[2 * i]) << 8) | data[2 * i + 1];
      img.pixels[i] = static_cast<double>(v) / 65535.0;
    }
  } else {
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
      img.pixels[i] = static_cast<double>(data[i]) / 255.0;
    }
  }
  return img;
}

struct PngWriteCloser {
  png_structp png = nullptr;
  png_infop info = nullptr;
  std::FILE* fp = nullptr;
  ~PngWriteCloser() {
    if (png != nullptr) {
      png_destroy_write_struct(&png, info != nullptr ? &info : nullptr);
    }
    if (fp != nullptr) {
      std::fclose(fp);
    }
  }
};

void save_png(const RasterImage& img, const std::string& path) {
  PngWriteCloser h;
  h.fp = std::fopen(path.c_str(), "wb");
  if (h.fp == nullptr) {
    throw std::runtime_error("save_image: cannot open '" + path + "' for writing");
  }
  h.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  h.info = png_create_info_struct(h.png);
  if (h.png == nullptr || h.info == nullptr || setjmp(png_jmpbuf(h.png))) {
    throw std::runtime_error("save_image: libpng encode error for '" + path + "'");
  }
  png_init_io(h.png, h.fp);
  png_set_IHDR(h.png, h.info, static_cast<png_uint_32>(img.width),
               static_cast<png_uint_32>(img.height), 8,
               img.channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(h.png, h.info);

  std::vector<unsigned char> row(img.width * img.channels);
  for (std::size_t y = 0; y < img.height; ++y) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      const double v = img.pixels[y * row.size() + i];
      row[i] = static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
    }
    png_write_row(h.png, row.data());
  }
  png_write_end(h.png, nullptr);
}

void save_pnm(const RasterImage& img, const std::string& path, bool color) {
  if (color && img.channels != 3) {
    throw std::invalid_argument("save_image: PPM needs 3 channels, image has " +
                                std::to_string(img.channels));
  }
  if (!color && img.channels != 1) {
    throw std::invalid_argument("save_image: PGM needs 1 channel, image has " +
                                std::to_string(img.channels));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("save_image: cannot open '" + path + "' for writing");
  }
  out << (color ? "P6" : "P5") << "\n"
      << img.width << " " << img.height << "\n255\n";
  std::vector<unsigned char> raw(img.pixels.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    raw[i] = static_cast<unsigned char>(
        std::lround(std::clamp(img.pixels[i], 0.0, 1.0) * 255.0));
  }
  out.write(reinterpret_cast<const char*>(raw.data()),
            static_cast<std::streamsize>(raw.size()));
  if (!out) {
    throw std::runtime_error("save_image: short write to '" + path + "'");
  }
}

bool has_suffix(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

void RasterImage::validate() const {
  if (channels != 1 && channels != 3) {
    throw std::invalid_argument("RasterImage: channels must be 1 or 3, got " +
                                std::to_string(channels));
  }
  if (pixels.size() != width * height * channels) {
    throw std::invalid_argument("RasterImage: pixel count " +
                                std::to_string(pixels.size()) + " != " +
                                std::to_string(width * height * channels));
  }
}

RasterImage load_image(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    fail_load(path, "cannot open file");
  }
  unsigned char sig[8] = {0};
  in.read(reinterpret_cast<char*>(sig), 8);
  if (in.gcount() < 2) {
    fail_load(path, "file too short");
  }
  if (png_sig_cmp(sig, 0, static_cast<std::size_t>(in.gcount())) == 0) {
    in.close();
    return load_png(path);
  }
  if (sig[0] == 'P' && (sig[1] == '5' || sig[1] == '6')) {
    in.clear();
    in.seekg(2);
    return load_pnm(path, in, sig[1] == '6');
  }
  fail_load(path, "unrecognized signature");
}

void save_image(const RasterImage& img, const std::string& path) {
  img.validate();
  if (has_suffix(path, ".png")) {
    save_png(img, path);
  } else if (has_suffix(path, ".ppm")) {
    save_pnm(img, path, true);
  } else if (has_suffix(path, ".pgm")) {
    save_pnm(img, path, false);
  } else {
    throw std::invalid_argument("save_image: unsupported extension in '" + path +
                                "' (use .png, .ppm or .pgm)");
  }
}

void save_pgm16(const Matrix& values, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("save_pgm16: cannot open '" + path + "' for writing");
  }
  out << "P5\n" << values.cols() << " " << values.rows() << "\n65535\n";
  std::vector<unsigned char> raw(values.size() * 2);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = std::clamp(values.values()[i], 0.0, 1.0);
    const unsigned int q = static_cast<unsigned int>(std::lround(v * 65535.0));
    raw[2 * i] = static_cast<unsigned char>(q >> 8);
    raw[2 * i + 1] = static_cast<unsigned char>(q & 0xff);
  }
  out.write(reinterpret_cast<const char*>(raw.data()),
            static_cast<std::streamsize>(raw.size()));
  if (!out) {
    throw std::runtime_error("save_pgm16: short write to '" + path + "'");
  }
}

}  // namespace dasa
