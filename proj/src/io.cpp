/******************************************************************************
 * Copyright 2026 The cisca-kit Authors. All Rights Reserved.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *****************************************************************************/

#include "cisca/io.hpp"

#include <png.h>

#include <bit>
#include <csetjmp>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <vector>

namespace cisca::io {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const fs::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw DataError("cannot open '" + path.string() + "'");
  return f;
}

[[noreturn]] void png_fail(png_structp png, png_const_charp msg) {
  auto* what = static_cast<std::string*>(png_get_error_ptr(png));
  if (what) *what = msg;
  std::longjmp(png_jmpbuf(png), 1);
}

void png_warn(png_structp, png_const_charp) {}

// Decoded PNG samples; 16-bit samples are kept at full depth.
struct Decoded {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;
  int bit_depth = 8;
  std::vector<std::uint16_t> samples;
};

Decoded decode_png(const fs::path& path) {
  auto file = open_file(path, "rb");
  png_byte sig[8];
  if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw DataError("'" + path.string() + "' is not a PNG file");
  }
  std::string error;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &error, png_fail, png_warn);
  if (!png) throw DataError("png: out of memory");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw DataError("png: out of memory");
  }
  Decoded out;
  std::vector<png_bytep> rows;
  std::vector<png_byte> buffer;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError("'" + path.string() + "': " + error);
  }
  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (depth == 16) png_set_swap(png);  // host little-endian order
  png_read_update_info(png, info);

  out.height = png_get_image_height(png, info);
  out.width = png_get_image_width(png, info);
  out.channels = png_get_channels(png, info);
  out.bit_depth = png_get_bit_depth(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  buffer.resize(rowbytes * out.height);
  rows.resize(out.height);
  for (std::size_t r = 0; r < out.height; ++r) rows[r] = buffer.data() + r * rowbytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  const std::size_t n = out.height * out.width * out.channels;
  out.samples.resize(n);
  if (out.bit_depth == 16) {
    for (std::size_t r = 0; r < out.height; ++r) {
      std::memcpy(out.samples.data() + r * out.width * out.channels, rows[r],
                  out.width * out.channels * 2);
    }
  } else {
    for (std::size_t r = 0; r < out.height; ++r) {
      for (std::size_t i = 0; i < out.width * out.channels; ++i) {
        out.samples[r * out.width * out.channels + i] = rows[r][i];
      }
    }
  }
  if (out.height == 0 || out.width == 0) throw DataError("'" + path.string() + "' is empty");
  return out;
}

void encode_png(const fs::path& path, std::size_t height, std::size_t width, int color,
                int depth, const std::vector<png_byte>& data) {
  auto file = open_file(path, "wb");
  std::string error;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &error, png_fail, png_warn);
  if (!png) throw DataError("png: out of memory");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw DataError("png: out of memory");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw DataError("writing '" + path.string() + "': " + error);
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
               depth, color, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t rowbytes = data.size() / height;
  for (std::size_t r = 0; r < height; ++r) {
    png_write_row(png, const_cast<png_bytep>(data.data() + r * rowbytes));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

Decoded decode_gray(const fs::path& path) {
  Decoded d = decode_png(path);
  if (d.channels != 1) {
    throw DataError("'" + path.string() + "': expected single-channel PNG, got " +
                    std::to_string(d.channels) + " channels");
  }
  return d;
}

}  // namespace

LabelMap read_label_png(const fs::path& path) {
  const Decoded d = decode_gray(path);
  LabelMap out(d.height, d.width, 1, 0);
  for (std::size_t i = 0; i < d.samples.size(); ++i) out[i] = d.samples[i];
  return out;
}

void write_label_png(const fs::path& path, const LabelMap& labels) {
  if (labels.channels() != 1) throw DataError("label map must have one channel");
  std::vector<png_byte> data(labels.size() * 2);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto v = labels[i];
    if (v < 0 || v > 65535) {
      throw DataError("instance id " + std::to_string(v) + " does not fit in 16 bits");
    }
    data[2 * i] = static_cast<png_byte>(v >> 8);
    data[2 * i + 1] = static_cast<png_byte>(v & 0xff);
  }
  encode_png(path, labels.height(), labels.width(), PNG_COLOR_TYPE_GRAY, 16, data);
}

Raster<std::uint8_t> read_gray8_png(const fs::path& path) {
  const Decoded d = decode_gray(path);
  if (d.bit_depth != 8) throw DataError("'" + path.string() + "': expected 8-bit PNG");
  Raster<std::uint8_t> out(d.height, d.width, 1, 0);
  for (std::size_t i = 0; i < d.samples.size(); ++i) out[i] = static_cast<std::uint8_t>(d.samples[i]);
  return out;
}

void write_gray8_png(const fs::path& path, const Raster<std::uint8_t>& img) {
  if (img.channels() != 1) throw DataError("gray image must have one channel");
  std::vector<png_byte> data(img.storage().begin(), img.storage().end());
  encode_png(path, img.height(), img.width(), PNG_COLOR_TYPE_GRAY, 8, data);
}

Mask read_mask_png(const fs::path& path) {
  const Decoded d = decode_gray(path);
  Mask out(d.height, d.width, 1, 0);
  for (std::size_t i = 0; i < d.samples.size(); ++i) out[i] = d.samples[i] != 0 ? 1 : 0;
  return out;
}

void write_mask_png(const fs::path& path, const Mask& mask) {
  Raster<std::uint8_t> img(mask.height(), mask.width(), 1, 0);
  for (std::size_t i = 0; i < mask.size(); ++i) img[i] = mask[i] ? 255 : 0;
  write_gray8_png(path, img);
}

Image8 read_rgb_png(const fs::path& path) {
  const Decoded d = decode_png(path);
  const int shift = d.bit_depth == 16 ? 8 : 0;
  Image8 out(d.height, d.width, 3, 0);
  for (std::size_t p = 0; p < d.height * d.width; ++p) {
    for (std::size_t k = 0; k < 3; ++k) {
      const std::size_t src = d.channels >= 3 ? k : 0;
      out[p * 3 + k] = static_cast<std::uint8_t>(d.samples[p * d.channels + src] >> shift);
    }
  }
  return out;
}

void write_rgb_png(const fs::path& path, const Image8& rgb) {
  if (rgb.channels() != 3) throw DataError("RGB image must have 3 channels");
  std::vector<png_byte> data(rgb.storage().begin(), rgb.storage().end());
  encode_png(path, rgb.height(), rgb.width(), PNG_COLOR_TYPE_RGB, 8, data);
}

fs::path sidecar_path(const fs::path& data) {
  fs::path p = data;
  p += ".json";
  return p;
}

Tensor read_f32(const fs::path& path) {
  const auto meta = read_json(sidecar_path(path));
  std::size_t h = 0, w = 0, c = 0;
  try {
    const auto& shape = meta.at("shape");
    if (!shape.is_array() || shape.size() != 3) throw DataError("shape must be [H, W, C]");
    h = shape[0].get<std::size_t>();
    w = shape[1].get<std::size_t>();
    c = shape[2].get<std::size_t>();
    if (meta.at("dtype").get<std::string>() != "f32") throw DataError("dtype must be f32");
    if (meta.contains("order") &&
        meta.at("order").get<std::string>() != "row-major-channel-last") {
      throw DataError("order must be row-major-channel-last");
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed sidecar '" + sidecar_path(path).string() + "': " + e.what());
  } catch (const DataError& e) {
    throw DataError("malformed sidecar '" + sidecar_path(path).string() + "': " + e.what());
  }
  if (h == 0 || w == 0 || c == 0) throw DataError("sidecar shape has a zero dimension");

  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  const std::size_t n = h * w * c;
  std::vector<std::uint32_t> raw(n);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(n * 4));
  if (static_cast<std::size_t>(in.gcount()) != n * 4 || in.peek() != std::char_traits<char>::eof()) {
    throw DataError("'" + path.string() + "' size does not match sidecar shape");
  }
  Tensor out(h, w, c, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint32_t bits = raw[i];
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
    out[i] = static_cast<double>(std::bit_cast<float>(bits));
  }
  return out;
}

void write_f32(const fs::path& path, const Tensor& t) {
  std::vector<std::uint32_t> raw(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    std::uint32_t bits = std::bit_cast<std::uint32_t>(static_cast<float>(t[i]));
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
    raw[i] = bits;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size() * 4));
  if (!out) throw DataError("short write to '" + path.string() + "'");
  nlohmann::ordered_json meta;
  meta["shape"] = {t.height(), t.width(), t.channels()};
  meta["dtype"] = "f32";
  meta["order"] = "row-major-channel-last";
  std::ofstream side(sidecar_path(path), std::ios::trunc);
  if (!side) throw DataError("cannot write '" + sidecar_path(path).string() + "'");
  side << meta.dump() << "\n";
}

double round6(double v) {
  const double r = std::round(v * 1e6) / 1e6;
  return r == 0.0 ? 0.0 : r;
}

nlohmann::json type_table_json(const post::InstanceTypeTable& table) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& t : table) {
    nlohmann::json e;
    e["id"] = t.id;
    e["type"] = t.type;
    e["vote_fraction"] = round6(t.vote_fraction);
    arr.push_back(e);
  }
  nlohmann::json out;
  out["instances"] = arr;
  return out;
}

post::InstanceTypeTable read_type_table(const fs::path& path) {
  const auto j = read_json(path);
  post::InstanceTypeTable table;
  try {
    for (const auto& e : j.at("instances")) {
      post::InstanceType t;
      t.id = e.at("id").get<std::int32_t>();
      t.type = e.at("type").get<std::int32_t>();
      t.vote_fraction = e.value("vote_fraction", 0.0);
      table.push_back(t);
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed type table '" + path.string() + "': " + e.what());
  }
  return table;
}

metrics::TypeTable read_type_map(const fs::path& path) {
  metrics::TypeTable m;
  for (const auto& t : read_type_table(path)) m[t.id] = t.type;
  return m;
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed JSON '" + path.string() + "': " + e.what());
  }
}

template <typename J>
void write_json_impl(const fs::path& path, const J& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << j.dump(2) << "\n";
  if (!out) throw DataError("short write to '" + path.string() + "'");
}

void write_json(const fs::path& path, const nlohmann::json& j) { write_json_impl(path, j); }

void write_json(const fs::path& path, const nlohmann::ordered_json& j) {
  write_json_impl(path, j);
}

}  // namespace cisca::io
