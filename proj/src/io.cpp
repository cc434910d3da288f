#include "hsims/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include "json.hpp"

namespace hsims::io {

namespace {

using ordered_json = nlohmann::ordered_json;

int require_positive_int(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number_integer())
    throw MalformedHeaderError(std::string("header: missing integer key '") + key + "'");
  long long v = j[key].get<long long>();
  if (v < 1 || v > 1'000'000)
    throw MalformedHeaderError(std::string("header: '") + key + "' out of range");
  return static_cast<int>(v);
}

std::string require_string(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_string())
    throw MalformedHeaderError(std::string("header: missing string key '") + key + "'");
  return j[key].get<std::string>();
}

}  // namespace

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open file: " + path);
  f.seekg(0, std::ios::end);
  auto n = f.tellg();
  f.seekg(0, std::ios::beg);
  std::vector<std::uint8_t> buf(static_cast<std::size_t>(n));
  if (n > 0) f.read(reinterpret_cast<char*>(buf.data()), n);
  if (!f) throw IoError("read failed: " + path);
  return buf;
}

void write_file(const std::string& path, const std::uint8_t* data, std::size_t n) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open file for writing: " + path);
  f.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n));
  if (!f) throw IoError("write failed: " + path);
}

CubeHeader read_header(const std::string& header_path) {
  std::ifstream f(header_path);
  if (!f) throw IoError("cannot open header: " + header_path);
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw MalformedHeaderError("header: invalid JSON in " + header_path + ": " + e.what());
  }
  CubeHeader h;
  h.height = require_positive_int(j, "height");
  h.width = require_positive_int(j, "width");
  h.bands = require_positive_int(j, "bands");
  h.dtype = require_string(j, "dtype");
  h.layout = require_string(j, "layout");
  if (h.layout != "bip")
    throw MalformedHeaderError("header: unsupported layout '" + h.layout + "'");
  if (h.dtype != "f32" && h.dtype != "u16")
    throw MalformedHeaderError("header: unsupported dtype '" + h.dtype + "'");
  return h;
}

void write_header(const CubeHeader& h, const std::string& header_path) {
  ordered_json j;
  j["height"] = h.height;
  j["width"] = h.width;
  j["bands"] = h.bands;
  j["dtype"] = h.dtype;
  j["layout"] = h.layout;
  std::string text = j.dump(2);
  text.push_back('\n');
  write_file(header_path, reinterpret_cast<const std::uint8_t*>(text.data()), text.size());
}

HyperCube load_cube(const std::string& header_path, const std::string& data_path) {
  CubeHeader h = read_header(header_path);
  if (h.dtype != "f32")
    throw MalformedHeaderError("cube header: dtype must be f32, got '" + h.dtype + "'");
  std::vector<std::uint8_t> raw = read_file(data_path);
  std::size_t count = static_cast<std::size_t>(h.height) * h.width * h.bands;
  if (raw.size() != count * 4)
    throw SizeMismatchError("cube data: expected " + std::to_string(count * 4) +
                            " bytes, got " + std::to_string(raw.size()));
  std::vector<double> data(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint32_t bits = static_cast<std::uint32_t>(raw[4 * i]) |
                         (static_cast<std::uint32_t>(raw[4 * i + 1]) << 8) |
                         (static_cast<std::uint32_t>(raw[4 * i + 2]) << 16) |
                         (static_cast<std::uint32_t>(raw[4 * i + 3]) << 24);
    float v;
    std::memcpy(&v, &bits, 4);
    data[i] = static_cast<double>(v);
  }
  HyperCube cube(h.height, h.width, h.bands, std::move(data));
  if (!cube.all_finite()) throw NonFiniteError("cube data: non-finite sample in " + data_path);
  return cube;
}

void save_cube(const HyperCube& cube, const std::string& header_path,
               const std::string& data_path) {
  if (!cube.all_finite()) throw NonFiniteError("save_cube: non-finite sample");
  CubeHeader h{cube.height(), cube.width(), cube.bands(), "f32", "bip"};
  write_header(h, header_path);
  const auto& data = cube.data();
  std::vector<std::uint8_t> raw(data.size() * 4);
  for (std::size_t i = 0; i < data.size(); ++i) {
    float v = static_cast<float>(data[i]);
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    raw[4 * i] = static_cast<std::uint8_t>(bits & 0xFF);
    raw[4 * i + 1] = static_cast<std::uint8_t>((bits >> 8) & 0xFF);
    raw[4 * i + 2] = static_cast<std::uint8_t>((bits >> 16) & 0xFF);
    raw[4 * i + 3] = static_cast<std::uint8_t>((bits >> 24) & 0xFF);
  }
  write_file(data_path, raw.data(), raw.size());
}

GroundTruth load_labels(const std::string& header_path, const std::string& data_path) {
  CubeHeader h = read_header(header_path);
  if (h.dtype != "u16")
    throw MalformedHeaderError("label header: dtype must be u16, got '" + h.dtype + "'");
  if (h.bands != 1)
    throw MalformedHeaderError("label header: bands must be 1");
  std::vector<std::uint8_t> raw = read_file(data_path);
  std::size_t count = static_cast<std::size_t>(h.height) * h.width;
  if (raw.size() != count * 2)
    throw SizeMismatchError("label data: expected " + std::to_string(count * 2) +
                            " bytes, got " + std::to_string(raw.size()));
  GroundTruth gt;
  gt.height = h.height;
  gt.width = h.width;
  gt.labels.resize(count);
  for (std::size_t i = 0; i < count; ++i)
    gt.labels[i] = static_cast<std::uint16_t>(raw[2 * i] |
                                              (static_cast<std::uint16_t>(raw[2 * i + 1]) << 8));
  return gt;
}

void save_labels(const GroundTruth& gt, const std::string& header_path,
                 const std::string& data_path) {
  if (gt.labels.size() != static_cast<std::size_t>(gt.height) * gt.width)
    throw std::invalid_argument("save_labels: label count does not match dimensions");
  CubeHeader h{gt.height, gt.width, 1, "u16", "bip"};
  write_header(h, header_path);
  std::vector<std::uint8_t> raw(gt.labels.size() * 2);
  for (std::size_t i = 0; i < gt.labels.size(); ++i) {
    raw[2 * i] = static_cast<std::uint8_t>(gt.labels[i] & 0xFF);
    raw[2 * i + 1] = static_cast<std::uint8_t>(gt.labels[i] >> 8);
  }
  write_file(data_path, raw.data(), raw.size());
}

namespace {

std::uint32_t crc32(const std::uint8_t* data, std::size_t n, std::uint32_t seed = 0xFFFFFFFFu) {
  static const auto table = [] {
    std::array<std::uint32_t, 256> t{};
    for (std::uint32_t i = 0; i < 256; ++i) {
      std::uint32_t c = i;
      for (int b = 0; b < 8; ++b) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
      t[i] = c;
    }
    return t;
  }();
  std::uint32_t c = seed;
  for (std::size_t i = 0; i < n; ++i) c = table[(c ^ data[i]) & 0xFF] ^ (c >> 8);
  return c;
}

std::uint32_t adler32(const std::uint8_t* data, std::size_t n) {
  std::uint32_t a = 1, b = 0;
  for (std::size_t i = 0; i < n; ++i) {
    a = (a + data[i]) % 65521u;
    b = (b + a) % 65521u;
  }
  return (b << 16) | a;
}

void put_u32_be(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xFF));
  out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
}

void put_chunk(std::vector<std::uint8_t>& out, const char type[4],
               const std::vector<std::uint8_t>& payload) {
  put_u32_be(out, static_cast<std::uint32_t>(payload.size()));
  std::size_t start = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), payload.begin(), payload.end());
  std::uint32_t c = crc32(out.data() + start, out.size() - start) ^ 0xFFFFFFFFu;
  put_u32_be(out, c);
}

}  // namespace

void save_label_png(const std::vector<std::uint16_t>& labels, int height,
                    int width, const std::vector<Rgb>& palette,
                    const std::string& path) {
  if (height < 1 || width < 1 ||
      labels.size() != static_cast<std::size_t>(height) * width)
    throw std::invalid_argument("save_label_png: label count does not match dimensions");
  for (std::uint16_t id : labels)
    if (id >= palette.size())
      throw std::invalid_argument("save_label_png: label id " + std::to_string(id) +
                                  " has no palette entry");

  // One filter byte (0, none) per scanline, then packed RGB.
  std::size_t stride = 1 + static_cast<std::size_t>(width) * 3;
  std::vector<std::uint8_t> scan(stride * height);
  for (int i = 0; i < height; ++i) {
    std::uint8_t* row = scan.data() + stride * i;
    row[0] = 0;
    for (int j = 0; j < width; ++j) {
      const Rgb& c = palette[labels[static_cast<std::size_t>(i) * width + j]];
      row[1 + 3 * j] = c[0];
      row[2 + 3 * j] = c[1];
      row[3 + 3 * j] = c[2];
    }
  }

  // zlib wrapper around stored deflate blocks: output depends only on input.
  std::vector<std::uint8_t> z;
  z.reserve(scan.size() + scan.size() / 65535 * 5 + 16);
  z.push_back(0x78);
  z.push_back(0x01);
  std::size_t off = 0;
  do {
    std::size_t len = std::min<std::size_t>(scan.size() - off, 65535);
    bool final = off + len == scan.size();
    z.push_back(final ? 1 : 0);
    z.push_back(static_cast<std::uint8_t>(len & 0xFF));
    z.push_back(static_cast<std::uint8_t>(len >> 8));
    z.push_back(static_cast<std::uint8_t>(~len & 0xFF));
    z.push_back(static_cast<std::uint8_t>((~len >> 8) & 0xFF));
    z.insert(z.end(), scan.begin() + off, scan.begin() + off + len);
    off += len;
  } while (off < scan.size());
  put_u32_be(z, adler32(scan.data(), scan.size()));

  std::vector<std::uint8_t> png = {137, 80, 78, 71, 13, 10, 26, 10};
  std::vector<std::uint8_t> ihdr;
  put_u32_be(ihdr, static_cast<std::uint32_t>(width));
  put_u32_be(ihdr, static_cast<std::uint32_t>(height));
  ihdr.push_back(8);  // bit depth
  ihdr.push_back(2);  // truecolor
  ihdr.push_back(0);
  ihdr.push_back(0);
  ihdr.push_back(0);
  put_chunk(png, "IHDR", ihdr);
  put_chunk(png, "IDAT", z);
  put_chunk(png, "IEND", {});
  write_file(path, png.data(), png.size());
}

std::vector<Rgb> make_palette(int classes) {
  if (classes < 0) throw std::invalid_argument("make_palette: negative class count");
  std::vector<Rgb> pal(static_cast<std::size_t>(classes) + 1);
  pal[0] = {0, 0, 0};
  for (int i = 1; i <= classes; ++i) {
    // Golden-angle hue steps keep neighbouring ids visually distinct for any
    // class count.
    double h = std::fmod(0.61803398874989485 * (i - 1), 1.0) * 6.0;
    double s = 0.72, v = 0.95;
    int sector = static_cast<int>(h);
    double f = h - sector;
    double p = v * (1.0 - s);
    double q = v * (1.0 - s * f);
    double t = v * (1.0 - s * (1.0 - f));
    double r, g, b;
    switch (sector % 6) {
      case 0: r = v; g = t; b = p; break;
      case 1: r = q; g = v; b = p; break;
      case 2: r = p; g = v; b = t; break;
      case 3: r = p; g = q; b = v; break;
      case 4: r = t; g = p; b = v; break;
      default: r = v; g = p; b = q; break;
    }
    pal[i] = {static_cast<std::uint8_t>(std::lround(r * 255.0)),
              static_cast<std::uint8_t>(std::lround(g * 255.0)),
              static_cast<std::uint8_t>(std::lround(b * 255.0))};
  }
  return pal;
}

void save_scores_csv(const std::vector<ScoreRow>& rows, const std::string& path) {
  std::string text = "oa,aa,kappa,seed\n";
  char buf[128];
  for (const ScoreRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.6f,%llu\n", r.oa, r.aa, r.kappa,
                  static_cast<unsigned long long>(r.seed));
    text += buf;
  }
  write_file(path, reinterpret_cast<const std::uint8_t*>(text.data()), text.size());
}

}  // namespace hsims::io
