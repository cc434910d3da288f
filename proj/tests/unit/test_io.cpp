#include <unistd.h>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "hsims/io.hpp"

using namespace hsims;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path dir;
  TempDir() {
    dir = fs::temp_directory_path() /
          ("hsims_io_test_" + std::to_string(::getpid()) + "_" +
           std::to_string(counter()++));
    fs::create_directories(dir);
  }
  ~TempDir() { fs::remove_all(dir); }
  std::string p(const std::string& name) const { return (dir / name).string(); }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

void write_bytes(const std::string& path, const std::vector<std::uint8_t>& b) {
  std::ofstream f(path, std::ios::binary);
  f.write(reinterpret_cast<const char*>(b.data()), b.size());
}

std::vector<std::uint8_t> f32_bytes(const std::vector<float>& vals) {
  std::vector<std::uint8_t> out(vals.size() * 4);
  std::memcpy(out.data(), vals.data(), out.size());
  return out;
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(f), {});
}

// Minimal reader for the PNGs this project writes: 8-bit RGB, filter 0 rows,
// stored (uncompressed) deflate blocks.
struct DecodedPng {
  std::uint32_t width = 0, height = 0;
  int bit_depth = 0, color_type = 0;
  std::vector<std::uint8_t> rgb;  // 3 bytes per pixel
};

std::uint32_t be32(const std::uint8_t* p) {
  return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) |
         (std::uint32_t(p[2]) << 8) | std::uint32_t(p[3]);
}

DecodedPng decode_png(const std::string& path) {
  auto bytes = io::read_file(path);
  REQUIRE(bytes.size() > 8);
  const std::uint8_t sig[8] = {137, 80, 78, 71, 13, 10, 26, 10};
  REQUIRE(std::memcmp(bytes.data(), sig, 8) == 0);

  DecodedPng png;
  std::vector<std::uint8_t> idat;
  std::size_t pos = 8;
  while (pos + 8 <= bytes.size()) {
    std::uint32_t len = be32(&bytes[pos]);
    std::string type(reinterpret_cast<const char*>(&bytes[pos + 4]), 4);
    const std::uint8_t* data = &bytes[pos + 8];
    if (type == "IHDR") {
      png.width = be32(data);
      png.height = be32(data + 4);
      png.bit_depth = data[8];
      png.color_type = data[9];
    } else if (type == "IDAT") {
      idat.insert(idat.end(), data, data + len);
    }
    pos += 12 + len;  // length + type + data + crc
    if (type == "IEND") break;
  }

  // zlib wrapper then stored deflate blocks
  REQUIRE(idat.size() > 6);
  REQUIRE(idat[0] == 0x78);
  std::vector<std::uint8_t> raw;
  std::size_t i = 2;
  while (true) {
    REQUIRE(i < idat.size());
    std::uint8_t head = idat[i++];
    REQUIRE((head >> 1) == 0);  // stored block
    std::uint16_t len = idat[i] | (idat[i + 1] << 8);
    std::uint16_t nlen = idat[i + 2] | (idat[i + 3] << 8);
    REQUIRE(static_cast<std::uint16_t>(~len) == nlen);
    i += 4;
    raw.insert(raw.end(), idat.begin() + i, idat.begin() + i + len);
    i += len;
    if (head & 1) break;
  }

  std::size_t stride = static_cast<std::size_t>(png.width) * 3;
  REQUIRE(raw.size() == png.height * (stride + 1));
  for (std::uint32_t r = 0; r < png.height; ++r) {
    REQUIRE(raw[r * (stride + 1)] == 0);  // filter byte
    png.rgb.insert(png.rgb.end(), raw.begin() + r * (stride + 1) + 1,
                   raw.begin() + (r + 1) * (stride + 1));
  }
  return png;
}

}  // namespace

TEST_CASE("header round trip and exact serialization") {
  TempDir t;
  io::CubeHeader h{3, 4, 5, "f32", "bip"};
  io::write_header(h, t.p("h.json"));
  io::CubeHeader back = io::read_header(t.p("h.json"));
  CHECK(back.height == 3);
  CHECK(back.width == 4);
  CHECK(back.bands == 5);
  CHECK(back.dtype == "f32");
  CHECK(back.layout == "bip");

  std::string text = slurp(t.p("h.json"));
  // key order is part of the format
  CHECK(text.find("\"height\"") < text.find("\"width\""));
  CHECK(text.find("\"width\"") < text.find("\"bands\""));
  CHECK(text.find("\"bands\"") < text.find("\"dtype\""));
  CHECK(text.find("\"dtype\"") < text.find("\"layout\""));
}

TEST_CASE("malformed headers raise MalformedHeaderError") {
  TempDir t;
  auto try_header = [&](const std::string& body) {
    std::ofstream(t.p("bad.json")) << body;
    CHECK_THROWS_AS(io::read_header(t.p("bad.json")), io::MalformedHeaderError);
  };
  try_header(R"({"width":1,"bands":1,"dtype":"f32","layout":"bip"})");   // no height
  try_header(R"({"height":0,"width":1,"bands":1,"dtype":"f32","layout":"bip"})");
  try_header(R"({"height":1.5,"width":1,"bands":1,"dtype":"f32","layout":"bip"})");
  try_header(R"({"height":1,"width":1,"bands":1,"dtype":"f64","layout":"bip"})");
  try_header(R"({"height":1,"width":1,"bands":1,"dtype":"f32","layout":"bsq"})");
  try_header("not json");
}

TEST_CASE("load_cube reads little-endian binary32 and promotes") {
  TempDir t;
  std::ofstream(t.p("c.json"))
      << R"({"height":1,"width":1,"bands":2,"dtype":"f32","layout":"bip"})";
  write_bytes(t.p("c.raw"), f32_bytes({1.0f, 2.0f}));
  HyperCube c = io::load_cube(t.p("c.json"), t.p("c.raw"));
  CHECK(c.height() == 1);
  CHECK(c.bands() == 2);
  CHECK(c.at(0, 0, 0) == 1.0);
  CHECK(c.at(0, 0, 1) == 2.0);
}

TEST_CASE("load_cube size and value errors") {
  TempDir t;
  std::ofstream(t.p("c.json"))
      << R"({"height":1,"width":1,"bands":2,"dtype":"f32","layout":"bip"})";

  write_bytes(t.p("c.raw"), f32_bytes({1.0f}));  // 4 bytes short
  CHECK_THROWS_AS(io::load_cube(t.p("c.json"), t.p("c.raw")), io::SizeMismatchError);

  auto bytes = f32_bytes({1.0f, 2.0f});
  bytes.push_back(0);  // one byte long
  write_bytes(t.p("c.raw"), bytes);
  CHECK_THROWS_AS(io::load_cube(t.p("c.json"), t.p("c.raw")), io::SizeMismatchError);

  write_bytes(t.p("c.raw"), f32_bytes({1.0f, std::nanf("")}));
  CHECK_THROWS_AS(io::load_cube(t.p("c.json"), t.p("c.raw")), NonFiniteError);

  CHECK_THROWS_AS(io::load_cube(t.p("missing.json"), t.p("c.raw")), io::IoError);
}

TEST_CASE("cube save/load round trip quantizes to binary32") {
  TempDir t;
  HyperCube c(2, 1, 2, {0.1, -3.75, 1e-20, 7.0});
  io::save_cube(c, t.p("c.json"), t.p("c.raw"));
  HyperCube back = io::load_cube(t.p("c.json"), t.p("c.raw"));
  REQUIRE(back.size() == c.size());
  for (std::size_t i = 0; i < c.size(); ++i)
    CHECK(back.data()[i] == static_cast<double>(static_cast<float>(c.data()[i])));
  // a second trip is lossless
  io::save_cube(back, t.p("c2.json"), t.p("c2.raw"));
  HyperCube back2 = io::load_cube(t.p("c2.json"), t.p("c2.raw"));
  CHECK(back2.data() == back.data());
}

TEST_CASE("label raster round trip") {
  TempDir t;
  io::GroundTruth gt;
  gt.height = 2;
  gt.width = 3;
  gt.labels = {0, 1, 2, 65535, 4, 5};
  io::save_labels(gt, t.p("g.json"), t.p("g.raw"));

  io::CubeHeader h = io::read_header(t.p("g.json"));
  CHECK(h.dtype == "u16");
  CHECK(h.bands == 1);

  io::GroundTruth back = io::load_labels(t.p("g.json"), t.p("g.raw"));
  CHECK(back.height == 2);
  CHECK(back.width == 3);
  CHECK(back.labels == gt.labels);
}

TEST_CASE("load_labels rejects cube headers and size mismatches") {
  TempDir t;
  std::ofstream(t.p("g.json"))
      << R"({"height":1,"width":2,"bands":1,"dtype":"f32","layout":"bip"})";
  write_bytes(t.p("g.raw"), {0, 0, 1, 0});
  CHECK_THROWS_AS(io::load_labels(t.p("g.json"), t.p("g.raw")),
                  io::MalformedHeaderError);

  std::ofstream(t.p("g2.json"))
      << R"({"height":1,"width":2,"bands":1,"dtype":"u16","layout":"bip"})";
  write_bytes(t.p("g2.raw"), {0, 0, 1});
  CHECK_THROWS_AS(io::load_labels(t.p("g2.json"), t.p("g2.raw")),
                  io::SizeMismatchError);
}

TEST_CASE("png encoder output decodes to the palette colors") {
  TempDir t;
  std::vector<io::Rgb> palette{{0, 0, 0}, {255, 0, 0}};
  io::save_label_png({0, 1}, 1, 2, palette, t.p("im.png"));

  DecodedPng png = decode_png(t.p("im.png"));
  CHECK(png.width == 2);
  CHECK(png.height == 1);
  CHECK(png.bit_depth == 8);
  CHECK(png.color_type == 2);  // truecolor
  REQUIRE(png.rgb.size() == 6);
  CHECK(png.rgb[0] == 0);
  CHECK(png.rgb[1] == 0);
  CHECK(png.rgb[2] == 0);
  CHECK(png.rgb[3] == 255);
  CHECK(png.rgb[4] == 0);
  CHECK(png.rgb[5] == 0);
}

TEST_CASE("png encoder is deterministic and bounds-checked") {
  TempDir t;
  std::vector<io::Rgb> palette{{1, 2, 3}, {4, 5, 6}, {7, 8, 9}};
  std::vector<std::uint16_t> labels(31 * 17);
  for (std::size_t i = 0; i < labels.size(); ++i)
    labels[i] = static_cast<std::uint16_t>(i % 3);
  io::save_label_png(labels, 31, 17, palette, t.p("a.png"));
  io::save_label_png(labels, 31, 17, palette, t.p("b.png"));
  CHECK(slurp(t.p("a.png")) == slurp(t.p("b.png")));

  DecodedPng png = decode_png(t.p("a.png"));
  CHECK(png.width == 17);
  CHECK(png.height == 31);
  for (std::size_t i = 0; i < labels.size(); ++i)
    CHECK(png.rgb[i * 3] == palette[labels[i]][0]);

  CHECK_THROWS_AS(io::save_label_png({3}, 1, 1, palette, t.p("bad.png")),
                  std::invalid_argument);
  CHECK_THROWS_AS(io::save_label_png({0, 0}, 1, 1, palette, t.p("bad.png")),
                  std::invalid_argument);
}

TEST_CASE("png handles rows wider than one stored block") {
  TempDir t;
  // 30000 pixels * 3 bytes + filter bytes > 65535 forces block splitting
  std::vector<std::uint16_t> labels(30000, 1);
  std::vector<io::Rgb> palette{{0, 0, 0}, {9, 8, 7}};
  io::save_label_png(labels, 2, 15000, palette, t.p("wide.png"));
  DecodedPng png = decode_png(t.p("wide.png"));
  CHECK(png.width == 15000);
  CHECK(png.height == 2);
  CHECK(png.rgb.size() == 30000u * 3);
  CHECK(png.rgb[0] == 9);
  CHECK(png.rgb[png.rgb.size() - 1] == 7);
}

TEST_CASE("make_palette shape") {
  auto p = io::make_palette(5);
  REQUIRE(p.size() == 6);
  CHECK(p[0] == io::Rgb{0, 0, 0});
  for (std::size_t i = 1; i < p.size(); ++i)
    for (std::size_t j = i + 1; j < p.size(); ++j) CHECK(p[i] != p[j]);
}

TEST_CASE("scores csv format is exact") {
  TempDir t;
  io::save_scores_csv({{1.0, 1.0, 1.0, 7}}, t.p("s.csv"));
  CHECK(slurp(t.p("s.csv")) == "oa,aa,kappa,seed\n1.000000,1.000000,1.000000,7\n");

  io::save_scores_csv({}, t.p("e.csv"));
  CHECK(slurp(t.p("e.csv")) == "oa,aa,kappa,seed\n");

  io::save_scores_csv({{0.123456789, 0.5, -0.25, 0}, {0.9, 0.8, 0.7, 18446744073709551615ull}},
                      t.p("m.csv"));
  CHECK(slurp(t.p("m.csv")) ==
        "oa,aa,kappa,seed\n0.123457,0.500000,-0.250000,0\n"
        "0.900000,0.800000,0.700000,18446744073709551615\n");
}

TEST_CASE("read_file and write_file") {
  TempDir t;
  std::vector<std::uint8_t> data{1, 2, 3, 0, 255};
  io::write_file(t.p("f.bin"), data.data(), data.size());
  CHECK(io::read_file(t.p("f.bin")) == data);
  CHECK_THROWS_AS(io::read_file(t.p("absent.bin")), io::IoError);
  CHECK_THROWS_AS(io::write_file((t.dir / "no_dir" / "f.bin").string(), data.data(), 1),
                  io::IoError);
}
