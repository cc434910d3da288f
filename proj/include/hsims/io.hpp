#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "hsims/core.hpp"

namespace hsims::io {

struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Header JSON missing keys, wrong types, unsupported dtype/layout, or
// non-positive dimensions.
struct MalformedHeaderError : IoError {
  explicit MalformedHeaderError(const std::string& what) : IoError(what) {}
};

// Raw payload size disagrees with the header.
struct SizeMismatchError : IoError {
  explicit SizeMismatchError(const std::string& what) : IoError(what) {}
};

struct CubeHeader {
  int height = 0;
  int width = 0;
  int bands = 0;
  std::string dtype;   // "f32" for cubes, "u16" for label rasters
  std::string layout;  // always "bip": band index innermost
};

CubeHeader read_header(const std::string& header_path);
void write_header(const CubeHeader& h, const std::string& header_path);

// Little-endian binary32 payload, promoted to double in memory.
HyperCube load_cube(const std::string& header_path, const std::string& data_path);
// Values are quantized to binary32; a load after save reproduces exactly the
// quantized values.
void save_cube(const HyperCube& cube, const std::string& header_path,
               const std::string& data_path);

// Per-pixel class ids. 0 is reserved for "unlabeled" in reference rasters;
// predictions use 1..k.
struct GroundTruth {
  int height = 0;
  int width = 0;
  std::vector<std::uint16_t> labels;
};

GroundTruth load_labels(const std::string& header_path, const std::string& data_path);
void save_labels(const GroundTruth& gt, const std::string& header_path,
                 const std::string& data_path);

using Rgb = std::array<std::uint8_t, 3>;

// 8-bit RGB PNG of a label raster. The encoder emits stored (uncompressed)
// deflate blocks, so output bytes depend only on the input, never on a
// compression library version.
void save_label_png(const std::vector<std::uint16_t>& labels, int height,
                    int width, const std::vector<Rgb>& palette,
                    const std::string& path);

// classes+1 colors: index 0 black, the rest spaced around the hue wheel.
std::vector<Rgb> make_palette(int classes);

struct ScoreRow {
  double oa = 0.0;
  double aa = 0.0;
  double kappa = 0.0;
  std::uint64_t seed = 0;
};

// Header "oa,aa,kappa,seed", one row per run, six decimals.
void save_scores_csv(const std::vector<ScoreRow>& rows, const std::string& path);

std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, const std::uint8_t* data, std::size_t n);

}  // namespace hsims::io
