#include "hsims/synth.hpp"

#include <cmath>
#include "json.hpp"
#include <stdexcept>

namespace hsims::synth {

namespace {

using nlohmann::json;

const json& field(const json& obj, const char* key, const char* where) {
  auto it = obj.find(key);
  if (it == obj.end())
    throw std::invalid_argument(std::string("synth spec: missing field '") + key +
                                "' in " + where);
  return *it;
}

int count_field(const json& obj, const char* key, const char* where) {
  const json& v = field(obj, key, where);
  if (!v.is_number_integer() || v.get<std::int64_t>() < 1)
    throw std::invalid_argument(std::string("synth spec: '") + key +
                                "' must be a positive integer");
  return static_cast<int>(v.get<std::int64_t>());
}

Eigen::VectorXd parse_vector(const json& v, const char* what) {
  if (!v.is_array() || v.empty())
    throw std::invalid_argument(std::string("synth spec: ") + what +
                                " must be a non-empty array");
  Eigen::VectorXd out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number())
      throw std::invalid_argument(std::string("synth spec: ") + what +
                                  " must contain numbers");
    out[static_cast<Eigen::Index>(i)] = v[i].get<double>();
  }
  return out;
}

Eigen::MatrixXd parse_matrix(const json& v, Eigen::Index dim, const char* what) {
  if (!v.is_array() || static_cast<Eigen::Index>(v.size()) != dim)
    throw std::invalid_argument(std::string("synth spec: ") + what +
                                " must be a square matrix matching the mean");
  Eigen::MatrixXd out(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r) {
    const json& rowj = v[static_cast<std::size_t>(r)];
    if (!rowj.is_array() || static_cast<Eigen::Index>(rowj.size()) != dim)
      throw std::invalid_argument(std::string("synth spec: ") + what +
                                  " must be a square matrix matching the mean");
    for (Eigen::Index c = 0; c < dim; ++c) {
      const json& cell = rowj[static_cast<std::size_t>(c)];
      if (!cell.is_number())
        throw std::invalid_argument(std::string("synth spec: ") + what +
                                    " must contain numbers");
      out(r, c) = cell.get<double>();
    }
  }
  return out;
}

// Symmetric square root; rejects covariances with a clearly negative
// eigenvalue, clamps roundoff-level ones to zero.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& cov) {
  Eigen::MatrixXd sym = 0.5 * (cov + cov.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  if (es.info() != Eigen::Success)
    throw std::invalid_argument("generate: covariance eigendecomposition failed");
  Eigen::VectorXd ev = es.eigenvalues();
  double scale = std::max(1.0, std::abs(ev[ev.size() - 1]));
  Eigen::VectorXd root(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev[i] < -1e-10 * scale)
      throw std::invalid_argument("generate: covariance not positive semidefinite");
    root[i] = std::sqrt(std::max(ev[i], 0.0));
  }
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

SynthSpec parse_spec(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("synth spec: invalid JSON: ") + e.what());
  }
  if (!root.is_object())
    throw std::invalid_argument("synth spec: top level must be an object");

  SynthSpec spec;
  spec.height = count_field(root, "height", "spec");
  spec.width = count_field(root, "width", "spec");

  const json& seed = field(root, "seed", "spec");
  if (!seed.is_number_integer() || seed.get<std::int64_t>() < 0)
    throw std::invalid_argument("synth spec: 'seed' must be a non-negative integer");
  spec.seed = seed.get<std::uint64_t>();

  if (auto it = root.find("noise_snr"); it != root.end()) {
    if (!it->is_number() || !(it->get<double>() > 0.0))
      throw std::invalid_argument("synth spec: 'noise_snr' must be positive");
    spec.noise_snr = it->get<double>();
  }

  const json& clusters = field(root, "clusters", "spec");
  if (!clusters.is_array() || clusters.empty())
    throw std::invalid_argument("synth spec: 'clusters' must be a non-empty array");
  for (const json& cj : clusters) {
    if (!cj.is_object())
      throw std::invalid_argument("synth spec: each cluster must be an object");
    SynthCluster c;
    c.mean = parse_vector(field(cj, "mean", "cluster"), "cluster mean");
    c.covariance =
        parse_matrix(field(cj, "covariance", "cluster"), c.mean.size(), "cluster covariance");
    const json& rj = field(cj, "region", "cluster");
    if (!rj.is_object())
      throw std::invalid_argument("synth spec: cluster region must be an object");
    c.region.top = static_cast<int>(field(rj, "top", "region").get<std::int64_t>());
    c.region.left = static_cast<int>(field(rj, "left", "region").get<std::int64_t>());
    c.region.height = count_field(rj, "height", "region");
    c.region.width = count_field(rj, "width", "region");
    if (c.region.top < 0 || c.region.left < 0)
      throw std::invalid_argument("synth spec: region offsets must be non-negative");
    spec.clusters.push_back(std::move(c));
  }
  return spec;
}

std::pair<HyperCube, io::GroundTruth> generate(const SynthSpec& spec) {
  if (spec.height < 1 || spec.width < 1)
    throw std::invalid_argument("generate: grid dimensions must be positive");
  if (spec.clusters.empty())
    throw std::invalid_argument("generate: at least one cluster required");
  if (spec.clusters.size() > 65535)
    throw std::invalid_argument("generate: too many clusters for 16-bit labels");

  const int L = static_cast<int>(spec.clusters[0].mean.size());
  for (const auto& c : spec.clusters) {
    if (c.mean.size() != L)
      throw std::invalid_argument("generate: cluster means differ in length");
    if (c.covariance.rows() != L || c.covariance.cols() != L)
      throw std::invalid_argument("generate: covariance does not match mean length");
  }

  // Paint region ids; every cell must be covered exactly once.
  io::GroundTruth gt;
  gt.height = spec.height;
  gt.width = spec.width;
  gt.labels.assign(static_cast<std::size_t>(spec.height) * spec.width, 0);
  for (std::size_t ci = 0; ci < spec.clusters.size(); ++ci) {
    const Rect& r = spec.clusters[ci].region;
    if (r.top + r.height > spec.height || r.left + r.width > spec.width)
      throw std::invalid_argument("generate: region outside the grid");
    for (int i = r.top; i < r.top + r.height; ++i)
      for (int j = r.left; j < r.left + r.width; ++j) {
        std::uint16_t& cell = gt.labels[static_cast<std::size_t>(i) * spec.width + j];
        if (cell != 0)
          throw std::invalid_argument("generate: regions overlap");
        cell = static_cast<std::uint16_t>(ci + 1);
      }
  }
  for (std::uint16_t v : gt.labels)
    if (v == 0) throw std::invalid_argument("generate: regions do not cover the grid");

  std::vector<Eigen::MatrixXd> roots;
  roots.reserve(spec.clusters.size());
  for (const auto& c : spec.clusters) roots.push_back(psd_sqrt(c.covariance));

  HyperCube cube(spec.height, spec.width, L);
  const std::size_t n = cube.pixels();
  Rng master(spec.seed);
  parallel_for(0, n, [&](std::size_t px) {
    Rng r = master.substream(px);
    const std::size_t ci = gt.labels[px] - 1;
    Eigen::VectorXd z(L);
    for (int b = 0; b < L; ++b) z[b] = r.next_normal();
    Eigen::VectorXd x = spec.clusters[ci].mean + roots[ci] * z;
    auto out = cube.spectrum(static_cast<int>(px / spec.width),
                             static_cast<int>(px % spec.width));
    for (int b = 0; b < L; ++b) out[b] = x[b];
  });

  if (spec.noise_snr) {
    double power = 0.0;
    for (double v : cube.data()) power += v * v;
    power /= static_cast<double>(cube.size());
    double sigma = std::sqrt(power / *spec.noise_snr);
    if (sigma > 0.0) {
      parallel_for(0, n, [&](std::size_t px) {
        // Separate substream block so the signal draw above is unchanged.
        Rng r = master.substream(n + px);
        auto out = cube.spectrum(static_cast<int>(px / spec.width),
                                 static_cast<int>(px % spec.width));
        for (int b = 0; b < L; ++b) out[b] += sigma * r.next_normal();
      });
    }
  }

  return {std::move(cube), std::move(gt)};
}

}  // namespace hsims::synth
