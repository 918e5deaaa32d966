#include "gabo/models/params.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <stdexcept>

#include "gabo/autodiff/ops.hpp"

namespace gabo::models {

static_assert(std::endian::native == std::endian::little, "checkpoint format assumes a little-endian host");

void ParamSet::add(std::string name, Tensor value) {
  names.push_back(std::move(name));
  tensors.push_back(std::move(value));
}

std::size_t ParamSet::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return i;
  throw std::out_of_range("no parameter named '" + name + "'");
}

std::size_t ParamSet::num_scalars() const {
  std::size_t n = 0;
  for (const auto& t : tensors) n += t.size();
  return n;
}

Tensor uniform_weight(Rng& rng, std::size_t fan_in, std::size_t fan_out) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::vector<double> v(fan_in * fan_out);
  for (auto& x : v) x = rng.uniform(-bound, bound);
  return Tensor::matrix(fan_in, fan_out, std::move(v));
}

Tensor uniform_bias(Rng& rng, std::size_t fan_in, std::size_t fan_out) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::vector<double> v(fan_out);
  for (auto& x : v) x = rng.uniform(-bound, bound);
  return Tensor::vector(std::move(v));
}

Tensor xavier_table(Rng& rng, std::size_t rows, std::size_t cols) {
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::vector<double> v(rows * cols);
  for (auto& x : v) x = rng.uniform(-bound, bound);
  return Tensor::matrix(rows, cols, std::move(v));
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  return ad::add(ad::matmul(x, weight), ad::broadcast_rows(bias, x.rows()));
}

void save_checkpoint(const std::filesystem::path& stem, const ParamSet& params) {
  nlohmann::ordered_json manifest = nlohmann::ordered_json::array();
  std::ofstream bin(stem.string() + ".bin", std::ios::binary);
  if (!bin) throw std::runtime_error("cannot write " + stem.string() + ".bin");
  std::size_t offset = 0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto values = params.tensors[i].values();
    bin.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(double)));
    manifest.push_back({{"name", params.names[i]}, {"shape", params.tensors[i].shape()}, {"offset", offset}});
    offset += values.size();
  }
  std::ofstream json_out(stem.string() + ".json");
  json_out << manifest.dump(2) << '\n';
}

ParamSet load_checkpoint(const std::filesystem::path& stem) {
  std::ifstream json_in(stem.string() + ".json");
  if (!json_in) throw std::runtime_error("cannot open " + stem.string() + ".json");
  const auto manifest = nlohmann::json::parse(json_in);
  std::ifstream bin(stem.string() + ".bin", std::ios::binary | std::ios::ate);
  if (!bin) throw std::runtime_error("cannot open " + stem.string() + ".bin");
  const auto bytes = static_cast<std::size_t>(bin.tellg());
  std::vector<double> flat(bytes / sizeof(double));
  bin.seekg(0);
  bin.read(reinterpret_cast<char*>(flat.data()), static_cast<std::streamsize>(flat.size() * sizeof(double)));
  ParamSet params;
  for (const auto& entry : manifest) {
    auto shape = entry.at("shape").get<ad::Shape>();
    const auto offset = entry.at("offset").get<std::size_t>();
    const auto n = ad::shape_size(shape);
    if (offset + n > flat.size()) throw std::runtime_error("checkpoint manifest points past the end of the data file");
    params.add(entry.at("name").get<std::string>(),
               Tensor(std::move(shape), std::vector<double>(flat.begin() + static_cast<std::ptrdiff_t>(offset),
                                                            flat.begin() + static_cast<std::ptrdiff_t>(offset + n))));
  }
  return params;
}

}  // namespace gabo::models
