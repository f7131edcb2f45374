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

#include "roiqa/nn/parameters.hpp"

#include <bit>
#include <cstring>

#include "json_util.hpp"
#include "roiqa/records.hpp"

namespace roiqa::nn {

using detail::Json;

std::size_t numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

Parameter::Parameter(std::string name, Shape shape, std::size_t index)
    : name_(std::move(name)), shape_(std::move(shape)), index_(index), value_(numel(shape_), 0.0) {}

Parameter& ParameterSet::add(std::string name, Shape shape) {
  if (contains(name)) throw Error("parameter '" + name + "' registered twice");
  if (shape.empty() || numel(shape) == 0) throw Error("parameter '" + name + "' has empty shape");
  params_.push_back(std::make_unique<Parameter>(std::move(name), std::move(shape), params_.size()));
  return *params_.back();
}

Parameter& ParameterSet::at(std::string_view name) {
  for (auto& p : params_)
    if (p->name() == name) return *p;
  throw Error("unknown parameter '" + std::string(name) + "'");
}

const Parameter& ParameterSet::at(std::string_view name) const {
  return const_cast<ParameterSet*>(this)->at(name);
}

bool ParameterSet::contains(std::string_view name) const {
  for (const auto& p : params_)
    if (p->name() == name) return true;
  return false;
}

std::size_t ParameterSet::total_elements() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p->size();
  return n;
}

void ParameterSet::set_trainable(std::string_view prefix, bool trainable) {
  for (auto& p : params_)
    if (p->name().starts_with(prefix)) p->trainable = trainable;
}

Gradients::Gradients(const ParameterSet& params) {
  grads_.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) grads_.emplace_back(params[i].size(), 0.0);
}

void Gradients::zero() {
  for (auto& g : grads_) std::fill(g.begin(), g.end(), 0.0);
}

void Gradients::add(const Gradients& other) {
  if (other.grads_.size() != grads_.size()) throw Error("gradient sets differ in size");
  for (std::size_t i = 0; i < grads_.size(); ++i) {
    if (other.grads_[i].size() != grads_[i].size()) throw Error("gradient buffers differ in size");
    for (std::size_t j = 0; j < grads_[i].size(); ++j) grads_[i][j] += other.grads_[i][j];
  }
}

void Gradients::scale(double factor) {
  for (auto& g : grads_)
    for (double& v : g) v *= factor;
}

double Gradients::squared_norm() const {
  double s = 0.0;
  for (const auto& g : grads_)
    for (double v : g) s += v * v;
  return s;
}

namespace {

constexpr const char* kFormat = "roiqa-checkpoint";

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffU));
}

std::uint64_t get_u64(std::string_view in, std::size_t pos) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i)
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  return v;
}

}  // namespace

std::string serialize_checkpoint(const ParameterSet& params) {
  Json header;
  header["format"] = kFormat;
  header["version"] = 1;
  Json list = Json::array();
  for (std::size_t i = 0; i < params.size(); ++i) {
    list.push_back({{"name", params[i].name()}, {"shape", params[i].shape()}});
  }
  header["parameters"] = std::move(list);
  const std::string text = header.dump();

  std::string out;
  out.reserve(8 + text.size() + 8 * params.total_elements());
  put_u64(out, text.size());
  out += text;
  for (std::size_t i = 0; i < params.size(); ++i) {
    for (double v : params[i].value()) put_u64(out, std::bit_cast<std::uint64_t>(v));
  }
  return out;
}

void deserialize_checkpoint(ParameterSet& params, std::string_view bytes) {
  if (bytes.size() < 8) throw Error("checkpoint: truncated header");
  const std::uint64_t hlen = get_u64(bytes, 0);
  if (hlen > bytes.size() - 8) throw Error("checkpoint: truncated header");
  const Json header = detail::parse_json(bytes.substr(8, hlen), "checkpoint header");
  if (detail::require<std::string>(header, "format", "checkpoint") != kFormat ||
      detail::require<int>(header, "version", "checkpoint") != 1) {
    throw Error("checkpoint: unsupported format");
  }
  const auto& list = header.at("parameters");
  if (!list.is_array() || list.size() != params.size()) {
    throw Error("checkpoint: expected " + std::to_string(params.size()) + " parameters");
  }
  std::size_t expected = 8 + hlen;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto name = detail::require<std::string>(list[i], "name", "checkpoint");
    const auto shape = detail::require<Shape>(list[i], "shape", "checkpoint");
    if (name != params[i].name() || shape != params[i].shape()) {
      throw Error("checkpoint: parameter " + std::to_string(i) + " is '" + name + "' " +
                  shape_string(shape) + ", model expects '" + params[i].name() + "' " +
                  shape_string(params[i].shape()));
    }
    expected += 8 * params[i].size();
  }
  if (bytes.size() != expected) throw Error("checkpoint: payload size mismatch");
  std::size_t pos = 8 + hlen;
  for (std::size_t i = 0; i < params.size(); ++i) {
    for (double& v : params[i].value()) {
      v = std::bit_cast<double>(get_u64(bytes, pos));
      pos += 8;
    }
  }
}

void save_checkpoint(const ParameterSet& params, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_checkpoint(params));
}

void load_checkpoint(ParameterSet& params, const std::filesystem::path& path) {
  deserialize_checkpoint(params, read_file(path));
}

}  // namespace roiqa::nn
