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

#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace roiqa::nn {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string shape_string(const Shape& shape);

/// A named, trainable array owned by a ParameterSet.
class Parameter {
 public:
  Parameter(std::string name, Shape shape, std::size_t index);

  const std::string& name() const noexcept { return name_; }
  const Shape& shape() const noexcept { return shape_; }
  std::size_t index() const noexcept { return index_; }
  std::size_t size() const noexcept { return value_.size(); }

  std::span<double> value() noexcept { return value_; }
  std::span<const double> value() const noexcept { return value_; }

  bool trainable = true;

 private:
  std::string name_;
  Shape shape_;
  std::size_t index_;
  std::vector<double> value_;
};

/// Registry of parameters in insertion order. Addresses are stable.
class ParameterSet {
 public:
  Parameter& add(std::string name, Shape shape);

  std::size_t size() const noexcept { return params_.size(); }
  Parameter& operator[](std::size_t i) { return *params_.at(i); }
  const Parameter& operator[](std::size_t i) const { return *params_.at(i); }

  Parameter& at(std::string_view name);
  const Parameter& at(std::string_view name) const;
  bool contains(std::string_view name) const;

  std::size_t total_elements() const;

  /// Marks every parameter whose name starts with `prefix`.
  void set_trainable(std::string_view prefix, bool trainable);

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
};

/// Gradient buffers aligned with a ParameterSet.
class Gradients {
 public:
  Gradients() = default;
  explicit Gradients(const ParameterSet& params);

  std::size_t size() const noexcept { return grads_.size(); }
  std::span<double> operator[](std::size_t i) { return grads_.at(i); }
  std::span<const double> operator[](std::size_t i) const { return grads_.at(i); }

  void zero();
  void add(const Gradients& other);
  void scale(double factor);
  double squared_norm() const;

 private:
  std::vector<std::vector<double>> grads_;
};

/// Flat checkpoint: 8-byte little-endian header length, a JSON header
/// {"format":"roiqa-checkpoint","version":1,"parameters":[{"name","shape"},...]},
/// then every parameter's values as little-endian float64 in header order.
void save_checkpoint(const ParameterSet& params, const std::filesystem::path& path);

/// Loads values into an existing set; names and shapes must match exactly.
void load_checkpoint(ParameterSet& params, const std::filesystem::path& path);

std::string serialize_checkpoint(const ParameterSet& params);
void deserialize_checkpoint(ParameterSet& params, std::string_view bytes);

}  // namespace roiqa::nn
