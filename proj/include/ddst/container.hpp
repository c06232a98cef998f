// SPDX-License-Identifier: Apache-2.0
//
// Tensor container: a directory holding manifest.json plus raw payload files.
//
// manifest.json = {
//   "format": "ddst-tensor-container", "version": 1,
//   "tensors": [{"name", "dtype": "f32"|"c64", "shape": [...], "file",
//                "byte_offset"}, ...],
//   "metadata": {...} }
//
// Payloads are little-endian, row-major; c64 is interleaved (re, im) float32.
// Tensors sharing a file are stored back to back in manifest order, and every
// payload file is exactly as long as the tensors that reference it.
#pragma once

#include <complex>
#include <cstdint>
#include <fstream>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace ddst {

enum class DType { F32, C64 };

struct TensorInfo {
  std::string name;
  DType dtype = DType::F32;
  std::vector<std::int64_t> shape;
  std::string file;
  std::uint64_t byte_offset = 0;

  std::uint64_t elements() const;
  std::uint64_t bytes() const { return elements() * (dtype == DType::F32 ? 4 : 8); }
};

class ContainerWriter {
public:
  ContainerWriter(const std::string& dir, nlohmann::json metadata = nlohmann::json::object());
  ~ContainerWriter();
  ContainerWriter(const ContainerWriter&) = delete;
  ContainerWriter& operator=(const ContainerWriter&) = delete;

  void add_f32(const std::string& name, const std::vector<std::int64_t>& shape,
               std::span<const float> data, const std::string& file);
  void add_c64(const std::string& name, const std::vector<std::int64_t>& shape,
               std::span<const std::complex<float>> data, const std::string& file);
  /// Narrowing conveniences.
  void add_f32(const std::string& name, const std::vector<std::int64_t>& shape,
               std::span<const double> data, const std::string& file);
  void add_c64(const std::string& name, const std::vector<std::int64_t>& shape,
               std::span<const std::complex<double>> data, const std::string& file);

  nlohmann::json& metadata() { return metadata_; }
  /// Flushes payloads and writes the manifest. Called by the destructor if
  /// needed (errors are then swallowed).
  void finish();

private:
  void add_raw(TensorInfo info, std::span<const float> words);

  std::string dir_;
  nlohmann::json metadata_;
  std::vector<TensorInfo> tensors_;
  std::map<std::string, std::unique_ptr<std::ofstream>> files_;
  std::map<std::string, std::uint64_t> offsets_;
  bool finished_ = false;
};

class ContainerReader {
public:
  /// Parses and validates the manifest against the payload file sizes.
  explicit ContainerReader(const std::string& dir);

  const std::vector<TensorInfo>& tensors() const { return tensors_; }
  const nlohmann::json& metadata() const { return metadata_; }
  bool contains(const std::string& name) const { return index_.count(name) != 0; }
  /// Throws IoError naming the tensor if absent.
  const TensorInfo& info(const std::string& name) const;

  std::vector<float> read_f32(const std::string& name) const;
  std::vector<std::complex<float>> read_c64(const std::string& name) const;
  /// Checks dtype and shape; throws DimensionError naming the tensor.
  void expect(const std::string& name, DType dtype, const std::vector<std::int64_t>& shape) const;

private:
  std::vector<float> read_words(const TensorInfo& t) const;

  std::string dir_;
  std::vector<TensorInfo> tensors_;
  std::map<std::string, std::size_t> index_;
  nlohmann::json metadata_;
};

std::string dtype_name(DType d);

}  // namespace ddst
