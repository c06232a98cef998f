// SPDX-License-Identifier: Apache-2.0
#include "ddst/container.hpp"

#include <algorithm>
#include <bit>
#include <filesystem>

#include "ddst/error.hpp"

namespace ddst {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kFormat = "ddst-tensor-container";
constexpr int kVersion = 1;
constexpr std::size_t kChunkWords = 1 << 16;

std::uint32_t to_le(std::uint32_t x) {
  if constexpr (std::endian::native == std::endian::little) {
    return x;
  } else {
    return ((x & 0xffU) << 24) | ((x & 0xff00U) << 8) | ((x >> 8) & 0xff00U) | (x >> 24);
  }
}

DType parse_dtype(const std::string& s) {
  if (s == "f32") return DType::F32;
  if (s == "c64") return DType::C64;
  throw IoError("container: unknown dtype '" + s + "'");
}

std::string shape_string(const std::vector<std::int64_t>& s) {
  std::string out = "(";
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + std::to_string(s[i]);
  return out + ")";
}

void check_name(const std::string& name, const std::string& file) {
  if (name.empty()) throw IoError("container: empty tensor name");
  if (file.empty() || file.find('/') != std::string::npos || file == "manifest.json") {
    throw IoError("container: invalid payload file name '" + file + "'");
  }
}

}  // namespace

std::string dtype_name(DType d) { return d == DType::F32 ? "f32" : "c64"; }

std::uint64_t TensorInfo::elements() const {
  std::uint64_t n = 1;
  for (auto d : shape) {
    if (d < 0) throw IoError("container: negative dimension in tensor '" + name + "'");
    n *= static_cast<std::uint64_t>(d);
  }
  return n;
}

ContainerWriter::ContainerWriter(const std::string& dir, json metadata)
    : dir_(dir), metadata_(std::move(metadata)) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec || !fs::is_directory(dir_)) throw IoError("container: cannot create directory '" + dir_ + "'");
}

ContainerWriter::~ContainerWriter() {
  if (!finished_) {
    try {
      finish();
    } catch (...) {
    }
  }
}

void ContainerWriter::add_raw(TensorInfo info, std::span<const float> words) {
  if (finished_) throw IoError("container: writer already finished");
  check_name(info.name, info.file);
  if (std::any_of(tensors_.begin(), tensors_.end(),
                  [&](const TensorInfo& t) { return t.name == info.name; })) {
    throw IoError("container: duplicate tensor name '" + info.name + "'");
  }
  if (info.bytes() != words.size() * 4) {
    throw DimensionError("container: tensor '" + info.name + "' has shape " +
                         shape_string(info.shape) + " but " + std::to_string(words.size() * 4) +
                         " payload bytes");
  }
  auto& stream = files_[info.file];
  if (!stream) {
    stream = std::make_unique<std::ofstream>(fs::path(dir_) / info.file,
                                             std::ios::binary | std::ios::trunc);
    if (!*stream) throw IoError("container: cannot open '" + info.file + "' for writing");
  }
  info.byte_offset = offsets_[info.file];
  std::vector<std::uint32_t> buf;
  for (std::size_t i = 0; i < words.size(); i += kChunkWords) {
    const std::size_t n = std::min(kChunkWords, words.size() - i);
    buf.resize(n);
    for (std::size_t j = 0; j < n; ++j) buf[j] = to_le(std::bit_cast<std::uint32_t>(words[i + j]));
    stream->write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(n * 4));
  }
  if (!*stream) throw IoError("container: write failed on '" + info.file + "'");
  offsets_[info.file] += info.bytes();
  tensors_.push_back(std::move(info));
}

void ContainerWriter::add_f32(const std::string& name, const std::vector<std::int64_t>& shape,
                              std::span<const float> data, const std::string& file) {
  add_raw({name, DType::F32, shape, file, 0}, data);
}

void ContainerWriter::add_c64(const std::string& name, const std::vector<std::int64_t>& shape,
                              std::span<const std::complex<float>> data, const std::string& file) {
  add_raw({name, DType::C64, shape, file, 0},
          std::span<const float>(reinterpret_cast<const float*>(data.data()), data.size() * 2));
}

void ContainerWriter::add_f32(const std::string& name, const std::vector<std::int64_t>& shape,
                              std::span<const double> data, const std::string& file) {
  std::vector<float> f(data.begin(), data.end());
  add_f32(name, shape, std::span<const float>(f), file);
}

void ContainerWriter::add_c64(const std::string& name, const std::vector<std::int64_t>& shape,
                              std::span<const std::complex<double>> data, const std::string& file) {
  std::vector<std::complex<float>> f(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) f[i] = std::complex<float>(data[i]);
  add_c64(name, shape, std::span<const std::complex<float>>(f), file);
}

void ContainerWriter::finish() {
  if (finished_) return;
  finished_ = true;
  for (auto& [name, stream] : files_) {
    stream->close();
    if (!*stream) throw IoError("container: failed to close '" + name + "'");
  }
  json list = json::array();
  for (const auto& t : tensors_) {
    list.push_back({{"name", t.name},
                    {"dtype", dtype_name(t.dtype)},
                    {"shape", t.shape},
                    {"file", t.file},
                    {"byte_offset", t.byte_offset}});
  }
  json manifest{{"format", kFormat}, {"version", kVersion}, {"tensors", list},
                {"metadata", metadata_}};
  const fs::path tmp = fs::path(dir_) / "manifest.json.tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw IoError("container: cannot write manifest in '" + dir_ + "'");
    out << manifest.dump(1) << '\n';
    if (!out) throw IoError("container: manifest write failed");
  }
  std::error_code ec;
  fs::rename(tmp, fs::path(dir_) / "manifest.json", ec);
  if (ec) throw IoError("container: cannot finalize manifest: " + ec.message());
}

ContainerReader::ContainerReader(const std::string& dir) : dir_(dir) {
  const fs::path mpath = fs::path(dir_) / "manifest.json";
  std::ifstream in(mpath);
  if (!in) throw IoError("container: cannot open '" + mpath.string() + "'");
  json manifest;
  try {
    in >> manifest;
    if (manifest.at("format").get<std::string>() != kFormat ||
        manifest.at("version").get<int>() != kVersion) {
      throw IoError("container: unsupported manifest format/version in '" + dir_ + "'");
    }
    metadata_ = manifest.value("metadata", json::object());
    for (const auto& t : manifest.at("tensors")) {
      TensorInfo info;
      info.name = t.at("name").get<std::string>();
      info.dtype = parse_dtype(t.at("dtype").get<std::string>());
      info.shape = t.at("shape").get<std::vector<std::int64_t>>();
      info.file = t.at("file").get<std::string>();
      info.byte_offset = t.at("byte_offset").get<std::uint64_t>();
      check_name(info.name, info.file);
      if (!index_.emplace(info.name, tensors_.size()).second) {
        throw IoError("container: duplicate tensor '" + info.name + "'");
      }
      tensors_.push_back(std::move(info));
    }
  } catch (const json::exception& e) {
    throw IoError("container: malformed manifest in '" + dir_ + "': " + e.what());
  }
  // Payload files must be tiled exactly by their tensors.
  std::map<std::string, std::vector<const TensorInfo*>> by_file;
  for (const auto& t : tensors_) by_file[t.file].push_back(&t);
  for (auto& [file, list] : by_file) {
    std::sort(list.begin(), list.end(), [](const TensorInfo* a, const TensorInfo* b) {
      return a->byte_offset < b->byte_offset;
    });
    std::uint64_t expected = 0;
    for (const TensorInfo* t : list) {
      if (t->byte_offset != expected) {
        throw IoError("container: tensor '" + t->name + "' does not start where the previous "
                      "tensor in '" + file + "' ends");
      }
      expected += t->bytes();
    }
    std::error_code ec;
    const auto size = fs::file_size(fs::path(dir_) / file, ec);
    if (ec) throw IoError("container: missing payload file '" + file + "'");
    if (size != expected) {
      throw IoError("container: payload '" + file + "' has " + std::to_string(size) +
                    " bytes, manifest describes " + std::to_string(expected));
    }
  }
}

const TensorInfo& ContainerReader::info(const std::string& name) const {
  const auto it = index_.find(name);
  if (it == index_.end()) throw IoError("container: tensor '" + name + "' not found in '" + dir_ + "'");
  return tensors_[it->second];
}

void ContainerReader::expect(const std::string& name, DType dtype,
                             const std::vector<std::int64_t>& shape) const {
  const auto& t = info(name);
  if (t.dtype != dtype || t.shape != shape) {
    throw DimensionError("tensor '" + name + "' is " + dtype_name(t.dtype) +
                         shape_string(t.shape) + ", expected " + dtype_name(dtype) +
                         shape_string(shape));
  }
}

std::vector<float> ContainerReader::read_words(const TensorInfo& t) const {
  std::ifstream in(fs::path(dir_) / t.file, std::ios::binary);
  if (!in) throw IoError("container: cannot open '" + t.file + "'");
  in.seekg(static_cast<std::streamoff>(t.byte_offset));
  std::vector<std::uint32_t> raw(t.bytes() / 4);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size() * 4));
  if (!in) throw IoError("container: short read of tensor '" + t.name + "'");
  std::vector<float> out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) out[i] = std::bit_cast<float>(to_le(raw[i]));
  return out;
}

std::vector<float> ContainerReader::read_f32(const std::string& name) const {
  const auto& t = info(name);
  if (t.dtype != DType::F32) throw DimensionError("tensor '" + name + "' is not f32");
  return read_words(t);
}

std::vector<std::complex<float>> ContainerReader::read_c64(const std::string& name) const {
  const auto& t = info(name);
  if (t.dtype != DType::C64) throw DimensionError("tensor '" + name + "' is not c64");
  const auto words = read_words(t);
  std::vector<std::complex<float>> out(words.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = {words[2 * i], words[2 * i + 1]};
  return out;
}

}  // namespace ddst
