// SPDX-License-Identifier: Apache-2.0
#include <catch_amalgamated.hpp>

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>

#include "ddst/container.hpp"
#include "ddst/error.hpp"
#include "ddst/numerics.hpp"

using namespace ddst;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& tag) {
  const auto p = fs::temp_directory_path() / ("ddst_test_container_" + tag);
  fs::remove_all(p);
  return p;
}

std::vector<float> random_floats(std::size_t n, RngStream& rng) {
  std::vector<float> v(n);
  // Arbitrary bit patterns, NaN payloads and denormals included.
  for (auto& x : v) x = std::bit_cast<float>(static_cast<std::uint32_t>(rng.next_u64()));
  return v;
}

bool bit_equal(std::span<const float> a, std::span<const float> b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * 4) == 0;
}

}  // namespace

TEST_CASE("round trip is bit exact") {
  const auto dir = scratch("roundtrip");
  RngStream rng(1, 0);
  const auto a = random_floats(6 * 5, rng);
  const auto b = random_floats(2 * 3 * 4 * 2, rng);
  std::vector<std::complex<float>> bc(b.size() / 2);
  std::memcpy(bc.data(), b.data(), b.size() * 4);
  const std::vector<float> scalar{std::numeric_limits<float>::quiet_NaN()};
  {
    ContainerWriter w(dir.string(), {{"k", 1}});
    w.add_f32("a", {6, 5}, std::span<const float>(a), "shared.bin");
    w.add_c64("b", {2, 3, 4}, std::span<const std::complex<float>>(bc), "shared.bin");
    w.add_f32("s", {1}, std::span<const float>(scalar), "s.bin");
    w.add_f32("empty", {0, 3}, std::span<const float>(), "e.bin");
    w.metadata()["extra"] = "y";
  }
  const ContainerReader r(dir.string());
  REQUIRE(r.tensors().size() == 4);
  CHECK(r.metadata()["k"] == 1);
  CHECK(r.metadata()["extra"] == "y");
  CHECK(bit_equal(r.read_f32("a"), a));
  const auto got = r.read_c64("b");
  CHECK(std::memcmp(got.data(), bc.data(), bc.size() * 8) == 0);
  CHECK(bit_equal(r.read_f32("s"), scalar));
  CHECK(r.read_f32("empty").empty());
  CHECK(r.info("b").byte_offset == 6 * 5 * 4);
  CHECK(fs::file_size(dir / "shared.bin") == 6 * 5 * 4 + 24 * 8);
  CHECK(r.contains("a"));
  CHECK_FALSE(r.contains("z"));
  fs::remove_all(dir);
}

TEST_CASE("payload layout is little-endian, row-major, interleaved") {
  const auto dir = scratch("layout");
  const std::vector<std::complex<float>> v{{1.0f, -2.0f}, {0.5f, 3.0f}};
  {
    ContainerWriter w(dir.string());
    w.add_c64("v", {2}, std::span<const std::complex<float>>(v), "v.bin");
  }
  std::ifstream in(dir / "v.bin", std::ios::binary);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), {});
  REQUIRE(bytes.size() == 16);
  const float expect[] = {1.0f, -2.0f, 0.5f, 3.0f};
  for (int i = 0; i < 4; ++i) {
    const auto u = std::bit_cast<std::uint32_t>(expect[i]);
    for (int byte = 0; byte < 4; ++byte) CHECK(bytes[4 * i + byte] == ((u >> (8 * byte)) & 0xff));
  }
  std::ifstream mf(dir / "manifest.json");
  const auto m = nlohmann::json::parse(mf);
  CHECK(m["format"] == "ddst-tensor-container");
  CHECK(m["version"] == 1);
  CHECK(m["tensors"][0]["dtype"] == "c64");
  CHECK(m["tensors"][0]["shape"] == nlohmann::json::array({2}));
  CHECK(m["tensors"][0]["byte_offset"] == 0);
  fs::remove_all(dir);
}

TEST_CASE("double inputs narrow to float32") {
  const auto dir = scratch("narrow");
  const std::vector<double> d{0.1, -1e-3};
  {
    ContainerWriter w(dir.string());
    w.add_f32("d", {2}, std::span<const double>(d), "d.bin");
  }
  const auto got = ContainerReader(dir.string()).read_f32("d");
  CHECK(got[0] == static_cast<float>(0.1));
  CHECK(got[1] == static_cast<float>(-1e-3));
  fs::remove_all(dir);
}

TEST_CASE("shape mismatches name the tensor") {
  const auto dir = scratch("shape");
  const std::vector<float> v(12, 1.0f);
  {
    ContainerWriter w(dir.string());
    try {
      w.add_f32("bad_tensor", {5, 3}, std::span<const float>(v), "x.bin");
      FAIL("expected DimensionError");
    } catch (const DimensionError& e) {
      CHECK(std::string(e.what()).find("bad_tensor") != std::string::npos);
    }
    w.add_f32("ok", {3, 4}, std::span<const float>(v), "x.bin");
    CHECK_THROWS_AS(w.add_f32("ok", {12}, std::span<const float>(v), "y.bin"), IoError);
    CHECK_THROWS_AS(w.add_f32("p", {12}, std::span<const float>(v), "../escape.bin"), IoError);
  }
  const ContainerReader r(dir.string());
  CHECK_NOTHROW(r.expect("ok", DType::F32, {3, 4}));
  try {
    r.expect("ok", DType::F32, {4, 3});
    FAIL("expected DimensionError");
  } catch (const DimensionError& e) {
    CHECK(std::string(e.what()).find("'ok'") != std::string::npos);
  }
  CHECK_THROWS_AS(r.expect("ok", DType::C64, {3, 2}), DimensionError);
  CHECK_THROWS_AS(r.read_c64("ok"), DimensionError);
  CHECK_THROWS_AS(r.info("missing"), IoError);
  fs::remove_all(dir);
}

TEST_CASE("corrupted containers are rejected") {
  const auto dir = scratch("corrupt");
  const std::vector<float> v(8, 2.0f);
  auto write = [&] {
    fs::remove_all(dir);
    ContainerWriter w(dir.string());
    w.add_f32("a", {8}, std::span<const float>(v), "a.bin");
  };
  SECTION("truncated payload") {
    write();
    fs::resize_file(dir / "a.bin", 28);
    CHECK_THROWS_AS(ContainerReader(dir.string()), IoError);
  }
  SECTION("extra payload bytes") {
    write();
    fs::resize_file(dir / "a.bin", 36);
    CHECK_THROWS_AS(ContainerReader(dir.string()), IoError);
  }
  SECTION("missing payload") {
    write();
    fs::remove(dir / "a.bin");
    CHECK_THROWS_AS(ContainerReader(dir.string()), IoError);
  }
  SECTION("malformed manifest") {
    write();
    std::ofstream(dir / "manifest.json") << "{\"format\": 3";
    CHECK_THROWS_AS(ContainerReader(dir.string()), IoError);
  }
  SECTION("wrong format tag") {
    write();
    std::ofstream(dir / "manifest.json") << R"({"format":"other","version":1,"tensors":[]})";
    CHECK_THROWS_AS(ContainerReader(dir.string()), IoError);
  }
  SECTION("missing directory") {
    CHECK_THROWS_AS(ContainerReader((dir / "nothing").string()), IoError);
  }
  fs::remove_all(dir);
}
