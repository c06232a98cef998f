// SPDX-License-Identifier: Apache-2.0
#include <catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "ddst/coding.hpp"
#include "ddst/error.hpp"
#include "ddst/numerics.hpp"

using namespace ddst;

namespace {

const LdpcCode& small_code() {
  static const LdpcCode c = LdpcCode::load_alist(DDST_TEST_DATA_DIR "/ldpc_648_324.alist");
  return c;
}

const LdpcCode& large_code() {
  static const LdpcCode c = LdpcCode::load_alist(DDST_TEST_DATA_DIR "/ldpc_4032_2016.alist");
  return c;
}

std::vector<std::uint8_t> random_bits(std::size_t n, RngStream& rng) {
  std::vector<std::uint8_t> b(n);
  for (auto& x : b) x = rng.bit();
  return b;
}

// Syndrome computed straight from the check lists.
bool satisfies_checks(const LdpcCode& code, const std::vector<std::uint8_t>& c) {
  for (const auto& row : code.checks()) {
    int parity = 0;
    for (int v : row) parity ^= c[v];
    if (parity) return false;
  }
  return true;
}

std::vector<double> clean_llrs(const std::vector<std::uint8_t>& c, double mag) {
  std::vector<double> l(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) l[i] = c[i] ? mag : -mag;
  return l;
}

}  // namespace

TEST_CASE("shipped codes have the expected dimensions") {
  CHECK(large_code().n() == 4032);
  CHECK(large_code().k() == 2016);
  CHECK(large_code().rate() == 0.5);
  CHECK(small_code().n() == 648);
  CHECK(small_code().k() == 324);
  for (const auto& col : large_code().variables()) CHECK(col.size() == 3);
}

TEST_CASE("encoder produces systematic codewords") {
  for (const LdpcCode* code : {&small_code(), &large_code()}) {
    const auto zero = code->encode(std::vector<std::uint8_t>(code->k(), 0));
    CHECK(std::all_of(zero.begin(), zero.end(), [](auto b) { return b == 0; }));

    RngStream rng(1, static_cast<std::uint64_t>(code->n()));
    for (int trial = 0; trial < 50; ++trial) {
      const auto info = random_bits(code->k(), rng);
      const auto cw = code->encode(info);
      REQUIRE(satisfies_checks(*code, cw));
      REQUIRE(code->is_codeword(cw));
      REQUIRE(code->extract_info(cw) == info);
      for (int i = 0; i < code->k(); ++i) REQUIRE(cw[code->info_positions()[i]] == info[i]);
    }
    CHECK_THROWS_AS(code->encode(std::vector<std::uint8_t>(code->k() - 1, 0)), DimensionError);
  }
}

TEST_CASE("every generator row satisfies all checks") {
  const auto& code = small_code();
  for (int i = 0; i < code.k(); ++i) {
    std::vector<std::uint8_t> e(code.k(), 0);
    e[i] = 1;
    REQUIRE(satisfies_checks(code, code.encode(e)));
  }
}

TEST_CASE("info and parity positions partition the codeword") {
  const auto& code = large_code();
  std::vector<int> seen(code.n(), 0);
  for (int p : code.info_positions()) ++seen[p];
  for (int p : code.parity_positions()) ++seen[p];
  CHECK(std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; }));
}

TEST_CASE("alist round trip and malformed input") {
  std::stringstream ss;
  small_code().write_alist(ss);
  const auto copy = LdpcCode::from_alist(ss);
  CHECK(copy.checks() == small_code().checks());
  CHECK(copy.info_positions() == small_code().info_positions());

  std::stringstream truncated("4 2\n3 2\n");
  CHECK_THROWS_AS(LdpcCode::from_alist(truncated), IoError);
  CHECK_THROWS_AS(LdpcCode::load_alist("/nonexistent/x.alist"), IoError);

  // Column list says v1 is in check 1, row list disagrees.
  std::stringstream bad("3 1\n1 3\n1 1 1\n3\n1\n1\n2\n1 3 0\n");
  CHECK_THROWS(LdpcCode::from_alist(bad));
}

TEST_CASE("PEG construction") {
  const auto code = peg_construct(96, 48, 3, 1);
  std::size_t min_deg = 1000, max_deg = 0;
  for (const auto& row : code.checks()) {
    min_deg = std::min(min_deg, row.size());
    max_deg = std::max(max_deg, row.size());
  }
  std::size_t edges = 0;
  for (const auto& row : code.checks()) edges += row.size();
  CHECK(edges == 96 * 3);
  CHECK(min_deg >= 5);
  CHECK(max_deg <= 7);
  for (const auto& col : code.variables()) CHECK(col.size() == 3);
  CHECK(code.k() >= 48);
  const auto again = peg_construct(96, 48, 3, 1);
  CHECK(again.checks() == code.checks());
}

TEST_CASE("decoder on noiseless input") {
  RngStream rng(2, 0);
  for (const LdpcCode* code : {&small_code(), &large_code()}) {
    const auto info = random_bits(code->k(), rng);
    const auto cw = code->encode(info);
    const auto res = ldpc_decode(clean_llrs(cw, 30.0), *code);
    CHECK(res.converged);
    CHECK(res.iterations == 1);
    CHECK(res.info == info);
    CHECK(res.codeword == cw);
  }
}

TEST_CASE("decoder reports non-convergence on uninformative input") {
  MinSumOptions opts;
  opts.max_iterations = 25;
  const auto res = ldpc_decode(std::vector<double>(648, 0.0), small_code(), opts);
  CHECK_FALSE(res.converged);
  CHECK(res.iterations == 25);
  CHECK_THROWS_AS(ldpc_decode(std::vector<double>(10, 0.0), small_code()), DimensionError);
}

TEST_CASE("decoder corrects a few flipped bits") {
  RngStream rng(3, 0);
  const auto& code = small_code();
  const auto info = random_bits(code.k(), rng);
  const auto cw = code.encode(info);
  auto llr = clean_llrs(cw, 4.0);
  for (int i : {5, 100, 333, 600}) llr[i] = -llr[i] * 0.5;
  const auto res = ldpc_decode(llr, code);
  CHECK(res.converged);
  CHECK(res.info == info);
}

TEST_CASE("zero-noise round trip over 10^4 payloads") {
  RngStream rng(4, 0);
  const auto& code = small_code();
  int failures = 0;
  for (int trial = 0; trial < 10'000; ++trial) {
    const auto info = random_bits(code.k(), rng);
    const auto res = ldpc_decode(clean_llrs(code.encode(info), 30.0), code);
    failures += res.info != info || !res.converged;
  }
  CHECK(failures == 0);
}

TEST_CASE("QPSK AWGN sweep: decoding helps and BLER falls with SNR") {
  const auto& code = small_code();
  const std::vector<double> snr_db{0.0, 1.0, 2.0, 3.0, 4.0};
  const int codewords = 2000;
  std::vector<double> bler;
  RngStream base(5, 0);
  for (double snr : snr_db) {
    // QPSK with unit symbol energy: per-dimension noise sigma2/2, bit LLR 2 sqrt(2) y / sigma2.
    const double sigma2 = std::pow(10.0, -snr / 10.0);
    const double sd = std::sqrt(sigma2 / 2.0);
    RngStream rng = base.derive(static_cast<std::uint64_t>(snr * 10));
    std::uint64_t raw_err = 0, dec_err = 0, block_err = 0;
    for (int c = 0; c < codewords; ++c) {
      const auto info = random_bits(code.k(), rng);
      const auto cw = code.encode(info);
      std::vector<double> llr(code.n());
      for (int i = 0; i < code.n(); ++i) {
        const double x = (cw[i] ? 1.0 : -1.0) / std::sqrt(2.0);
        const double y = x + sd * rng.normal();
        llr[i] = std::clamp(2.0 * std::sqrt(2.0) * y / sigma2, -30.0, 30.0);
        raw_err += (llr[i] > 0.0) != (cw[i] != 0);
      }
      const auto res = ldpc_decode(llr, code);
      std::uint64_t e = 0;
      for (int i = 0; i < code.k(); ++i) e += res.info[i] != info[i];
      dec_err += e;
      block_err += e > 0;
    }
    const double raw_ber = static_cast<double>(raw_err) / (codewords * code.n());
    const double ber = static_cast<double>(dec_err) / (codewords * code.k());
    INFO("snr " << snr << " raw " << raw_ber << " coded " << ber);
    CHECK(ber <= raw_ber);
    bler.push_back(static_cast<double>(block_err) / codewords);
  }
  for (std::size_t i = 1; i < bler.size(); ++i) CHECK(bler[i] <= bler[i - 1]);
}

TEST_CASE("segmentation rules") {
  const auto& code = large_code();
  SECTION("full DDST slot holds one codeword") {
    const auto seg = segment_payload(72 * 14 * 4, code);
    CHECK(seg.codewords == 1);
    CHECK(seg.pad_bits == 0);
    CHECK(seg.shortened == 0);
    CHECK(seg.punctured == 0);
    CHECK(seg.info_bits_per_codeword(code) == 2016);
  }
  SECTION("multiple codewords with padding") {
    const auto seg = segment_payload(2 * 4032 + 100, code);
    CHECK(seg.codewords == 2);
    CHECK(seg.pad_bits == 100);
  }
  SECTION("OP 2P comb shortens and punctures") {
    const int cap = 72 * 12 * 4;  // two pilot symbols per slot removed
    const auto seg = segment_payload(cap, code);
    CHECK(seg.codewords == 1);
    CHECK(seg.shortened == (4032 - cap) / 2);
    CHECK(seg.punctured == 4032 - cap - seg.shortened);
    CHECK(seg.transmitted_per_codeword() == cap);
    CHECK(seg.info_bits_per_codeword(code) == 1728);
  }
  SECTION("OP 1P comb") {
    const auto seg = segment_payload(72 * 13 * 4, code);
    CHECK(seg.info_bits_per_codeword(code) == 1872);
  }
  SECTION("too little capacity") {
    CHECK_THROWS_AS(segment_payload(2015, code), ConfigError);
  }
}

TEST_CASE("shortened and punctured segments decode at zero noise") {
  const auto& code = large_code();
  RngStream rng(6, 0);
  for (int cap : {3456, 3744, 4032, 8064 + 17}) {
    const auto seg = segment_payload(cap, code);
    const int kb = seg.info_bits_per_codeword(code);
    const auto info = random_bits(static_cast<std::size_t>(kb) * seg.codewords, rng);
    const auto stream = encode_segment(info, code, seg);
    REQUIRE(static_cast<int>(stream.size()) == cap);
    std::vector<double> llr(cap);
    for (int i = 0; i < cap; ++i) llr[i] = stream[i] ? 30.0 : -30.0;
    for (int c = 0; c < seg.codewords; ++c) {
      const auto full = recover_llrs(llr, c, code, seg);
      for (int p : seg.shortened_positions) REQUIRE(full[p] < -100.0);
      const auto res = ldpc_decode(full, code);
      const auto got = segment_info(res.info, code, seg);
      INFO("capacity " << cap << " codeword " << c);
      CHECK(res.converged);
      CHECK(std::equal(got.begin(), got.end(), info.begin() + static_cast<std::ptrdiff_t>(c) * kb));
    }
  }
}
