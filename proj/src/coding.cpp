// SPDX-License-Identifier: Apache-2.0
#include "ddst/coding.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <random>

#include "ddst/error.hpp"

namespace ddst {

namespace {

// Known-zero information bits (P(b=1) ~ 0).
constexpr double kShortenedLlr = -1.0e3;

void set_bit(std::uint64_t* row, int i) { row[i >> 6] |= std::uint64_t{1} << (i & 63); }
bool get_bit(const std::uint64_t* row, int i) { return (row[i >> 6] >> (i & 63)) & 1U; }

}  // namespace

LdpcCode::LdpcCode(int n, std::vector<std::vector<int>> checks)
    : n_(n), checks_(std::move(checks)) {
  if (n_ < 2 || checks_.empty()) throw ConfigError("LdpcCode: empty code");
  const int m = static_cast<int>(checks_.size());
  vars_.assign(n_, {});
  for (int c = 0; c < m; ++c) {
    auto& row = checks_[c];
    std::sort(row.begin(), row.end());
    if (std::adjacent_find(row.begin(), row.end()) != row.end()) {
      throw ConfigError("LdpcCode: repeated variable in check " + std::to_string(c));
    }
    for (int v : row) {
      if (v < 0 || v >= n_) throw ConfigError("LdpcCode: variable index out of range");
      vars_[v].push_back(c);
    }
  }

  // Reduced row echelon form over GF(2), pivots searched from the last column
  // so that parity tends to occupy the tail of the codeword.
  const int wn = (n_ + 63) / 64;
  std::vector<std::uint64_t> h(static_cast<std::size_t>(m) * wn, 0);
  for (int c = 0; c < m; ++c)
    for (int v : checks_[c]) set_bit(&h[static_cast<std::size_t>(c) * wn], v);
  std::vector<int> pivot_col;
  std::vector<std::uint8_t> is_pivot(n_, 0);
  int rank = 0;
  for (int col = n_ - 1; col >= 0 && rank < m; --col) {
    int r = rank;
    while (r < m && !get_bit(&h[static_cast<std::size_t>(r) * wn], col)) ++r;
    if (r == m) continue;
    if (r != rank) {
      std::swap_ranges(h.begin() + static_cast<std::ptrdiff_t>(r) * wn,
                       h.begin() + static_cast<std::ptrdiff_t>(r + 1) * wn,
                       h.begin() + static_cast<std::ptrdiff_t>(rank) * wn);
    }
    const std::uint64_t* prow = &h[static_cast<std::size_t>(rank) * wn];
    for (int i = 0; i < m; ++i) {
      if (i == rank) continue;
      std::uint64_t* row = &h[static_cast<std::size_t>(i) * wn];
      if (get_bit(row, col))
        for (int w = 0; w < wn; ++w) row[w] ^= prow[w];
    }
    pivot_col.push_back(col);
    is_pivot[col] = 1;
    ++rank;
  }
  k_ = n_ - rank;
  if (k_ < 1) throw ConfigError("LdpcCode: parity-check matrix leaves no information bits");
  std::vector<int> info_index(n_, -1);
  for (int v = 0; v < n_; ++v) {
    if (!is_pivot[v]) {
      info_index[v] = static_cast<int>(info_pos_.size());
      info_pos_.push_back(v);
    }
  }
  words_ = (k_ + 63) / 64;
  parity_gen_.assign(static_cast<std::size_t>(rank) * words_, 0);
  for (int r = 0; r < rank; ++r) {
    parity_pos_.push_back(pivot_col[r]);
    const std::uint64_t* row = &h[static_cast<std::size_t>(r) * wn];
    std::uint64_t* g = &parity_gen_[static_cast<std::size_t>(r) * words_];
    for (int v : info_pos_)
      if (get_bit(row, v)) set_bit(g, info_index[v]);
  }
}

std::vector<std::uint8_t> LdpcCode::encode(std::span<const std::uint8_t> info) const {
  if (static_cast<int>(info.size()) != k_) {
    throw DimensionError("ldpc encode: expected " + std::to_string(k_) + " info bits, got " +
                         std::to_string(info.size()));
  }
  std::vector<std::uint64_t> packed(words_, 0);
  for (int i = 0; i < k_; ++i)
    if (info[i] & 1) set_bit(packed.data(), i);
  std::vector<std::uint8_t> cw(n_, 0);
  for (int i = 0; i < k_; ++i) cw[info_pos_[i]] = info[i] & 1;
  for (std::size_t r = 0; r < parity_pos_.size(); ++r) {
    const std::uint64_t* g = &parity_gen_[r * words_];
    std::uint64_t acc = 0;
    for (int w = 0; w < words_; ++w) acc ^= g[w] & packed[w];
    cw[parity_pos_[r]] = static_cast<std::uint8_t>(std::popcount(acc) & 1);
  }
  return cw;
}

std::vector<std::uint8_t> LdpcCode::extract_info(std::span<const std::uint8_t> codeword) const {
  if (static_cast<int>(codeword.size()) != n_) throw DimensionError("extract_info: length");
  std::vector<std::uint8_t> info(k_);
  for (int i = 0; i < k_; ++i) info[i] = codeword[info_pos_[i]];
  return info;
}

bool LdpcCode::is_codeword(std::span<const std::uint8_t> codeword) const {
  if (static_cast<int>(codeword.size()) != n_) return false;
  for (const auto& row : checks_) {
    int parity = 0;
    for (int v : row) parity ^= codeword[v] & 1;
    if (parity) return false;
  }
  return true;
}

LdpcCode LdpcCode::from_alist(std::istream& in) {
  auto next = [&in]() {
    long long x;
    if (!(in >> x)) throw IoError("alist: unexpected end of input");
    return x;
  };
  const long long n = next(), m = next();
  if (n < 2 || m < 1 || n > (1 << 24) || m > (1 << 24)) throw IoError("alist: bad dimensions");
  next();
  next();
  std::vector<int> col_deg(n), row_deg(m);
  for (auto& d : col_deg) d = static_cast<int>(next());
  for (auto& d : row_deg) d = static_cast<int>(next());
  // Zero entries are padding and skipped.
  auto read_list = [&](int count, long long bound) {
    std::vector<int> out;
    while (static_cast<int>(out.size()) < count) {
      const long long x = next();
      if (x == 0) continue;
      if (x < 1 || x > bound) throw IoError("alist: index out of range");
      out.push_back(static_cast<int>(x - 1));
    }
    return out;
  };
  std::vector<std::vector<int>> cols(n);
  for (long long v = 0; v < n; ++v) cols[v] = read_list(col_deg[v], m);
  std::vector<std::vector<int>> checks(m);
  for (long long c = 0; c < m; ++c) checks[c] = read_list(row_deg[c], n);
  // Both adjacency lists must describe the same matrix.
  std::vector<std::vector<int>> rebuilt(m);
  for (long long v = 0; v < n; ++v)
    for (int c : cols[v]) rebuilt[c].push_back(static_cast<int>(v));
  for (long long c = 0; c < m; ++c) {
    auto a = checks[c];
    std::sort(a.begin(), a.end());
    if (a != rebuilt[c]) throw IoError("alist: column and row lists disagree");
  }
  return LdpcCode(static_cast<int>(n), std::move(checks));
}

LdpcCode LdpcCode::load_alist(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open alist file '" + path + "'");
  return from_alist(in);
}

void LdpcCode::write_alist(std::ostream& out) const {
  std::size_t max_col = 0, max_row = 0;
  for (const auto& v : vars_) max_col = std::max(max_col, v.size());
  for (const auto& c : checks_) max_row = std::max(max_row, c.size());
  out << n_ << ' ' << m() << '\n' << max_col << ' ' << max_row << '\n';
  auto write_degrees = [&out](const std::vector<std::vector<int>>& lists) {
    for (std::size_t i = 0; i < lists.size(); ++i)
      out << lists[i].size() << (i + 1 == lists.size() ? '\n' : ' ');
  };
  write_degrees(vars_);
  write_degrees(checks_);
  auto write_lists = [&out](const std::vector<std::vector<int>>& lists, std::size_t width) {
    for (const auto& l : lists) {
      for (std::size_t i = 0; i < width; ++i) {
        out << (i < l.size() ? l[i] + 1 : 0) << (i + 1 == width ? '\n' : ' ');
      }
    }
  };
  write_lists(vars_, max_col);
  write_lists(checks_, max_row);
}

LdpcCode peg_construct(int n, int m, int column_degree, std::uint64_t seed) {
  if (n < 2 || m < 1 || m >= n || column_degree < 1 || column_degree > m) {
    throw ConfigError("peg_construct: invalid dimensions");
  }
  std::mt19937_64 rng(seed);
  std::vector<std::vector<int>> var_adj(n), chk_adj(m);
  std::vector<int> depth(m);
  std::vector<int> var_seen(n, -1);
  std::vector<int> frontier, next_frontier, candidates;

  auto pick_lowest_degree = [&](const std::vector<int>& cands) {
    std::size_t best = std::numeric_limits<std::size_t>::max();
    for (int c : cands) best = std::min(best, chk_adj[c].size());
    std::vector<int> ties;
    for (int c : cands)
      if (chk_adj[c].size() == best) ties.push_back(c);
    return ties[std::uniform_int_distribution<std::size_t>(0, ties.size() - 1)(rng)];
  };

  for (int v = 0; v < n; ++v) {
    for (int e = 0; e < column_degree; ++e) {
      candidates.clear();
      if (e == 0) {
        for (int c = 0; c < m; ++c) candidates.push_back(c);
      } else {
        // Breadth-first expansion of the current graph from v.
        std::fill(depth.begin(), depth.end(), -1);
        const int stamp = v * column_degree + e;
        var_seen[v] = stamp;
        frontier.clear();
        int reached = 0;
        for (int c : var_adj[v]) {
          depth[c] = 0;
          frontier.push_back(c);
          ++reached;
        }
        int level = 0;
        while (true) {
          next_frontier.clear();
          for (int c : frontier) {
            for (int u : chk_adj[c]) {
              if (var_seen[u] == stamp) continue;
              var_seen[u] = stamp;
              for (int c2 : var_adj[u]) {
                if (depth[c2] >= 0) continue;
                depth[c2] = level + 1;
                next_frontier.push_back(c2);
              }
            }
          }
          if (next_frontier.empty()) {
            for (int c = 0; c < m; ++c)
              if (depth[c] < 0) candidates.push_back(c);
            break;
          }
          reached += static_cast<int>(next_frontier.size());
          ++level;
          if (reached == m) {
            candidates = next_frontier;
            break;
          }
          frontier.swap(next_frontier);
        }
      }
      const int c = pick_lowest_degree(candidates);
      var_adj[v].push_back(c);
      chk_adj[c].push_back(v);
    }
  }
  return LdpcCode(n, std::move(chk_adj));
}

DecodeResult ldpc_decode(std::span<const double> llrs, const LdpcCode& code,
                         const MinSumOptions& opts) {
  const int n = code.n();
  if (static_cast<int>(llrs.size()) != n) {
    throw DimensionError("ldpc decode: expected " + std::to_string(n) + " LLRs, got " +
                         std::to_string(llrs.size()));
  }
  const auto& checks = code.checks();
  // Internally lambda = log P(0)/P(1).
  std::vector<double> lambda(n), post(n), acc(n);
  for (int v = 0; v < n; ++v) lambda[v] = -llrs[v];
  post = lambda;
  std::size_t edges = 0;
  for (const auto& row : checks) edges += row.size();
  std::vector<double> c2v(edges, 0.0), v2c;

  DecodeResult res;
  res.codeword.assign(n, 0);
  for (int it = 1; it <= opts.max_iterations; ++it) {
    acc = lambda;
    std::size_t e0 = 0;
    for (const auto& row : checks) {
      const std::size_t deg = row.size();
      v2c.resize(deg);
      double min1 = std::numeric_limits<double>::infinity(), min2 = min1;
      std::size_t arg = 0;
      bool negative = false;
      for (std::size_t i = 0; i < deg; ++i) {
        const double m = post[row[i]] - c2v[e0 + i];
        v2c[i] = m;
        negative ^= m < 0.0;
        const double a = std::abs(m);
        if (a < min1) {
          min2 = min1;
          min1 = a;
          arg = i;
        } else if (a < min2) {
          min2 = a;
        }
      }
      for (std::size_t i = 0; i < deg; ++i) {
        const double mag = opts.scale * (i == arg ? min2 : min1);
        const bool neg = negative ^ (v2c[i] < 0.0);
        c2v[e0 + i] = neg ? -mag : mag;
        acc[row[i]] += c2v[e0 + i];
      }
      e0 += deg;
    }
    post.swap(acc);
    res.iterations = it;
    // A zero posterior is an erasure and never counts as a decision.
    bool erased = false;
    for (int v = 0; v < n; ++v) {
      res.codeword[v] = post[v] < 0.0 ? 1 : 0;
      erased |= post[v] == 0.0;
    }
    if (!erased && code.is_codeword(res.codeword)) {
      res.converged = true;
      break;
    }
  }
  res.info = code.extract_info(res.codeword);
  return res;
}

Segmentation segment_payload(int capacity_bits, const LdpcCode& code) {
  const int n = code.n(), k = code.k();
  Segmentation seg;
  seg.capacity_bits = capacity_bits;
  if (capacity_bits >= n) {
    seg.codewords = capacity_bits / n;
    seg.pad_bits = capacity_bits - seg.codewords * n;
    seg.transmitted_positions.resize(n);
    for (int i = 0; i < n; ++i) seg.transmitted_positions[i] = i;
    return seg;
  }
  if (2 * capacity_bits < n) {
    throw ConfigError("segmentation: " + std::to_string(capacity_bits) +
                      " coded bits per slot cannot carry a length-" + std::to_string(n) +
                      " codeword (need at least n/2)");
  }
  const int removed = n - capacity_bits;
  seg.codewords = 1;
  seg.shortened = removed / 2;
  seg.punctured = removed - seg.shortened;
  if (seg.shortened >= k || seg.punctured > n - k) {
    throw ConfigError("segmentation: code too small for the required shortening");
  }
  std::vector<std::uint8_t> drop(n, 0);
  // Shorten the last information bits.
  for (int i = k - seg.shortened; i < k; ++i) {
    seg.shortened_positions.push_back(code.info_positions()[i]);
    drop[code.info_positions()[i]] = 1;
  }
  // Puncture parity bits spread evenly over the parity set.
  const auto& parity = code.parity_positions();
  const int np = static_cast<int>(parity.size());
  for (int i = 0; i < seg.punctured; ++i) {
    drop[parity[static_cast<std::size_t>((static_cast<long long>(i) * np) / seg.punctured)]] = 1;
  }
  for (int i = 0; i < n; ++i)
    if (!drop[i]) seg.transmitted_positions.push_back(i);
  return seg;
}

std::vector<std::uint8_t> encode_segment(std::span<const std::uint8_t> info,
                                         const LdpcCode& code, const Segmentation& seg) {
  const int kb = seg.info_bits_per_codeword(code);
  if (info.size() != static_cast<std::size_t>(kb) * seg.codewords) {
    throw DimensionError("encode_segment: expected " + std::to_string(kb * seg.codewords) +
                         " info bits, got " + std::to_string(info.size()));
  }
  std::vector<std::uint8_t> out;
  out.reserve(seg.capacity_bits);
  std::vector<std::uint8_t> block(code.k(), 0);
  for (int c = 0; c < seg.codewords; ++c) {
    std::copy_n(info.begin() + static_cast<std::ptrdiff_t>(c) * kb, kb, block.begin());
    const auto cw = code.encode(block);
    for (int p : seg.transmitted_positions) out.push_back(cw[p]);
  }
  out.resize(seg.capacity_bits, 0);
  return out;
}

std::vector<double> recover_llrs(std::span<const double> stream_llrs, int index,
                                 const LdpcCode& code, const Segmentation& seg) {
  if (stream_llrs.size() != static_cast<std::size_t>(seg.capacity_bits) || index < 0 ||
      index >= seg.codewords) {
    throw DimensionError("recover_llrs: stream length or codeword index mismatch");
  }
  std::vector<double> full(code.n(), 0.0);
  const int per = seg.transmitted_per_codeword();
  for (int i = 0; i < per; ++i) {
    full[seg.transmitted_positions[i]] = stream_llrs[static_cast<std::size_t>(index) * per + i];
  }
  for (int p : seg.shortened_positions) full[p] = kShortenedLlr;
  return full;
}

std::vector<std::uint8_t> segment_info(std::span<const std::uint8_t> info,
                                       const LdpcCode& code, const Segmentation& seg) {
  if (static_cast<int>(info.size()) != code.k()) throw DimensionError("segment_info: length");
  return {info.begin(), info.begin() + seg.info_bits_per_codeword(code)};
}

}  // namespace ddst
