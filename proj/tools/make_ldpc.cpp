// SPDX-License-Identifier: Apache-2.0
//
// Writes a PEG-constructed parity-check matrix in alist format. Seeds are
// tried in order until the matrix has full rank.
#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "ddst/coding.hpp"
#include "ddst/error.hpp"

int main(int argc, char** argv) {
  CLI::App app{"PEG LDPC construction"};
  int n = 0, m = 0, degree = 3, attempts = 64;
  std::uint64_t seed = 1;
  std::string out;
  app.add_option("-n", n, "codeword length")->required();
  app.add_option("-m", m, "number of checks")->required();
  app.add_option("--column-degree", degree, "variable node degree");
  app.add_option("--seed", seed, "first seed");
  app.add_option("--attempts", attempts, "seeds to try");
  app.add_option("-o,--out", out, "output alist path")->required();
  CLI11_PARSE(app, argc, argv);

  try {
    for (int a = 0; a < attempts; ++a) {
      const auto code = ddst::peg_construct(n, m, degree, seed + a);
      if (code.k() != n - m) {
        std::cerr << "seed " << seed + a << ": rank deficient (k=" << code.k() << ")\n";
        continue;
      }
      std::ofstream f(out);
      if (!f) throw ddst::IoError("cannot write '" + out + "'");
      code.write_alist(f);
      std::cerr << "seed " << seed + a << ": (" << n << ", " << code.k() << ") written to "
                << out << '\n';
      return 0;
    }
    std::cerr << "no full-rank matrix found\n";
    return 1;
  } catch (const ddst::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return ddst::exit_code_for(e);
  }
}
