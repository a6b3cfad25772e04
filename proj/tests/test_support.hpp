#pragma once

// Shared helpers for the test binaries: independent oracles, seeded
// generators, and a driver for the installed command-line binary.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

namespace testkit {

struct BruteAp {
  long len = 0;
  long a = 0;
  long d = 0;
};

// Exhaustive (a,d) enumeration, independent of the library's dynamic
// program. Ties: longest, then smallest difference, then smallest start.
inline BruteAp brute_longest_ap(const std::vector<long>& pts_in) {
  std::vector<long> pts = pts_in;
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  std::set<long> have(pts.begin(), pts.end());
  if (pts.empty()) return {};
  BruteAp best{1, pts.front(), 0};
  for (size_t i = 0; i < pts.size(); ++i) {
    for (size_t j = i + 1; j < pts.size(); ++j) {
      const long a = pts[i];
      const long d = pts[j] - pts[i];
      long len = 2;
      long next = pts[j] + d;
      while (have.count(next)) {
        ++len;
        next += d;
      }
      // only count runs that truly start at a
      if (have.count(a - d)) continue;
      const bool better = len > best.len ||
                          (len == best.len && d < best.d) ||
                          (len == best.len && d == best.d && a < best.a);
      if (better) best = {len, a, d};
    }
  }
  return best;
}

// Distinct sorted draws from [0, n), expected size ~ density*n.
inline std::vector<long> random_subset(std::mt19937_64& rng, long n, double density) {
  std::vector<long> out;
  std::bernoulli_distribution keep(density);
  for (long i = 0; i < n; ++i)
    if (keep(rng)) out.push_back(i);
  return out;
}

inline std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

// Drop the volatile timestamp line before byte-comparing JSON artifacts.
inline std::string strip_generated_at(const std::string& text) {
  std::istringstream is(text);
  std::ostringstream os;
  std::string line;
  while (std::getline(is, line))
    if (line.find("\"generated_at\"") == std::string::npos) os << line << "\n";
  return os.str();
}

#ifdef IDEALAB_BIN
struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

inline CliResult run_cli(const std::string& args) {
  static int counter = 0;
  const std::string tag = std::to_string(++counter) + "." + std::to_string(getpid());
  const std::string out_path = "/tmp/idealab_test_out." + tag;
  const std::string err_path = "/tmp/idealab_test_err." + tag;
  const std::string cmd = std::string(IDEALAB_BIN) + " " + args + " >" + out_path +
                          " 2>" + err_path;
  const int status = std::system(cmd.c_str());
  CliResult r;
  r.code = (status >= 0 && WIFEXITED(status)) ? WEXITSTATUS(status) : -1;
  r.out = read_file(out_path);
  r.err = read_file(err_path);
  std::remove(out_path.c_str());
  std::remove(err_path.c_str());
  return r;
}
#endif

}  // namespace testkit
