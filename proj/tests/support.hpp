#ifndef PHONEVAL_TESTS_SUPPORT_HPP
#define PHONEVAL_TESTS_SUPPORT_HPP

// Helpers shared by the test binaries: random generators, scratch
// directories and brute-force reference implementations. The references
// are written from the definitions, without reusing library code.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include <Eigen/Dense>

#include "phoneval/corpus_io.hpp"
#include "phoneval/inventory.hpp"
#include "phoneval/types.hpp"

namespace testing {

namespace fs = std::filesystem;

using Rng = std::mt19937_64;

inline int uniform(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

class ScratchDir {
 public:
  explicit ScratchDir(const std::string& tag) {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("phoneval_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline void write_text(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  f << text;
}

inline std::string read_text(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

/// Runs the CLI with `args`, stdout/stderr to `log`. Returns the exit code.
inline int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(PHONEVAL_CLI) + " " + args + " > '" +
                          log.string() + "' 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

/// Small inventory: two phones of each of a few classes.
inline phoneval::PhonemeInventory toy_inventory(int phones = 6) {
  using phoneval::PhonemeClass;
  static const PhonemeClass cls[] = {
      PhonemeClass::kPlosive,     PhonemeClass::kFricative,
      PhonemeClass::kNasal,       PhonemeClass::kMonophthong,
      PhonemeClass::kApproximant, PhonemeClass::kVibrant,
      PhonemeClass::kAffricate,   PhonemeClass::kDiphthong};
  std::vector<std::string> syms;
  std::vector<PhonemeClass> classes;
  for (int i = 0; i < phones; ++i) {
    syms.push_back("p" + std::to_string(i));
    classes.push_back(cls[i % 8]);
  }
  return {"toy", "SIL", syms, classes};
}

inline phoneval::PhonemeInventory data_inventory(const std::string& lang) {
  return phoneval::load_inventory(fs::path(PHONEVAL_DATA_DIR) / "inventories" /
                                  (lang + ".tsv"));
}

inline phoneval::CountMatrix random_table(Rng& rng, int rows, int cols,
                                          int max_count, double zero_rate = 0.3) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  phoneval::CountMatrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j)
      m(i, j) = u(rng) < zero_rate ? 0 : uniform(rng, 0, max_count);
  return m;
}

// ----------------------------------------------------------- references

/// I(p;u)/H(p) straight from the definition, in long double, probabilities
/// first.
inline long double naive_pnmi(const phoneval::CountMatrix& c) {
  long double total = 0;
  for (Eigen::Index i = 0; i < c.rows(); ++i)
    for (Eigen::Index j = 0; j < c.cols(); ++j) total += c(i, j);
  std::vector<long double> pp(c.rows(), 0), pu(c.cols(), 0);
  for (Eigen::Index i = 0; i < c.rows(); ++i)
    for (Eigen::Index j = 0; j < c.cols(); ++j) {
      pp[i] += c(i, j) / total;
      pu[j] += c(i, j) / total;
    }
  long double h = 0, mi = 0;
  for (auto p : pp)
    if (p > 0) h -= p * std::log(p);
  for (Eigen::Index i = 0; i < c.rows(); ++i)
    for (Eigen::Index j = 0; j < c.cols(); ++j) {
      const long double pij = c(i, j) / total;
      if (pij > 0) mi += pij * std::log(pij / (pp[i] * pu[j]));
    }
  return mi / h;
}

/// Full-table Levenshtein distance.
inline int dp_distance(const std::vector<int>& a, const std::vector<int>& b) {
  const std::size_t n = a.size(), m = b.size();
  std::vector<std::vector<int>> d(n + 1, std::vector<int>(m + 1));
  for (std::size_t i = 0; i <= n; ++i) d[i][0] = static_cast<int>(i);
  for (std::size_t j = 0; j <= m; ++j) d[0][j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t j = 1; j <= m; ++j)
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1,
                          d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
  return d[n][m];
}

/// Label of the segment whose interval holds t, silence otherwise, by a
/// linear scan in seconds.
inline int scan_label(const phoneval::GoldUtterance& utt, double t_sec,
                      int silence) {
  for (const auto& s : utt.segments)
    if (t_sec * 1e6 >= static_cast<double>(s.onset) &&
        t_sec * 1e6 < static_cast<double>(s.offset))
      return s.phone;
  return silence;
}

/// Run-length merge without edge silence.
inline std::vector<int> rle_strip(const std::vector<int>& frames, int sil) {
  std::vector<int> out;
  for (int x : frames)
    if (out.empty() || out.back() != x) out.push_back(x);
  while (!out.empty() && out.front() == sil) out.erase(out.begin());
  while (!out.empty() && out.back() == sil) out.pop_back();
  return out;
}

}  // namespace testing

#endif  // PHONEVAL_TESTS_SUPPORT_HPP
