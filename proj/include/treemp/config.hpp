#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "treemp/recovery.hpp"
#include "treemp/signals.hpp"

namespace treemp {

struct ExperimentConfig {
  int m = 100;
  int n = 256;
  std::vector<int> k_list{20};
  std::vector<double> snr_list{kNoiseless};
  int trials = 500;
  std::uint64_t seed = 1;
  std::vector<std::string> algorithms{"omp", "gomp", "cosamp", "tmp", "oracle"};
  TmpConfig tmp;  // k is overwritten per sweep point
  CoefficientLaw law = CoefficientLaw::gaussian;
  int threads = 1;  // worker threads for sweeps; 0 means one per hardware thread
  std::string out;  // empty: standard output

  void validate() const;
};

/// Parsed `key = value` lines. `[section]` headers prefix the following keys
/// with `section.`; `#` starts a comment.
using KeyValues = std::map<std::string, std::string>;

KeyValues parse_key_values(std::istream& is);
KeyValues read_key_values_file(const std::string& path);

/// Applies recognized keys; unknown keys or malformed values throw InvalidConfig.
///
///   m, n, k (comma list), snr (comma list, "inf" for noiseless), trials, seed,
///   algorithms (comma list), l, nmax ("none" or a count), preselection-size,
///   out, threads, law (gaussian|sign), tmp.preselection (gomp|omp|full),
///   tmp.epsilon-init, tmp.iterative-completion, tmp.collapse-candidates
void apply_key_values(ExperimentConfig& config, const KeyValues& kv);

/// Keys accepted by apply_key_values, in the order they are documented.
const std::vector<std::string>& config_keys();

/// Algorithm names understood by the bench: omp, gomp, cosamp, tmp,
/// tmp_nmax<v>, oracle, preselection_only.
bool is_known_algorithm(const std::string& name);

}  // namespace treemp
