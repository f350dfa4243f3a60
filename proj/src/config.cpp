#include "treemp/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>

namespace treemp {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad(const std::string& key, const std::string& value, const char* expected) {
  throw Error(ErrorCode::InvalidConfig,
              "key '" + key + "': '" + value + "' is not " + expected);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

long long parse_integer(const std::string& key, const std::string& value) {
  long long v = 0;
  const char* end = value.data() + value.size();
  auto [p, ec] = std::from_chars(value.data(), end, v);
  if (ec != std::errc() || p != end) bad(key, value, "an integer");
  return v;
}

int parse_int(const std::string& key, const std::string& value) {
  const long long v = parse_integer(key, value);
  if (v < -2147483647LL || v > 2147483647LL) bad(key, value, "a 32-bit integer");
  return static_cast<int>(v);
}

double parse_double(const std::string& key, const std::string& value) {
  if (value == "inf" || value == "noiseless") return kNoiseless;
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) bad(key, value, "a number");
    return v;
  } catch (const std::logic_error&) {
    bad(key, value, "a number");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  bad(key, value, "a boolean");
}

}  // namespace

void ExperimentConfig::validate() const {
  if (m < 1 || n < 1) throw Error(ErrorCode::InvalidConfig, "m and n must be positive");
  if (trials < 1) throw Error(ErrorCode::InvalidConfig, "trials must be at least 1");
  if (k_list.empty()) throw Error(ErrorCode::InvalidConfig, "k list is empty");
  if (snr_list.empty()) throw Error(ErrorCode::InvalidConfig, "snr list is empty");
  for (int k : k_list) {
    if (k < 1 || k > m || k > n) throw Error(ErrorCode::InvalidConfig, "k must lie in [1, min(m, n)]");
  }
  if (algorithms.empty()) throw Error(ErrorCode::InvalidConfig, "no algorithms selected");
  for (const auto& a : algorithms) {
    if (!is_known_algorithm(a)) throw Error(ErrorCode::InvalidConfig, "unknown algorithm '" + a + "'");
  }
  if (threads < 0) throw Error(ErrorCode::InvalidConfig, "threads must be nonnegative");
  for (int k : k_list) {
    TmpConfig probe = tmp;
    probe.k = k;
    probe.validate();
  }
}

KeyValues parse_key_values(std::istream& is) {
  KeyValues kv;
  std::string line, section;
  int number = 0;
  while (std::getline(is, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw Error(ErrorCode::InvalidConfig, "line " + std::to_string(number) + ": unterminated section");
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::InvalidConfig, "line " + std::to_string(number) + ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw Error(ErrorCode::InvalidConfig, "line " + std::to_string(number) + ": empty key");
    if (!section.empty()) key = section + "." + key;
    kv[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

KeyValues read_key_values_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open config file '" + path + "'");
  return parse_key_values(in);
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "m", "n", "k", "snr", "trials", "seed", "algorithms", "l", "nmax", "preselection-size",
      "out", "threads", "law", "tmp.preselection", "tmp.epsilon-init",
      "tmp.iterative-completion", "tmp.collapse-candidates"};
  return keys;
}

bool is_known_algorithm(const std::string& name) {
  static const std::vector<std::string> fixed{"omp", "gomp", "cosamp", "tmp", "oracle",
                                              "preselection_only"};
  if (std::find(fixed.begin(), fixed.end(), name) != fixed.end()) return true;
  const std::string prefix = "tmp_nmax";
  if (name.rfind(prefix, 0) != 0 || name.size() == prefix.size()) return false;
  const std::string digits = name.substr(prefix.size());
  if (!std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; })) return false;
  return digits.size() < 9 && std::stoi(digits) >= 1;
}

void apply_key_values(ExperimentConfig& c, const KeyValues& kv) {
  for (const auto& [key, value] : kv) {
    if (key == "m") {
      c.m = parse_int(key, value);
    } else if (key == "n") {
      c.n = parse_int(key, value);
    } else if (key == "k") {
      c.k_list.clear();
      for (const auto& item : split_list(value)) c.k_list.push_back(parse_int(key, item));
    } else if (key == "snr") {
      c.snr_list.clear();
      for (const auto& item : split_list(value)) c.snr_list.push_back(parse_double(key, item));
    } else if (key == "trials") {
      c.trials = parse_int(key, value);
    } else if (key == "seed") {
      const long long s = parse_integer(key, value);
      if (s < 0) bad(key, value, "a nonnegative integer");
      c.seed = static_cast<std::uint64_t>(s);
    } else if (key == "algorithms") {
      c.algorithms = split_list(value);
    } else if (key == "l") {
      c.tmp.l = parse_int(key, value);
    } else if (key == "nmax") {
      if (value == "none" || value == "inf") c.tmp.n_max.reset();
      else c.tmp.n_max = parse_int(key, value);
    } else if (key == "preselection-size") {
      c.tmp.preselection_size = parse_int(key, value);
    } else if (key == "out") {
      c.out = value;
    } else if (key == "threads") {
      c.threads = parse_int(key, value);
    } else if (key == "law") {
      if (value == "gaussian") c.law = CoefficientLaw::gaussian;
      else if (value == "sign") c.law = CoefficientLaw::sign;
      else bad(key, value, "gaussian or sign");
    } else if (key == "tmp.preselection") {
      if (value == "gomp") c.tmp.preselection = PreselectionMethod::gomp;
      else if (value == "omp") c.tmp.preselection = PreselectionMethod::omp_extended;
      else if (value == "full") c.tmp.preselection = PreselectionMethod::full;
      else bad(key, value, "gomp, omp or full");
    } else if (key == "tmp.epsilon-init") {
      c.tmp.epsilon_init = parse_double(key, value);
    } else if (key == "tmp.iterative-completion") {
      c.tmp.iterative_completion = parse_bool(key, value);
    } else if (key == "tmp.collapse-candidates") {
      c.tmp.collapse_equal_candidates = parse_bool(key, value);
    } else {
      throw Error(ErrorCode::InvalidConfig, "unknown key '" + key + "'");
    }
  }
}

}  // namespace treemp
