#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "treemp/analysis.hpp"
#include "treemp/bench.hpp"
#include "treemp/config.hpp"

using namespace treemp;

namespace {

// Flags for every config key; anything given on the command line overrides the file.
struct SweepOptions {
  std::string config_path;
  std::map<std::string, std::string> flags;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "key = value config file")->check(CLI::ExistingFile);
    for (const auto& key : config_keys()) cmd->add_option("--" + key, flags[key]);
  }

  ExperimentConfig resolve(CLI::App* cmd) const {
    KeyValues kv;
    if (!config_path.empty()) kv = read_key_values_file(config_path);
    for (const auto& [key, value] : flags) {
      if (cmd->count("--" + key) > 0) kv[key] = value;
    }
    ExperimentConfig config;
    apply_key_values(config, kv);
    config.validate();
    return config;
  }
};

// Standard output unless a path is given.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (path.empty()) return;
    file_ = std::make_unique<std::ofstream>(path);
    if (!*file_) throw Error(ErrorCode::Io, "cannot open '" + path + "' for writing");
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }
  void finish() {
    stream().flush();
    if (!stream()) throw Error(ErrorCode::Io, "write failed");
  }

 private:
  std::unique_ptr<std::ofstream> file_;
};

void report(const std::string& what, const ExperimentConfig& c, const SweepReport& r) {
  std::cerr << what << ": " << r.records.size() << " records, " << c.trials << " trials per point, "
            << r.oracle_checks << " oracle checks, " << r.oracle_mismatches << " mismatches (max deviation "
            << r.max_oracle_deviation << ")\n";
  for (double f : r.preselection_containment) std::cerr << "  pre-selection contains T in " << f << " of trials\n";
  for (const auto& rec : r.records) {
    if (rec.err != rec.err) {
      std::cerr << "  warning: " << rec.algorithm << " not applicable at " << rec.sweep_param << " = "
                << rec.sweep_value << ", reported as NaN\n";
    }
  }
}

MeasurementInstance load_or_generate(const std::string& path, int m, int n, int k, double snr,
                                     std::uint64_t seed) {
  if (path.empty()) return make_instance(m, n, k, snr, seed);
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open instance file '" + path + "'");
  return read_instance_csv(in);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tree search matching pursuit: sparse recovery experiments"};
  app.require_subcommand(1);

  SweepOptions err_opts, mse_opts, timing_opts;
  auto* sweep_err = app.add_subcommand("sweep-err", "ERR versus K (noiseless)");
  err_opts.attach(sweep_err);
  auto* sweep_mse = app.add_subcommand("sweep-mse", "MSE versus SNR at a single K");
  mse_opts.attach(sweep_mse);
  auto* timing = app.add_subcommand("timing", "single-threaded mean runtime per algorithm");
  timing_opts.attach(timing);

  DiagnosticsConfig diag;
  std::string diag_out;
  auto* diagnose = app.add_subcommand("diagnose", "brute-force RIC, bounds and recovery conditions on tiny instances");
  diagnose->add_option("--m", diag.m, "rows")->capture_default_str();
  diagnose->add_option("--n", diag.n, "columns")->capture_default_str();
  diagnose->add_option("--k", diag.k, "sparsity")->capture_default_str();
  diagnose->add_option("--l", diag.l, "indices per pre-selection step")->capture_default_str();
  diagnose->add_option("--instances", diag.instances)->capture_default_str();
  diagnose->add_option("--snr", diag.snr_db, "dB; inf for noiseless")->capture_default_str();
  diagnose->add_option("--seed", diag.seed)->capture_default_str();
  diagnose->add_option("--out", diag_out, "CSV path (default stdout)");

  SweepOptions rec_opts;
  std::string rec_instance, rec_algorithm = "tmp";
  auto* recover = app.add_subcommand("recover", "recover one instance, print support and estimate as JSON");
  rec_opts.attach(recover);
  recover->add_option("--instance", rec_instance, "instance CSV (default: generate from m, n, k, snr, seed)");
  recover->add_option("--algorithm", rec_algorithm)->capture_default_str();

  int ric_m = 8, ric_n = 12, ric_kmax = 0;
  std::uint64_t ric_seed = 1;
  std::string ric_instance, ric_out;
  auto* ric = app.add_subcommand("ric", "brute-force restricted isometry constants, CSV k,delta");
  ric->add_option("--m", ric_m)->capture_default_str();
  ric->add_option("--n", ric_n)->capture_default_str();
  ric->add_option("--seed", ric_seed)->capture_default_str();
  ric->add_option("--kmax", ric_kmax, "highest order (default n)");
  ric->add_option("--instance", ric_instance, "take the matrix from an instance CSV");
  ric->add_option("--out", ric_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*sweep_err || *sweep_mse || *timing) {
      CLI::App* cmd = *sweep_err ? sweep_err : *sweep_mse ? sweep_mse : timing;
      const SweepOptions& opts = *sweep_err ? err_opts : *sweep_mse ? mse_opts : timing_opts;
      const ExperimentConfig config = opts.resolve(cmd);
      const SweepReport r = *sweep_err ? run_err_sweep(config)
                            : *sweep_mse ? run_mse_sweep(config)
                                         : run_timing(config);
      report(cmd->get_name(), config, r);
      Output out(config.out);
      write_sweep_csv(out.stream(), r.records);
      out.finish();
    } else if (*diagnose) {
      const auto rows = run_diagnostics(diag);
      std::size_t violated = 0;
      for (const auto& row : rows) violated += row.verdict == Verdict::violated;
      std::cerr << "diagnose: " << rows.size() << " rows, " << violated << " violated\n";
      Output out(diag_out);
      write_diagnostics_csv(out.stream(), rows);
      out.finish();
    } else if (*recover) {
      const ExperimentConfig config = rec_opts.resolve(recover);
      if (!is_known_algorithm(rec_algorithm)) {
        throw Error(ErrorCode::InvalidConfig, "unknown algorithm '" + rec_algorithm + "'");
      }
      const MeasurementInstance inst = load_or_generate(rec_instance, config.m, config.n, config.k_list.front(),
                                                        config.snr_list.front(), config.seed);
      const AlgorithmRun run = run_algorithm(rec_algorithm, inst, config.tmp);
      nlohmann::json j;
      j["algorithm"] = rec_algorithm;
      j["support"] = run.support.indices();
      j["true_support"] = inst.x.support.indices();
      j["exact"] = run.support == inst.x.support;
      j["x_hat"] = std::vector<double>(run.x_hat.data(), run.x_hat.data() + run.x_hat.size());
      j["residual_norm"] = (inst.y - inst.phi * run.x_hat).norm();
      Output out(config.out);
      out.stream() << j.dump(2) << '\n';
      out.finish();
    } else if (*ric) {
      const DenseMatrix phi = ric_instance.empty() ? gen_sensing_matrix(ric_m, ric_n, ric_seed)
                                                   : load_or_generate(ric_instance, 0, 0, 0, 0, 0).phi;
      const int kmax = ric_kmax > 0 ? ric_kmax : static_cast<int>(phi.cols());
      const RicTable table = ric_bruteforce(phi, kmax, ric_instance.empty() ? "generated" : ric_instance);
      Output out(ric_out);
      out.stream().precision(10);
      out.stream() << "k,delta\n";
      for (std::size_t i = 0; i < table.delta.size(); ++i) out.stream() << i + 1 << ',' << table.delta[i] << '\n';
      out.finish();
    }
  } catch (const Error& e) {
    std::cerr << "ERROR " << to_string(e.code()) << ": " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "ERROR Internal: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
