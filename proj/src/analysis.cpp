#include "treemp/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>

#include "treemp/recovery.hpp"

namespace treemp {

std::optional<double> RicTable::at(int k) const {
  if (k <= 0) return 0.0;
  if (k <= exact_up_to) return delta[static_cast<std::size_t>(k - 1)];
  if (exact_up_to == columns && columns > 0) return delta.back();
  return std::nullopt;
}

double RicTable::require(int k) const {
  const auto d = at(k);
  if (!d) {
    throw Error(ErrorCode::MissingRicOrder,
                "RIC of order " + std::to_string(k) + " not available (computed up to " +
                    std::to_string(exact_up_to) + ")");
  }
  return *d;
}

RicTable ric_bruteforce(const DenseMatrix& phi, int k_max, std::string matrix_id) {
  if (k_max < 1) throw Error(ErrorCode::InvalidArgument, "RIC order must be at least 1");
  const int n = static_cast<int>(phi.cols());
  const int top = std::min(k_max, n);
  for (int k = 1; k <= top; ++k) {
    if (binomial(n, k) > kMaxRicSupports) {
      throw Error(ErrorCode::TooLarge, "too many supports of size " + std::to_string(k) +
                                           " to enumerate");
    }
  }

  const DenseMatrix gram = phi.transpose() * phi;
  RicTable table;
  table.matrix_id = std::move(matrix_id);
  table.columns = n;
  table.exact_up_to = top;
  table.delta.assign(static_cast<std::size_t>(top), 0.0);

  DenseMatrix sub;
  Eigen::SelfAdjointEigenSolver<DenseMatrix> eig;
  for (int k = 1; k <= top; ++k) {
    std::vector<int> combo(static_cast<std::size_t>(k));
    std::iota(combo.begin(), combo.end(), 0);
    sub.resize(k, k);
    double worst = 0.0;
    while (true) {
      for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b) sub(a, b) = gram(combo[a], combo[b]);
      eig.compute(sub, Eigen::EigenvaluesOnly);
      const auto& ev = eig.eigenvalues();  // ascending
      worst = std::max({worst, ev(k - 1) - 1.0, 1.0 - ev(0)});

      int i = k - 1;
      while (i >= 0 && combo[static_cast<std::size_t>(i)] == n - k + i) --i;
      if (i < 0) break;
      ++combo[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < k; ++j)
        combo[static_cast<std::size_t>(j)] = combo[static_cast<std::size_t>(j - 1)] + 1;
    }
    table.delta[static_cast<std::size_t>(k - 1)] = worst;
  }
  return table;
}

CorrelationExtremes measure_correlation_extremes(const MeasurementInstance& inst,
                                                 const SupportSet& causal, int l) {
  const SupportSet& t = inst.x.support;
  if (!t.includes(causal)) {
    throw Error(ErrorCode::CausalNotTrue, "path " + causal.to_string() + " leaves the support");
  }
  const auto n = static_cast<Index>(inst.phi.cols());
  const SupportSet off = SupportSet::universe(n).minus(t);
  if (l < 1 || static_cast<std::size_t>(l) > off.size()) {
    throw Error(ErrorCode::InvalidArgument, "l must lie between 1 and N - K");
  }

  const DenseVector r = residual(inst.phi, inst.y, causal);
  const DenseVector cr = (inst.phi.transpose() * r).cwiseAbs();
  const DenseVector cy = (inst.phi.transpose() * inst.y).cwiseAbs();

  CorrelationExtremes out;
  const SupportSet rest = t.minus(causal);
  if (!rest.empty()) {
    out.lambda = std::numeric_limits<double>::infinity();
    for (Index j : rest) out.lambda = std::min(out.lambda, cr(j));
  }
  for (Index j : off) out.gamma = std::max(out.gamma, cr(j));
  out.beta = out.lambda;
  out.alpha = out.gamma;
  for (Index j : t) out.rho = std::max(out.rho, cy(j));

  std::vector<double> offy;
  offy.reserve(off.size());
  for (Index j : off) offy.push_back(cy(j));
  std::nth_element(offy.begin(), offy.begin() + (l - 1), offy.end(), std::greater<>());
  out.eta = offy[static_cast<std::size_t>(l - 1)];
  return out;
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::holds: return "holds";
    case Verdict::violated: return "violated";
    case Verdict::satisfied: return "satisfied";
    case Verdict::unsatisfied: return "unsatisfied";
    case Verdict::value: return "value";
    case Verdict::not_applicable: return "not-applicable";
  }
  return "unknown";
}

const BoundCheck& BoundDiagnostics::get(std::string_view item) const {
  for (const auto& c : checks)
    if (c.item == item) return c;
  throw Error(ErrorCode::InvalidArgument, "no bound named " + std::string(item));
}

namespace {

BoundCheck judge(std::string item, double measured, std::optional<double> bound, bool lower) {
  BoundCheck c{std::move(item), measured, bound, lower, Verdict::not_applicable};
  if (bound) {
    const bool ok = lower ? measured >= *bound - kVerdictSlack : measured <= *bound + kVerdictSlack;
    c.verdict = ok ? Verdict::holds : Verdict::violated;
  }
  return c;
}

}  // namespace

BoundDiagnostics evaluate_bounds(const RicTable& ric, const MeasurementInstance& inst,
                                 const SupportSet& causal, int l) {
  BoundDiagnostics out;
  out.measured = measure_correlation_extremes(inst, causal, l);
  const auto& e = out.measured;

  const SupportSet& t = inst.x.support;
  const int k = static_cast<int>(t.size());
  const int m = static_cast<int>(inst.phi.rows());
  const DenseVector x = inst.x.dense();
  double x_rest = 0.0;
  for (Index j : t.minus(causal)) x_rest += x(j) * x(j);
  x_rest = std::sqrt(x_rest);
  const double x_t = x.norm();
  const double v = inst.v.norm();
  const bool noiseless = v == 0.0;

  const double dk = ric.require(k);
  const double dk1 = ric.require(k + 1);
  const double dl = ric.require(l);
  const double dlk = ric.require(l + k);
  const std::optional<double> dm = ric.at(m);
  const double gap = 1.0 - dk;

  std::optional<double> b;
  if (noiseless && dm && gap > 0) b = (1.0 - dk - *dm) / gap * x_rest;
  out.checks.push_back(judge("lambda_lower", e.lambda, b, true));

  b.reset();
  if (noiseless && gap > 0) b = dk1 / gap * x_rest;
  out.checks.push_back(judge("gamma_upper", e.gamma, b, false));

  b.reset();
  if (k > 0) b = (gap * x_t - std::sqrt(1.0 + dk) * v) / std::sqrt(static_cast<double>(k));
  out.checks.push_back(judge("rho_lower", e.rho, b, true));

  b = (dlk * x_t + std::sqrt(1.0 + dl) * v) / std::sqrt(static_cast<double>(l));
  out.checks.push_back(judge("eta_upper", e.eta, b, false));

  b.reset();
  if (dm && gap > 0) b = (1.0 - *dm - dk1 * dk / gap) * x_rest - std::sqrt(1.0 + *dm) * v;
  out.checks.push_back(judge("beta_lower", e.beta, b, true));

  b.reset();
  if (dm && gap > 0) b = (dk1 + dk1 * dk / gap) * x_rest + std::sqrt(1.0 + *dm) * v;
  out.checks.push_back(judge("alpha_upper", e.alpha, b, false));
  return out;
}

RecoveryConditions check_recovery_conditions(const RicTable& ric, int m, int k, int l,
                                             double min_abs_x, double noise_norm) {
  if (m < 1 || k < 1 || l < 1) throw Error(ErrorCode::InvalidArgument, "m, k and l must be positive");
  if (min_abs_x < 0 || noise_norm < 0) {
    throw Error(ErrorCode::InvalidArgument, "magnitudes must be nonnegative");
  }
  RecoveryConditions c;
  c.min_abs_x = min_abs_x;
  c.noise_norm = noise_norm;
  c.q_order = std::max(m, l + k);

  const double dk = ric.require(k);
  const double dk1 = ric.require(k + 1);
  const double d2k = ric.require(2 * k);
  const double dlk = ric.require(l + k);
  c.delta_lk = dlk;
  c.delta_m = ric.at(m);
  c.delta_q = ric.at(c.q_order);

  const double sl = std::sqrt(static_cast<double>(l));
  const double sk = std::sqrt(static_cast<double>(k));
  const double first_step = sl / (sl + sk);
  c.first_step_threshold = first_step;
  c.gomp_first_step = dlk < first_step;
  if (c.delta_m) c.tree_noiseless = *c.delta_m < 1.0 / 3.0;
  c.tmp_threshold = k < 4 * l ? 1.0 / 3.0 : first_step;
  if (c.delta_q) c.tmp_noiseless = *c.delta_q < c.tmp_threshold;

  const double gap = 1.0 - dk;
  if (gap > 0) {
    if (1.0 - 3.0 * d2k > 0) c.mu = 2.0 * gap / (1.0 - 3.0 * d2k);
    if (c.delta_m) {
      const double den = 1.0 - dk - dk1 - *c.delta_m;
      if (den > 0) c.omega = 2.0 * gap * std::sqrt(1.0 + *c.delta_m) / den;
    }
    const double den = sl * gap - sk * dlk;
    if (den > 0) c.nu = (sk + sl) * std::sqrt(1.0 + dlk) / den;
  }
  if (c.mu && c.omega && c.nu) c.gamma = std::max({*c.nu, *c.mu, *c.omega});
  if (c.gamma && gap > 0 && 1.0 - d2k > 0) {
    const double g = *c.gamma;
    c.tau = ((g + 1.0) * gap + 2.0 * g * d2k) / (gap * std::sqrt(1.0 - d2k));
  }
  if (c.gamma) c.noisy_support = min_abs_x > *c.gamma * noise_norm;
  if (c.tau) c.stability_bound = *c.tau * noise_norm;
  return c;
}

std::vector<DiagnosticRow> diagnostic_rows(const BoundDiagnostics& bounds, std::string_view instance) {
  std::vector<DiagnosticRow> rows;
  for (const auto& c : bounds.checks)
    rows.push_back({c.item, std::string(instance), c.measured, c.bound, c.verdict});
  return rows;
}

std::vector<DiagnosticRow> diagnostic_rows(const RecoveryConditions& c, std::string_view instance) {
  std::vector<DiagnosticRow> rows;
  const std::string id(instance);
  auto condition = [&](const char* item, std::optional<double> lhs, std::optional<double> rhs,
                       std::optional<bool> ok) {
    Verdict v = Verdict::not_applicable;
    if (ok) v = *ok ? Verdict::satisfied : Verdict::unsatisfied;
    rows.push_back({item, id, lhs, rhs, v});
  };
  auto constant = [&](const char* item, std::optional<double> value) {
    rows.push_back({item, id, value, std::nullopt, value ? Verdict::value : Verdict::not_applicable});
  };
  condition("gomp_first_step", c.delta_lk, c.first_step_threshold, c.gomp_first_step);
  condition("tree_noiseless", c.delta_m, 1.0 / 3.0, c.tree_noiseless);
  condition("tmp_noiseless", c.delta_q, c.tmp_threshold, c.tmp_noiseless);
  constant("mu", c.mu);
  constant("omega", c.omega);
  constant("nu", c.nu);
  constant("gamma", c.gamma);
  constant("tau", c.tau);
  condition("noisy_support", c.min_abs_x,
            c.gamma ? std::optional<double>(*c.gamma * c.noise_norm) : std::nullopt, c.noisy_support);
  return rows;
}

void write_diagnostics_csv(std::ostream& os, const std::vector<DiagnosticRow>& rows) {
  const auto old_precision = os.precision(10);
  auto field = [&](std::optional<double> v) {
    if (v) os << *v; else os << "na";
  };
  os << "item,instance,measured,bound,verdict\n";
  for (const auto& r : rows) {
    os << r.item << ',' << r.instance << ',';
    field(r.measured);
    os << ',';
    field(r.bound);
    os << ',' << to_string(r.verdict) << '\n';
  }
  os.precision(old_precision);
}

}  // namespace treemp
