#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dunkl/models.hpp"
#include "dunkl/scheme.hpp"

namespace dunkl {

/// Sample mean with its Monte Carlo standard error.
struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
};

/// Mean and standard error, reduced in index order.
Estimate estimate_mean(std::span<const double> samples);

struct LogLogFit {
  double slope = 0.0;      // negated, so err ~ C n^{-slope}
  double intercept = 0.0;  // ln C
  double slope_se = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

/// Least squares of ln(err) on ln(n), weighted by (err/se)^2 when every se is
/// positive and unweighted otherwise.
LogLogFit fit_loglog(std::span<const double> n, std::span<const double> err, std::span<const double> se = {});

struct StudyConfig {
  std::vector<std::int64_t> n_values;
  std::int64_t n_ref = 4096;
  std::int64_t paths = 1000;
  double p = 2.0;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct ConvergenceReport {
  std::string label;
  std::string variant;
  double p = 0.0;
  std::vector<std::int64_t> n_values;
  std::vector<double> errors;
  std::vector<double> std_errors;
  LogLogFit fit;
};

/// Strong L^p-sup error of the scheme at each n against the same scheme at n_ref,
/// all resolutions driven by one Brownian lattice per path. `scheme.n_steps` is ignored.
ConvergenceReport strong_error_study(const ModelSpec& model, const SchemeConfig& scheme, const StudyConfig& study);

/// CSV with header n,p,error,std_error.
void write_report_csv(std::ostream& os, const ConvergenceReport& report);
/// {"slope", "slope_ci", "intercept", ...}
nlohmann::json report_summary(const ConvergenceReport& report);

/// E|X_a(T) - X_b(T)| for two scheme configurations on shared increments.
Estimate terminal_discrepancy(const ModelSpec& model, const SchemeConfig& a, const SchemeConfig& b,
                              std::int64_t paths, std::uint64_t seed, int threads);

/// Change-of-measure density Z(T) of a path of the k = 1/2 process; nu aligned to positive roots.
/// The time integral uses the left-endpoint rule on the path's own grid.
double girsanov_weight(const Path& path, const RootSystem& rs, std::span<const double> nu);

using PathFunctional = std::function<double(const Path&)>;

struct GirsanovConfig {
  RootSystem rs;  // geometry; multiplicities are replaced by nu + 1/2 and 1/2
  Vector nu;
  Vector x0;
  double horizon = 1.0;
  std::int64_t n_steps = 1024;
  std::int64_t paths = 1000;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct WeightedExpectation {
  Estimate direct;    // g over X^nu paths
  Estimate weighted;  // g * Z(T) over X^0 paths
  Estimate weight;    // Z(T) alone
  double combined_se() const;
};

WeightedExpectation weighted_expectation(const PathFunctional& g, const GirsanovConfig& config);

struct MomentRow {
  std::string kind;  // "sup" or "inverse"
  double q = 0.0;
  int root = -1;     // positive root index for "inverse"
  Estimate estimate;
  bool stable = true;              // top decile carries at most half the mean
  bool in_terminal_window = true;  // q <= nu(a)
  bool in_sup_window = true;       // 2 <= q <= min nu / 3
};

/// E[sup_l |X(t_l)|^q] and E[<a, X(T)>^{-q}] per positive root, on semi-implicit paths.
std::vector<MomentRow> moment_scan(const ModelSpec& model, std::span<const double> q_list, std::int64_t paths,
                                   std::int64_t n_steps, double horizon, std::uint64_t seed, int threads);

void write_moments_csv(std::ostream& os, const std::vector<MomentRow>& rows);

}  // namespace dunkl
