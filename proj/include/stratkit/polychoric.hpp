#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stratkit/exec.hpp"
#include "stratkit/schema.hpp"

namespace stratkit {

/// Marginal thresholds of one ordinal variable on the latent standard-normal
/// scale. Categories observed empty are collapsed into a neighbour; the map
/// keeps original category indices addressable afterwards.
struct VariableThresholds {
  std::vector<double> cuts;  // interior thresholds, strictly increasing
  /// effective_category[b] = 0-based effective index of original category b.
  std::vector<int> effective_category;

  int effective_count() const { return static_cast<int>(cuts.size()) + 1; }
  bool collapsed() const {
    return effective_count() < static_cast<int>(effective_category.size());
  }
  /// Threshold interval of effective category e: (lower(e), upper(e)],
  /// with -inf / +inf at the ends.
  double lower(int e) const;
  double upper(int e) const;
};

struct ThresholdSet {
  std::vector<VariableThresholds> vars;
};

struct PolychoricMatrix {
  Eigen::MatrixXd values;  // symmetric, unit diagonal, entries in [-1, 1]
  bool psd_repaired = false;
  std::vector<std::string> variable_names;
};

struct PolychoricResult {
  PolychoricMatrix matrix;
  ThresholdSet thresholds;
};

/// Step 1: thresholds from marginal cumulative proportions,
/// alpha_k = Phi^-1(cumulative share through category k). Empty categories
/// collapse into the nearest nonempty category below (above if none).
/// Throws DataError when all mass sits in one category.
VariableThresholds thresholds_from_counts(const std::vector<std::int64_t>& counts);
VariableThresholds estimate_thresholds(const OrdinalDataset& dataset,
                                       std::size_t variable);

/// Pairwise contingency table over effective categories.
struct ContingencyTable {
  int rows = 0, cols = 0;
  std::vector<std::int64_t> counts;  // row-major

  std::int64_t& at(int r, int c) { return counts[static_cast<std::size_t>(r * cols + c)]; }
  std::int64_t at(int r, int c) const { return counts[static_cast<std::size_t>(r * cols + c)]; }
  std::int64_t total() const;
  ContingencyTable transposed() const;
};

ContingencyTable cross_tabulate(const OrdinalDataset& dataset, std::size_t var_a,
                                std::size_t var_b,
                                const VariableThresholds& ta,
                                const VariableThresholds& tb);

/// Step 2: ML estimate of the latent correlation for one pair, holding the
/// thresholds fixed. Bounded search over [-0.999, 0.999], tolerance 1e-6 in
/// rho; cell probabilities floored at 1e-12.
double estimate_rho(const ContingencyTable& table, const VariableThresholds& ta,
                    const VariableThresholds& tb);

/// Pairwise log-likelihood at a given rho (exposed for tests).
double pair_log_likelihood(const ContingencyTable& table,
                           const VariableThresholds& ta,
                           const VariableThresholds& tb, double rho);

/// Eigenvalue clipping + diagonal renormalisation. PSD input comes back
/// bit-identical with the flag unset.
PolychoricMatrix psd_repair(const Eigen::MatrixXd& matrix);

/// Full matrix: thresholds per variable, rho per pair (pairs are independent
/// and run under the chosen execution policy), then PSD repair.
PolychoricResult polychoric_matrix(const OrdinalDataset& dataset,
                                   Exec exec = Exec::Parallel);

void write_correlation_csv(const PolychoricMatrix& matrix,
                           const std::string& path);
/// Reads a correlation CSV (lower triangle or full); result is symmetrized.
PolychoricMatrix load_correlation_csv(const std::string& path);
void write_thresholds_csv(const ThresholdSet& thresholds,
                          const std::vector<std::string>& variable_names,
                          const std::string& path);

}  // namespace stratkit
