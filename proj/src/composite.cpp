#include "stratkit/composite.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "stratkit/csv.hpp"
#include "stratkit/errors.hpp"
#include "stratkit/normal.hpp"

namespace stratkit {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Mean of the standard normal truncated to (lo, hi].
double truncated_mean(double lo, double hi) {
  const double phi_lo = std::isinf(lo) ? 0.0 : normal::pdf(lo);
  const double phi_hi = std::isinf(hi) ? 0.0 : normal::pdf(hi);
  const double mass = normal::cdf(hi) - normal::cdf(lo);
  if (mass <= 0.0) throw DataError("truncated_mean: empty interval");
  return (phi_lo - phi_hi) / mass;
}
}  // namespace

bool CensusBlockFrame::has_difficulty() const {
  if (difficulty.size() != size()) return false;
  return std::none_of(difficulty.begin(), difficulty.end(),
                      [](double d) { return std::isnan(d); });
}

WeightTable derive_weights(const PolychoricMatrix& matrix,
                           const ThresholdSet& thresholds) {
  const Eigen::Index n = matrix.values.rows();
  if (static_cast<std::size_t>(n) != thresholds.vars.size()) {
    throw DataError("derive_weights: matrix and thresholds disagree on size");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(matrix.values);
  if (solver.info() != Eigen::Success) {
    throw DataError("derive_weights: eigendecomposition failed");
  }
  // Eigen sorts ascending; the leading pair sits at the end.
  const double lambda1 = solver.eigenvalues()(n - 1);
  const double lambda2 = n >= 2 ? solver.eigenvalues()(n - 2) : -kNaN;
  if (!(lambda1 - lambda2 > 1e-12)) {
    throw DataError("derive_weights: first component ambiguous (lambda1 - lambda2 <= 1e-12)");
  }
  Eigen::VectorXd e = solver.eigenvectors().col(n - 1);

  WeightTable table;
  table.variable_names = matrix.variable_names;
  table.lambda1 = lambda1;
  // Sign normalisation: eigenvectors are sign-ambiguous, make the loading sum
  // positive so repeated runs agree. The data-driven orientation of the final
  // index is handled separately by orient_difficulty.
  double sum = e.sum();
  if (sum == 0.0) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (e(i) != 0.0) {
        sum = e(i);
        break;
      }
    }
  }
  if (sum < 0.0) {
    e = -e;
    table.sign_flipped = true;
  }

  for (Eigen::Index a = 0; a < n; ++a) {
    const VariableThresholds& t = thresholds.vars[static_cast<std::size_t>(a)];
    const int eff = t.effective_count();
    std::vector<double> eff_scores(static_cast<std::size_t>(eff));
    for (int k = 0; k < eff; ++k) {
      eff_scores[static_cast<std::size_t>(k)] =
          truncated_mean(t.lower(k), t.upper(k));
    }
    std::vector<double> gamma(t.effective_category.size());
    for (std::size_t b = 0; b < gamma.size(); ++b) {
      gamma[b] = e(a) * eff_scores[static_cast<std::size_t>(
                     t.effective_category[b])];
    }
    table.loading.push_back(e(a));
    table.weights.push_back(std::move(gamma));
  }

  // Post-construction check: weights monotone in category order (direction
  // given by the loading sign), over effective categories.
  for (Eigen::Index a = 0; a < n; ++a) {
    const auto& t = thresholds.vars[static_cast<std::size_t>(a)];
    const auto& gamma = table.weights[static_cast<std::size_t>(a)];
    const double dir = table.loading[static_cast<std::size_t>(a)] >= 0.0 ? 1.0 : -1.0;
    for (std::size_t b = 0; b + 1 < gamma.size(); ++b) {
      if (t.effective_category[b] == t.effective_category[b + 1]) continue;
      if (dir * (gamma[b + 1] - gamma[b]) < -1e-9) {
        table.monotonicity_violations.push_back(
            "variable '" + table.variable_names[static_cast<std::size_t>(a)] +
            "': weight of category " + std::to_string(b + 2) +
            " breaks monotone order");
      }
    }
  }
  return table;
}

std::vector<double> compute_index(const OrdinalDataset& dataset,
                                  const WeightTable& weights, Exec exec) {
  const std::size_t n_vars = dataset.schema.variable_count();
  if (weights.weights.size() != n_vars) {
    throw DataError("compute_index: weight table does not match schema");
  }
  for (std::size_t a = 0; a < n_vars; ++a) {
    if (weights.weights[a].size() !=
        dataset.schema.variables[a].categories.size()) {
      throw DataError("compute_index: category count mismatch for variable '" +
                      dataset.schema.variables[a].name + "'");
    }
    if (weights.variable_names[a] != dataset.schema.variables[a].name) {
      throw DataError("compute_index: variable order mismatch at '" +
                      weights.variable_names[a] + "'");
    }
  }
  const std::size_t n = dataset.record_count();
  std::vector<double> out(n, 0.0);

  const auto score_one = [&](std::size_t r) {
    double s = 0.0;
    for (std::size_t a = 0; a < n_vars; ++a) {
      s += weights.weights[a][static_cast<std::size_t>(dataset.code(r, a) - 1)];
    }
    out[r] = s;
  };

  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (std::int64_t r = 0; r < static_cast<std::int64_t>(n); ++r) {
      score_one(static_cast<std::size_t>(r));
    }
  } else {
    for (std::size_t r = 0; r < n; ++r) score_one(r);
  }
  return out;
}

Normalized minmax_normalize(const std::vector<double>& values,
                            const std::vector<double>& reference) {
  if (reference.empty()) throw DataError("minmax_normalize: empty reference");
  const auto [mn_it, mx_it] =
      std::minmax_element(reference.begin(), reference.end());
  Normalized out;
  out.bound_min = *mn_it;
  out.bound_max = *mx_it;
  out.values.reserve(values.size());
  if (out.bound_max == out.bound_min) {
    out.degenerate = true;
    out.values.assign(values.size(), 50.0);
    return out;
  }
  const double span = out.bound_max - out.bound_min;
  for (double v : values) {
    out.values.push_back(100.0 * (v - out.bound_min) / span);
  }
  return out;
}

Projection project_normalized(double raw, double bound_min, double bound_max) {
  Projection p;
  if (bound_max == bound_min) {
    p.value = 50.0;
    return p;
  }
  p.value = 100.0 * (raw - bound_min) / (bound_max - bound_min);
  if (p.value < 0.0) {
    p.value = 0.0;
    p.clamped = true;
  } else if (p.value > 100.0) {
    p.value = 100.0;
    p.clamped = true;
  }
  return p;
}

IndexVector build_index(const OrdinalDataset& dataset,
                        const WeightTable& weights, Exec exec) {
  IndexVector index;
  index.unit_ids = dataset.unit_ids;
  index.raw = compute_index(dataset, weights, exec);
  Normalized norm = minmax_normalize(index.raw, index.raw);
  index.normalized = std::move(norm.values);
  index.bound_min = norm.bound_min;
  index.bound_max = norm.bound_max;
  index.degenerate = norm.degenerate;
  return index;
}

void orient_difficulty(IndexVector& index, const OrdinalDataset& dataset) {
  if (index.raw.size() != dataset.record_count()) {
    throw DataError("orient_difficulty: index does not match dataset");
  }
  const std::size_t n = dataset.record_count();
  const std::size_t n_vars = dataset.schema.variable_count();
  // Reversed-code difficulty ranking: higher D = more difficult under the
  // schema's declared category direction.
  std::vector<double> d(n, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    double s = 0.0;
    for (std::size_t a = 0; a < n_vars; ++a) {
      const auto& var = dataset.schema.variables[a];
      const int c = dataset.code(r, a);
      s += var.direction == Direction::HardToEasy
               ? static_cast<double>(var.category_count() + 1 - c)
               : static_cast<double>(c);
    }
    d[r] = s;
  }
  const double d_mean = std::accumulate(d.begin(), d.end(), 0.0) /
                        static_cast<double>(n);
  const double i_mean =
      std::accumulate(index.raw.begin(), index.raw.end(), 0.0) /
      static_cast<double>(n);
  double cov = 0.0, var_d = 0.0, var_i = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    cov += (d[r] - d_mean) * (index.raw[r] - i_mean);
    var_d += (d[r] - d_mean) * (d[r] - d_mean);
    var_i += (index.raw[r] - i_mean) * (index.raw[r] - i_mean);
  }
  if (var_d == 0.0) {
    throw DataError(
        "orient_difficulty: difficulty ranking has zero variance, orientation undecidable");
  }
  if (var_i == 0.0) return;  // constant index, nothing to orient
  if (cov < 0.0) {
    for (double& v : index.normalized) v = 100.0 - v;
    index.orientation_flipped = !index.orientation_flipped;
  }
}

BlockAggregate aggregate_blocks(
    const IndexVector& households, const std::vector<std::string>& block_of,
    const std::vector<std::pair<std::string, std::string>>& block_villages) {
  if (block_of.size() != households.normalized.size()) {
    throw DataError("aggregate_blocks: household/block map size mismatch");
  }
  if (households.normalized.empty()) {
    throw DataError("aggregate_blocks: no households");
  }
  for (const auto& b : block_of) {
    if (b.empty()) {
      throw DataError("aggregate_blocks: household with empty block id");
    }
  }
  std::map<std::string, std::pair<double, int>> acc;  // sum, count
  for (std::size_t r = 0; r < block_of.size(); ++r) {
    auto& slot = acc[block_of[r]];
    slot.first += households.normalized[r];
    slot.second += 1;
  }
  std::map<std::string, std::string> villages(block_villages.begin(),
                                              block_villages.end());
  BlockAggregate out;
  for (const auto& [block, sum_count] : acc) {
    out.frame.block_ids.push_back(block);
    auto v = villages.find(block);
    out.frame.village_ids.push_back(v == villages.end() ? std::string()
                                                        : v->second);
    out.frame.wealth.push_back(sum_count.first /
                               static_cast<double>(sum_count.second));
    out.frame.households.push_back(sum_count.second);
    out.frame.difficulty.push_back(kNaN);
  }
  for (const auto& [block, village] : villages) {
    if (!acc.count(block)) out.empty_blocks.push_back(block);
  }
  std::sort(out.empty_blocks.begin(), out.empty_blocks.end());
  return out;
}

GroupedMeans summarize_by_group(const std::vector<double>& values,
                                const std::vector<std::string>& keys) {
  if (values.size() != keys.size()) {
    throw DataError("summarize_by_group: size mismatch");
  }
  std::map<std::string, std::pair<double, std::int64_t>> acc;
  double total = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto& slot = acc[keys[i]];
    slot.first += values[i];
    slot.second += 1;
    total += values[i];
  }
  GroupedMeans out;
  for (const auto& [key, sum_count] : acc) {
    out.groups.push_back(
        {key, sum_count.first / static_cast<double>(sum_count.second),
         sum_count.second});
  }
  out.overall_mean =
      values.empty() ? 0.0 : total / static_cast<double>(values.size());
  return out;
}

void write_weights_csv(const WeightTable& weights, const std::string& path) {
  std::size_t max_b = 0;
  for (const auto& g : weights.weights) max_b = std::max(max_b, g.size());
  csv::Table table;
  table.header.push_back("variable");
  for (std::size_t b = 0; b < max_b; ++b) {
    table.header.push_back("score" + std::to_string(b + 1));
  }
  for (std::size_t a = 0; a < weights.weights.size(); ++a) {
    std::vector<std::string> row;
    row.push_back(weights.variable_names[a]);
    for (std::size_t b = 0; b < max_b; ++b) {
      row.push_back(b < weights.weights[a].size()
                        ? csv::format_double(weights.weights[a][b])
                        : std::string());
    }
    table.rows.push_back(std::move(row));
  }
  csv::write_file(path, table);
}

WeightTable load_weights_csv(const std::string& path) {
  const csv::Table table = csv::read_file(path);
  if (table.header.empty() || table.header[0] != "variable") {
    throw DataError(path + ": weight CSV needs a 'variable' column");
  }
  WeightTable out;
  for (const auto& row : table.rows) {
    out.variable_names.push_back(row[0]);
    std::vector<double> gamma;
    bool in_blanks = false;
    for (std::size_t b = 1; b < row.size(); ++b) {
      if (row[b].empty()) {
        in_blanks = true;  // blanks mark absent trailing categories
        continue;
      }
      if (in_blanks) {
        throw DataError(path + ": variable '" + row[0] +
                        "' has a weight after a blank cell");
      }
      gamma.push_back(csv::parse_double(row[b], path));
    }
    if (gamma.size() < 2) {
      throw DataError(path + ": variable '" + row[0] +
                      "' needs at least 2 weights");
    }
    out.weights.push_back(std::move(gamma));
    out.loading.push_back(kNaN);  // unknown for externally supplied tables
  }
  return out;
}

void write_index_csv(const IndexVector& index, const std::string& path) {
  csv::Table table;
  table.header = {"unit_id", "raw", "normalized"};
  for (std::size_t i = 0; i < index.unit_ids.size(); ++i) {
    table.rows.push_back({index.unit_ids[i], csv::format_double(index.raw[i]),
                          csv::format_double(index.normalized[i])});
  }
  csv::write_file(path, table);
}

void write_frame_csv(const CensusBlockFrame& frame, const std::string& path) {
  csv::Table table;
  table.header = {"block_id", "village_id", "wealth_concentration",
                  "households", "difficulty"};
  for (std::size_t i = 0; i < frame.size(); ++i) {
    table.rows.push_back(
        {frame.block_ids[i], frame.village_ids[i],
         csv::format_double(frame.wealth[i]),
         std::to_string(frame.households[i]),
         std::isnan(frame.difficulty[i])
             ? std::string()
             : csv::format_double(frame.difficulty[i])});
  }
  csv::write_file(path, table);
}

CensusBlockFrame load_frame_csv(const std::string& path) {
  const csv::Table table = csv::read_file(path);
  const std::vector<std::string> expected = {
      "block_id", "village_id", "wealth_concentration", "households",
      "difficulty"};
  if (table.header != expected) {
    throw DataError(path + ": unexpected frame CSV header");
  }
  CensusBlockFrame frame;
  std::size_t row_no = 0;
  for (const auto& row : table.rows) {
    ++row_no;
    const std::string ctx = path + " row " + std::to_string(row_no);
    if (row[0].empty()) throw DataError(ctx + ": empty block id");
    frame.block_ids.push_back(row[0]);
    frame.village_ids.push_back(row[1]);
    const double wealth = csv::parse_double(row[2], ctx);
    if (wealth < 0.0 || wealth > 100.0) {
      throw DataError(ctx + ": wealth_concentration outside [0,100]");
    }
    frame.wealth.push_back(wealth);
    const std::int64_t hh = csv::parse_int(row[3], ctx);
    if (hh < 1) throw DataError(ctx + ": households must be >= 1");
    frame.households.push_back(static_cast<int>(hh));
    if (row[4].empty()) {
      frame.difficulty.push_back(kNaN);
    } else {
      const double difficulty = csv::parse_double(row[4], ctx);
      if (difficulty < 0.0 || difficulty > 100.0) {
        throw DataError(ctx + ": difficulty outside [0,100]");
      }
      frame.difficulty.push_back(difficulty);
    }
  }
  return frame;
}

}  // namespace stratkit
