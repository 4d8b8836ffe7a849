#include "stratkit/polychoric.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>

#include "stratkit/csv.hpp"
#include "stratkit/errors.hpp"
#include "stratkit/normal.hpp"

namespace stratkit {

namespace {
constexpr double kRhoBound = 0.999;
constexpr double kRhoTol = 1e-6;
constexpr double kCellFloor = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

double VariableThresholds::lower(int e) const {
  return e == 0 ? -kInf : cuts[static_cast<std::size_t>(e - 1)];
}

double VariableThresholds::upper(int e) const {
  return e == static_cast<int>(cuts.size()) ? kInf
                                            : cuts[static_cast<std::size_t>(e)];
}

VariableThresholds thresholds_from_counts(
    const std::vector<std::int64_t>& counts) {
  const std::int64_t total =
      std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
  if (total <= 0) throw DataError("thresholds: no observations");

  // Collapse empty categories: each original category points at the nearest
  // nonempty one below it, or above it when nothing below is populated.
  VariableThresholds t;
  t.effective_category.assign(counts.size(), -1);
  std::vector<std::int64_t> eff_counts;
  int last_eff = -1;
  for (std::size_t b = 0; b < counts.size(); ++b) {
    if (counts[b] > 0) {
      eff_counts.push_back(counts[b]);
      ++last_eff;
    }
    t.effective_category[b] = last_eff;  // -1 while leading categories empty
  }
  for (std::size_t b = 0; b < counts.size(); ++b) {
    if (t.effective_category[b] < 0) t.effective_category[b] = 0;
  }
  if (eff_counts.size() < 2) {
    throw DataError("thresholds: all mass in one category");
  }

  std::int64_t cum = 0;
  for (std::size_t e = 0; e + 1 < eff_counts.size(); ++e) {
    cum += eff_counts[e];
    t.cuts.push_back(normal::quantile(static_cast<double>(cum) /
                                      static_cast<double>(total)));
  }
  return t;
}

VariableThresholds estimate_thresholds(const OrdinalDataset& dataset,
                                       std::size_t variable) {
  const int b_count = dataset.schema.variables[variable].category_count();
  std::vector<std::int64_t> counts(static_cast<std::size_t>(b_count), 0);
  for (std::size_t r = 0; r < dataset.record_count(); ++r) {
    ++counts[static_cast<std::size_t>(dataset.code(r, variable) - 1)];
  }
  try {
    return thresholds_from_counts(counts);
  } catch (const DataError& e) {
    throw DataError("variable '" + dataset.schema.variables[variable].name +
                    "': " + e.what());
  }
}

std::int64_t ContingencyTable::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

ContingencyTable ContingencyTable::transposed() const {
  ContingencyTable t;
  t.rows = cols;
  t.cols = rows;
  t.counts.assign(counts.size(), 0);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) t.at(c, r) = at(r, c);
  }
  return t;
}

ContingencyTable cross_tabulate(const OrdinalDataset& dataset,
                                std::size_t var_a, std::size_t var_b,
                                const VariableThresholds& ta,
                                const VariableThresholds& tb) {
  ContingencyTable table;
  table.rows = ta.effective_count();
  table.cols = tb.effective_count();
  table.counts.assign(static_cast<std::size_t>(table.rows * table.cols), 0);
  for (std::size_t r = 0; r < dataset.record_count(); ++r) {
    const int ea = ta.effective_category[static_cast<std::size_t>(
        dataset.code(r, var_a) - 1)];
    const int eb = tb.effective_category[static_cast<std::size_t>(
        dataset.code(r, var_b) - 1)];
    ++table.at(ea, eb);
  }
  return table;
}

double pair_log_likelihood(const ContingencyTable& table,
                           const VariableThresholds& ta,
                           const VariableThresholds& tb, double rho) {
  // CDF grid over the threshold lattice, then rectangle differences.
  const int ra = table.rows, rb = table.cols;
  std::vector<double> grid(static_cast<std::size_t>((ra + 1) * (rb + 1)));
  for (int i = 0; i <= ra; ++i) {
    const double x = i == 0 ? -kInf : ta.upper(i - 1);
    for (int j = 0; j <= rb; ++j) {
      const double y = j == 0 ? -kInf : tb.upper(j - 1);
      grid[static_cast<std::size_t>(i * (rb + 1) + j)] =
          normal::bvn_cdf(x, y, rho);
    }
  }
  double ll = 0.0;
  for (int i = 0; i < ra; ++i) {
    for (int j = 0; j < rb; ++j) {
      const std::int64_t n = table.at(i, j);
      if (n == 0) continue;
      const auto g = [&](int a, int b) {
        return grid[static_cast<std::size_t>(a * (rb + 1) + b)];
      };
      const double p =
          g(i + 1, j + 1) - g(i, j + 1) - g(i + 1, j) + g(i, j);
      ll += static_cast<double>(n) * std::log(std::max(p, kCellFloor));
    }
  }
  return ll;
}

namespace {

// Brent's bounded scalar minimizer (golden section + parabolic steps).
double brent_minimize(const std::function<double(double)>& f, double lo,
                      double hi, double xtol) {
  constexpr double kGolden = 0.3819660112501051;
  double a = lo, b = hi;
  double x = a + kGolden * (b - a);
  double w = x, v = x;
  double fx = f(x), fw = fx, fv = fx;
  double d = 0.0, e = 0.0;
  for (int iter = 0; iter < 200; ++iter) {
    const double m = 0.5 * (a + b);
    const double tol1 = xtol * std::fabs(x) + 1e-12;
    const double tol2 = 2.0 * tol1;
    if (std::fabs(x - m) <= tol2 - 0.5 * (b - a)) break;
    bool golden = true;
    if (std::fabs(e) > tol1) {
      // Parabolic fit through x, v, w.
      const double r = (x - w) * (fx - fv);
      double q = (x - v) * (fx - fw);
      double p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::fabs(q);
      const double e_old = e;
      e = d;
      if (std::fabs(p) < std::fabs(0.5 * q * e_old) && p > q * (a - x) &&
          p < q * (b - x)) {
        d = p / q;
        const double u = x + d;
        if (u - a < tol2 || b - u < tol2) d = x < m ? tol1 : -tol1;
        golden = false;
      }
    }
    if (golden) {
      e = (x < m ? b : a) - x;
      d = kGolden * e;
    }
    const double u =
        std::fabs(d) >= tol1 ? x + d : x + (d > 0.0 ? tol1 : -tol1);
    const double fu = f(u);
    if (fu <= fx) {
      if (u < x) b = x; else a = x;
      v = w; fv = fw;
      w = x; fw = fx;
      x = u; fx = fu;
    } else {
      if (u < x) a = u; else b = u;
      if (fu <= fw || w == x) {
        v = w; fv = fw;
        w = u; fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u; fv = fu;
      }
    }
  }
  return x;
}

}  // namespace

double estimate_rho(const ContingencyTable& table, const VariableThresholds& ta,
                    const VariableThresholds& tb) {
  if (table.rows != ta.effective_count() || table.cols != tb.effective_count()) {
    throw DataError("estimate_rho: table dimensions do not match thresholds");
  }
  if (table.rows < 2 || table.cols < 2) {
    throw DataError("estimate_rho: degenerate table (a variable has one category)");
  }
  if (table.total() < 1) throw DataError("estimate_rho: empty table");

  const auto neg_ll = [&](double rho) {
    return -pair_log_likelihood(table, ta, tb, rho);
  };
  double rho = brent_minimize(neg_ll, -kRhoBound, kRhoBound, kRhoTol);
  // The bounded minimizer cannot sit exactly on a bound; snap when the bound
  // is strictly better (perfect association tables).
  if (neg_ll(kRhoBound) < neg_ll(rho)) rho = kRhoBound;
  if (neg_ll(-kRhoBound) < neg_ll(rho)) rho = -kRhoBound;
  return rho;
}

PolychoricMatrix psd_repair(const Eigen::MatrixXd& matrix) {
  if (matrix.rows() != matrix.cols()) throw DataError("psd_repair: not square");
  const Eigen::Index n = matrix.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::fabs(matrix(i, i) - 1.0) > 1e-12) {
      throw DataError("psd_repair: diagonal must be 1");
    }
    for (Eigen::Index j = 0; j < i; ++j) {
      if (std::fabs(matrix(i, j) - matrix(j, i)) > 1e-12) {
        throw DataError("psd_repair: matrix must be symmetric");
      }
    }
  }
  PolychoricMatrix out;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(matrix);
  if (solver.info() != Eigen::Success) {
    throw DataError("psd_repair: eigendecomposition failed");
  }
  if (solver.eigenvalues().minCoeff() >= 0.0) {
    out.values = matrix;
    out.psd_repaired = false;
    return out;
  }
  const Eigen::VectorXd clipped = solver.eigenvalues().cwiseMax(0.0);
  Eigen::MatrixXd repaired = solver.eigenvectors() * clipped.asDiagonal() *
                             solver.eigenvectors().transpose();
  Eigen::VectorXd d = repaired.diagonal().cwiseSqrt();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (d(i) <= 0.0) d(i) = 1.0;  // fully zeroed row, keep it inert
  }
  repaired = d.cwiseInverse().asDiagonal() * repaired *
             d.cwiseInverse().asDiagonal();
  repaired = 0.5 * (repaired + repaired.transpose().eval());
  for (Eigen::Index i = 0; i < n; ++i) {
    repaired(i, i) = 1.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      repaired(i, j) = std::clamp(repaired(i, j), -1.0, 1.0);
    }
  }
  out.values = std::move(repaired);
  out.psd_repaired = true;
  return out;
}

PolychoricResult polychoric_matrix(const OrdinalDataset& dataset, Exec exec) {
  const std::size_t n_vars = dataset.schema.variable_count();
  if (n_vars < 2) throw DataError("polychoric: need at least 2 variables");

  PolychoricResult result;
  for (std::size_t a = 0; a < n_vars; ++a) {
    result.thresholds.vars.push_back(estimate_thresholds(dataset, a));
    result.matrix.variable_names.push_back(dataset.schema.variables[a].name);
  }

  struct Pair {
    std::size_t a, b;
  };
  std::vector<Pair> pairs;
  for (std::size_t a = 0; a < n_vars; ++a) {
    for (std::size_t b = a + 1; b < n_vars; ++b) pairs.push_back({a, b});
  }
  std::vector<double> rho(pairs.size(), 0.0);
  std::vector<std::string> failures(pairs.size());

  const auto run_pair = [&](std::size_t p) {
    const auto [a, b] = pairs[p];
    try {
      const ContingencyTable table = cross_tabulate(
          dataset, a, b, result.thresholds.vars[a], result.thresholds.vars[b]);
      rho[p] = estimate_rho(table, result.thresholds.vars[a],
                            result.thresholds.vars[b]);
    } catch (const std::exception& e) {
      failures[p] = "pair (" + dataset.schema.variables[a].name + ", " +
                    dataset.schema.variables[b].name + "): " + e.what();
    }
  };

  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t p = 0; p < static_cast<std::int64_t>(pairs.size()); ++p) {
      run_pair(static_cast<std::size_t>(p));
    }
  } else {
    for (std::size_t p = 0; p < pairs.size(); ++p) run_pair(p);
  }
  for (const auto& f : failures) {
    if (!f.empty()) throw DataError("polychoric: " + f);
  }

  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(
      static_cast<Eigen::Index>(n_vars), static_cast<Eigen::Index>(n_vars));
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    m(static_cast<Eigen::Index>(pairs[p].a),
      static_cast<Eigen::Index>(pairs[p].b)) = rho[p];
    m(static_cast<Eigen::Index>(pairs[p].b),
      static_cast<Eigen::Index>(pairs[p].a)) = rho[p];
  }
  PolychoricMatrix repaired = psd_repair(m);
  result.matrix.values = std::move(repaired.values);
  result.matrix.psd_repaired = repaired.psd_repaired;
  return result;
}

void write_correlation_csv(const PolychoricMatrix& matrix,
                           const std::string& path) {
  // Lower triangle populated, upper left blank: the usual compact layout.
  csv::Table table;
  table.header.push_back("variable");
  for (const auto& name : matrix.variable_names) table.header.push_back(name);
  const Eigen::Index n = matrix.values.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    std::vector<std::string> row;
    row.push_back(matrix.variable_names[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < n; ++j) {
      row.push_back(j <= i ? csv::format_double(matrix.values(i, j))
                           : std::string());
    }
    table.rows.push_back(std::move(row));
  }
  csv::write_file(path, table);
}

PolychoricMatrix load_correlation_csv(const std::string& path) {
  const csv::Table table = csv::read_file(path);
  if (table.header.size() < 2 || table.header[0] != "variable") {
    throw DataError(path + ": correlation CSV needs a 'variable' name column");
  }
  PolychoricMatrix out;
  const std::size_t n = table.header.size() - 1;
  if (table.rows.size() != n) {
    throw DataError(path + ": correlation CSV must be square");
  }
  for (std::size_t j = 0; j < n; ++j) {
    out.variable_names.push_back(table.header[j + 1]);
  }
  out.values = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n),
                                         static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (table.rows[i][0] != out.variable_names[i]) {
      throw DataError(path + ": row/column variable order mismatch at '" +
                      table.rows[i][0] + "'");
    }
    for (std::size_t j = 0; j < n; ++j) {
      const std::string& cell = table.rows[i][j + 1];
      if (cell.empty()) continue;
      const double v = csv::parse_double(cell, path);
      out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
      out.values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    if (std::fabs(out.values(ii, ii) - 1.0) > 1e-9) {
      throw DataError(path + ": correlation diagonal must be 1");
    }
    out.values(ii, ii) = 1.0;
  }
  return out;
}

void write_thresholds_csv(const ThresholdSet& thresholds,
                          const std::vector<std::string>& variable_names,
                          const std::string& path) {
  csv::Table table;
  table.header = {"variable", "k", "alpha_k"};
  for (std::size_t a = 0; a < thresholds.vars.size(); ++a) {
    const auto& cuts = thresholds.vars[a].cuts;
    for (std::size_t k = 0; k < cuts.size(); ++k) {
      table.rows.push_back({variable_names[a], std::to_string(k + 1),
                            csv::format_double(cuts[k])});
    }
  }
  csv::write_file(path, table);
}

}  // namespace stratkit
