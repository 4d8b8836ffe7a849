#include "stratkit/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "stratkit/csv.hpp"
#include "stratkit/errors.hpp"

namespace stratkit {

namespace fs = std::filesystem;

std::string to_string(Quadrant q) {
  switch (q) {
    case Quadrant::SmallVarLowCost: return "Q1_small_var_low_cost";
    case Quadrant::BigVarLowCost: return "Q2_big_var_low_cost";
    case Quadrant::BigVarHighCost: return "Q3_big_var_high_cost";
    case Quadrant::SmallVarHighCost: return "Q4_small_var_high_cost";
  }
  return "unknown";
}

std::size_t ScenarioGrid::successful() const {
  return static_cast<std::size_t>(
      std::count_if(scenarios.begin(), scenarios.end(),
                    [](const ScenarioResult& s) { return s.ok; }));
}

namespace {

double order_invariant_mean(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  return std::accumulate(values.begin(), values.end(), 0.0) /
         static_cast<double>(values.size());
}

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2]
                    : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

ScenarioGrid run_grid(const CensusBlockFrame& frame,
                      const GridOptions& options) {
  if (frame.size() == 0) throw DataError("run_grid: empty frame");
  if (!frame.has_difficulty()) {
    throw DataError("run_grid: frame is missing difficulty values");
  }
  if (options.max_wealth_strata < 1 || options.max_difficulty_strata < 1) {
    throw DataError("run_grid: grid bounds must be >= 1");
  }

  ScenarioGrid grid;
  grid.options = options;
  grid.frame_size = frame.size();
  grid.population_mean_difficulty = order_invariant_mean(frame.difficulty);
  if (options.total_n > 0) {
    grid.total_n = options.total_n;
  } else {
    const int two_percent = static_cast<int>(
        std::llround(0.02 * static_cast<double>(frame.size())));
    const int floor_n = 2 * options.max_wealth_strata *
                        options.max_difficulty_strata;
    grid.total_n = std::max(two_percent, floor_n);
  }
  if (grid.total_n > static_cast<int>(frame.size())) {
    throw DataError("run_grid: n = " + std::to_string(grid.total_n) +
                    " exceeds the frame size");
  }

  for (int lw = 1; lw <= options.max_wealth_strata; ++lw) {
    for (int lg = 1; lg <= options.max_difficulty_strata; ++lg) {
      if (lw == 1 && lg == 1 && !options.include_corner) continue;
      ScenarioResult s;
      s.wealth_strata = lw;
      s.difficulty_strata = lg;
      grid.scenarios.push_back(std::move(s));
    }
  }

  const auto run_one = [&](ScenarioResult& s) {
    try {
      s.design = cross_stratify(frame, s.wealth_strata, s.difficulty_strata,
                                options.class_count);
      s.summaries = summarize_strata(frame, s.design);
      s.allocation =
          neyman_allocate(s.summaries, grid.total_n, options.min_per_stratum);
      s.variance = stratified_variance(s.summaries, s.allocation, options.fpc);
      s.cost = cost_proxy(s.summaries, s.allocation);
      s.effective_strata = s.design.stratum_count();
      s.cost_above_population_mean = s.cost > grid.population_mean_difficulty;
      s.ok = true;
    } catch (const std::exception& e) {
      s.ok = false;
      s.error = e.what();
    }
  };

  auto& scenarios = grid.scenarios;
  if (options.exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(scenarios.size());
         ++i) {
      run_one(scenarios[static_cast<std::size_t>(i)]);
    }
  } else {
    for (auto& s : scenarios) run_one(s);
  }
  return grid;
}

void classify_quadrants(ScenarioGrid& grid) {
  std::vector<double> variances, costs;
  for (const auto& s : grid.scenarios) {
    if (s.ok) {
      variances.push_back(s.variance);
      costs.push_back(s.cost);
    }
  }
  if (variances.empty()) {
    throw DataError("classify_quadrants: all scenarios failed");
  }
  if (variances.size() < 2) {
    throw DataError("classify_quadrants: needs at least 2 successful scenarios");
  }
  grid.median_variance = median(variances);
  grid.median_cost = median(costs);
  grid.medians_set = true;
  for (auto& s : grid.scenarios) {
    if (!s.ok) continue;
    const bool small_var = s.variance <= grid.median_variance;
    const bool low_cost = s.cost <= grid.median_cost;
    s.quadrant = small_var
                     ? (low_cost ? Quadrant::SmallVarLowCost
                                 : Quadrant::SmallVarHighCost)
                     : (low_cost ? Quadrant::BigVarLowCost
                                 : Quadrant::BigVarHighCost);
    s.quadrant_set = true;
  }
}

namespace {

std::string svg_coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

void write_quadrants_svg(const ScenarioGrid& grid, const std::string& path) {
  constexpr double kWidth = 760, kHeight = 560;
  constexpr double kLeft = 70, kRight = 30, kTop = 30, kBottom = 60;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;

  double v_lo = 0, v_hi = 1, c_lo = 0, c_hi = 1;
  bool first = true;
  for (const auto& s : grid.scenarios) {
    if (!s.ok) continue;
    if (first) {
      v_lo = v_hi = s.variance;
      c_lo = c_hi = s.cost;
      first = false;
    } else {
      v_lo = std::min(v_lo, s.variance);
      v_hi = std::max(v_hi, s.variance);
      c_lo = std::min(c_lo, s.cost);
      c_hi = std::max(c_hi, s.cost);
    }
  }
  const double v_pad = (v_hi - v_lo) * 0.08 + 1e-12;
  const double c_pad = (c_hi - c_lo) * 0.08 + 1e-12;
  v_lo -= v_pad; v_hi += v_pad;
  c_lo -= c_pad; c_hi += c_pad;

  const auto x_of = [&](double cost) {
    return kLeft + plot_w * (cost - c_lo) / (c_hi - c_lo);
  };
  const auto y_of = [&](double variance) {
    return kTop + plot_h * (1.0 - (variance - v_lo) / (v_hi - v_lo));
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " "
      << kHeight << "\">\n";
  svg << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << plot_w
      << "\" height=\"" << plot_h
      << "\" fill=\"white\" stroke=\"black\"/>\n";
  if (grid.medians_set) {
    svg << "<line x1=\"" << svg_coord(x_of(grid.median_cost)) << "\" y1=\""
        << kTop << "\" x2=\"" << svg_coord(x_of(grid.median_cost))
        << "\" y2=\"" << kTop + plot_h
        << "\" stroke=\"gray\" stroke-dasharray=\"6,4\"/>\n";
    svg << "<line x1=\"" << kLeft << "\" y1=\""
        << svg_coord(y_of(grid.median_variance)) << "\" x2=\""
        << kLeft + plot_w << "\" y2=\"" << svg_coord(y_of(grid.median_variance))
        << "\" stroke=\"gray\" stroke-dasharray=\"6,4\"/>\n";
  }
  for (const auto& s : grid.scenarios) {
    if (!s.ok) continue;
    const double x = x_of(s.cost);
    const double y = y_of(s.variance);
    svg << "<circle cx=\"" << svg_coord(x) << "\" cy=\"" << svg_coord(y)
        << "\" r=\"4\" fill=\"black\"/>\n";
    svg << "<text x=\"" << svg_coord(x + 6) << "\" y=\"" << svg_coord(y - 6)
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << s.name()
        << "</text>\n";
  }
  svg << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 15
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"14\">cost proxy (mean difficulty of sample)</text>\n";
  svg << "<text x=\"18\" y=\"" << kTop + plot_h / 2
      << "\" transform=\"rotate(-90 18 " << kTop + plot_h / 2
      << ")\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"14\">sampling variance</text>\n";
  // Axis extremes.
  svg << "<text x=\"" << kLeft << "\" y=\"" << kHeight - 38
      << "\" font-family=\"sans-serif\" font-size=\"11\">"
      << csv::format_double(c_lo) << "</text>\n";
  svg << "<text x=\"" << kLeft + plot_w << "\" y=\"" << kHeight - 38
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
      << csv::format_double(c_hi) << "</text>\n";
  svg << "<text x=\"" << kLeft - 4 << "\" y=\"" << kTop + plot_h
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
      << csv::format_double(v_lo) << "</text>\n";
  svg << "<text x=\"" << kLeft - 4 << "\" y=\"" << kTop + 10
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
      << csv::format_double(v_hi) << "</text>\n";
  svg << "</svg>\n";

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write svg: " + path);
  out << svg.str();
}

}  // namespace

void emit_reports(const ScenarioGrid& grid, const CensusBlockFrame& frame,
                  const std::string& out_dir) {
  if (grid.scenarios.empty()) throw DataError("emit_reports: empty grid");
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory: " + out_dir);

  // Variance matrix, Table-5-style layout: rows = wealth strata, columns =
  // difficulty strata, blank cells for missing or failed scenarios.
  {
    csv::Table table;
    table.header.push_back("strata_wealth");
    for (int g = 1; g <= grid.options.max_difficulty_strata; ++g) {
      table.header.push_back("g" + std::to_string(g));
    }
    for (int w = 1; w <= grid.options.max_wealth_strata; ++w) {
      std::vector<std::string> row;
      row.push_back(std::to_string(w));
      for (int g = 1; g <= grid.options.max_difficulty_strata; ++g) {
        std::string cell;
        for (const auto& s : grid.scenarios) {
          if (s.wealth_strata == w && s.difficulty_strata == g && s.ok) {
            cell = csv::format_double(s.variance);
          }
        }
        row.push_back(std::move(cell));
      }
      table.rows.push_back(std::move(row));
    }
    csv::write_file(out_dir + "/variance_matrix.csv", table);
  }

  {
    csv::Table table;
    table.header = {"L_w", "L_g",  "effective_strata", "n",
                    "variance", "cost", "quadrant", "allocation"};
    for (const auto& s : grid.scenarios) {
      std::vector<std::string> row;
      row.push_back(std::to_string(s.wealth_strata));
      row.push_back(std::to_string(s.difficulty_strata));
      if (s.ok) {
        row.push_back(std::to_string(s.effective_strata));
        row.push_back(std::to_string(grid.total_n));
        row.push_back(csv::format_double(s.variance));
        row.push_back(csv::format_double(s.cost));
        row.push_back(s.quadrant_set ? to_string(s.quadrant) : std::string());
        std::string alloc;
        for (std::size_t h = 0; h < s.allocation.samples.size(); ++h) {
          if (h) alloc += '|';
          alloc += std::to_string(s.allocation.samples[h]);
        }
        row.push_back(std::move(alloc));
      } else {
        row.insert(row.end(), {"", "", "", "", "", ""});
      }
      table.rows.push_back(std::move(row));
    }
    csv::write_file(out_dir + "/scenarios.csv", table);
  }

  write_quadrants_svg(grid, out_dir + "/quadrants.svg");

  const std::string designs = out_dir + "/designs";
  const std::string assignments = out_dir + "/assignments";
  const std::string allocations = out_dir + "/allocations";
  for (const auto& dir : {designs, assignments, allocations}) {
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory: " + dir);
  }
  for (const auto& s : grid.scenarios) {
    if (!s.ok) continue;
    write_design_json(s.design, designs + "/" + s.name() + ".json");
    write_assignment_csv(s.design, frame,
                         assignments + "/" + s.name() + ".csv");
    write_allocation_csv(s.summaries, s.allocation,
                         allocations + "/" + s.name() + ".csv");
  }
}

}  // namespace stratkit
