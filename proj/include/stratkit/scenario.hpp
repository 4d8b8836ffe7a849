#pragma once

#include <string>
#include <vector>

#include "stratkit/allocation.hpp"
#include "stratkit/composite.hpp"
#include "stratkit/exec.hpp"
#include "stratkit/stratification.hpp"

namespace stratkit {

enum class Quadrant {
  SmallVarLowCost = 1,  // Q1
  BigVarLowCost = 2,    // Q2
  BigVarHighCost = 3,   // Q3
  SmallVarHighCost = 4, // Q4
};
std::string to_string(Quadrant q);

struct ScenarioResult {
  int wealth_strata = 0;
  int difficulty_strata = 0;
  bool ok = false;
  std::string error;          // set when !ok
  int effective_strata = 0;
  double variance = 0.0;
  double cost = 0.0;
  bool cost_above_population_mean = false;
  CrossStrataDesign design;
  std::vector<StratumSummary> summaries;
  Allocation allocation;
  Quadrant quadrant = Quadrant::SmallVarLowCost;
  bool quadrant_set = false;

  std::string name() const {  // "w{L_w}g{L_g}"
    return "w" + std::to_string(wealth_strata) + "g" +
           std::to_string(difficulty_strata);
  }
};

struct GridOptions {
  int max_wealth_strata = 4;
  int max_difficulty_strata = 4;
  bool include_corner = false;  // evaluate (1,1) as the SRS baseline
  int total_n = 0;              // 0 = default: max(2% of N, 2 per cell of the largest design)
  int class_count = 0;          // J; 0 = per-dimension default
  int min_per_stratum = 2;
  bool fpc = true;
  Exec exec = Exec::Parallel;
};

struct ScenarioGrid {
  std::vector<ScenarioResult> scenarios;
  GridOptions options;
  int total_n = 0;                         // resolved n
  std::size_t frame_size = 0;
  double population_mean_difficulty = 0.0;
  double median_variance = 0.0;
  double median_cost = 0.0;
  bool medians_set = false;

  std::size_t successful() const;
};

/// Evaluates every (L_w, L_g) cell of the grid; per-scenario failures are
/// recorded in the result, never fatal. Scenarios run independently under
/// the chosen execution policy.
ScenarioGrid run_grid(const CensusBlockFrame& frame, const GridOptions& options);

/// Median split on variance and cost over the successful scenarios; ties
/// fall to the small-variance / low-cost side.
void classify_quadrants(ScenarioGrid& grid);

/// Writes variance_matrix.csv, scenarios.csv, quadrants.svg and the
/// per-scenario design/assignment/allocation exports into out_dir.
/// Deterministic byte-for-byte given identical inputs.
void emit_reports(const ScenarioGrid& grid, const CensusBlockFrame& frame,
                  const std::string& out_dir);

}  // namespace stratkit
