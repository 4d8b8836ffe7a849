#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stratkit/composite.hpp"
#include "stratkit/stratification.hpp"

namespace stratkit {

/// Per-stratum design quantities. The study variable is the block wealth
/// concentration I_s; S_h uses the N_h - 1 divisor.
struct StratumSummary {
  int stratum = 0;              // 0-based id
  std::int64_t blocks = 0;      // N_h
  double weight = 0.0;          // W_h = N_h / N
  double sd = 0.0;              // S_h
  double mean_difficulty = 0.0; // D-bar_h
};

enum class AllocationMethod { Neyman, Proportional, Custom };
std::string to_string(AllocationMethod m);

struct Allocation {
  std::vector<int> samples;     // n_h, each in [min, N_h], sums to n
  std::vector<double> targets;  // real-valued targets before integerisation
  int total = 0;
  AllocationMethod method = AllocationMethod::Neyman;
};

/// Member values are sorted before accumulation so the summaries are
/// invariant to block ordering in the frame.
std::vector<StratumSummary> summarize_strata(const CensusBlockFrame& frame,
                                             const CrossStrataDesign& design);

/// Optimum allocation: targets n N_h S_h / sum_k N_k S_k, floored at the
/// minimum, capped at N_h (re-normalising iteratively), then integerised by
/// largest remainder so the total is exact. Zero-S strata get the minimum.
Allocation neyman_allocate(const std::vector<StratumSummary>& summaries, int n,
                           int min_per_stratum = 2);

/// Same machinery with targets n W_h.
Allocation proportional_allocate(const std::vector<StratumSummary>& summaries,
                                 int n, int min_per_stratum = 2);

/// V = sum_h W_h^2 (1 - n_h/N_h) S_h^2 / n_h; the FPC factor drops when
/// with_fpc is false.
double stratified_variance(const std::vector<StratumSummary>& summaries,
                           const Allocation& allocation, bool with_fpc = true);

/// C = sum_h n_h D-bar_h / n.
double cost_proxy(const std::vector<StratumSummary>& summaries,
                  const Allocation& allocation);

void write_allocation_csv(const std::vector<StratumSummary>& summaries,
                          const Allocation& allocation,
                          const std::string& path);

}  // namespace stratkit
