#include "stratkit/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "stratkit/csv.hpp"
#include "stratkit/errors.hpp"

namespace stratkit {

std::string to_string(AllocationMethod m) {
  switch (m) {
    case AllocationMethod::Neyman: return "neyman";
    case AllocationMethod::Proportional: return "proportional";
    case AllocationMethod::Custom: return "custom";
  }
  return "unknown";
}

std::vector<StratumSummary> summarize_strata(const CensusBlockFrame& frame,
                                             const CrossStrataDesign& design) {
  if (design.effective_stratum.size() != frame.size()) {
    throw DataError("summarize_strata: design does not cover the frame");
  }
  const int h_count = design.stratum_count();
  std::vector<std::vector<double>> wealth(static_cast<std::size_t>(h_count));
  std::vector<std::vector<double>> difficulty(static_cast<std::size_t>(h_count));
  for (std::size_t i = 0; i < frame.size(); ++i) {
    const auto h = static_cast<std::size_t>(design.effective_stratum[i]);
    wealth[h].push_back(frame.wealth[i]);
    difficulty[h].push_back(frame.difficulty[i]);
  }
  const auto n_total = static_cast<double>(frame.size());
  std::vector<StratumSummary> out;
  for (int h = 0; h < h_count; ++h) {
    auto& w = wealth[static_cast<std::size_t>(h)];
    auto& d = difficulty[static_cast<std::size_t>(h)];
    // Sorted accumulation keeps the sums independent of block order.
    std::sort(w.begin(), w.end());
    std::sort(d.begin(), d.end());
    StratumSummary s;
    s.stratum = h;
    s.blocks = static_cast<std::int64_t>(w.size());
    s.weight = static_cast<double>(w.size()) / n_total;
    const double mean_w =
        std::accumulate(w.begin(), w.end(), 0.0) / static_cast<double>(w.size());
    double ss = 0.0;
    for (double v : w) ss += (v - mean_w) * (v - mean_w);
    s.sd = w.size() > 1
               ? std::sqrt(ss / static_cast<double>(w.size() - 1))
               : 0.0;
    s.mean_difficulty =
        std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(d.size());
    out.push_back(s);
  }
  return out;
}

namespace {

Allocation allocate_by_measure(const std::vector<StratumSummary>& summaries,
                               const std::vector<double>& measure, int n,
                               int min_per_stratum, AllocationMethod method) {
  const std::size_t h_count = summaries.size();
  if (h_count == 0) throw DataError("allocate: no strata");
  std::int64_t population = 0;
  for (const auto& s : summaries) {
    if (s.blocks < min_per_stratum) {
      throw DataError("allocate: stratum " + std::to_string(s.stratum + 1) +
                      " has fewer than " + std::to_string(min_per_stratum) +
                      " blocks");
    }
    population += s.blocks;
  }
  if (n < min_per_stratum * static_cast<int>(h_count)) {
    throw DataError("allocate: n = " + std::to_string(n) +
                    " cannot give every one of " + std::to_string(h_count) +
                    " strata its minimum of " + std::to_string(min_per_stratum));
  }
  if (n > population) {
    throw DataError("allocate: n = " + std::to_string(n) +
                    " exceeds the population of " + std::to_string(population));
  }

  std::vector<int> pinned(h_count, -1);  // -1 = free
  for (std::size_t h = 0; h < h_count; ++h) {
    if (measure[h] <= 0.0) pinned[h] = min_per_stratum;
  }

  // Renormalise the free strata until no target breaks its floor or cap.
  std::vector<double> targets(h_count, 0.0);
  for (;;) {
    double free_measure = 0.0;
    int pinned_total = 0;
    for (std::size_t h = 0; h < h_count; ++h) {
      if (pinned[h] >= 0) pinned_total += pinned[h];
      else free_measure += measure[h];
    }
    const int remaining = n - pinned_total;
    bool changed = false;
    if (free_measure <= 0.0) {
      // Everything pinned (or degenerate measures): spread any slack over
      // the strata proportionally to population, capped at N_h.
      double free_blocks = 0.0;
      for (std::size_t h = 0; h < h_count; ++h) {
        if (pinned[h] < 0) free_blocks += static_cast<double>(summaries[h].blocks);
      }
      if (free_blocks > 0.0) {
        for (std::size_t h = 0; h < h_count; ++h) {
          if (pinned[h] < 0) {
            targets[h] = static_cast<double>(remaining) *
                         static_cast<double>(summaries[h].blocks) / free_blocks;
          }
        }
      } else if (remaining > 0) {
        // All strata pinned but budget is left: lift pins proportionally to
        // population (keeps the sum exact, still capped below).
        double all_blocks = 0.0;
        for (const auto& s : summaries) all_blocks += static_cast<double>(s.blocks);
        for (std::size_t h = 0; h < h_count; ++h) {
          targets[h] = static_cast<double>(pinned[h]) +
                       static_cast<double>(n - pinned_total) *
                           static_cast<double>(summaries[h].blocks) / all_blocks;
          pinned[h] = -1;
        }
      }
    } else {
      for (std::size_t h = 0; h < h_count; ++h) {
        if (pinned[h] < 0) {
          targets[h] = static_cast<double>(remaining) * measure[h] / free_measure;
        }
      }
    }
    for (std::size_t h = 0; h < h_count; ++h) {
      if (pinned[h] >= 0) continue;
      if (targets[h] < static_cast<double>(min_per_stratum)) {
        pinned[h] = min_per_stratum;
        changed = true;
      } else if (targets[h] > static_cast<double>(summaries[h].blocks)) {
        pinned[h] = static_cast<int>(summaries[h].blocks);
        changed = true;
      }
    }
    if (!changed) break;
  }

  // Largest-remainder integerisation of the free strata.
  Allocation out;
  out.method = method;
  out.total = n;
  out.samples.assign(h_count, 0);
  out.targets.assign(h_count, 0.0);
  int assigned = 0;
  std::vector<std::size_t> free_idx;
  for (std::size_t h = 0; h < h_count; ++h) {
    if (pinned[h] >= 0) {
      out.samples[h] = pinned[h];
      out.targets[h] = static_cast<double>(pinned[h]);
    } else {
      out.samples[h] = static_cast<int>(std::floor(targets[h]));
      out.targets[h] = targets[h];
      free_idx.push_back(h);
    }
    assigned += out.samples[h];
  }
  int leftover = n - assigned;
  std::sort(free_idx.begin(), free_idx.end(), [&](std::size_t a, std::size_t b) {
    const double ra = targets[a] - std::floor(targets[a]);
    const double rb = targets[b] - std::floor(targets[b]);
    if (ra != rb) return ra > rb;
    return a < b;
  });
  for (std::size_t i = 0; i < free_idx.size() && leftover > 0; ++i) {
    ++out.samples[free_idx[i]];
    --leftover;
  }
  if (leftover != 0) throw DataError("allocate: integerisation failed");
  return out;
}

}  // namespace

Allocation neyman_allocate(const std::vector<StratumSummary>& summaries, int n,
                           int min_per_stratum) {
  std::vector<double> measure;
  measure.reserve(summaries.size());
  for (const auto& s : summaries) {
    measure.push_back(static_cast<double>(s.blocks) * s.sd);
  }
  return allocate_by_measure(summaries, measure, n, min_per_stratum,
                             AllocationMethod::Neyman);
}

Allocation proportional_allocate(const std::vector<StratumSummary>& summaries,
                                 int n, int min_per_stratum) {
  std::vector<double> measure;
  measure.reserve(summaries.size());
  for (const auto& s : summaries) {
    measure.push_back(static_cast<double>(s.blocks));
  }
  return allocate_by_measure(summaries, measure, n, min_per_stratum,
                             AllocationMethod::Proportional);
}

double stratified_variance(const std::vector<StratumSummary>& summaries,
                           const Allocation& allocation, bool with_fpc) {
  if (allocation.samples.size() != summaries.size()) {
    throw DataError("stratified_variance: allocation does not match summaries");
  }
  double v = 0.0;
  for (std::size_t h = 0; h < summaries.size(); ++h) {
    const auto& s = summaries[h];
    const auto nh = static_cast<double>(allocation.samples[h]);
    const auto bh = static_cast<double>(s.blocks);
    const double fpc = with_fpc ? 1.0 - nh / bh : 1.0;
    v += s.weight * s.weight * fpc * s.sd * s.sd / nh;
  }
  return v;
}

double cost_proxy(const std::vector<StratumSummary>& summaries,
                  const Allocation& allocation) {
  if (allocation.samples.size() != summaries.size()) {
    throw DataError("cost_proxy: allocation does not match summaries");
  }
  double c = 0.0;
  for (std::size_t h = 0; h < summaries.size(); ++h) {
    c += static_cast<double>(allocation.samples[h]) *
         summaries[h].mean_difficulty;
  }
  return c / static_cast<double>(allocation.total);
}

void write_allocation_csv(const std::vector<StratumSummary>& summaries,
                          const Allocation& allocation,
                          const std::string& path) {
  csv::Table table;
  table.header = {"stratum", "N_h", "W_h", "S_h", "mean_difficulty", "n_h"};
  for (std::size_t h = 0; h < summaries.size(); ++h) {
    const auto& s = summaries[h];
    table.rows.push_back({std::to_string(s.stratum + 1),
                          std::to_string(s.blocks),
                          csv::format_double(s.weight),
                          csv::format_double(s.sd),
                          csv::format_double(s.mean_difficulty),
                          std::to_string(allocation.samples[h])});
  }
  csv::write_file(path, table);
}

}  // namespace stratkit
