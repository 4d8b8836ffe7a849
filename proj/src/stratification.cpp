#include "stratkit/stratification.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <nlohmann/json.hpp>

#include "stratkit/csv.hpp"
#include "stratkit/errors.hpp"

namespace stratkit {

using ordered_json = nlohmann::ordered_json;

int StrataBoundaries::stratum_of(double value) const {
  const auto it = std::upper_bound(cuts.begin(), cuts.end(), value);
  // upper_bound: first cut > value, so the index counts cuts <= value.
  return static_cast<int>(it - cuts.begin());
}

int default_class_count(int strata_count) {
  return std::max(20, 15 * strata_count);
}

StrataBoundaries cum_root_freq_boundaries(const std::vector<double>& values,
                                          int strata_count, int class_count) {
  if (strata_count < 1) throw DataError("boundaries: strata count must be >= 1");
  if (values.empty()) throw DataError("boundaries: no values");
  if (class_count < strata_count) {
    throw DataError("boundaries: class count must be >= strata count");
  }
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t distinct =
      static_cast<std::size_t>(std::unique(sorted.begin(), sorted.end()) -
                               sorted.begin());
  if (distinct < static_cast<std::size_t>(strata_count)) {
    throw DataError("boundaries: need at least " +
                    std::to_string(strata_count) + " distinct values, have " +
                    std::to_string(distinct));
  }

  StrataBoundaries out;
  out.strata_count = strata_count;
  out.class_count = class_count;
  if (strata_count == 1) return out;

  const double lo = sorted.front();
  const double hi = sorted.back();
  const double width = (hi - lo) / static_cast<double>(class_count);
  std::vector<std::int64_t> freq(static_cast<std::size_t>(class_count), 0);
  for (double v : values) {
    auto j = static_cast<std::int64_t>((v - lo) / width);
    j = std::clamp<std::int64_t>(j, 0, class_count - 1);
    ++freq[static_cast<std::size_t>(j)];
  }
  std::vector<double> cum(static_cast<std::size_t>(class_count), 0.0);
  double running = 0.0;
  for (int j = 0; j < class_count; ++j) {
    running += std::sqrt(static_cast<double>(freq[static_cast<std::size_t>(j)]));
    cum[static_cast<std::size_t>(j)] = running;
  }
  const double total = running;

  // Cut k sits on the upper edge of the class whose cumulative is closest to
  // k*T/L. The top edge (class J-1) is never a cut; colliding cuts advance to
  // the next edge that adds frequency mass.
  int prev = -1;
  for (int k = 1; k < strata_count; ++k) {
    const double target =
        static_cast<double>(k) * total / static_cast<double>(strata_count);
    int best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (int j = 0; j + 1 < class_count; ++j) {
      const double dist = std::fabs(cum[static_cast<std::size_t>(j)] - target);
      if (dist < best_dist) {
        best_dist = dist;
        best = j;
      }
    }
    if (prev >= 0 &&
        (best <= prev ||
         cum[static_cast<std::size_t>(best)] <= cum[static_cast<std::size_t>(prev)])) {
      best = prev + 1;
      while (best + 1 < class_count &&
             cum[static_cast<std::size_t>(best)] <=
                 cum[static_cast<std::size_t>(prev)]) {
        ++best;
      }
      if (best + 1 >= class_count ||
          cum[static_cast<std::size_t>(best)] <=
              cum[static_cast<std::size_t>(prev)]) {
        throw DataError("boundaries: cannot place " +
                        std::to_string(strata_count - 1) +
                        " cuts on nonempty class edges");
      }
    }
    out.cuts.push_back(lo + width * static_cast<double>(best + 1));
    prev = best;
  }
  return out;
}

namespace {

struct CellGrid {
  int lw = 0, lg = 0;
  std::vector<std::int64_t> counts;  // lw x lg row-major

  std::int64_t& at(int w, int g) {
    return counts[static_cast<std::size_t>(w * lg + g)];
  }
  std::int64_t at(int w, int g) const {
    return counts[static_cast<std::size_t>(w * lg + g)];
  }
};

// Target cell for a deficient source, never the source itself and always
// occupied. Preference order: adjacent difficulty neighbour (more populous,
// ties low), nearest occupied cell in the same wealth row, adjacent wealth
// neighbour at the same g, nearest occupied cell in the column, then the
// nearest occupied cell anywhere (row-major tie-break).
std::pair<int, int> merge_target(const CellGrid& grid, int w, int g) {
  const auto occupied = [&](int ww, int gg) {
    return ww >= 0 && ww < grid.lw && gg >= 0 && gg < grid.lg &&
           grid.at(ww, gg) > 0;
  };
  const std::int64_t left = occupied(w, g - 1) ? grid.at(w, g - 1) : 0;
  const std::int64_t right = occupied(w, g + 1) ? grid.at(w, g + 1) : 0;
  if (left > 0 || right > 0) {
    return left >= right ? std::make_pair(w, g - 1) : std::make_pair(w, g + 1);
  }
  for (int d = 2; d < grid.lg; ++d) {
    if (occupied(w, g - d)) return {w, g - d};
    if (occupied(w, g + d)) return {w, g + d};
  }
  const std::int64_t up = occupied(w - 1, g) ? grid.at(w - 1, g) : 0;
  const std::int64_t down = occupied(w + 1, g) ? grid.at(w + 1, g) : 0;
  if (up > 0 || down > 0) {
    return up >= down ? std::make_pair(w - 1, g) : std::make_pair(w + 1, g);
  }
  for (int d = 2; d < grid.lw; ++d) {
    if (occupied(w - d, g)) return {w - d, g};
    if (occupied(w + d, g)) return {w + d, g};
  }
  for (int dist = 1; dist < grid.lw + grid.lg; ++dist) {
    for (int ww = 0; ww < grid.lw; ++ww) {
      for (int gg = 0; gg < grid.lg; ++gg) {
        if (std::abs(ww - w) + std::abs(gg - g) == dist && occupied(ww, gg)) {
          return {ww, gg};
        }
      }
    }
  }
  throw DataError("cross_stratify: no occupied cell to merge into");
}

}  // namespace

CrossStrataDesign cross_stratify(const CensusBlockFrame& frame,
                                 int wealth_strata, int difficulty_strata,
                                 int class_count) {
  if (wealth_strata < 1 || difficulty_strata < 1) {
    throw DataError("cross_stratify: strata counts must be >= 1");
  }
  if (!frame.has_difficulty()) {
    throw DataError("cross_stratify: frame is missing difficulty values");
  }
  const std::size_t n = frame.size();
  const std::size_t needed =
      2 * static_cast<std::size_t>(wealth_strata) *
      static_cast<std::size_t>(difficulty_strata);
  if (n < needed) {
    throw DataError("cross_stratify: design infeasible, " + std::to_string(n) +
                    " blocks cannot fill " + std::to_string(wealth_strata) +
                    "x" + std::to_string(difficulty_strata) +
                    " strata with 2 blocks each");
  }

  CrossStrataDesign design;
  design.wealth = cum_root_freq_boundaries(
      frame.wealth, wealth_strata,
      class_count > 0 ? class_count : default_class_count(wealth_strata));
  design.difficulty = cum_root_freq_boundaries(
      frame.difficulty, difficulty_strata,
      class_count > 0 ? class_count : default_class_count(difficulty_strata));

  design.wealth_label.resize(n);
  design.difficulty_label.resize(n);
  std::vector<int> cell(n);
  CellGrid grid;
  grid.lw = wealth_strata;
  grid.lg = difficulty_strata;
  grid.counts.assign(
      static_cast<std::size_t>(wealth_strata * difficulty_strata), 0);
  for (std::size_t i = 0; i < n; ++i) {
    const int w = design.wealth.stratum_of(frame.wealth[i]);
    const int g = design.difficulty.stratum_of(frame.difficulty[i]);
    design.wealth_label[i] = w;
    design.difficulty_label[i] = g;
    cell[i] = w * difficulty_strata + g;
    ++grid.at(w, g);
  }

  // Collapse singleton cells until every occupied cell holds >= 2 blocks.
  // Merging two occupied cells always yields >= 2, so this terminates.
  for (;;) {
    int src_w = -1, src_g = -1;
    for (int w = 0; w < wealth_strata && src_w < 0; ++w) {
      for (int g = 0; g < difficulty_strata; ++g) {
        if (grid.at(w, g) == 1) {
          src_w = w;
          src_g = g;
          break;
        }
      }
    }
    if (src_w < 0) break;
    const auto [dst_w, dst_g] = merge_target(grid, src_w, src_g);
    const int src_cell = src_w * difficulty_strata + src_g;
    const int dst_cell = dst_w * difficulty_strata + dst_g;
    int moved = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (cell[i] == src_cell) {
        cell[i] = dst_cell;
        ++moved;
      }
    }
    grid.at(dst_w, dst_g) += grid.at(src_w, src_g);
    grid.at(src_w, src_g) = 0;
    design.collapses.push_back(
        {src_w + 1, src_g + 1, dst_w + 1, dst_g + 1, moved});
  }

  std::vector<int> effective_of_cell(
      static_cast<std::size_t>(wealth_strata * difficulty_strata), -1);
  for (int w = 0; w < wealth_strata; ++w) {
    for (int g = 0; g < difficulty_strata; ++g) {
      if (grid.at(w, g) > 0) {
        effective_of_cell[static_cast<std::size_t>(w * difficulty_strata + g)] =
            design.stratum_count();
        design.stratum_cells.emplace_back(w, g);
        design.stratum_sizes.push_back(static_cast<int>(grid.at(w, g)));
      }
    }
  }
  design.effective_stratum.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    design.effective_stratum[i] =
        effective_of_cell[static_cast<std::size_t>(cell[i])];
  }
  return design;
}

void write_design_json(const CrossStrataDesign& design,
                       const std::string& path) {
  ordered_json doc;
  doc["L_w"] = design.wealth.strata_count;
  doc["L_g"] = design.difficulty.strata_count;
  if (design.wealth.class_count == design.difficulty.class_count) {
    doc["J"] = design.wealth.class_count;
  } else {
    doc["J"] = nullptr;
    doc["J_wealth"] = design.wealth.class_count;
    doc["J_difficulty"] = design.difficulty.class_count;
  }
  doc["wealth_cuts"] = design.wealth.cuts;
  doc["difficulty_cuts"] = design.difficulty.cuts;
  doc["collapses"] = ordered_json::array();
  for (const auto& m : design.collapses) {
    ordered_json e;
    e["from"] = {m.from_w, m.from_g};
    e["to"] = {m.to_w, m.to_g};
    e["blocks"] = m.moved_blocks;
    doc["collapses"].push_back(std::move(e));
  }
  doc["strata"] = ordered_json::array();
  for (int h = 0; h < design.stratum_count(); ++h) {
    ordered_json e;
    e["id"] = h + 1;
    e["w"] = design.stratum_cells[static_cast<std::size_t>(h)].first + 1;
    e["g"] = design.stratum_cells[static_cast<std::size_t>(h)].second + 1;
    e["blocks"] = design.stratum_sizes[static_cast<std::size_t>(h)];
    doc["strata"].push_back(std::move(e));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write design file: " + path);
  out << doc.dump(2) << '\n';
}

void write_assignment_csv(const CrossStrataDesign& design,
                          const CensusBlockFrame& frame,
                          const std::string& path) {
  csv::Table table;
  table.header = {"block_id", "w", "g", "stratum"};
  for (std::size_t i = 0; i < frame.size(); ++i) {
    table.rows.push_back({frame.block_ids[i],
                          std::to_string(design.wealth_label[i] + 1),
                          std::to_string(design.difficulty_label[i] + 1),
                          std::to_string(design.effective_stratum[i] + 1)});
  }
  csv::write_file(path, table);
}

}  // namespace stratkit
