#pragma once

#include <string>
#include <utility>
#include <vector>

#include "stratkit/composite.hpp"

namespace stratkit {

/// Strata boundaries from the cumulative-root-frequency rule.
struct StrataBoundaries {
  int strata_count = 1;       // L
  int class_count = 0;        // J actually used
  std::vector<double> cuts;   // L-1 strictly increasing values

  /// Stratum of a value: number of cuts <= value (cuts are class edges and
  /// classes are lower-inclusive, so a value sitting on a cut goes up).
  int stratum_of(double value) const;
};

/// Default class count when the caller passes J = 0.
int default_class_count(int strata_count);

/// Dalenius-Hodges style boundaries: J equal-width classes over [min, max],
/// cut k at the upper edge of the class whose cumulative root frequency is
/// closest to k*T/L. Colliding cuts shift to the next class edge that adds
/// frequency mass. Throws DataError when fewer than L distinct values exist
/// or the cuts cannot be placed.
StrataBoundaries cum_root_freq_boundaries(const std::vector<double>& values,
                                          int strata_count, int class_count);

struct CellMerge {
  int from_w = 0, from_g = 0;  // 1-based cell labels
  int to_w = 0, to_g = 0;
  int moved_blocks = 0;
};

struct CrossStrataDesign {
  StrataBoundaries wealth;
  StrataBoundaries difficulty;
  std::vector<int> wealth_label;      // per block, 0-based original cell
  std::vector<int> difficulty_label;  // per block, 0-based original cell
  std::vector<int> effective_stratum; // per block, 0-based
  std::vector<std::pair<int, int>> stratum_cells;  // effective -> (w, g)
  std::vector<int> stratum_sizes;     // N_h, all >= 2
  std::vector<CellMerge> collapses;

  int stratum_count() const { return static_cast<int>(stratum_sizes.size()); }
};

/// Independent boundaries per dimension, block labelling, and collapse of
/// deficient cells (N < 2): first along the difficulty axis within the same
/// wealth stratum, toward the more populous neighbour; a wealth row with no
/// other occupied cell merges into the adjacent wealth stratum's same-g cell.
/// class_count = 0 picks the per-dimension default.
CrossStrataDesign cross_stratify(const CensusBlockFrame& frame,
                                 int wealth_strata, int difficulty_strata,
                                 int class_count = 0);

void write_design_json(const CrossStrataDesign& design, const std::string& path);
void write_assignment_csv(const CrossStrataDesign& design,
                          const CensusBlockFrame& frame,
                          const std::string& path);

}  // namespace stratkit
