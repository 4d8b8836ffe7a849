#pragma once

#include <string>
#include <vector>

#include "stratkit/exec.hpp"
#include "stratkit/polychoric.hpp"
#include "stratkit/schema.hpp"

namespace stratkit {

/// Per-category weights: gamma[a][b] = loading_a * truncated-normal mean of
/// category b's latent interval. Collapsed categories share their effective
/// neighbour's weight.
struct WeightTable {
  std::vector<std::string> variable_names;
  std::vector<std::vector<double>> weights;  // [variable][original category]
  std::vector<double> loading;               // first eigenvector entries
  double lambda1 = 0.0;
  bool sign_flipped = false;  // eigenvector sign normalisation applied
  /// Monotonicity is expected from the construction; any numerical violation
  /// (tolerance 1e-9) is reported here rather than silently accepted.
  std::vector<std::string> monotonicity_violations;
};

/// Raw and min-max-normalised index values for a set of units.
struct IndexVector {
  std::vector<std::string> unit_ids;
  std::vector<double> raw;
  std::vector<double> normalized;  // 0..100 within the reference population
  double bound_min = 0.0, bound_max = 0.0;
  bool degenerate = false;          // reference had max == min
  bool orientation_flipped = false; // difficulty orientation applied
};

/// Sampling frame at census-block level.
struct CensusBlockFrame {
  std::vector<std::string> block_ids;
  std::vector<std::string> village_ids;   // empty string when unknown
  std::vector<double> wealth;             // I_s, mean of member households
  std::vector<int> households;            // R_s
  std::vector<double> difficulty;         // NaN when not yet joined

  std::size_t size() const { return block_ids.size(); }
  bool has_difficulty() const;
};

/// First-eigenvector weights from a PSD(-repaired) polychoric matrix.
/// Throws DataError when the leading eigenvalue is not separated from the
/// second by more than 1e-12.
WeightTable derive_weights(const PolychoricMatrix& matrix,
                           const ThresholdSet& thresholds);

/// I_unit = sum_a gamma[a][code(unit, a)].
std::vector<double> compute_index(const OrdinalDataset& dataset,
                                  const WeightTable& weights,
                                  Exec exec = Exec::Parallel);

struct Normalized {
  std::vector<double> values;
  double bound_min = 0.0, bound_max = 0.0;
  bool degenerate = false;
};

/// out = 100 (x - min(ref)) / (max(ref) - min(ref)); all 50 when the
/// reference is constant (degenerate flag set).
Normalized minmax_normalize(const std::vector<double>& values,
                            const std::vector<double>& reference);

struct Projection {
  double value = 0.0;
  bool clamped = false;
};
/// Projects an out-of-population raw value onto persisted bounds.
Projection project_normalized(double raw, double bound_min, double bound_max);

/// Builds the full index vector (raw + normalised against itself).
IndexVector build_index(const OrdinalDataset& dataset,
                        const WeightTable& weights, Exec exec = Exec::Parallel);

/// Difficulty orientation: guarantees the normalised index correlates
/// nonnegatively with the schema-declared difficulty ranking (sum of
/// direction-reversed codes). Flips 100 - normalized when needed.
void orient_difficulty(IndexVector& index, const OrdinalDataset& dataset);

struct BlockAggregate {
  CensusBlockFrame frame;
  std::vector<std::string> empty_blocks;  // listed blocks with no households
};

/// I_s = mean of member households' normalised indexes; R_s = member count.
/// Households are grouped by their dataset group key (the block id).
/// `block_villages`, when nonempty, maps block id -> village id; blocks in
/// the map with no households are excluded from the frame and reported.
BlockAggregate aggregate_blocks(
    const IndexVector& households, const std::vector<std::string>& block_of,
    const std::vector<std::pair<std::string, std::string>>& block_villages = {});

struct GroupSummary {
  std::string key;
  double mean = 0.0;
  std::int64_t count = 0;
};
struct GroupedMeans {
  std::vector<GroupSummary> groups;  // sorted by key
  double overall_mean = 0.0;
};
GroupedMeans summarize_by_group(const std::vector<double>& values,
                                const std::vector<std::string>& keys);

void write_weights_csv(const WeightTable& weights, const std::string& path);
WeightTable load_weights_csv(const std::string& path);
void write_index_csv(const IndexVector& index, const std::string& path);
void write_frame_csv(const CensusBlockFrame& frame, const std::string& path);
CensusBlockFrame load_frame_csv(const std::string& path);

}  // namespace stratkit
