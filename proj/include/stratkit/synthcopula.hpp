#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stratkit/composite.hpp"
#include "stratkit/schema.hpp"

namespace stratkit {

/// Gaussian-copula ordinal generator spec. The correlation matrix is
/// PSD-repaired when needed before sampling.
struct CopulaSpec {
  Eigen::MatrixXd correlation;
  std::vector<std::vector<double>> thresholds;  // per variable, increasing
  std::int64_t records = 0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Draws latent multivariate normals through a symmetric square root of the
/// (repaired) correlation matrix and discretises by the thresholds.
/// Deterministic given the seed, bit-identical across platforms.
OrdinalDataset sample_ordinal(const CopulaSpec& spec);

/// Synthetic census-block frame: correlated (wealth, difficulty) pairs with
/// the wealth margin moment-matched by a power-family monotone transform of
/// the latent's uniform score, fitted by scalar search on the exponent.
struct FrameSpec {
  std::int64_t blocks = 0;
  int households_min = 80;
  int households_max = 120;
  double difficulty_correlation = -0.7983;  // target corr(I_s, difficulty)
  double wealth_mean = 38.5756;
  double wealth_sd = 17.9029;
  double wealth_skewness = 0.6920;
  /// Exponent of the uniform difficulty margin, 100 * Phi(z)^shape.
  double difficulty_shape = 1.5;
  std::uint64_t seed = 0;

  void validate() const;
};

struct FrameSample {
  CensusBlockFrame frame;
  double latent_correlation = 0.0;  // calibrated latent rho
  double achieved_correlation = 0.0;
  double power_exponent = 0.0;      // fitted margin exponent
  double achieved_mean = 0.0, achieved_sd = 0.0, achieved_skewness = 0.0;
};

FrameSample sample_frame(const FrameSpec& spec);

/// Loads a generator spec document (JSON, kind = "ordinal" | "frame").
struct SynthSpec {
  bool is_frame = false;
  CopulaSpec ordinal;
  FrameSpec frame;
};
SynthSpec load_synth_spec(const std::string& path);
SynthSpec parse_synth_spec(const std::string& json_text);

/// Built-in frame spec used by the CLI preset: a remote-area-style frame
/// (skewed wealth concentration, strong negative wealth-difficulty
/// correlation).
FrameSpec remote_area_preset();

}  // namespace stratkit
