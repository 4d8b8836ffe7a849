#include "stratkit/synthcopula.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "stratkit/errors.hpp"
#include "stratkit/normal.hpp"
#include "stratkit/polychoric.hpp"
#include "stratkit/rng.hpp"

namespace stratkit {

using nlohmann::json;

void CopulaSpec::validate() const {
  const Eigen::Index n = correlation.rows();
  if (n < 1 || correlation.cols() != n) {
    throw DataError("copula spec: correlation must be square");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::fabs(correlation(i, i) - 1.0) > 1e-9) {
      throw DataError("copula spec: correlation diagonal must be 1");
    }
    for (Eigen::Index j = 0; j < i; ++j) {
      if (std::fabs(correlation(i, j) - correlation(j, i)) > 1e-9) {
        throw DataError("copula spec: correlation must be symmetric");
      }
      if (std::fabs(correlation(i, j)) > 1.0) {
        throw DataError("copula spec: correlations must lie in [-1, 1]");
      }
    }
  }
  if (thresholds.size() != static_cast<std::size_t>(n)) {
    throw DataError("copula spec: one threshold list per variable required");
  }
  for (std::size_t a = 0; a < thresholds.size(); ++a) {
    const auto& t = thresholds[a];
    if (t.empty()) {
      throw DataError("copula spec: variable " + std::to_string(a + 1) +
                      " needs at least one threshold");
    }
    if (t.size() > 8) {
      throw DataError("copula spec: variable " + std::to_string(a + 1) +
                      " exceeds 9 categories");
    }
    for (std::size_t k = 0; k + 1 < t.size(); ++k) {
      if (!(t[k] < t[k + 1])) {
        throw DataError("copula spec: thresholds of variable " +
                        std::to_string(a + 1) + " must be strictly increasing");
      }
    }
  }
  if (records < 1) throw DataError("copula spec: records must be >= 1");
}

OrdinalDataset sample_ordinal(const CopulaSpec& spec) {
  spec.validate();
  const Eigen::Index k = spec.correlation.rows();
  const PolychoricMatrix repaired = psd_repair(spec.correlation);

  // Symmetric square root handles semidefinite matrices (rho = +-1 specs).
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(repaired.values);
  if (solver.info() != Eigen::Success) {
    throw DataError("copula spec: factorisation failed");
  }
  const Eigen::MatrixXd factor =
      solver.eigenvectors() *
      solver.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
      solver.eigenvectors().transpose();

  OrdinalDataset dataset;
  dataset.schema.role = SchemaRole::Geographic;
  for (Eigen::Index a = 0; a < k; ++a) {
    VariableSpec var;
    var.name = "v" + std::to_string(a + 1);
    const int categories =
        static_cast<int>(spec.thresholds[static_cast<std::size_t>(a)].size()) + 1;
    for (int b = 1; b <= categories; ++b) {
      var.categories.push_back(std::to_string(b));
    }
    var.direction = Direction::HardToEasy;
    dataset.schema.variables.push_back(std::move(var));
  }

  Rng rng(spec.seed);
  Eigen::VectorXd u(k);
  dataset.codes.reserve(static_cast<std::size_t>(spec.records) *
                        static_cast<std::size_t>(k));
  for (std::int64_t r = 0; r < spec.records; ++r) {
    for (Eigen::Index a = 0; a < k; ++a) u(a) = rng.normal();
    const Eigen::VectorXd z = factor * u;
    dataset.unit_ids.push_back("u" + std::to_string(r + 1));
    for (Eigen::Index a = 0; a < k; ++a) {
      const auto& cuts = spec.thresholds[static_cast<std::size_t>(a)];
      int code = 1;
      for (double c : cuts) {
        if (z(a) > c) ++code;
      }
      dataset.codes.push_back(code);
    }
  }
  return dataset;
}

void FrameSpec::validate() const {
  if (blocks < 4) throw DataError("frame spec: block count must be >= 4");
  if (households_min < 1 || households_max < households_min) {
    throw DataError("frame spec: invalid household range");
  }
  if (difficulty_correlation < -1.0 || difficulty_correlation > 1.0) {
    throw DataError("frame spec: correlation target must lie in [-1, 1]");
  }
  if (!(wealth_sd > 0.0)) throw DataError("frame spec: sd must be positive");
  if (!(difficulty_shape > 0.0)) {
    throw DataError("frame spec: difficulty shape must be positive");
  }
}

namespace {

double sample_skewness(const std::vector<double>& x) {
  const double n = static_cast<double>(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double m2 = 0.0, m3 = 0.0;
  for (double v : x) {
    const double d = v - mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  m2 /= n;
  m3 /= n;
  return m3 / std::pow(m2, 1.5);
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

FrameSample sample_frame(const FrameSpec& spec) {
  spec.validate();
  const auto n = static_cast<std::size_t>(spec.blocks);

  Rng rng(spec.seed);
  std::vector<double> e1(n), e2(n);
  for (std::size_t i = 0; i < n; ++i) {
    e1[i] = rng.normal();
    e2[i] = rng.normal();
  }

  // Wealth margin: power transform of the latent's uniform score, exponent
  // fitted by bisection on the sample skewness (monotone in the exponent),
  // then affine to the exact sample mean and sd.
  std::vector<double> uniform(n);
  for (std::size_t i = 0; i < n; ++i) uniform[i] = normal::cdf(e1[i]);
  const auto skew_at = [&](double p) {
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = std::pow(uniform[i], p);
    return sample_skewness(y);
  };
  constexpr double kPLo = 0.05, kPHi = 40.0;
  const double skew_lo = skew_at(kPLo);
  const double skew_hi = skew_at(kPHi);
  if (spec.wealth_skewness < skew_lo || spec.wealth_skewness > skew_hi) {
    throw DataError(
        "frame spec: skewness " + std::to_string(spec.wealth_skewness) +
        " unattainable by the power family on this sample; attainable range [" +
        std::to_string(skew_lo) + ", " + std::to_string(skew_hi) + "]");
  }
  double p_lo = kPLo, p_hi = kPHi;
  for (int iter = 0; iter < 80; ++iter) {
    const double mid = 0.5 * (p_lo + p_hi);
    if (skew_at(mid) < spec.wealth_skewness) p_lo = mid;
    else p_hi = mid;
  }
  const double exponent = 0.5 * (p_lo + p_hi);

  std::vector<double> wealth(n);
  for (std::size_t i = 0; i < n; ++i) wealth[i] = std::pow(uniform[i], exponent);
  {
    const double mean =
        std::accumulate(wealth.begin(), wealth.end(), 0.0) /
        static_cast<double>(n);
    double ss = 0.0;
    for (double v : wealth) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n));
    for (double& v : wealth) {
      v = spec.wealth_mean + spec.wealth_sd * (v - mean) / sd;
      v = std::clamp(v, 0.0, 100.0);
    }
  }

  // Difficulty margin and latent correlation. Monotone margins attenuate the
  // Pearson correlation, so the latent rho is calibrated by bisection until
  // the emitted pair hits the target.
  const auto difficulty_at = [&](double lambda) {
    std::vector<double> d(n);
    const double rest = std::sqrt(1.0 - lambda * lambda);
    for (std::size_t i = 0; i < n; ++i) {
      const double z = lambda * e1[i] + rest * e2[i];
      d[i] = 100.0 * std::pow(normal::cdf(z), spec.difficulty_shape);
    }
    return d;
  };
  constexpr double kLambdaBound = 0.999999;
  double lambda = 0.0;
  std::vector<double> difficulty;
  if (spec.difficulty_correlation <=
      pearson(wealth, difficulty_at(-kLambdaBound))) {
    lambda = -kLambdaBound;
  } else if (spec.difficulty_correlation >=
             pearson(wealth, difficulty_at(kLambdaBound))) {
    lambda = kLambdaBound;
  } else {
    double lo = -kLambdaBound, hi = kLambdaBound;
    for (int iter = 0; iter < 60; ++iter) {
      const double mid = 0.5 * (lo + hi);
      if (pearson(wealth, difficulty_at(mid)) < spec.difficulty_correlation) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    lambda = 0.5 * (lo + hi);
  }
  difficulty = difficulty_at(lambda);

  FrameSample out;
  out.latent_correlation = lambda;
  out.power_exponent = exponent;
  out.achieved_correlation = pearson(wealth, difficulty);
  {
    const double mean =
        std::accumulate(wealth.begin(), wealth.end(), 0.0) /
        static_cast<double>(n);
    double ss = 0.0;
    for (double v : wealth) ss += (v - mean) * (v - mean);
    out.achieved_mean = mean;
    out.achieved_sd = std::sqrt(ss / static_cast<double>(n));
    out.achieved_skewness = sample_skewness(wealth);
  }

  out.frame.block_ids.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.frame.block_ids.push_back("b" + std::to_string(i + 1));
    out.frame.village_ids.push_back("v" + std::to_string(i + 1));
    out.frame.wealth.push_back(wealth[i]);
    out.frame.households.push_back(static_cast<int>(
        rng.uniform_int(spec.households_min, spec.households_max)));
    out.frame.difficulty.push_back(difficulty[i]);
  }
  return out;
}

SynthSpec parse_synth_spec(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw IoError(std::string("synth spec: JSON parse failure: ") + e.what());
  }
  SynthSpec spec;
  try {
    const std::string kind = doc.at("kind").get<std::string>();
    if (kind == "ordinal") {
      spec.is_frame = false;
      const auto& corr = doc.at("correlation");
      const auto k = static_cast<Eigen::Index>(corr.size());
      spec.ordinal.correlation.resize(k, k);
      for (Eigen::Index i = 0; i < k; ++i) {
        const auto& row = corr.at(static_cast<std::size_t>(i));
        if (static_cast<Eigen::Index>(row.size()) != k) {
          throw DataError("synth spec: correlation rows must all have length " +
                          std::to_string(k));
        }
        for (Eigen::Index j = 0; j < k; ++j) {
          spec.ordinal.correlation(i, j) =
              row.at(static_cast<std::size_t>(j)).get<double>();
        }
      }
      for (const auto& t : doc.at("thresholds")) {
        spec.ordinal.thresholds.push_back(t.get<std::vector<double>>());
      }
      spec.ordinal.records = doc.at("records").get<std::int64_t>();
      spec.ordinal.seed = doc.at("seed").get<std::uint64_t>();
      spec.ordinal.validate();
    } else if (kind == "frame") {
      spec.is_frame = true;
      spec.frame.blocks = doc.at("blocks").get<std::int64_t>();
      spec.frame.seed = doc.at("seed").get<std::uint64_t>();
      if (doc.contains("households")) {
        spec.frame.households_min = doc["households"].at("min").get<int>();
        spec.frame.households_max = doc["households"].at("max").get<int>();
      }
      if (doc.contains("difficulty_correlation")) {
        spec.frame.difficulty_correlation =
            doc["difficulty_correlation"].get<double>();
      }
      if (doc.contains("wealth_moments")) {
        const auto& m = doc["wealth_moments"];
        spec.frame.wealth_mean = m.at("mean").get<double>();
        spec.frame.wealth_sd = m.at("sd").get<double>();
        spec.frame.wealth_skewness = m.at("skewness").get<double>();
      }
      if (doc.contains("difficulty_shape")) {
        spec.frame.difficulty_shape = doc["difficulty_shape"].get<double>();
      }
      spec.frame.validate();
    } else {
      throw DataError("synth spec: unknown kind '" + kind + "'");
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("synth spec: malformed document: ") + e.what());
  }
  return spec;
}

SynthSpec load_synth_spec(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open synth spec: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_synth_spec(buf.str());
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  } catch (const IoError& e) {
    throw IoError(path + ": " + e.what());
  }
}

FrameSpec remote_area_preset() {
  FrameSpec spec;
  spec.blocks = 5000;
  spec.seed = 1;
  return spec;
}

}  // namespace stratkit
