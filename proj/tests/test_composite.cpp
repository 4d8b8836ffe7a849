#include <initializer_list>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "doctest.h"
#include "stratkit/composite.hpp"
#include "stratkit/errors.hpp"
#include "stratkit/normal.hpp"
#include "stratkit/rng.hpp"
#include "test_util.hpp"

using namespace stratkit;

namespace {

// Literal reference weight table in the standard score1..score4 layout
// (four-category variables fill all columns, three-category ones leave the
// last blank).
WeightTable reference_weights() {
  WeightTable w;
  w.variable_names = {"var1", "var2", "var3", "var4", "var5", "var6", "var7"};
  w.weights = {
      {-0.756, -0.385, -0.215, 0.142},
      {-0.515, -0.231, 0.133},
      {-0.707, -0.369, 0.131},
      {-0.953, -0.613, -0.328, 0.217},
      {-1.069, -0.657, 0.121},
      {-0.395, -0.002, 0.392},
      {-0.803, -0.545, -0.455, 0.160},
  };
  w.loading.assign(7, 1.0);
  return w;
}

Schema reference_schema() {
  Schema s;
  s.role = SchemaRole::Geographic;
  const int counts[] = {4, 3, 3, 4, 3, 3, 4};
  for (int a = 0; a < 7; ++a) {
    VariableSpec v;
    v.name = "var" + std::to_string(a + 1);
    for (int b = 1; b <= counts[a]; ++b) v.categories.push_back(std::to_string(b));
    v.direction = Direction::HardToEasy;
    s.variables.push_back(std::move(v));
  }
  return s;
}

OrdinalDataset all_codes_one() {
  OrdinalDataset d;
  d.schema = reference_schema();
  d.unit_ids = {"u1"};
  d.codes.assign(7, 1);
  return d;
}

// Independent oracle for the truncated-normal mean: Simpson quadrature of
// x phi(x) over (lo, hi] divided by the interval mass.
double truncated_mean_quadrature(double lo, double hi) {
  const double a = std::isinf(lo) ? -10.0 : lo;
  const double b = std::isinf(hi) ? 10.0 : hi;
  const int n = 20000;
  const double h = (b - a) / n;
  auto f = [](double x) { return x * normal::pdf(x); };
  double sum = f(a) + f(b);
  for (int i = 1; i < n; ++i) sum += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  const double integral = sum * h / 3.0;
  return integral / (normal::cdf(hi) - normal::cdf(lo));
}

VariableThresholds plain_thresholds(const std::vector<double>& cuts) {
  VariableThresholds t;
  t.cuts = cuts;
  t.effective_category.resize(cuts.size() + 1);
  for (std::size_t b = 0; b < t.effective_category.size(); ++b) {
    t.effective_category[b] = static_cast<int>(b);
  }
  return t;
}

}  // namespace

TEST_SUITE("composite_index") {

TEST_CASE("two-variable matrix has the closed-form leading eigenpair") {
  PolychoricMatrix m;
  m.values = Eigen::MatrixXd(2, 2);
  m.values << 1.0, 0.5, 0.5, 1.0;
  m.variable_names = {"a", "b"};
  ThresholdSet t;
  t.vars = {plain_thresholds({0.0}), plain_thresholds({0.0})};
  const WeightTable w = derive_weights(m, t);
  CHECK(w.lambda1 == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(w.loading[0] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(w.loading[1] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(w.monotonicity_violations.empty());
}

TEST_CASE("eigendecomposition residual is tiny") {
  PolychoricMatrix m;
  m.values = Eigen::MatrixXd(3, 3);
  m.values << 1.0, 0.52, 0.31, 0.52, 1.0, 0.44, 0.31, 0.44, 1.0;
  m.variable_names = {"a", "b", "c"};
  ThresholdSet t;
  t.vars = {plain_thresholds({-0.3}), plain_thresholds({0.2}),
            plain_thresholds({0.6})};
  const WeightTable w = derive_weights(m, t);
  Eigen::VectorXd e(3);
  for (int i = 0; i < 3; ++i) e(i) = w.loading[static_cast<std::size_t>(i)];
  const Eigen::VectorXd residual = m.values * e - w.lambda1 * e;
  CHECK(residual.cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("symmetric thresholds zero out the middle category") {
  PolychoricMatrix m;
  m.values = Eigen::MatrixXd(2, 2);
  m.values << 1.0, 0.4, 0.4, 1.0;
  m.variable_names = {"a", "b"};
  ThresholdSet t;
  t.vars = {plain_thresholds({-0.6744897501960817, 0.6744897501960817}),
            plain_thresholds({0.0})};
  const WeightTable w = derive_weights(m, t);
  CHECK(std::fabs(w.weights[0][1]) <= 1e-12);  // symmetric truncation
  CHECK(w.weights[0][0] < 0.0);
  CHECK(w.weights[0][2] > 0.0);
}

TEST_CASE("category scores increase and match the quadrature oracle") {
  const std::vector<double> cuts = {-0.9, -0.1, 0.8};
  PolychoricMatrix m;
  m.values = Eigen::MatrixXd(2, 2);
  m.values << 1.0, 0.3, 0.3, 1.0;
  m.variable_names = {"a", "b"};
  ThresholdSet t;
  t.vars = {plain_thresholds(cuts), plain_thresholds({0.0})};
  const WeightTable w = derive_weights(m, t);

  const double loading = w.loading[0];
  double prev = -1e9;
  for (std::size_t b = 0; b < 4; ++b) {
    const double lo = b == 0 ? -std::numeric_limits<double>::infinity()
                             : cuts[b - 1];
    const double hi = b == 3 ? std::numeric_limits<double>::infinity()
                             : cuts[b];
    const double oracle = truncated_mean_quadrature(lo, hi);
    const double score = w.weights[0][b] / loading;
    CHECK(score == doctest::Approx(oracle).epsilon(1e-6));
    CHECK(score > prev);
    prev = score;
  }
}

TEST_CASE("category scores obey the law of total expectation") {
  // Probability-weighted mean of the derived category scores must vanish,
  // with p_b implied by the thresholds.
  const std::vector<double> cuts = {-1.2, -0.15, 0.4, 1.3};
  PolychoricMatrix m;
  m.values = Eigen::MatrixXd(2, 2);
  m.values << 1.0, 0.35, 0.35, 1.0;
  m.variable_names = {"a", "b"};
  ThresholdSet t;
  t.vars = {plain_thresholds(cuts), plain_thresholds({0.0})};
  const WeightTable w = derive_weights(m, t);
  const auto& tv = t.vars[0];
  double expectation = 0.0;
  for (int e = 0; e < tv.effective_count(); ++e) {
    const double mass = normal::cdf(tv.upper(e)) - normal::cdf(tv.lower(e));
    expectation += mass * w.weights[0][static_cast<std::size_t>(e)] /
                   w.loading[0];
  }
  CHECK(std::fabs(expectation) <= 1e-9);
}

TEST_CASE("ambiguous first component is rejected") {
  PolychoricMatrix m;
  m.values = Eigen::MatrixXd::Identity(2, 2);
  m.variable_names = {"a", "b"};
  ThresholdSet t;
  t.vars = {plain_thresholds({0.0}), plain_thresholds({0.0})};
  CHECK_THROWS_AS(derive_weights(m, t), DataError);
}

TEST_CASE("collapsed categories share their neighbour's weight") {
  PolychoricMatrix m;
  m.values = Eigen::MatrixXd(2, 2);
  m.values << 1.0, 0.4, 0.4, 1.0;
  m.variable_names = {"a", "b"};
  VariableThresholds collapsed;
  collapsed.cuts = {0.0};
  collapsed.effective_category = {0, 0, 1};  // middle category was empty
  ThresholdSet t;
  t.vars = {collapsed, plain_thresholds({0.0})};
  const WeightTable w = derive_weights(m, t);
  REQUIRE(w.weights[0].size() == 3);
  CHECK(w.weights[0][0] == w.weights[0][1]);
  CHECK(w.weights[0][2] > w.weights[0][0]);
}

TEST_CASE("index of the all-ones unit matches the reference column sum") {
  const double total = compute_index(all_codes_one(), reference_weights())[0];
  CHECK(std::fabs(total - (-5.198)) <= 1e-12);
}

TEST_CASE("zero weights give a zero index") {
  WeightTable w = reference_weights();
  for (auto& row : w.weights) std::fill(row.begin(), row.end(), 0.0);
  OrdinalDataset d = all_codes_one();
  CHECK(compute_index(d, w)[0] == 0.0);
}

TEST_CASE("identical codes give identical indexes") {
  OrdinalDataset d;
  d.schema = reference_schema();
  d.unit_ids = {"u1", "u2"};
  for (int i = 0; i < 2; ++i) {
    d.codes.insert(d.codes.end(), {2, 1, 3, 4, 2, 3, 1});
  }
  const auto idx = compute_index(d, reference_weights());
  CHECK(idx[0] == idx[1]);
}

TEST_CASE("compute_index is linear in the weight table") {
  Rng rng(15);
  OrdinalDataset d;
  d.schema = reference_schema();
  for (int i = 0; i < 50; ++i) {
    d.unit_ids.push_back("u" + std::to_string(i));
    for (const auto& v : d.schema.variables) {
      d.codes.push_back(static_cast<int>(rng.uniform_int(1, v.category_count())));
    }
  }
  WeightTable w1 = reference_weights();
  WeightTable w2 = reference_weights();
  for (auto& row : w2.weights) {
    for (auto& x : row) x = 0.25 * x + 0.11;
  }
  WeightTable sum = reference_weights();
  for (std::size_t a = 0; a < sum.weights.size(); ++a) {
    for (std::size_t b = 0; b < sum.weights[a].size(); ++b) {
      sum.weights[a][b] = w1.weights[a][b] + w2.weights[a][b];
    }
  }
  const auto i1 = compute_index(d, w1);
  const auto i2 = compute_index(d, w2);
  const auto is = compute_index(d, sum);
  for (std::size_t r = 0; r < d.record_count(); ++r) {
    CHECK(is[r] == doctest::Approx(i1[r] + i2[r]).epsilon(1e-12));
  }
}

TEST_CASE("schema mismatch is rejected") {
  WeightTable w = reference_weights();
  w.weights[0].pop_back();
  CHECK_THROWS_AS(compute_index(all_codes_one(), w), DataError);
}

TEST_CASE("minmax endpoints and midpoint are exact") {
  const std::vector<double> ref = {0.0, 10.0, 40.0};
  const Normalized n = minmax_normalize({0.0, 20.0, 40.0}, ref);
  CHECK(n.values[0] == 0.0);
  CHECK(n.values[1] == 50.0);
  CHECK(n.values[2] == 100.0);
  CHECK(!n.degenerate);
}

TEST_CASE("normalized reference attains 0 and 100") {
  Rng rng(31);
  std::vector<double> ref;
  for (int i = 0; i < 100; ++i) ref.push_back(rng.normal() * 7.0 + 3.0);
  const Normalized n = minmax_normalize(ref, ref);
  CHECK(*std::min_element(n.values.begin(), n.values.end()) == 0.0);
  CHECK(*std::max_element(n.values.begin(), n.values.end()) == 100.0);
  for (double v : n.values) {
    CHECK(v >= 0.0);
    CHECK(v <= 100.0);
  }
}

TEST_CASE("degenerate reference maps everything to 50") {
  const Normalized n = minmax_normalize({1.0, 2.0}, {5.0, 5.0, 5.0});
  CHECK(n.degenerate);
  CHECK(n.values == std::vector<double>{50.0, 50.0});
  CHECK_THROWS_AS(minmax_normalize({1.0}, {}), DataError);
}

TEST_CASE("projection clamps out-of-population units") {
  CHECK(project_normalized(5.0, 0.0, 10.0).value == 50.0);
  CHECK(!project_normalized(5.0, 0.0, 10.0).clamped);
  CHECK(project_normalized(12.0, 0.0, 10.0).value == 100.0);
  CHECK(project_normalized(12.0, 0.0, 10.0).clamped);
  CHECK(project_normalized(-1.0, 0.0, 10.0).value == 0.0);
}

TEST_CASE("difficulty orientation flips a wealth-oriented index") {
  // Reference-style weights grow with the category, so raw scores are high
  // for easy villages; the published convention needs 100 = hard.
  OrdinalDataset d;
  d.schema = reference_schema();
  Rng rng(8);
  for (int i = 0; i < 300; ++i) {
    d.unit_ids.push_back("u" + std::to_string(i));
    for (const auto& v : d.schema.variables) {
      d.codes.push_back(static_cast<int>(rng.uniform_int(1, v.category_count())));
    }
  }
  IndexVector index = build_index(d, reference_weights());
  const std::vector<double> before = index.normalized;
  orient_difficulty(index, d);
  CHECK(index.orientation_flipped);
  for (std::size_t i = 0; i < before.size(); ++i) {
    CHECK(index.normalized[i] == doctest::Approx(100.0 - before[i]).epsilon(1e-12));
  }

  // The hardest village must now outrank the easiest one.
  OrdinalDataset pair;
  pair.schema = reference_schema();
  pair.unit_ids = {"hard", "easy"};
  pair.codes = {1, 1, 1, 1, 1, 1, 1, 4, 3, 3, 4, 3, 3, 4};
  IndexVector pair_index = build_index(pair, reference_weights());
  orient_difficulty(pair_index, pair);
  CHECK(pair_index.normalized[0] > pair_index.normalized[1]);
}

TEST_CASE("orientation is a no-op when already aligned and an involution") {
  OrdinalDataset d;
  d.schema = reference_schema();
  Rng rng(9);
  for (int i = 0; i < 200; ++i) {
    d.unit_ids.push_back("u" + std::to_string(i));
    for (const auto& v : d.schema.variables) {
      d.codes.push_back(static_cast<int>(rng.uniform_int(1, v.category_count())));
    }
  }
  // Negated weights correlate positively with difficulty already.
  WeightTable w = reference_weights();
  for (auto& row : w.weights) {
    for (auto& x : row) x = -x;
  }
  IndexVector index = build_index(d, w);
  const std::vector<double> before = index.normalized;
  orient_difficulty(index, d);
  CHECK(!index.orientation_flipped);
  CHECK(index.normalized == before);

  // Flipping twice restores the original values.
  IndexVector other = build_index(d, reference_weights());
  const std::vector<double> original = other.normalized;
  orient_difficulty(other, d);
  for (double& v : other.normalized) v = 100.0 - v;  // undo by hand
  for (std::size_t i = 0; i < original.size(); ++i) {
    CHECK(other.normalized[i] == doctest::Approx(original[i]).epsilon(1e-12));
  }
}

TEST_CASE("zero-variance difficulty ranking is an error") {
  Schema s;
  s.variables.push_back({"a", {"1", "2"}, Direction::HardToEasy});
  OrdinalDataset d;
  d.schema = s;
  d.unit_ids = {"u1", "u2"};
  d.codes = {1, 1};
  IndexVector index;
  index.unit_ids = d.unit_ids;
  index.raw = {1.0, 2.0};
  index.normalized = {0.0, 100.0};
  CHECK_THROWS_AS(orient_difficulty(index, d), DataError);
}

TEST_CASE("block aggregation means and counts") {
  IndexVector households;
  households.unit_ids = {"h1", "h2", "h3"};
  households.raw = {0, 0, 0};
  households.normalized = {40.0, 60.0, 73.2};
  const BlockAggregate agg =
      aggregate_blocks(households, {"b1", "b1", "b2"});
  REQUIRE(agg.frame.size() == 2);
  CHECK(agg.frame.wealth[0] == doctest::Approx(50.0));
  CHECK(agg.frame.households[0] == 2);
  CHECK(agg.frame.wealth[1] == doctest::Approx(73.2));
  CHECK(agg.frame.households[1] == 1);
}

TEST_CASE("household-weighted frame mean equals the household mean") {
  Rng rng(21);
  IndexVector households;
  std::vector<std::string> blocks;
  for (int i = 0; i < 1000; ++i) {
    households.unit_ids.push_back("h" + std::to_string(i));
    households.raw.push_back(0.0);
    households.normalized.push_back(rng.uniform01() * 100.0);
    blocks.push_back("b" + std::to_string(rng.uniform_int(1, 37)));
  }
  const BlockAggregate agg = aggregate_blocks(households, blocks);
  double weighted = 0.0;
  std::int64_t total = 0;
  for (std::size_t i = 0; i < agg.frame.size(); ++i) {
    weighted += agg.frame.wealth[i] * agg.frame.households[i];
    total += agg.frame.households[i];
  }
  const double household_mean =
      std::accumulate(households.normalized.begin(),
                      households.normalized.end(), 0.0) /
      static_cast<double>(households.normalized.size());
  CHECK(weighted / static_cast<double>(total) ==
        doctest::Approx(household_mean).epsilon(1e-9));
}

TEST_CASE("listed blocks without households are excluded and reported") {
  IndexVector households;
  households.unit_ids = {"h1"};
  households.raw = {0.0};
  households.normalized = {10.0};
  const BlockAggregate agg = aggregate_blocks(
      households, {"b1"}, {{"b1", "v1"}, {"b9", "v2"}});
  CHECK(agg.frame.size() == 1);
  CHECK(agg.frame.village_ids[0] == "v1");
  REQUIRE(agg.empty_blocks.size() == 1);
  CHECK(agg.empty_blocks[0] == "b9");
}

TEST_CASE("group summaries") {
  const GroupedMeans one = summarize_by_group({3.0, 5.0}, {"g", "g"});
  REQUIRE(one.groups.size() == 1);
  CHECK(one.groups[0].mean == doctest::Approx(one.overall_mean));

  const GroupedMeans two =
      summarize_by_group({0.0, 0.0, 100.0, 100.0}, {"a", "a", "b", "b"});
  REQUIRE(two.groups.size() == 2);
  CHECK(two.groups[0].mean == 0.0);
  CHECK(two.groups[1].mean == 100.0);
  CHECK(two.overall_mean == 50.0);
}

TEST_CASE("weight table csv round-trips the reference layout") {
  TempDir dir("weights_rt");
  const WeightTable w = reference_weights();
  write_weights_csv(w, dir.file("w.csv"));
  const std::string text = slurp(dir.file("w.csv"));
  CHECK(text.find("variable,score1,score2,score3,score4") == 0);
  CHECK(text.find("var2,-0.515,-0.231,0.133,") != std::string::npos);
  const WeightTable back = load_weights_csv(dir.file("w.csv"));
  CHECK(back.variable_names == w.variable_names);
  CHECK(back.weights == w.weights);

  spit(dir.file("gap.csv"), "variable,score1,score2,score3\nv,-1,,0.5\n");
  CHECK_THROWS_AS(load_weights_csv(dir.file("gap.csv")), DataError);
  spit(dir.file("short.csv"), "variable,score1,score2\nv,-1,\n");
  CHECK_THROWS_AS(load_weights_csv(dir.file("short.csv")), DataError);
}

TEST_CASE("frame csv round-trips and validates") {
  TempDir dir("frame_rt");
  CensusBlockFrame frame;
  frame.block_ids = {"b1", "b2"};
  frame.village_ids = {"v1", ""};
  frame.wealth = {38.5756, 52.25};
  frame.households = {80, 120};
  frame.difficulty = {72.0, std::numeric_limits<double>::quiet_NaN()};
  write_frame_csv(frame, dir.file("f.csv"));
  const CensusBlockFrame back = load_frame_csv(dir.file("f.csv"));
  CHECK(back.block_ids == frame.block_ids);
  CHECK(back.wealth == frame.wealth);
  CHECK(back.households == frame.households);
  CHECK(back.difficulty[0] == 72.0);
  CHECK(std::isnan(back.difficulty[1]));
  CHECK(!back.has_difficulty());

  spit(dir.file("bad.csv"),
       "block_id,village_id,wealth_concentration,households,difficulty\n"
       "b1,v1,120.5,10,50\n");
  CHECK_THROWS_AS(load_frame_csv(dir.file("bad.csv")), DataError);
}

}  // TEST_SUITE
