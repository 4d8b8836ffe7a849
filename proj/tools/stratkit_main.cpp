// Command-line front end: schema validation, index construction,
// stratification scenario sweeps, and synthetic data generation. Every run
// writes a manifest with input fingerprints and the fully resolved
// configuration; identical inputs and flags reproduce outputs byte for byte.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"

#include "stratkit/allocation.hpp"
#include "stratkit/composite.hpp"
#include "stratkit/csv.hpp"
#include "stratkit/errors.hpp"
#include "stratkit/manifest.hpp"
#include "stratkit/polychoric.hpp"
#include "stratkit/rng.hpp"
#include "stratkit/scenario.hpp"
#include "stratkit/schema.hpp"
#include "stratkit/synthcopula.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace stratkit;

namespace {

struct CommonConfig {
  std::string out_dir;
  bool serial = false;
  std::string config_path;  // previous manifest to take defaults from
};

void ensure_out_dir(const std::string& out_dir,
                    const std::vector<std::string>& inputs) {
  for (const auto& input : inputs) {
    std::error_code ec;
    if (fs::exists(input, ec) && fs::exists(out_dir, ec) &&
        fs::equivalent(input, out_dir, ec)) {
      throw DataError("output directory collides with input path: " + input);
    }
    if (fs::path(input).lexically_normal() ==
        fs::path(out_dir).lexically_normal()) {
      throw DataError("output directory collides with input path: " + input);
    }
  }
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory: " + out_dir);
}

ordered_json input_fingerprints(const std::vector<std::string>& inputs) {
  ordered_json arr = ordered_json::array();
  for (const auto& path : inputs) {
    ordered_json e;
    e["path"] = path;
    e["fnv1a64"] = fingerprint_file(path);
    arr.push_back(std::move(e));
  }
  return arr;
}

ordered_json manifest_head(const std::string& command) {
  ordered_json doc;
  doc["tool"] = {{"name", kToolName}, {"version", tool_version()}};
  doc["command"] = command;
  return doc;
}

// Pulls defaults out of a previous run's manifest; explicitly passed flags
// still win because they are applied after parsing.
ordered_json load_config_defaults(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config manifest: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  ordered_json doc;
  try {
    doc = ordered_json::parse(buf.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError(path + ": JSON parse failure: " + e.what());
  }
  if (!doc.contains("config")) {
    throw DataError(path + ": manifest has no config block");
  }
  return doc["config"];
}

template <typename T>
void take_default(const ordered_json& cfg, const char* key, const CLI::Option* opt,
                  T& value) {
  if (opt->count() == 0 && cfg.contains(key)) {
    value = cfg[key].get<T>();
  }
}

// ---------------------------------------------------------------------------
// index

struct IndexConfig : CommonConfig {
  std::string schema_path;
  std::string data_path;
  std::string village_map_path;
  std::string village_index_path;
};

int run_index(const IndexConfig& cfg) {
  std::vector<std::string> inputs = {cfg.schema_path, cfg.data_path};
  if (!cfg.village_map_path.empty()) inputs.push_back(cfg.village_map_path);
  if (!cfg.village_index_path.empty()) inputs.push_back(cfg.village_index_path);
  ensure_out_dir(cfg.out_dir, inputs);

  const Schema schema = load_schema(cfg.schema_path);
  const IngestResult ingest = ingest_records(cfg.data_path, schema);
  const OrdinalDataset& data = ingest.dataset;
  if (data.record_count() == 0) {
    throw DataError(cfg.data_path + ": no records to index");
  }
  const Exec exec = cfg.serial ? Exec::Serial : Exec::Parallel;

  const PolychoricResult pc = polychoric_matrix(data, exec);
  const WeightTable weights = derive_weights(pc.matrix, pc.thresholds);
  IndexVector index = build_index(data, weights, exec);
  if (schema.role == SchemaRole::Geographic) {
    orient_difficulty(index, data);
  }

  std::vector<std::string> outputs;
  const auto emit = [&](const std::string& name, auto&& writer) {
    writer(cfg.out_dir + "/" + name);
    outputs.push_back(name);
  };
  emit("weights.csv",
       [&](const std::string& p) { write_weights_csv(weights, p); });
  emit("thresholds.csv", [&](const std::string& p) {
    write_thresholds_csv(pc.thresholds, pc.matrix.variable_names, p);
  });
  emit("correlation.csv",
       [&](const std::string& p) { write_correlation_csv(pc.matrix, p); });
  emit("index.csv", [&](const std::string& p) { write_index_csv(index, p); });

  ordered_json notes = ordered_json::array();
  if (data.has_groups()) {
    if (schema.role == SchemaRole::Wealth) {
      // Group keys are census-block ids; build the frame.
      std::vector<std::pair<std::string, std::string>> block_villages;
      if (!cfg.village_map_path.empty()) {
        const csv::Table map = csv::read_file(cfg.village_map_path);
        if (map.header.size() < 2) {
          throw DataError(cfg.village_map_path +
                          ": expected columns block_id,village_id");
        }
        for (const auto& row : map.rows) {
          block_villages.emplace_back(row[0], row[1]);
        }
      }
      BlockAggregate agg =
          aggregate_blocks(index, data.group_keys, block_villages);
      for (const auto& b : agg.empty_blocks) {
        notes.push_back("block without households excluded: " + b);
      }
      if (!cfg.village_index_path.empty()) {
        // Join the village difficulty index onto the blocks.
        const csv::Table vi = csv::read_file(cfg.village_index_path);
        const auto id_col = vi.column("unit_id");
        const auto norm_col = vi.column("normalized");
        if (!id_col || !norm_col) {
          throw DataError(cfg.village_index_path +
                          ": expected columns unit_id,normalized");
        }
        std::map<std::string, double> difficulty;
        for (const auto& row : vi.rows) {
          difficulty[row[*id_col]] =
              csv::parse_double(row[*norm_col], cfg.village_index_path);
        }
        for (std::size_t i = 0; i < agg.frame.size(); ++i) {
          const std::string& village = agg.frame.village_ids[i];
          if (village.empty()) {
            throw DataError("block " + agg.frame.block_ids[i] +
                            " has no village mapping; pass --village-map");
          }
          const auto it = difficulty.find(village);
          if (it == difficulty.end()) {
            throw DataError("village '" + village +
                            "' missing from " + cfg.village_index_path);
          }
          agg.frame.difficulty[i] = it->second;
        }
      }
      emit("block_frame.csv",
           [&](const std::string& p) { write_frame_csv(agg.frame, p); });
    } else {
      const GroupedMeans means =
          summarize_by_group(index.normalized, data.group_keys);
      emit("group_summary.csv", [&](const std::string& p) {
        csv::Table t;
        t.header = {"group", "mean_normalized", "units"};
        for (const auto& g : means.groups) {
          t.rows.push_back({g.key, csv::format_double(g.mean),
                            std::to_string(g.count)});
        }
        t.rows.push_back({"(overall)", csv::format_double(means.overall_mean),
                          std::to_string(index.unit_ids.size())});
        csv::write_file(p, t);
      });
    }
  }

  ordered_json doc = manifest_head("index");
  doc["config"] = {{"schema", cfg.schema_path},
                   {"data", cfg.data_path},
                   {"village_map", cfg.village_map_path},
                   {"village_index", cfg.village_index_path},
                   {"out", cfg.out_dir},
                   {"serial", cfg.serial}};
  doc["inputs"] = input_fingerprints(inputs);
  doc["index"] = {{"role", to_string(schema.role)},
                  {"records", data.record_count()},
                  {"bound_min", index.bound_min},
                  {"bound_max", index.bound_max},
                  {"orientation_flipped", index.orientation_flipped},
                  {"psd_repaired", pc.matrix.psd_repaired},
                  {"lambda1", weights.lambda1}};
  if (!weights.monotonicity_violations.empty()) {
    doc["index"]["monotonicity_violations"] = weights.monotonicity_violations;
  }
  if (!notes.empty()) doc["notes"] = notes;
  outputs.push_back("manifest.json");
  doc["outputs"] = outputs;
  write_manifest(doc, cfg.out_dir + "/manifest.json");
  return 0;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateConfig : CommonConfig {
  std::string frame_path;
  int n = 0;
  int classes = 0;
  std::string grid = "4x4";
  bool include_corner = false;
  bool no_fpc = false;
  std::uint64_t seed = 0;  // recorded; the sweep itself is deterministic
};

int run_simulate(const SimulateConfig& cfg) {
  ensure_out_dir(cfg.out_dir, {cfg.frame_path});
  const CensusBlockFrame frame = load_frame_csv(cfg.frame_path);

  GridOptions options;
  options.total_n = cfg.n;
  options.class_count = cfg.classes;
  options.include_corner = cfg.include_corner;
  options.fpc = !cfg.no_fpc;
  options.exec = cfg.serial ? Exec::Serial : Exec::Parallel;
  const auto sep = cfg.grid.find('x');
  if (sep == std::string::npos) {
    throw DataError("grid must look like WxG, got '" + cfg.grid + "'");
  }
  options.max_wealth_strata = static_cast<int>(
      csv::parse_int(cfg.grid.substr(0, sep), "--grid"));
  options.max_difficulty_strata = static_cast<int>(
      csv::parse_int(cfg.grid.substr(sep + 1), "--grid"));

  ScenarioGrid grid = run_grid(frame, options);
  std::string quadrant_note;
  if (grid.successful() >= 2) {
    classify_quadrants(grid);
  } else if (grid.successful() == 1) {
    quadrant_note = "quadrants skipped: single successful scenario";
  } else {
    throw DataError("simulate: every scenario failed");
  }
  emit_reports(grid, frame, cfg.out_dir);

  ordered_json doc = manifest_head("simulate");
  doc["config"] = {{"frame", cfg.frame_path},
                   {"out", cfg.out_dir},
                   {"n", grid.total_n},
                   {"classes", cfg.classes},
                   {"grid", cfg.grid},
                   {"include_corner", cfg.include_corner},
                   {"no_fpc", cfg.no_fpc},
                   {"seed", cfg.seed},
                   {"serial", cfg.serial}};
  doc["inputs"] = input_fingerprints({cfg.frame_path});
  doc["grid"] = {{"blocks", grid.frame_size},
                 {"n", grid.total_n},
                 {"population_mean_difficulty",
                  grid.population_mean_difficulty},
                 {"median_variance", grid.median_variance},
                 {"median_cost", grid.median_cost},
                 {"scenarios", grid.scenarios.size()},
                 {"successful", grid.successful()}};
  ordered_json failures = ordered_json::array();
  for (const auto& s : grid.scenarios) {
    if (!s.ok) {
      failures.push_back({{"scenario", s.name()}, {"error", s.error}});
    }
  }
  doc["failures"] = failures;
  if (!quadrant_note.empty()) doc["notes"] = {quadrant_note};
  std::vector<std::string> outputs = {"variance_matrix.csv", "scenarios.csv",
                                      "quadrants.svg", "manifest.json"};
  for (const auto& s : grid.scenarios) {
    if (s.ok) {
      outputs.push_back("designs/" + s.name() + ".json");
      outputs.push_back("assignments/" + s.name() + ".csv");
      outputs.push_back("allocations/" + s.name() + ".csv");
    }
  }
  doc["outputs"] = outputs;
  write_manifest(doc, cfg.out_dir + "/manifest.json");
  return 0;
}

// ---------------------------------------------------------------------------
// synth

struct SynthConfig : CommonConfig {
  std::string spec_path;
  std::string preset;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::int64_t blocks = 0;  // preset override
};

int run_synth(const SynthConfig& cfg) {
  if (cfg.spec_path.empty() == cfg.preset.empty()) {
    throw DataError("pass exactly one of --spec or --preset");
  }
  SynthSpec spec;
  std::vector<std::string> inputs;
  if (!cfg.spec_path.empty()) {
    spec = load_synth_spec(cfg.spec_path);
    inputs.push_back(cfg.spec_path);
  } else if (cfg.preset == "remote-area") {
    spec.is_frame = true;
    spec.frame = remote_area_preset();
    if (cfg.blocks > 0) spec.frame.blocks = cfg.blocks;
  } else {
    throw DataError("unknown preset '" + cfg.preset + "' (try remote-area)");
  }
  if (cfg.seed_set) {
    if (spec.is_frame) spec.frame.seed = cfg.seed;
    else spec.ordinal.seed = cfg.seed;
  }
  ensure_out_dir(cfg.out_dir, inputs);

  ordered_json doc = manifest_head("synth");
  doc["config"] = {{"spec", cfg.spec_path},
                   {"preset", cfg.preset},
                   {"out", cfg.out_dir},
                   {"seed", spec.is_frame ? spec.frame.seed : spec.ordinal.seed},
                   {"blocks", cfg.blocks}};
  doc["rng"] = {{"algorithm", Rng::algorithm()}};
  if (!inputs.empty()) doc["inputs"] = input_fingerprints(inputs);

  std::vector<std::string> outputs;
  if (spec.is_frame) {
    const FrameSample sample = sample_frame(spec.frame);
    write_frame_csv(sample.frame, cfg.out_dir + "/frame.csv");
    outputs.push_back("frame.csv");
    doc["frame"] = {{"blocks", spec.frame.blocks},
                    {"target_correlation", spec.frame.difficulty_correlation},
                    {"achieved_correlation", sample.achieved_correlation},
                    {"latent_correlation", sample.latent_correlation},
                    {"power_exponent", sample.power_exponent},
                    {"achieved_mean", sample.achieved_mean},
                    {"achieved_sd", sample.achieved_sd},
                    {"achieved_skewness", sample.achieved_skewness}};
  } else {
    const OrdinalDataset data = sample_ordinal(spec.ordinal);
    save_schema(data.schema, cfg.out_dir + "/schema.json");
    write_codes_csv(data, cfg.out_dir + "/data.csv");
    outputs.push_back("schema.json");
    outputs.push_back("data.csv");
    doc["ordinal"] = {{"records", spec.ordinal.records},
                      {"variables", data.schema.variable_count()}};
  }
  outputs.push_back("manifest.json");
  doc["outputs"] = outputs;
  write_manifest(doc, cfg.out_dir + "/manifest.json");
  return 0;
}

// ---------------------------------------------------------------------------
// validate

struct ValidateConfig {
  std::string schema_path;
  std::string data_path;
};

int run_validate(const ValidateConfig& cfg) {
  int problems = 0;
  Schema schema;
  try {
    schema = load_schema(cfg.schema_path);
    std::cout << "schema ok: " << cfg.schema_path << " ("
              << schema.variable_count() << " variables, role "
              << to_string(schema.role) << ")\n";
  } catch (const std::exception& e) {
    std::cout << "schema problem: " << e.what() << "\n";
    return 1;
  }
  if (!cfg.data_path.empty()) {
    try {
      const IngestResult r = ingest_records(cfg.data_path, schema,
                                            {.collect_rejections = true});
      for (const auto& rej : r.rejections) {
        std::cout << "data problem: " << rej.message << "\n";
        ++problems;
      }
      std::cout << "data: " << r.dataset.record_count() << " usable records, "
                << r.rejections.size() << " rejected rows\n";
    } catch (const std::exception& e) {
      std::cout << "data problem: " << e.what() << "\n";
      ++problems;
    }
  }
  return problems == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"survey stratification design toolkit"};
  app.require_subcommand(1);

  IndexConfig index_cfg;
  auto* index_cmd = app.add_subcommand(
      "index", "build a composite index from ordinal microdata");
  auto* index_schema = index_cmd->add_option("--schema", index_cfg.schema_path,
                                             "schema document (JSON)")
                           ->envname("STRATKIT_SCHEMA");
  auto* index_data =
      index_cmd->add_option("--data", index_cfg.data_path, "microdata CSV")
          ->envname("STRATKIT_DATA");
  auto* index_out =
      index_cmd->add_option("--out", index_cfg.out_dir, "output directory")
          ->envname("STRATKIT_OUT");
  index_cmd->add_option("--village-map", index_cfg.village_map_path,
                        "CSV mapping block_id,village_id")
      ->envname("STRATKIT_VILLAGE_MAP");
  index_cmd->add_option("--village-index", index_cfg.village_index_path,
                        "village index CSV for the difficulty join")
      ->envname("STRATKIT_VILLAGE_INDEX");
  index_cmd->add_flag("--serial", index_cfg.serial, "disable OpenMP kernels")
      ->envname("STRATKIT_SERIAL");
  index_cmd->add_option("--config", index_cfg.config_path,
                        "previous manifest.json supplying defaults");

  SimulateConfig sim_cfg;
  auto* sim_cmd = app.add_subcommand(
      "simulate", "sweep stratification scenarios over a block frame");
  auto* sim_frame =
      sim_cmd->add_option("--frame", sim_cfg.frame_path, "block frame CSV")
          ->envname("STRATKIT_FRAME");
  auto* sim_out =
      sim_cmd->add_option("--out", sim_cfg.out_dir, "output directory")
          ->envname("STRATKIT_OUT");
  auto* sim_n = sim_cmd->add_option("--n", sim_cfg.n,
                                    "total sample size (0 = 2% of blocks)")
                    ->envname("STRATKIT_N");
  auto* sim_classes =
      sim_cmd->add_option("--classes", sim_cfg.classes,
                          "frequency classes J (0 = max(20, 15 L))")
          ->envname("STRATKIT_CLASSES");
  auto* sim_grid = sim_cmd->add_option("--grid", sim_cfg.grid,
                                       "grid bounds WxG (default 4x4)")
                       ->envname("STRATKIT_GRID");
  auto* sim_corner = sim_cmd->add_flag("--include-corner",
                                       sim_cfg.include_corner,
                                       "evaluate the (1,1) SRS baseline")
                         ->envname("STRATKIT_INCLUDE_CORNER");
  auto* sim_nofpc = sim_cmd->add_flag("--no-fpc", sim_cfg.no_fpc,
                                      "drop the finite population correction")
                        ->envname("STRATKIT_NO_FPC");
  auto* sim_seed =
      sim_cmd->add_option("--seed", sim_cfg.seed, "recorded in the manifest")
          ->envname("STRATKIT_SEED");
  sim_cmd->add_flag("--serial", sim_cfg.serial, "disable OpenMP kernels")
      ->envname("STRATKIT_SERIAL");
  sim_cmd->add_option("--config", sim_cfg.config_path,
                      "previous manifest.json supplying defaults");

  SynthConfig synth_cfg;
  auto* synth_cmd = app.add_subcommand(
      "synth", "generate synthetic ordinal data or block frames");
  synth_cmd->add_option("--spec", synth_cfg.spec_path, "generator spec (JSON)")
      ->envname("STRATKIT_SPEC");
  synth_cmd->add_option("--preset", synth_cfg.preset,
                        "built-in spec (remote-area)")
      ->envname("STRATKIT_PRESET");
  synth_cmd->add_option("--out", synth_cfg.out_dir, "output directory")
      ->envname("STRATKIT_OUT");
  auto* synth_seed = synth_cmd->add_option("--seed", synth_cfg.seed,
                                           "override the spec seed")
                         ->envname("STRATKIT_SEED");
  synth_cmd->add_option("--blocks", synth_cfg.blocks,
                        "override the preset block count")
      ->envname("STRATKIT_BLOCKS");

  ValidateConfig val_cfg;
  auto* val_cmd =
      app.add_subcommand("validate", "lint a schema and optional microdata");
  val_cmd->add_option("--schema", val_cfg.schema_path, "schema document (JSON)")
      ->required()
      ->envname("STRATKIT_SCHEMA");
  val_cmd->add_option("--data", val_cfg.data_path, "microdata CSV")
      ->envname("STRATKIT_DATA");

  CLI11_PARSE(app, argc, argv);

  try {
    if (index_cmd->parsed()) {
      if (!index_cfg.config_path.empty()) {
        const ordered_json cfg = load_config_defaults(index_cfg.config_path);
        take_default(cfg, "schema", index_schema, index_cfg.schema_path);
        take_default(cfg, "data", index_data, index_cfg.data_path);
        take_default(cfg, "out", index_out, index_cfg.out_dir);
      }
      if (index_cfg.schema_path.empty()) throw DataError("--schema is required");
      if (index_cfg.data_path.empty()) throw DataError("--data is required");
      if (index_cfg.out_dir.empty()) throw DataError("--out is required");
      return run_index(index_cfg);
    }
    if (sim_cmd->parsed()) {
      if (!sim_cfg.config_path.empty()) {
        const ordered_json cfg = load_config_defaults(sim_cfg.config_path);
        take_default(cfg, "frame", sim_frame, sim_cfg.frame_path);
        take_default(cfg, "out", sim_out, sim_cfg.out_dir);
        take_default(cfg, "n", sim_n, sim_cfg.n);
        take_default(cfg, "classes", sim_classes, sim_cfg.classes);
        take_default(cfg, "grid", sim_grid, sim_cfg.grid);
        take_default(cfg, "include_corner", sim_corner, sim_cfg.include_corner);
        take_default(cfg, "no_fpc", sim_nofpc, sim_cfg.no_fpc);
        take_default(cfg, "seed", sim_seed, sim_cfg.seed);
      }
      if (sim_cfg.frame_path.empty()) throw DataError("--frame is required");
      if (sim_cfg.out_dir.empty()) throw DataError("--out is required");
      return run_simulate(sim_cfg);
    }
    if (synth_cmd->parsed()) {
      synth_cfg.seed_set = synth_seed->count() > 0;
      if (synth_cfg.out_dir.empty()) throw DataError("--out is required");
      return run_synth(synth_cfg);
    }
    if (val_cmd->parsed()) {
      return run_validate(val_cfg);
    }
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
