#include "causig/cli.hpp"

#include "causig/error.hpp"
#include "causig/fingerprint.hpp"
#include "causig/graph_export.hpp"
#include "causig/io.hpp"
#include "causig/reachability.hpp"
#include "causig/simgen.hpp"
#include "causig/sysid.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <optional>
#include <ostream>

namespace causig::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Usage problems detected after CLI parsing (bad manifest shape, missing
// partition information).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void print_error(std::ostream& err, const std::string& code, const std::string& message) {
  err << json{{"error", code}, {"message", message}}.dump() << '\n';
}

std::string version_text() {
  return std::string("causig ") + io::kToolkitVersion +
         " (params format " + std::to_string(io::kParamsFormatVersion) +
         ", features format " + std::to_string(io::kFeaturesFormatVersion) +
         ", recording format " + std::to_string(io::kRecordingFormatVersion) + ")";
}

std::string recording_stem(const Recording& rec) {
  return rec.subject_id() + "_" + rec.task_id() + "_" + rec.scan_id();
}

RegionPartition partition_for(const Recording& rec, const std::vector<Index>& override_inputs) {
  const std::vector<Index>& inputs = override_inputs.empty() ? rec.input_indices() : override_inputs;
  if (inputs.empty()) {
    throw UsageError("no input regions: add input_indices to the sidecar or pass --input-indices");
  }
  return RegionPartition::from_inputs(rec.regions(), inputs);
}

// ---------------------------------------------------------------------------

struct FitArgs {
  std::string recording, meta, out, penalty = "ridge";
  std::optional<double> lambda;
  std::vector<Index> inputs;
  bool single = false;
  bool zscore = false;
};

void run_fit(const FitArgs& a, std::ostream&) {
  Recording rec = io::read_recording(a.recording, a.meta);
  if (a.zscore) rec = zscore_rows(rec);
  const SplitData data = split(rec, partition_for(rec, a.inputs));
  FitOptions options;
  options.lambda = a.lambda.value_or(default_lambda(rec.samples()));
  options.dt = rec.dt();
  options.single_timescale = a.single;
  options.penalty = a.penalty == "group" ? Penalty::GroupFrobenius : Penalty::Ridge;
  const FitReport report = fit(data.X, data.U, options);
  json j = io::params_to_json(report.params,
                              io::Labels{rec.subject_id(), rec.task_id(), rec.scan_id()});
  j["fit"] = {{"residual_fro", report.residual_fro},
              {"condition_warnings", report.condition_warnings},
              {"single_timescale", a.single},
              {"penalty", a.penalty}};
  io::write_atomic(a.out, j.dump(2) + "\n");
}

// ---------------------------------------------------------------------------

struct IdentifyArgs {
  std::string query, db, task, source = "slow";
};

ReferenceDB load_db(const fs::path& dir, FeatureSource source) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::NotFound, "db directory " + dir.string() + " not found");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  ReferenceDB db;
  const FeatureSource sources[] = {source};
  for (const auto& f : files) {
    const json j = io::read_json(f);
    if (j.value("format", std::string{}) != "causig-params") continue;
    const auto labels = io::labels_from_json(j);
    if (!labels) {
      warn("skipping " + f.string() + ": params file carries no subject label");
      continue;
    }
    ModelParams p = io::params_from_json(j);
    std::optional<ModelParams> single;
    if (source == FeatureSource::SingleTimescale) single = p;
    db.add({labels->subject_id, labels->task_id, labels->scan_id},
           make_entry(std::move(p), std::move(single), sources));
  }
  return db;
}

void run_identify(const IdentifyArgs& a, std::ostream& out) {
  const FeatureSource source = parse_feature_source(a.source);
  const ModelParams query = io::params_from_json(io::read_json(a.query));
  const ReferenceDB db = load_db(a.db, source);
  const Identification id = identify(modal_features(query, source), db, a.task);
  out << json{{"subject_id", id.subject_id}, {"distance", id.distance}, {"task_id", a.task},
              {"source", a.source}}
             .dump()
      << '\n';
}

// ---------------------------------------------------------------------------

struct EvaluateArgs {
  std::string manifest, out;
  int jobs = 1;
};

void run_evaluate(const EvaluateArgs& a, std::ostream& out) {
  const json manifest = io::read_json(a.manifest);
  const fs::path base = fs::path(a.manifest).parent_path();
  auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; };

  if (!manifest.contains("recordings") || !manifest.at("recordings").is_array() ||
      manifest.at("recordings").empty()) {
    throw UsageError("manifest needs a non-empty 'recordings' array");
  }
  std::vector<Recording> recordings;
  for (const auto& r : manifest.at("recordings")) {
    if (!r.contains("csv") || !r.contains("meta")) {
      throw UsageError("each manifest recording needs 'csv' and 'meta'");
    }
    recordings.push_back(io::read_recording(resolve(r.at("csv").get<std::string>()),
                                            resolve(r.at("meta").get<std::string>())));
  }

  std::vector<Index> inputs;
  if (manifest.contains("partition")) {
    inputs = manifest.at("partition").at("input_indices").get<std::vector<Index>>();
  }
  const RegionPartition partition = partition_for(recordings.front(), inputs);
  for (const auto& r : recordings) {
    const RegionPartition p = partition_for(r, inputs);
    if (p.input_indices() != partition.input_indices() || r.regions() != partition.regions()) {
      throw UsageError("recordings disagree on the region partition");
    }
  }

  const FeatureSource source = parse_feature_source(manifest.value("source", std::string("slow")));
  FitSettings settings{partition, std::nullopt};
  if (manifest.contains("lambda") && !manifest.at("lambda").is_null()) {
    settings.lambda = manifest.at("lambda").get<double>();
  }
  settings.zscore = manifest.value("zscore", false);
  settings.jobs = a.jobs;
  EvaluationOptions options{settings, source, {}};
  if (manifest.contains("folds") && manifest.at("folds").contains("conditions")) {
    options.conditions = manifest.at("folds").at("conditions").get<std::vector<std::string>>();
  }

  const AccuracyTable table = evaluate_folds(recordings, options);
  fs::path target = a.out;
  if (target.empty()) {
    if (!manifest.contains("output_dir")) throw UsageError("pass --out or set output_dir in the manifest");
    target = resolve(manifest.at("output_dir").get<std::string>()) / "accuracy.csv";
  }
  io::write_atomic(target, table.to_csv());
  out << json{{"folds", table.folds.size()}, {"mean_accuracy", table.mean_accuracy()},
              {"out", target.string()}}
             .dump()
      << '\n';
}

// ---------------------------------------------------------------------------

struct ReachArgs {
  std::string params, mode = "energy2", layout, out_values, out_grid;
  Index horizon = 20;
  bool bound_terminal = false;
  bool lp = false;
};

void run_reach(const ReachArgs& a, std::ostream&) {
  const ModelParams params = io::params_from_json(io::read_json(a.params));
  ReachOptions options;
  options.horizon = a.horizon;
  options.norm = parse_input_norm(a.mode);
  options.bound_terminal_input = a.bound_terminal;
  options.use_lp = a.lp;
  std::optional<GridLayout> layout;
  if (!a.layout.empty()) layout = GridLayout::from_json(io::read_json(a.layout));
  const ReachabilityLandscape land = reachability_landscape(params, options, layout);

  std::string values = "region,value\n";
  for (Index i = 0; i < land.values.size(); ++i) {
    values += std::to_string(i) + "," + io::format_number(land.values(i)) + "\n";
  }
  io::write_atomic(a.out_values, values);
  if (!a.out_grid.empty()) {
    if (!land.grid) throw UsageError("more than 144 regions: pass --layout to produce a grid");
    io::write_atomic(a.out_grid, grid_to_csv(*land.grid));
  }
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string config, out_dir, params, subject = "sim", task = "task", scan = "scan1";
  std::uint64_t seed = 0;
};

void run_simulate(const SimulateArgs& a, std::ostream&) {
  SimConfig cfg = sim_config_from_json(io::read_json(a.config));
  cfg.seed = a.seed;
  ModelParams system;
  if (a.params.empty()) {
    system = sample_system(cfg);
  } else {
    system = io::params_from_json(io::read_json(a.params));
    cfg.m = system.m();
    cfg.n = system.n();
  }
  const Recording rec = simulate(system, cfg, a.subject, a.task, a.scan);
  const fs::path dir = a.out_dir;
  const std::string stem = recording_stem(rec);
  io::write_recording(rec, dir / (stem + ".csv"), dir / (stem + ".json"));
  io::write_atomic(dir / (stem + "_true_params.json"),
                   io::params_to_json(system, io::Labels{a.subject, a.task, a.scan}).dump(2) + "\n");
}

// ---------------------------------------------------------------------------

struct CohortArgs {
  std::string config, out_dir;
  Index subjects = 0, scans = 0;
  std::uint64_t seed = 0;
  int jobs = 1;
};

void run_make_cohort(const CohortArgs& a, std::ostream& out) {
  CohortConfig cfg = CohortConfig::benchmark();
  if (!a.config.empty()) {
    const json j = io::read_json(a.config);
    if (j.contains("sim")) {
      cfg = cohort_config_from_json(j, cfg);
    } else {
      cfg.sim = sim_config_from_json(j, cfg.sim);
    }
  }
  cfg.subjects = a.subjects;
  cfg.scans = a.scans;
  cfg.sim.seed = a.seed;
  const Cohort cohort = make_cohort(cfg, a.jobs);

  const fs::path dir = a.out_dir;
  json manifest;
  manifest["recordings"] = json::array();
  for (const auto& rec : cohort.recordings) {
    const std::string stem = recording_stem(rec);
    io::write_recording(rec, dir / (stem + ".csv"), dir / (stem + ".json"));
    manifest["recordings"].push_back({{"csv", stem + ".csv"}, {"meta", stem + ".json"}});
  }
  for (std::size_t s = 0; s < cohort.systems.size(); ++s) {
    const std::string subject = subject_name(static_cast<Index>(s));
    io::write_atomic(dir / (subject + "_true_params.json"),
                     io::params_to_json(cohort.systems[s]).dump(2) + "\n");
  }
  manifest["partition"] = {{"input_indices", cfg.sim.resolved_input_indices()}};
  manifest["lambda"] = nullptr;
  manifest["source"] = "slow";
  manifest["output_dir"] = "results";
  manifest["seed"] = a.seed;
  io::write_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
  out << json{{"recordings", cohort.recordings.size()}, {"manifest", (dir / "manifest.json").string()}}
             .dump()
      << '\n';
}

// ---------------------------------------------------------------------------

struct GraphArgs {
  std::string params, out;
  double threshold = 0.0;
  std::optional<std::size_t> top_k;
};

void run_export_graph(const GraphArgs& a, std::ostream&) {
  const ModelParams params = io::params_from_json(io::read_json(a.params));
  io::write_atomic(a.out, export_edges(params, a.threshold, a.top_k).to_csv());
}

// ---------------------------------------------------------------------------

struct DownsampleArgs {
  std::string recording, meta, out_recording, out_meta;
  Index factor = 1;
};

void run_downsample(const DownsampleArgs& a, std::ostream&) {
  const Recording rec = io::read_recording(a.recording, a.meta);
  io::write_recording(downsample(rec, a.factor), a.out_recording, a.out_meta);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Two-timescale causal signatures: identification, fingerprinting, reachability",
               "causig"};
  app.set_version_flag("--version", version_text());
  app.require_subcommand(1);

  FitArgs fit_args;
  auto* fit_cmd = app.add_subcommand("fit", "Identify [Q A B1 B2] from one recording");
  fit_cmd->add_option("--recording", fit_args.recording, "Recording CSV")->required();
  fit_cmd->add_option("--meta", fit_args.meta, "JSON sidecar")->required();
  fit_cmd->add_option("--lambda", fit_args.lambda, "Regularization weight (default 1e-3*T)")
      ->check(CLI::NonNegativeNumber);
  fit_cmd->add_option("--out", fit_args.out, "Output params JSON")->required();
  fit_cmd->add_option("--input-indices", fit_args.inputs, "Override the sidecar input regions");
  fit_cmd->add_option("--penalty", fit_args.penalty, "ridge | group")
      ->check(CLI::IsMember({"ridge", "group"}));
  fit_cmd->add_flag("--single-timescale", fit_args.single, "Fit x(k) = A x(k-1) + B2 u(k-1)");
  fit_cmd->add_flag("--zscore", fit_args.zscore, "Z-score each region before fitting");

  IdentifyArgs id_args;
  auto* id_cmd = app.add_subcommand("identify", "Match a query signature against a reference directory");
  id_cmd->add_option("--query", id_args.query, "Query params JSON")->required();
  id_cmd->add_option("--db", id_args.db, "Directory of labeled params JSON files")->required();
  id_cmd->add_option("--task", id_args.task, "Task id")->required();
  id_cmd->add_option("--source", id_args.source, "slow | fast | both | single")
      ->check(CLI::IsMember({"slow", "fast", "both", "single"}));

  EvaluateArgs eval_args;
  auto* eval_cmd = app.add_subcommand("evaluate", "Fold-based subject identification accuracy");
  eval_cmd->add_option("--manifest", eval_args.manifest, "Manifest JSON")->required();
  eval_cmd->add_option("--out", eval_args.out, "Accuracy CSV");
  eval_cmd->add_option("--jobs", eval_args.jobs, "Worker threads")->check(CLI::PositiveNumber);

  ReachArgs reach_args;
  auto* reach_cmd = app.add_subcommand("reach", "Reachability landscape");
  reach_cmd->add_option("--params", reach_args.params, "Params JSON")->required();
  reach_cmd->add_option("--horizon", reach_args.horizon, "Horizon in samples")->check(CLI::PositiveNumber);
  reach_cmd->add_option("--mode", reach_args.mode, "energy2 | boxinf")
      ->check(CLI::IsMember({"energy2", "boxinf"}));
  reach_cmd->add_option("--layout", reach_args.layout, "Grid layout JSON");
  reach_cmd->add_option("--out-values", reach_args.out_values, "Per-region values CSV")->required();
  reach_cmd->add_option("--out-grid", reach_args.out_grid, "12x12 grid CSV");
  reach_cmd->add_flag("--bound-terminal-input", reach_args.bound_terminal,
                      "Include u(horizon) in the bounded input sequence");
  reach_cmd->add_flag("--lp", reach_args.lp, "Solve boxinf values by linear programming");

  SimulateArgs sim_args;
  auto* sim_cmd = app.add_subcommand("simulate", "Simulate one recording");
  sim_cmd->add_option("--config", sim_args.config, "Simulation config JSON")->required();
  sim_cmd->add_option("--out-dir", sim_args.out_dir, "Output directory")->required();
  sim_cmd->add_option("--seed", sim_args.seed, "Random seed")->required();
  sim_cmd->add_option("--params", sim_args.params, "Simulate this system instead of sampling one");
  sim_cmd->add_option("--subject", sim_args.subject, "Subject label");
  sim_cmd->add_option("--task", sim_args.task, "Task label");
  sim_cmd->add_option("--scan", sim_args.scan, "Scan label");

  CohortArgs cohort_args;
  auto* cohort_cmd = app.add_subcommand("make-cohort", "Simulate subjects x scans plus a manifest");
  cohort_cmd->add_option("--subjects", cohort_args.subjects, "Number of subjects")
      ->required()->check(CLI::PositiveNumber);
  cohort_cmd->add_option("--scans", cohort_args.scans, "Scans per subject")
      ->required()->check(CLI::PositiveNumber);
  cohort_cmd->add_option("--config", cohort_args.config, "Cohort or simulation config JSON");
  cohort_cmd->add_option("--out-dir", cohort_args.out_dir, "Output directory")->required();
  cohort_cmd->add_option("--seed", cohort_args.seed, "Random seed")->required();
  cohort_cmd->add_option("--jobs", cohort_args.jobs, "Worker threads")->check(CLI::PositiveNumber);

  GraphArgs graph_args;
  auto* graph_cmd = app.add_subcommand("export-graph", "Thresholded directed edges of Q and A");
  graph_cmd->add_option("--params", graph_args.params, "Params JSON")->required();
  graph_cmd->add_option("--threshold", graph_args.threshold, "Minimum |rescaled weight|")
      ->required()->check(CLI::NonNegativeNumber);
  graph_cmd->add_option("--top-k", graph_args.top_k, "Keep the k strongest edges");
  graph_cmd->add_option("--out", graph_args.out, "Edge CSV")->required();

  DownsampleArgs ds_args;
  auto* ds_cmd = app.add_subcommand("downsample", "Keep every factor-th sample");
  ds_cmd->add_option("--recording", ds_args.recording, "Recording CSV")->required();
  ds_cmd->add_option("--meta", ds_args.meta, "JSON sidecar")->required();
  ds_cmd->add_option("--factor", ds_args.factor, "Downsampling factor")->required()->check(CLI::PositiveNumber);
  ds_cmd->add_option("--out-recording", ds_args.out_recording, "Output CSV")->required();
  ds_cmd->add_option("--out-meta", ds_args.out_meta, "Output sidecar")->required();

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForVersion&) {
    out << version_text() << '\n';
    return kExitOk;
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    const CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << sub->help();
    print_error(err, "usage", e.what());
    return kExitUsage;
  }

  try {
    if (fit_cmd->parsed()) run_fit(fit_args, out);
    else if (id_cmd->parsed()) run_identify(id_args, out);
    else if (eval_cmd->parsed()) run_evaluate(eval_args, out);
    else if (reach_cmd->parsed()) run_reach(reach_args, out);
    else if (sim_cmd->parsed()) run_simulate(sim_args, out);
    else if (cohort_cmd->parsed()) run_make_cohort(cohort_args, out);
    else if (graph_cmd->parsed()) run_export_graph(graph_args, out);
    else if (ds_cmd->parsed()) run_downsample(ds_args, out);
  } catch (const UsageError& e) {
    print_error(err, "usage", e.what());
    return kExitUsage;
  } catch (const Error& e) {
    print_error(err, to_string(e.code()), e.what());
    return kExitComputation;
  } catch (const nlohmann::json::exception& e) {
    print_error(err, "parse", e.what());
    return kExitComputation;
  } catch (const std::exception& e) {
    print_error(err, "internal", e.what());
    return kExitComputation;
  }
  return kExitOk;
}

}  // namespace causig::cli
