#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "slicead/cli.hpp"
#include "slicead/csv.hpp"
#include "slicead/error.hpp"

using namespace slicead;

namespace {

// Flags shared by the commands that read a RunConfig.
struct ConfigFlags {
  std::string file;
  std::map<std::string, std::string> overrides;

  void attach(CLI::App* cmd) {
    cmd->add_option("-c,--config", file, "Run configuration file");
    auto flag = [&](const char* name, const char* key, const char* help) {
      cmd->add_option_function<std::string>(name, [this, key](const std::string& v) { overrides[key] = v; }, help);
    };
    flag("--rsl", "paths.rsl", "RSL trace CSV");
    flag("--capacity", "paths.capacity", "Capacity series CSV");
    flag("--acm-table", "paths.acm_table", "af60, wave or a table CSV");
    flag("--flows", "paths.flows", "Flow CSV");
    flag("--sr", "paths.sr", "Slice request CSV");
    flag("--catalog", "paths.catalog", "Slice catalog CSV");
    flag("--forecast", "paths.forecast", "External forecast CSV");
    flag("--calibration", "paths.calibration", "Variance calibration CSV");
    flag("--qtable", "paths.qtable", "Frozen Q-table");
    flag("--bundle", "paths.bundle", "Scenario bundle (JSON lines)");
    flag("--policy", "policy.name", "random, naive_greedy, lo, naive_ql, pql, admit_all");
    flag("--lambda", "policy.lambda", "Risk-penalty scaling");
    flag("--epsilon0", "policy.epsilon0", "Initial exploration rate");
    flag("--epsilon-decay", "policy.epsilon_decay", "Per-batch exploration decay");
    flag("--epsilon-min", "policy.epsilon_min", "Exploration floor");
    flag("--kappa", "policy.kappa", "Penalty severity");
    flag("--lo-threshold", "policy.lo_threshold", "Largest batch solved exhaustively by lo");
    flag("--delta", "policy.delta", "Admission gate threshold");
    flag("--horizon", "run.horizon", "Forecast horizon H");
    flag("--lookback", "run.lookback", "Forecast lookback T");
    flag("--seed", "run.seed", "Seed (falls back to AWARESAC_SEED)");
    flag("-o,--out", "run.output_dir", "Output directory");
    flag("--normalize", "run.normalize", "Normalize RSL onto the ACM table (true/false)");
  }

  RunConfig load() const {
    RunConfig c = file.empty() ? RunConfig{} : RunConfig::parse(csv::read_file(file));
    for (const auto& [k, v] : overrides) c.set(k, v);
    return c;
  }
};

template <typename F>
int with_config(const ConfigFlags& flags, F&& f) {
  RunConfig c;
  try {
    c = flags.load();
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::kConfig ? kExitConfig : kExitFailure;
  }
  return f(c);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Admission control for network slices on weather-affected mmWave links"};
  app.require_subcommand(1);
  int code = kExitOk;

  ConfigFlags sim_flags;
  auto* sim = app.add_subcommand("simulate", "Run one policy over the configured scenarios");
  sim_flags.attach(sim);
  sim->callback([&] { code = with_config(sim_flags, [](const RunConfig& c) { return cmd_simulate(c, std::cout, std::cerr); }); });

  ConfigFlags sweep_flags;
  SweepSpec spec;
  std::vector<double> edges;
  auto* sweep = app.add_subcommand("sweep", "Scenarios x policies into a long-format CSV");
  sweep_flags.attach(sweep);
  sweep->add_option("--policies", spec.policies, "Policies to evaluate")->delimiter(',');
  sweep->add_option("--cv-edges", edges, "Two CV bucket edges")->delimiter(',')->expected(2);
  sweep->add_option("-j,--workers", spec.workers, "Worker threads")->check(CLI::PositiveNumber);
  sweep->add_option("--suite-per-bucket", spec.suite_per_bucket, "Generate a synthetic suite with N scenarios per CV bucket");
  sweep->add_option("--suite-slots", spec.suite_slots, "Slots per generated scenario");
  sweep->callback([&] {
    if (edges.size() == 2) spec.cv_edges = {edges[0], edges[1]};
    code = with_config(sweep_flags, [&](const RunConfig& c) { return cmd_sweep(c, spec, std::cout, std::cerr); });
  });

  ConfigFlags oracle_flags;
  std::string mode = "branch_and_bound";
  auto* oracle = app.add_subcommand("oracle", "Solve the perfect-information benchmark");
  oracle_flags.attach(oracle);
  oracle->add_option("--mode", mode, "exhaustive or branch_and_bound");
  oracle->callback([&] {
    code = with_config(oracle_flags, [&](const RunConfig& c) {
      try {
        return cmd_oracle(c, parse_oracle_mode(mode), std::cout, std::cerr);
      } catch (const Error& e) {
        std::cerr << "error: --mode: " << e.what() << '\n';
        return kExitConfig;
      }
    });
  });

  ConfigFlags train_flags;
  bool naive = false;
  int train_suite = 0;
  auto* train = app.add_subcommand("train-pql", "Train a Q-table over a scenario collection");
  train_flags.attach(train);
  train->add_flag("--naive", naive, "Train the static-capacity variant");
  train->add_option("--suite-per-bucket", train_suite, "Train on a generated synthetic suite");
  train->callback([&] {
    code = with_config(train_flags, [&](const RunConfig& c) { return cmd_train_pql(c, !naive, train_suite, std::cout, std::cerr); });
  });

  std::vector<std::string> cal_inputs;
  int cal_h = kDefaultHorizon;
  std::string cal_out = "calibration.csv";
  auto* cal = app.add_subcommand("calibrate", "Per-step residual spread of the persistence forecast");
  cal->add_option("--rsl", cal_inputs, "RSL trace CSVs")->required();
  cal->add_option("--horizon", cal_h, "Horizon H");
  cal->add_option("-o,--out", cal_out, "Output CSV");
  cal->callback([&] { code = cmd_calibrate(cal_inputs, cal_h, cal_out, std::cout, std::cerr); });

  SyntheticRslParams rp;
  int bucket = -1;
  int length = 240;
  std::optional<std::uint64_t> rsl_seed;
  std::string rsl_out = "rsl.csv";
  std::string link = "synthetic";
  auto* gen_rsl = app.add_subcommand("gen-rsl", "Write a synthetic RSL trace");
  gen_rsl->add_option("--bucket", bucket, "Target CV bucket 0, 1 or 2 (overrides the shape flags)");
  gen_rsl->add_option("--length", length, "Samples (minutes)");
  gen_rsl->add_option("--baseline", rp.baseline_dbm, "Clear-sky level in dBm");
  gen_rsl->add_option("--events", rp.event_count, "Number of fades");
  gen_rsl->add_option("--depth", rp.event_depth_db, "Fade depth in dB");
  gen_rsl->add_option("--event-minutes", rp.event_duration_min, "Fade length");
  gen_rsl->add_option("--noise", rp.noise_std_db, "Noise stddev in dB");
  gen_rsl->add_option("--seed", rsl_seed, "Seed (falls back to AWARESAC_SEED)");
  gen_rsl->add_option("--link", link, "Link id");
  gen_rsl->add_option("-o,--out", rsl_out, "Output CSV");
  gen_rsl->callback([&] {
    try {
      const std::uint64_t seed = resolve_seed(rsl_seed);
      const RslTrace t = bucket >= 0 ? synthetic_trace_for_bucket(bucket, length, seed)
                                     : generate_synthetic_rsl(rp, length, seed, link);
      csv::write_file_atomic(rsl_out, export_rsl_trace(t));
      std::cout << "wrote " << rsl_out << " (cv " << scenario_cv(t) << ")\n";
    } catch (const Error& e) {
      std::cerr << "error: " << e.what() << '\n';
      code = e.code() == ErrorCode::kConfig ? kExitConfig : kExitFailure;
    }
  });

  SyntheticFlowParams fp;
  double rate = -1.0;
  std::string flows_in;
  std::string catalog_in;
  bool catalog_from_flows = false;
  double kappa = kDefaultKappa;
  std::optional<std::uint64_t> sl_seed;
  std::string flows_out;
  std::string sr_out = "sr.csv";
  std::string catalog_out;
  auto* gen_sl = app.add_subcommand("gen-slices", "Pack flows into slice requests");
  gen_sl->add_option("--flows", flows_in, "Flow CSV (synthetic flows when absent)");
  gen_sl->add_option("--slots", fp.slots, "Slots of synthetic flows");
  gen_sl->add_option("--rate", rate, "Synthetic flow arrivals per slot and service");
  gen_sl->add_option("--catalog", catalog_in, "Catalog CSV");
  gen_sl->add_flag("--catalog-from-flows", catalog_from_flows, "Derive the catalog from the flows");
  gen_sl->add_option("--kappa", kappa, "Penalty severity");
  gen_sl->add_option("--seed", sl_seed, "Seed (falls back to AWARESAC_SEED)");
  gen_sl->add_option("--flows-out", flows_out, "Write the flows used");
  gen_sl->add_option("--catalog-out", catalog_out, "Write the catalog used");
  gen_sl->add_option("-o,--out", sr_out, "Output SR CSV");
  gen_sl->callback([&] {
    try {
      if (rate >= 0.0) fp.arrival_rate = {rate, rate, rate};
      const std::vector<FlowRecord> flows =
          flows_in.empty() ? generate_synthetic_flows(fp, resolve_seed(sl_seed)) : parse_flows(csv::read_file(flows_in));
      const SliceCatalog catalog = !catalog_in.empty()   ? SliceCatalog::parse(csv::read_file(catalog_in), kappa)
                                   : catalog_from_flows ? SliceCatalog::from_flows(flows, kappa)
                                                        : SliceCatalog::canned(kappa);
      const auto requests = generate_slice_requests(flows, catalog);
      csv::write_file_atomic(sr_out, slice_requests_to_csv(requests));
      if (!flows_out.empty()) csv::write_file_atomic(flows_out, flows_to_csv(flows));
      if (!catalog_out.empty()) csv::write_file_atomic(catalog_out, catalog.to_csv());
      std::cout << "wrote " << requests.size() << " requests to " << sr_out << '\n';
    } catch (const Error& e) {
      std::cerr << "error: " << e.what() << '\n';
      code = e.code() == ErrorCode::kConfig ? kExitConfig : kExitFailure;
    }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitConfig;
  }
  return code;
}
