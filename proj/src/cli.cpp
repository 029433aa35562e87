#include "slicead/cli.hpp"

#include <atomic>
#include <filesystem>
#include <map>
#include <thread>

#include "json.hpp"
#include "slicead/csv.hpp"
#include "slicead/error.hpp"

namespace slicead {

namespace fs = std::filesystem;

namespace {

SliceCatalog catalog_for(const RunConfig& c) {
  return c.catalog.empty() ? SliceCatalog::canned(c.kappa)
                           : SliceCatalog::parse(csv::read_file(c.catalog), c.kappa);
}

std::vector<Scenario> scenarios_for(const RunConfig& config, int suite_per_bucket, int suite_slots) {
  if (suite_per_bucket > 0) {
    SuiteOptions o;
    o.per_bucket = suite_per_bucket;
    o.slots = suite_slots;
    o.seed = resolve_seed(config.seed);
    o.table = config.acm_table;
    o.kappa = config.kappa;
    return generate_cv_suite(o);
  }
  return load_scenarios(config);
}

// Runs `body`, mapping failures onto exit codes.
template <typename F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::kConfig ? kExitConfig : kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace

std::vector<Scenario> load_scenarios(const RunConfig& config) {
  if (!config.bundle.empty()) return load_scenario_bundle(config.bundle, config.kappa);
  AcmTable table = AcmTable::load(config.acm_table);
  const SliceCatalog catalog = catalog_for(config);
  std::vector<SliceRequest> requests;
  if (!config.sr.empty()) {
    requests = parse_slice_requests(csv::read_file(config.sr), catalog);
  } else if (!config.flows.empty()) {
    requests = generate_slice_requests(parse_flows(csv::read_file(config.flows)), catalog);
  }
  if (!config.rsl.empty()) {
    const std::string name = fs::path(config.rsl).stem().string();
    const RslTrace rsl = ingest_rsl_trace(csv::read_file(config.rsl), name);
    return {make_scenario(name, rsl, std::move(table), std::move(requests), config.normalize, config.delta)};
  }
  if (!config.capacity.empty()) {
    Scenario s;
    s.name = fs::path(config.capacity).stem().string();
    s.capacity = parse_capacity_series(csv::read_file(config.capacity), table);
    s.table = std::move(table);
    s.requests = std::move(requests);
    s.delta = config.delta;
    s.validate();
    return {std::move(s)};
  }
  throw Error(ErrorCode::kConfig, "paths.rsl: one of rsl, capacity or bundle is required");
}

std::shared_ptr<const Forecaster> make_forecaster(const RunConfig& config,
                                                  const std::vector<Scenario>& scenarios) {
  VarianceCalibration calib;
  if (!config.calibration.empty()) {
    calib = VarianceCalibration::parse(csv::read_file(config.calibration));
    if (calib.horizon() < config.horizon) {
      throw Error(ErrorCode::kConfig, "paths.calibration: fewer steps than run.horizon");
    }
  } else {
    std::vector<std::vector<ForecastPair>> pairs(static_cast<std::size_t>(config.horizon));
    for (const Scenario& s : scenarios) {
      if (!s.rsl) continue;
      auto p = naive_residual_pairs(*s.rsl, config.horizon);
      for (std::size_t h = 0; h < pairs.size(); ++h) pairs[h].insert(pairs[h].end(), p[h].begin(), p[h].end());
    }
    try {
      calib = calibrate_variance(pairs);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kTooFewSamples) throw;
      calib = VarianceCalibration::constant(1.0, config.horizon);
    }
  }
  auto naive = std::make_shared<const NaiveForecaster>(calib, config.horizon);
  if (config.forecast.empty()) return naive;
  return std::make_shared<const ExternalForecaster>(ForecastProvider::parse(csv::read_file(config.forecast)),
                                                    naive);
}

std::unique_ptr<AdmissionPolicy> make_policy(const std::string& name, const RunConfig& config,
                                             const std::vector<Scenario>& training,
                                             const Forecaster* forecaster) {
  if (name == "random") return std::make_unique<RandomPolicy>();
  if (name == "naive_greedy") return std::make_unique<NaiveGreedyPolicy>();
  if (name == "lo") return std::make_unique<LocallyOptimalPolicy>(config.lo_threshold);
  if (name == "admit_all") return std::make_unique<AdmitAllPolicy>();
  if (name == "pql" || name == "naive_ql") {
    auto learner = std::make_shared<QLearner>(name == "pql", config.q_params());
    if (!config.qtable.empty()) {
      learner->table() = QTable::parse(csv::read_file(config.qtable));
      learner->freeze();
    } else {
      train_q_learner(*learner, training, forecaster, resolve_seed(config.seed),
                      EngineOptions{config.lookback});
    }
    return std::make_unique<QLearningPolicy>(std::move(learner));
  }
  throw Error(ErrorCode::kConfig, "policy.name: unknown policy '" + name + "'");
}

std::vector<SweepRow> run_sweep(const std::vector<Scenario>& scenarios, const RunConfig& config,
                                const SweepSpec& spec) {
  for (const std::string& p : spec.policies) {
    if (!is_policy_name(p)) throw Error(ErrorCode::kConfig, "policy.name: unknown policy '" + p + "'");
  }
  const auto forecaster = make_forecaster(config, scenarios);
  const std::uint64_t seed = resolve_seed(config.seed);
  const EngineOptions opts{config.lookback};

  // Learned policies are trained once on the whole collection, then shared frozen.
  std::map<std::string, std::shared_ptr<AdmissionPolicy>> trained;
  std::map<std::string, std::string> training_error;
  for (const std::string& p : spec.policies) {
    if ((p == "pql" || p == "naive_ql") && !trained.count(p) && !training_error.count(p)) {
      try {
        trained[p] = make_policy(p, config, scenarios, forecaster.get());
      } catch (const std::exception& e) {
        training_error[p] = e.what();
      }
    }
  }

  struct Cell {
    std::size_t scenario;
    std::string policy;
    bool reference;
  };
  std::vector<Cell> cells;
  for (std::size_t s = 0; s < scenarios.size(); ++s) {
    for (const std::string& p : spec.policies) cells.push_back({s, p, false});
    cells.push_back({s, "admit_all", true});
    cells.push_back({s, "naive_greedy", true});
  }
  std::vector<std::optional<SimulationResult>> results(cells.size());
  std::vector<std::string> errors(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      const Cell& c = cells[i];
      try {
        if (training_error.count(c.policy)) throw std::runtime_error(training_error.at(c.policy));
        std::unique_ptr<AdmissionPolicy> own;
        AdmissionPolicy* policy;
        if (trained.count(c.policy)) {
          auto* q = dynamic_cast<QLearningPolicy*>(trained.at(c.policy).get());
          own = std::make_unique<QLearningPolicy>(
              std::shared_ptr<QLearner>(&q->learner(), [](QLearner*) {}));
          policy = own.get();
        } else {
          own = make_policy(c.policy, config, {}, forecaster.get());
          policy = own.get();
        }
        results[i] = run(scenarios[c.scenario], *policy, forecaster.get(), seed, opts);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  const int n_workers = std::max(1, std::min<int>(spec.workers, static_cast<int>(cells.size())));
  std::vector<std::thread> pool;
  for (int w = 1; w < n_workers; ++w) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();

  std::vector<SweepRow> rows;
  const std::size_t per_scenario = spec.policies.size() + 2;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const Cell& c = cells[i];
    const Scenario& sc = scenarios[c.scenario];
    SweepRow row{sc.name, c.policy, c.reference ? "reference" : "data", sc.cv, cv_bucket(sc.cv, spec.cv_edges),
                 std::nullopt, errors[i]};
    const std::size_t base = c.scenario * per_scenario + spec.policies.size();
    const auto& aa = results[base];
    const auto& ng = results[base + 1];
    if (results[i]) {
      if (aa) {
        row.metrics = metrics(*results[i], ng ? &*ng : nullptr, *aa, sc.cv);
      } else {
        row.error = "admit_all reference failed: " + errors[base];
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
  std::string out =
      "scenario,policy,kind,cv,cv_bucket,revenue,normalized_revenue,negative_revenue_share,"
      "underprovisioning_fraction,error\n";
  auto clean = [](std::string s) {
    for (char& ch : s) {
      if (ch == ',' || ch == '\n' || ch == '\r' || ch == '"') ch = ' ';
    }
    return s;
  };
  for (const SweepRow& r : rows) {
    out += clean(r.scenario) + ',' + r.policy + ',' + r.kind + ',' + csv::format_double(r.cv) + ',' +
           r.cv_bucket + ',';
    if (r.metrics) {
      out += csv::format_double(r.metrics->revenue) + ',' +
             (r.metrics->normalized_revenue ? csv::format_double(*r.metrics->normalized_revenue) : "") + ',' +
             csv::format_double(r.metrics->negative_revenue_share) + ',' +
             csv::format_double(r.metrics->underprovisioning_fraction) + ',';
    } else {
      out += ",,,,";
    }
    out += clean(r.error) + '\n';
  }
  return out;
}

int cmd_simulate(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    config.validate();
    const std::vector<Scenario> scenarios = load_scenarios(config);
    const auto forecaster = make_forecaster(config, scenarios);
    const std::uint64_t seed = resolve_seed(config.seed);
    const EngineOptions opts{config.lookback};
    auto policy = make_policy(config.policy, config, scenarios, forecaster.get());
    fs::create_directories(config.output_dir);
    const fs::path dir(config.output_dir);
    nlohmann::ordered_json all = nlohmann::ordered_json::array();
    for (const Scenario& sc : scenarios) {
      const SimulationResult r = run(sc, *policy, forecaster.get(), seed, opts);
      AdmitAllPolicy aa;
      NaiveGreedyPolicy ng;
      const SimulationResult ra = run(sc, aa, forecaster.get(), seed, opts);
      const SimulationResult rn = run(sc, ng, forecaster.get(), seed, opts);
      const MetricsReport m = metrics(r, &rn, ra, sc.cv);
      const std::string prefix = scenarios.size() == 1 ? std::string() : sc.name + "_";
      csv::write_file_atomic(dir / (prefix + "slots.csv"), slots_to_csv(r));
      csv::write_file_atomic(dir / (prefix + "admission.csv"), admission_vector_to_csv(r.admission_vector()));
      const std::string summary = summary_json(r, m);
      csv::write_file_atomic(dir / (prefix + "summary.json"), summary);
      all.push_back(nlohmann::ordered_json::parse(summary));
      out << sc.name << ": revenue " << csv::format_double(r.revenue) << " admitted " << r.admitted() << '/'
          << r.requests.size() << '\n';
    }
    csv::write_file_atomic(dir / "metrics.json", all.dump(2) + '\n');
    return kExitOk;
  });
}

int cmd_sweep(const RunConfig& config, const SweepSpec& spec, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    std::vector<Scenario> scenarios;
    if (spec.suite_per_bucket > 0 || !config.bundle.empty() || !config.rsl.empty() || !config.capacity.empty()) {
      if (spec.suite_per_bucket == 0) config.validate();
      scenarios = scenarios_for(config, spec.suite_per_bucket, spec.suite_slots);
    }
    const std::vector<SweepRow> rows = run_sweep(scenarios, config, spec);
    fs::create_directories(config.output_dir);
    const fs::path path = fs::path(config.output_dir) / "sweep.csv";
    csv::write_file_atomic(path, sweep_to_csv(rows));
    std::size_t failed = 0;
    for (const SweepRow& r : rows) failed += r.error.empty() ? 0 : 1;
    out << "wrote " << rows.size() << " rows to " << path.string();
    if (failed > 0) out << " (" << failed << " failed)";
    out << '\n';
    return kExitOk;
  });
}

int cmd_oracle(const RunConfig& config, OracleMode mode, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    config.validate();
    const std::vector<Scenario> scenarios = load_scenarios(config);
    fs::create_directories(config.output_dir);
    const fs::path dir(config.output_dir);
    for (const Scenario& sc : scenarios) {
      const OracleSolution s = solve_oracle(sc, mode);
      csv::write_file_atomic(dir / (sc.name + "_z.csv"), admission_vector_to_csv(s.z));
      csv::write_file_atomic(dir / (sc.name + "_fractions.csv"), slot_fractions_to_csv(s.fractions));
      nlohmann::ordered_json j;
      j["scenario"] = sc.name;
      j["objective"] = s.objective;
      j["revenue"] = -s.objective;
      j["evaluated"] = s.evaluated;
      out << j.dump() << '\n';
    }
    return kExitOk;
  });
}

int cmd_train_pql(const RunConfig& config, bool predictive, int suite_per_bucket, std::ostream& out,
                  std::ostream& err) {
  return guarded(err, [&] {
    if (suite_per_bucket == 0) config.validate();
    const std::vector<Scenario> scenarios = scenarios_for(config, suite_per_bucket, 240);
    const auto forecaster = make_forecaster(config, scenarios);
    QLearner learner(predictive, config.q_params());
    const TrainingReport rep =
        train_q_learner(learner, scenarios, forecaster.get(), resolve_seed(config.seed), EngineOptions{config.lookback});
    fs::create_directories(config.output_dir);
    const fs::path dir(config.output_dir);
    csv::write_file_atomic(dir / "qtable.tsv", learner.table().serialize());
    csv::write_file_atomic(dir / "training_curve.csv", training_curve_to_csv(rep));
    nlohmann::ordered_json j;
    j["policy"] = predictive ? "pql" : "naive_ql";
    j["converged"] = rep.converged;
    j["updates"] = learner.updates();
    j["passes"] = rep.passes;
    j["window_mean_delta"] = learner.window_mean();
    j["entries"] = learner.table().size();
    csv::write_file_atomic(dir / "training.json", j.dump(2) + '\n');
    if (!rep.converged) {
      err << "warning: NonConvergence: stopped after " << learner.updates()
          << " updates with window mean delta " << learner.window_mean() << '\n';
    }
    out << "wrote " << learner.table().size() << " entries to " << (dir / "qtable.tsv").string() << '\n';
    return kExitOk;
  });
}

int cmd_calibrate(const std::vector<std::string>& rsl_paths, int horizon, const std::string& output,
                  std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (horizon < 1) throw Error(ErrorCode::kConfig, "run.horizon: must be >= 1");
    std::vector<std::vector<ForecastPair>> pairs(static_cast<std::size_t>(horizon));
    for (const std::string& p : rsl_paths) {
      const RslTrace t = ingest_rsl_trace(csv::read_file(p), fs::path(p).stem().string());
      auto pp = naive_residual_pairs(t, horizon);
      for (std::size_t h = 0; h < pairs.size(); ++h) pairs[h].insert(pairs[h].end(), pp[h].begin(), pp[h].end());
    }
    const VarianceCalibration c = calibrate_variance(pairs);
    csv::write_file_atomic(output, c.to_csv());
    out << "wrote " << output << '\n';
    return kExitOk;
  });
}

}  // namespace slicead
