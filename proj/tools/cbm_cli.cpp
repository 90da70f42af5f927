// Command-line front end: gen-data, train, simulate, sweep.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "cbm/cbm.hpp"

namespace fs = std::filesystem;

namespace {

enum Exit : int { kOk = 0, kUsage = 1, kIo = 2, kData = 3, kModel = 4 };

struct GlobalFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> preset;
  std::optional<double> gamma;
  std::optional<std::string> semantics;
  std::optional<std::size_t> workers;
  bool deterministic = false;
  bool svg = false;
};

cbm::RunConfig resolve_config(const GlobalFlags& g) {
  cbm::RunConfig cfg;
  if (!g.config_path.empty()) cfg = cbm::load_config(g.config_path);
  if (g.preset) cbm::apply_preset(cfg, cbm::parse_preset(*g.preset));
  if (g.seed) cfg.seed = *g.seed;
  if (g.gamma) cfg.costs.discount_rate = *g.gamma;
  if (g.semantics) cfg.ncbm_semantics = cbm::parse_semantics(*g.semantics);
  if (g.workers) cfg.workers = *g.workers;
  if (g.deterministic) cfg.deterministic = true;
  return cfg;
}

void warn_cost_order(const cbm::RunConfig& cfg) {
  if (!cfg.costs.ordered())
    std::cerr << "warning: costs are not ordered c_fail >= c_prevent >= c_inspect\n";
}

cbm::StoredModel load_model_or_throw(const std::string& path) {
  if (path.empty() || !fs::exists(path))
    throw cbm::FormatError("model", "model file not found: " + path);
  return cbm::load_model(path);
}

int cmd_gen_data(const cbm::RunConfig& cfg, const std::string& out) {
  cbm::RngStream rng = cbm::derive_stream(cfg.seed, cbm::kDataStreamIndex, 0);
  const cbm::DegradationDataset data = cbm::generate_training_data(
      cfg.proc, cfg.thresholds, cfg.t_horizon, cfg.sample_interval, rng);
  cbm::write_file_atomic(out, [&](std::ostream& os) { cbm::write_dataset_csv(os, data); });
  std::cerr << "wrote " << data.size() << " records to " << out << "\n";
  return kOk;
}

int cmd_train(const cbm::RunConfig& cfg, const std::string& data_path,
              const std::string& model_out, std::string record_out,
              std::string residuals_out) {
  cbm::DegradationDataset data;
  {
    std::ifstream is = cbm::open_input(data_path);
    data = cbm::read_dataset_csv(is);
  }
  if (data.empty()) throw cbm::NormalizationError("dataset has no records");

  const fs::path stem = fs::path(model_out).replace_extension();
  if (record_out.empty()) record_out = stem.string() + "_record.csv";
  if (residuals_out.empty()) residuals_out = stem.string() + "_residuals.csv";

  cbm::RngStream split_rng = cbm::derive_stream(cfg.seed, cbm::kSplitStreamIndex, 0);
  cbm::RngStream init_rng = cbm::derive_stream(cfg.seed, cbm::kInitStreamIndex, 0);
  const cbm::SplitIndices splits = cbm::split_dataset(data, split_rng);
  const cbm::TrainedModel trained = cbm::train_model(data, splits, cfg.training, init_rng);
  const double margin = cbm::risk_margin(trained.model, data);

  cbm::save_model(trained.model, margin, model_out);
  cbm::write_file_atomic(record_out, [&](std::ostream& os) {
    cbm::write_training_record_csv(os, trained.record);
  });
  cbm::write_file_atomic(residuals_out, [&](std::ostream& os) {
    cbm::write_residuals_csv(os, trained.model, data);
  });

  const auto& rec = trained.record;
  std::cout << "epochs=" << rec.epochs() << " best_epoch=" << rec.best_epoch
            << " train_mse=" << cbm::format_number(rec.train_mse[rec.best_epoch])
            << " val_mse=" << cbm::format_number(rec.val_mse[rec.best_epoch])
            << " test_mse=" << cbm::format_number(rec.test_mse[rec.best_epoch])
            << " risk_margin=" << cbm::format_number(margin) << "\n";
  return kOk;
}

int cmd_simulate(const cbm::RunConfig& cfg, const std::string& policy,
                 const std::string& model_path, const std::string& out) {
  const cbm::PolicyConfig pc = cfg.policy();
  const cbm::RngStream rng = cbm::derive_stream(cfg.seed, 0, 0);
  cbm::SimOutcome outcome;
  if (policy == "classical") {
    outcome = cbm::simulate_classical(pc, rng);
  } else {
    if (model_path.empty())
      throw cbm::FormatError("model", "the ncbm policy requires --model");
    const cbm::StoredModel stored = load_model_or_throw(model_path);
    outcome = cbm::simulate_ncbm(pc, stored.model, stored.risk_margin, rng);
  }
  if (!out.empty())
    cbm::write_file_atomic(out, [&](std::ostream& os) {
      cbm::write_ledger_csv(os, outcome.ledger, pc.costs);
    });
  else
    cbm::write_ledger_csv(std::cout, outcome.ledger, pc.costs);
  std::cout << "cost_rate=" << cbm::format_number(outcome.cost_rate) << "\n";
  return kOk;
}

int cmd_sweep(const cbm::RunConfig& cfg, const std::string& model_path,
              const std::string& prefix, bool svg) {
  const cbm::StoredModel stored = load_model_or_throw(model_path);
  const cbm::SweepResult res = cbm::run_sweep(cfg.grid, cfg.policy(), stored.model,
                                              stored.risk_margin, cfg.sweep_options());
  cbm::write_file_atomic(prefix + ".csv",
                         [&](std::ostream& os) { cbm::write_sweep_csv(os, res); });
  if (svg) {
    const std::string x_label = "Inspection interval (year)";
    const cbm::LineSeries cost[] = {{"S-CBM", res.classical.mean_ema, "#1f77b4"},
                                    {"N-CBM", res.ncbm.mean_ema, "#d62728"}};
    const cbm::LineSeries stdv[] = {{"S-CBM", res.classical.std_ema, "#1f77b4"},
                                    {"N-CBM", res.ncbm.std_ema, "#d62728"}};
    cbm::write_file_atomic(prefix + "_cost_rate.svg", [&](std::ostream& os) {
      cbm::write_line_chart(os, "Cost Rate", x_label, "Expectation of cost rate (per year)",
                            res.t_i, cost);
    });
    cbm::write_file_atomic(prefix + "_cost_std.svg", [&](std::ostream& os) {
      cbm::write_line_chart(os, "Standard Deviation of Cost Rate", x_label,
                            "Standard Deviation of cost rate (per year)", res.t_i, stdv);
    });
  }
  const cbm::ComparisonMetrics m = cbm::comparison_metrics(res, true);
  const cbm::ComparisonMetrics raw = cbm::comparison_metrics(res, false);
  std::cout << "mean_cost_reduction_pct=" << cbm::format_number(m.mean_cost_reduction_pct)
            << " mean_std_reduction_pct=" << cbm::format_number(m.mean_std_reduction_pct)
            << " raw_cost_reduction_pct=" << cbm::format_number(raw.mean_cost_reduction_pct)
            << " raw_std_reduction_pct=" << cbm::format_number(raw.mean_std_reduction_pct)
            << " points=" << res.t_i.size() << " excluded=" << m.cost_excluded << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Condition-based maintenance: statistical vs neural inspection policies"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalFlags g;
  app.add_option("--config", g.config_path, "JSON config file (flat keys)");
  app.add_option("--seed", g.seed, "Master RNG seed");
  app.add_option("--preset", g.preset, "Sweep preset")->check(CLI::IsMember({"desk", "full"}));
  app.add_option("--gamma", g.gamma, "Discount rate");
  app.add_option("--ncbm-semantics", g.semantics, "Inspection accounting of the neural policy")
      ->check(CLI::IsMember({"code", "prose"}));
  app.add_option("--workers", g.workers, "Worker threads for the sweep (0: all cores)");
  app.add_flag("--deterministic", g.deterministic, "Classical inspections read the mean path");
  app.add_flag("--svg", g.svg, "Also write SVG charts (sweep)");

  std::string out, data_path, model_path, record_out, residuals_out, policy = "classical";
  std::optional<double> t_i;

  auto* gen = app.add_subcommand("gen-data", "Simulate a training dataset (tau,x CSV)");
  gen->add_option("--out,-o", out, "Output CSV")->required();

  auto* train = app.add_subcommand("train", "Train the degradation estimator");
  train->add_option("--data,-d", data_path, "Dataset CSV")->required();
  train->add_option("--model,-m", model_path, "Model JSON to write")->required();
  train->add_option("--record", record_out, "Per-epoch record CSV");
  train->add_option("--residuals", residuals_out, "Residuals CSV");

  auto* sim = app.add_subcommand("simulate", "Single run of one policy; ledger CSV");
  sim->add_option("--policy,-p", policy, "classical | ncbm")
      ->check(CLI::IsMember({"classical", "ncbm"}));
  sim->add_option("--model,-m", model_path, "Model JSON (ncbm)");
  sim->add_option("--t-i", t_i, "Inspection interval (years)");
  sim->add_option("--out,-o", out, "Ledger CSV (default: standard output)");

  auto* sweep = app.add_subcommand("sweep", "Sweep the inspection interval");
  sweep->add_option("--model,-m", model_path, "Model JSON");
  sweep->add_option("--out,-o", out, "Output prefix")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  cbm::RunConfig cfg;
  try {
    cfg = resolve_config(g);
    if (t_i) cfg.t_i = *t_i;
    cfg.validate();
  } catch (const cbm::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsage;
  }
  warn_cost_order(cfg);

  try {
    if (gen->parsed()) return cmd_gen_data(cfg, out);
    if (train->parsed()) {
      try {
        return cmd_train(cfg, data_path, model_path, record_out, residuals_out);
      } catch (const cbm::FormatError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kData;
      }
    }
    if (sim->parsed()) return cmd_simulate(cfg, policy, model_path, out);
    if (sweep->parsed()) return cmd_sweep(cfg, model_path, out, g.svg);
  } catch (const cbm::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kIo;
  } catch (const cbm::NormalizationError& e) {
    std::cerr << "training error: " << e.what() << "\n";
    return kData;
  } catch (const cbm::FormatError& e) {
    std::cerr << "model error: " << e.what() << "\n";
    return kModel;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
