#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "cbm/config.hpp"
#include "cbm/csv.hpp"
#include "cbm/model_io.hpp"

namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    path_ = fs::temp_directory_path() /
            (std::string("cbm_io_") + info->test_suite_name() + "_" + info->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  fs::path operator/(const std::string& name) const { return path_ / name; }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

cbm::MlpModel random_model() {
  cbm::RngStream rng(21, 0, 0);
  auto m = cbm::init_model(7, cbm::Activation::Tanh, rng);
  m.in_min = 0.1;
  m.in_max = 49.9;
  m.out_min = 0.0;
  m.out_max = 3.2;
  return m;
}

}  // namespace

TEST(ModelIo, RoundtripIsExact) {
  TempDir dir;
  const auto m = random_model();
  const double margin = 1.0 / 3.0;
  cbm::save_model(m, margin, dir / "model.json");
  const auto back = cbm::load_model(dir / "model.json");
  EXPECT_EQ(back.model, m);
  EXPECT_EQ(back.risk_margin, margin);
  for (int i = 0; i < 100; ++i) {
    const double tau = 0.5 * i;
    EXPECT_EQ(cbm::mlp_forward(back.model, tau), cbm::mlp_forward(m, tau));
  }
}

TEST(ModelIo, SigmoidActivationSurvives) {
  cbm::RngStream rng(22, 0, 0);
  const auto m = cbm::init_model(3, cbm::Activation::Sigmoid, rng);
  const auto back = cbm::model_from_json(cbm::model_to_json(m, 0.0));
  EXPECT_EQ(back.model.hidden_activation, cbm::Activation::Sigmoid);
}

TEST(ModelIo, DimensionMismatchNamesField) {
  auto j = cbm::model_to_json(random_model(), 0.5);
  j["w1"].push_back(0.0);
  try {
    cbm::model_from_json(j);
    FAIL() << "expected FormatError";
  } catch (const cbm::FormatError& e) {
    EXPECT_EQ(e.field(), "w1");
  }
}

TEST(ModelIo, MissingFieldNamesField) {
  auto j = cbm::model_to_json(random_model(), 0.5);
  j.erase("risk_margin");
  try {
    cbm::model_from_json(j);
    FAIL() << "expected FormatError";
  } catch (const cbm::FormatError& e) {
    EXPECT_EQ(e.field(), "risk_margin");
  }
}

TEST(ModelIo, RejectsBadInput) {
  TempDir dir;
  write_text(dir / "bad.json", "{ not json");
  EXPECT_THROW(cbm::load_model(dir / "bad.json"), cbm::FormatError);
  EXPECT_THROW(cbm::load_model(dir / "absent.json"), cbm::IoError);
  auto j = cbm::model_to_json(random_model(), 0.5);
  j["activation"] = "relu";
  EXPECT_THROW(cbm::model_from_json(j), cbm::FormatError);
  j = cbm::model_to_json(random_model(), 0.5);
  j["in_max"] = j["in_min"];
  EXPECT_THROW(cbm::model_from_json(j), cbm::FormatError);
}

TEST(DatasetCsv, Roundtrip) {
  cbm::DegradationDataset d;
  d.records = {{0.1, 0.0123}, {0.2, 1.0 / 7.0}, {0.3, 2.5}};
  std::stringstream ss;
  cbm::write_dataset_csv(ss, d);
  EXPECT_EQ(ss.str().substr(0, 6), "tau,x\n");
  const auto back = cbm::read_dataset_csv(ss);
  ASSERT_EQ(back.records.size(), 3u);
  EXPECT_EQ(back.records[0].tau, 0.1);
  EXPECT_NEAR(back.records[1].target, 1.0 / 7.0, 1e-12);
}

TEST(DatasetCsv, AcceptsCrlf) {
  std::stringstream ss("tau,x\r\n0.5,0.25\r\n");
  const auto d = cbm::read_dataset_csv(ss);
  ASSERT_EQ(d.records.size(), 1u);
  EXPECT_EQ(d.records[0].target, 0.25);
}

TEST(DatasetCsv, ReportsOffendingRow) {
  std::stringstream bad_header("t,x\n1,2\n");
  EXPECT_THROW(cbm::read_dataset_csv(bad_header), cbm::FormatError);
  std::stringstream bad_number("tau,x\n0.1,0.2\n0.2,abc\n");
  try {
    cbm::read_dataset_csv(bad_number);
    FAIL() << "expected FormatError";
  } catch (const cbm::FormatError& e) {
    EXPECT_NE(std::string(e.field()).find("row 3"), std::string::npos);
  }
  std::stringstream negative("tau,x\n0.1,-1\n");
  EXPECT_THROW(cbm::read_dataset_csv(negative), cbm::FormatError);
}

TEST(LedgerCsv, SumOverHorizonIsCostRate) {
  for (double gamma : {0.0, 0.05}) {
    cbm::PolicyConfig cfg;
    cfg.inspection_interval = 3.7;
    cfg.costs.discount_rate = gamma;
    for (int r = 0; r < 100; ++r) {
      const auto out = cbm::simulate_classical(cfg, cbm::derive_stream(23, 0, r));
      std::stringstream ss;
      cbm::write_ledger_csv(ss, out.ledger, cfg.costs);
      std::string line;
      std::getline(ss, line);
      ASSERT_EQ(line, "event_type,time,discounted_cost");
      double sum = 0, last = 0;
      while (std::getline(ss, line)) {
        const auto f = cbm::detail::split_fields(line);
        ASSERT_EQ(f.size(), 3u);
        const double t = std::stod(f[1]);
        EXPECT_GE(t, last);
        last = t;
        sum += std::stod(f[2]);
      }
      EXPECT_NEAR(sum / 50.0, out.cost_rate, 1e-12);
    }
  }
}

TEST(LedgerCsv, InspectionPrecedesActionAtSameTime) {
  cbm::CostLedger l;
  l.failures = {25};
  l.inspections = {25};
  const auto ev = cbm::ledger_events(l, cbm::CostParams{});
  ASSERT_EQ(ev.size(), 2u);
  EXPECT_EQ(ev[0].type, "inspection");
  EXPECT_EQ(ev[1].type, "failure");
}

TEST(SweepCsv, Roundtrip) {
  cbm::SweepResult r;
  r.t_i = {0.5, 1.0};
  r.classical = {{0.2, 0.1}, {0.01, 0.02}, {0.2, 0.19}, {0.01, 0.011}};
  r.ncbm = {{0.05, 0.04}, {0.001, 0.002}, {0.05, 0.049}, {0.001, 0.0011}};
  std::stringstream ss;
  cbm::write_sweep_csv(ss, r);
  const auto back = cbm::read_sweep_csv(ss);
  EXPECT_EQ(back.t_i, r.t_i);
  EXPECT_EQ(back.classical.mean, r.classical.mean);
  EXPECT_EQ(back.ncbm.std_ema, r.ncbm.std_ema);
}

TEST(NumberFormat, TwelveSignificantDigits) {
  EXPECT_EQ(cbm::format_number(0.1), "0.1");
  EXPECT_EQ(cbm::format_number(1.0 / 3.0), "0.333333333333");
  EXPECT_EQ(cbm::format_number(25), "25");
}

TEST(AtomicWrite, FailedWriteLeavesNothing) {
  TempDir dir;
  const auto target = dir / "missing" / "out.csv";
  EXPECT_THROW(cbm::write_file_atomic(target, [](std::ostream& os) { os << "x"; }),
               cbm::IoError);
  EXPECT_TRUE(fs::is_empty(dir.path()));
}

TEST(AtomicWrite, ReplacesExistingFile) {
  TempDir dir;
  write_text(dir / "out.txt", "old");
  cbm::write_file_atomic(dir / "out.txt", [](std::ostream& os) { os << "new"; });
  std::ifstream is(dir / "out.txt");
  std::string s;
  is >> s;
  EXPECT_EQ(s, "new");
  EXPECT_FALSE(fs::exists(dir / "out.txt.tmp"));
}

TEST(Config, DefaultsAndPresets) {
  cbm::RunConfig cfg;
  cfg.validate();
  EXPECT_EQ(cfg.grid.size(), 496u);
  EXPECT_EQ(cfg.n_reps, 5000u);
  cbm::apply_preset(cfg, cbm::Preset::Desk);
  EXPECT_EQ(cfg.grid.size(), 100u);
  EXPECT_EQ(cfg.n_reps, 1000u);
  cbm::apply_preset(cfg, cbm::Preset::Full);
  EXPECT_EQ(cfg.grid.size(), 496u);
  EXPECT_THROW(cbm::parse_preset("huge"), cbm::ParameterError);
}

TEST(Config, JsonOverridesAndRejectsUnknownKeys) {
  cbm::RunConfig cfg;
  cbm::apply_json(cfg, nlohmann::json{{"seed", 7}, {"discount_rate", 0.05},
                                      {"ncbm_semantics", "prose"}, {"activation", "sigmoid"}});
  EXPECT_EQ(cfg.seed, 7u);
  EXPECT_EQ(cfg.costs.discount_rate, 0.05);
  EXPECT_EQ(cfg.ncbm_semantics, cbm::NcbmSemantics::Prose);
  EXPECT_EQ(cfg.training.activation, cbm::Activation::Sigmoid);
  try {
    cbm::apply_json(cfg, nlohmann::json{{"sede", 7}});
    FAIL() << "expected FormatError";
  } catch (const cbm::FormatError& e) {
    EXPECT_EQ(e.field(), "sede");
  }
  EXPECT_THROW(cbm::apply_json(cfg, nlohmann::json{{"seed", "x"}}), cbm::FormatError);
}

TEST(Config, LoadFromFile) {
  TempDir dir;
  write_text(dir / "cfg.json", R"({"t_i": 12.5, "k_checks": 3, "workers": 2})");
  const auto cfg = cbm::load_config(dir / "cfg.json");
  EXPECT_EQ(cfg.policy().inspection_interval, 12.5);
  EXPECT_EQ(cfg.policy().mid_checks, 3);
  EXPECT_EQ(cfg.sweep_options().workers, 2u);
}
