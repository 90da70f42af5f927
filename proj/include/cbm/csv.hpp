#pragma once

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <tuple>
#include <vector>

#include "error.hpp"
#include "simulation.hpp"
#include "sweep.hpp"
#include "training.hpp"

namespace cbm {

/// Filesystem failure while reading or writing an artifact.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// 12 significant digits, '.' decimal separator regardless of locale.
inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  std::string s(buf);
  std::replace(s.begin(), s.end(), ',', '.');
  return s;
}

namespace detail {

inline void write_row(std::ostream& os, std::initializer_list<double> values) {
  bool first = true;
  for (double v : values) {
    if (!first) os << ',';
    os << format_number(v);
    first = false;
  }
  os << '\n';
}

inline std::vector<std::string> split_fields(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.emplace_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline double parse_number(const std::string& text, const std::string& field) {
  const char* begin = text.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || !std::isfinite(v))
    throw FormatError(field, "not a finite number: '" + text + "'");
  return v;
}

inline bool read_line(std::istream& is, std::string& line) {
  if (!std::getline(is, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

}  // namespace detail

/*!
 * Write `path` through a sibling temporary that is renamed into place, so a
 * failed write leaves no partial file. Throws IoError.
 */
inline void write_file_atomic(const std::filesystem::path& path,
                              const std::function<void(std::ostream&)>& body) {
  namespace fs = std::filesystem;
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open for writing: " + path.string());
    body(os);
    os.flush();
    if (!os) {
      os.close();
      std::error_code ec;
      fs::remove(tmp, ec);
      throw IoError("write failed: " + path.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot move into place: " + path.string());
  }
}

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open for reading: " + path.string());
  return is;
}

// ---------------------------------------------------------------------------
// Degradation dataset: tau,x
// ---------------------------------------------------------------------------

inline void write_dataset_csv(std::ostream& os, const DegradationDataset& data) {
  os << "tau,x\n";
  for (const Sample& s : data.records) detail::write_row(os, {s.tau, s.target});
}

inline DegradationDataset read_dataset_csv(std::istream& is) {
  std::string line;
  if (!detail::read_line(is, line) || line != "tau,x")
    throw FormatError("header", "expected 'tau,x'");
  DegradationDataset data;
  for (std::size_t row = 2; detail::read_line(is, line); ++row) {
    if (line.empty()) continue;
    const auto f = detail::split_fields(line);
    const std::string where = "row " + std::to_string(row);
    if (f.size() != 2) throw FormatError(where, "expected 2 fields");
    const double tau = detail::parse_number(f[0], where + " tau");
    const double x = detail::parse_number(f[1], where + " x");
    if (!(tau > 0)) throw FormatError(where + " tau", "must be > 0");
    if (x < 0) throw FormatError(where + " x", "must be >= 0");
    data.records.push_back({tau, x});
  }
  return data;
}

// ---------------------------------------------------------------------------
// Single-run ledger: event_type,time,discounted_cost
// ---------------------------------------------------------------------------

struct LedgerEvent {
  std::string_view type;  // inspection | preventive | failure
  double time;
  double discounted_cost;
};

/// Ledger events in time order; at equal times inspections come first.
inline std::vector<LedgerEvent> ledger_events(const CostLedger& ledger,
                                              const CostParams& costs) {
  std::vector<std::tuple<double, int, LedgerEvent>> tagged;
  auto add = [&](const std::vector<double>& times, int rank, std::string_view type,
                 double cost) {
    for (double t : times)
      tagged.emplace_back(t, rank,
                          LedgerEvent{type, t, cost * std::exp(-costs.discount_rate * t)});
  };
  add(ledger.inspections, 0, "inspection", costs.c_inspect);
  add(ledger.preventive, 1, "preventive", costs.c_prevent);
  add(ledger.failures, 2, "failure", costs.c_fail);
  std::stable_sort(tagged.begin(), tagged.end(), [](const auto& l, const auto& r) {
    return std::tie(std::get<0>(l), std::get<1>(l)) <
           std::tie(std::get<0>(r), std::get<1>(r));
  });
  std::vector<LedgerEvent> out;
  out.reserve(tagged.size());
  for (auto& t : tagged) out.push_back(std::get<2>(t));
  return out;
}

inline void write_ledger_csv(std::ostream& os, const CostLedger& ledger,
                             const CostParams& costs) {
  os << "event_type,time,discounted_cost\n";
  for (const LedgerEvent& e : ledger_events(ledger, costs))
    os << e.type << ',' << format_number(e.time) << ','
       << format_number(e.discounted_cost) << '\n';
}

// ---------------------------------------------------------------------------
// Training artifacts
// ---------------------------------------------------------------------------

inline void write_training_record_csv(std::ostream& os, const TrainingRecord& rec) {
  os << "epoch,train_mse,val_mse,test_mse,grad_norm\n";
  for (std::size_t e = 0; e < rec.epochs(); ++e)
    detail::write_row(os, {static_cast<double>(e), rec.train_mse[e], rec.val_mse[e],
                           rec.test_mse[e], rec.grad_norm[e]});
}

inline void write_residuals_csv(std::ostream& os, const MlpModel& model,
                                const DegradationDataset& data) {
  os << "tau,target,output,error\n";
  for (const Sample& s : data.records) {
    const double out = mlp_forward(model, s.tau);
    detail::write_row(os, {s.tau, s.target, out, s.target - out});
  }
}

// ---------------------------------------------------------------------------
// Sweep table
// ---------------------------------------------------------------------------

inline constexpr std::string_view kSweepHeader =
    "t_i,classical_mean,classical_std,ncbm_mean,ncbm_std,"
    "classical_mean_ema,classical_std_ema,ncbm_mean_ema,ncbm_std_ema";

inline void write_sweep_csv(std::ostream& os, const SweepResult& r) {
  os << kSweepHeader << '\n';
  for (std::size_t g = 0; g < r.t_i.size(); ++g)
    detail::write_row(os, {r.t_i[g], r.classical.mean[g], r.classical.std[g],
                           r.ncbm.mean[g], r.ncbm.std[g], r.classical.mean_ema[g],
                           r.classical.std_ema[g], r.ncbm.mean_ema[g], r.ncbm.std_ema[g]});
}

/// Reads the series back; n_reps, seed and alpha are not stored in the table.
inline SweepResult read_sweep_csv(std::istream& is) {
  std::string line;
  if (!detail::read_line(is, line) || line != kSweepHeader)
    throw FormatError("header", "unexpected sweep header");
  SweepResult r;
  std::vector<double>* cols[] = {&r.t_i,           &r.classical.mean,     &r.classical.std,
                                 &r.ncbm.mean,     &r.ncbm.std,           &r.classical.mean_ema,
                                 &r.classical.std_ema, &r.ncbm.mean_ema,  &r.ncbm.std_ema};
  for (std::size_t row = 2; detail::read_line(is, line); ++row) {
    if (line.empty()) continue;
    const auto f = detail::split_fields(line);
    const std::string where = "row " + std::to_string(row);
    if (f.size() != 9) throw FormatError(where, "expected 9 fields");
    for (std::size_t c = 0; c < 9; ++c) cols[c]->push_back(detail::parse_number(f[c], where));
  }
  return r;
}

}  // namespace cbm
