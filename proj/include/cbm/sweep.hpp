#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <thread>
#include <tuple>
#include <vector>

#include "error.hpp"
#include "rng.hpp"
#include "simulation.hpp"

namespace cbm {

/// Inspection intervals start, start + step, ... up to end inclusive.
struct SweepGrid {
  double start = 0.5;
  double step = 0.1;
  double end = 50.0;

  void validate() const {
    detail::require(start > 0 && start <= end, "grid: need 0 < start <= end");
    detail::require(step > 0, "grid: step must be > 0");
  }

  std::size_t size() const {
    validate();
    return static_cast<std::size_t>(std::floor((end - start) / step + 1e-9)) + 1;
  }

  double at(std::size_t index) const noexcept {
    return start + static_cast<double>(index) * step;
  }

  std::vector<double> values() const {
    std::vector<double> out(size());
    for (std::size_t g = 0; g < out.size(); ++g) out[g] = at(g);
    return out;
  }
};

/// Per-grid-point statistics of one policy.
struct PolicySeries {
  std::vector<double> mean;
  std::vector<double> std;
  std::vector<double> mean_ema;
  std::vector<double> std_ema;
};

struct SweepResult {
  std::vector<double> t_i;
  PolicySeries classical;
  PolicySeries ncbm;
  std::size_t n_reps = 0;
  std::uint64_t master_seed = 0;
  double ema_alpha = 0.1;
};

struct SweepOptions {
  std::size_t n_reps = 5000;
  std::uint64_t master_seed = 0;
  std::size_t workers = 0;  // 0: hardware concurrency
  double ema_alpha = 0.1;
};

/// Exponential moving average seeded with the first value.
inline std::vector<double> ema_smooth(std::span<const double> series, double alpha) {
  if (!(alpha > 0 && alpha <= 1)) throw ParameterError("ema: alpha must be in (0, 1]");
  if (series.empty()) throw ParameterError("ema: empty series");
  std::vector<double> out(series.size());
  out[0] = series[0];
  for (std::size_t i = 1; i < series.size(); ++i)
    out[i] = alpha * series[i] + (1 - alpha) * out[i - 1];
  return out;
}

struct SampleStats {
  double mean;
  double std;  // n - 1 denominator
};

inline SampleStats sample_stats(std::span<const double> xs) {
  if (xs.size() < 2) throw ParameterError("sample_stats: need at least two values");
  double sum = 0;
  for (double x : xs) sum += x;
  const double mean = sum / static_cast<double>(xs.size());
  double ss = 0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(xs.size() - 1))};
}

/// Cost rates of both policies for every replication at one grid point.
struct PointSamples {
  std::vector<double> classical;
  std::vector<double> ncbm;
};

/// Replays replications [0, n_reps) of grid point `grid_index`.
template <DegradationEstimator Estimator>
PointSamples simulate_point(const PolicyConfig& cfg, const Estimator& estimate,
                            double margin, std::size_t n_reps,
                            std::uint64_t master_seed, std::size_t grid_index) {
  PointSamples out;
  out.classical.resize(n_reps);
  out.ncbm.resize(n_reps);
  for (std::size_t r = 0; r < n_reps; ++r) {
    const RngStream stream = derive_stream(master_seed, grid_index, r);
    out.classical[r] = simulate_classical(cfg, stream).cost_rate;
    out.ncbm[r] = simulate_ncbm(cfg, estimate, margin, stream).cost_rate;
  }
  return out;
}

/*!
 * Run both policies over the grid, N replications per point.
 *
 * Replication r at grid index g uses derive_stream(seed, g, r) for both
 * policies. Workers claim whole grid points and write into fixed slots, so the
 * result does not depend on the worker count.
 */
template <DegradationEstimator Estimator>
SweepResult run_sweep(const SweepGrid& grid, const PolicyConfig& base,
                      const Estimator& estimate, double margin,
                      const SweepOptions& opts) {
  base.validate();
  if (opts.n_reps < 2) throw ParameterError("sweep: need at least 2 replications");
  const std::size_t n = grid.size();

  SweepResult res;
  res.t_i = grid.values();
  res.n_reps = opts.n_reps;
  res.master_seed = opts.master_seed;
  res.ema_alpha = opts.ema_alpha;
  for (PolicySeries* s : {&res.classical, &res.ncbm}) {
    s->mean.resize(n);
    s->std.resize(n);
  }

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t g = next++; g < n; g = next++) {
      PolicyConfig cfg = base;
      cfg.inspection_interval = res.t_i[g];
      const PointSamples samples =
          simulate_point(cfg, estimate, margin, opts.n_reps, opts.master_seed, g);
      const SampleStats c = sample_stats(samples.classical);
      const SampleStats m = sample_stats(samples.ncbm);
      res.classical.mean[g] = c.mean;
      res.classical.std[g] = c.std;
      res.ncbm.mean[g] = m.mean;
      res.ncbm.std[g] = m.std;
    }
  };

  std::size_t workers = opts.workers ? opts.workers
                                     : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, n);
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
  }

  for (PolicySeries* s : {&res.classical, &res.ncbm}) {
    s->mean_ema = ema_smooth(s->mean, opts.ema_alpha);
    s->std_ema = ema_smooth(s->std, opts.ema_alpha);
  }
  return res;
}

template <DegradationEstimator Estimator>
SweepResult run_sweep(const SweepGrid& grid, const PolicyConfig& base,
                      const Estimator& estimate, double margin,
                      std::size_t n_reps, std::uint64_t master_seed) {
  return run_sweep(grid, base, estimate, margin,
                   SweepOptions{n_reps, master_seed, 0, 0.1});
}

inline SweepResult run_sweep(const SweepGrid& grid, const PolicyConfig& base,
                             const MlpModel& model, double margin,
                             const SweepOptions& opts) {
  return run_sweep(
      grid, base, [&model](double tau) { return mlp_forward(model, tau); }, margin,
      opts);
}

struct ComparisonMetrics {
  double mean_cost_reduction_pct = 0;
  double mean_std_reduction_pct = 0;
  std::size_t cost_points = 0;  // grid points included in each average
  std::size_t std_points = 0;
  std::size_t cost_excluded = 0;
  std::size_t std_excluded = 0;
};

/// Mean of the pointwise relative reduction (base - other) / base over points
/// where base exceeds 1e-9. Returns {pct, included, excluded}.
inline std::tuple<double, std::size_t, std::size_t> mean_relative_reduction(
    std::span<const double> base, std::span<const double> other) {
  if (base.size() != other.size()) throw ParameterError("metrics: series lengths differ");
  double acc = 0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < base.size(); ++i) {
    if (!(base[i] > 1e-9)) continue;
    acc += (base[i] - other[i]) / base[i];
    ++used;
  }
  if (used == 0) throw UndefinedMetricError("metrics: no grid point has a positive baseline");
  return {100.0 * acc / static_cast<double>(used), used, base.size() - used};
}

/// Neural-vs-classical reductions of cost rate and of its std, computed on the
/// EMA-smoothed series (or the raw ones when `smoothed` is false).
inline ComparisonMetrics comparison_metrics(const SweepResult& r, bool smoothed = true) {
  const PolicySeries& c = r.classical;
  const PolicySeries& m = r.ncbm;
  ComparisonMetrics out;
  std::tie(out.mean_cost_reduction_pct, out.cost_points, out.cost_excluded) =
      smoothed ? mean_relative_reduction(c.mean_ema, m.mean_ema)
               : mean_relative_reduction(c.mean, m.mean);
  std::tie(out.mean_std_reduction_pct, out.std_points, out.std_excluded) =
      smoothed ? mean_relative_reduction(c.std_ema, m.std_ema)
               : mean_relative_reduction(c.std, m.std);
  return out;
}

}  // namespace cbm
