#pragma once

#include <cmath>
#include <concepts>
#include <cstddef>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "error.hpp"
#include "gamma.hpp"
#include "neural.hpp"
#include "policy.hpp"
#include "rng.hpp"

namespace cbm {

/// Inspection-point accounting for the neural policy.
enum class NcbmSemantics {
  /// Charge inspection + preventive only when the estimate trips x_fc;
  /// nothing is charged otherwise.
  Code,
  /// Always charge the inspection, then apply the preventive/failure regions
  /// to the estimate.
  Prose,
};

inline std::string_view to_string(NcbmSemantics s) noexcept {
  return s == NcbmSemantics::Code ? "code" : "prose";
}

inline NcbmSemantics parse_semantics(std::string_view name) {
  if (name == "code") return NcbmSemantics::Code;
  if (name == "prose") return NcbmSemantics::Prose;
  throw ParameterError("unknown ncbm semantics: " + std::string(name));
}

struct PolicyConfig {
  double horizon = 50.0;              ///< T, years
  double inspection_interval = 25.0;  ///< T_I, years
  int mid_checks = 2;                 ///< K; failure probes every T_I / K
  GammaProcess proc;
  CostParams costs;
  Thresholds thresholds;
  /// Classical inspections read the mean path a*tau/b instead of sampling.
  /// Mid-interval failure probes stay stochastic.
  bool deterministic = false;
  /// Build observations from independent increments of one path per renewal
  /// cycle instead of independent marginal draws.
  bool path_consistent = false;
  NcbmSemantics ncbm_semantics = NcbmSemantics::Code;

  void validate() const {
    detail::require(std::isfinite(horizon) && horizon > 0, "policy: horizon must be > 0");
    detail::require(std::isfinite(inspection_interval) && inspection_interval > 0,
                    "policy: inspection interval must be > 0");
    detail::require(mid_checks >= 1, "policy: mid-check count must be >= 1");
    proc.validate();
    costs.validate();
    thresholds.validate();
  }
};

/// Event times in years, each list in ascending order.
struct CostLedger {
  std::vector<double> inspections;
  std::vector<double> preventive;
  std::vector<double> failures;

  bool empty() const noexcept {
    return inspections.empty() && preventive.empty() && failures.empty();
  }

  friend bool operator==(const CostLedger&, const CostLedger&) = default;
};

namespace detail {

inline double discount_sum(const std::vector<double>& times, double rate) {
  double acc = 0;
  for (double t : times) acc += std::exp(-rate * t);
  return acc;
}

}  // namespace detail

/*!
 * Discounted cost per year:
 * (C_I * sum e^{-g t_insp} + C_P * sum e^{-g t_P} + C_F * sum e^{-g t_F}) / T.
 *
 * Each category's discount factors are summed before scaling by its cost, so
 * with g = 0 the result is exactly (C_I n + C_P n_P + C_F n_F) / T.
 */
inline double cost_rate_from_ledger(const CostLedger& ledger,
                                    const CostParams& costs, double horizon) {
  detail::require(horizon > 0, "cost rate: horizon must be > 0");
  const double g = costs.discount_rate;
  const double total = costs.c_inspect * detail::discount_sum(ledger.inspections, g) +
                       costs.c_prevent * detail::discount_sum(ledger.preventive, g) +
                       costs.c_fail * detail::discount_sum(ledger.failures, g);
  return total / horizon;
}

struct SimOutcome {
  double cost_rate = 0;
  CostLedger ledger;
};

namespace detail {

// Degradation observer for one simulated unit. Tracks the last observation of
// the current renewal cycle for the path-consistent mode.
template <class Stream>
class Observer {
 public:
  Observer(const PolicyConfig& cfg, Stream& rng) : cfg_(cfg), rng_(rng) {}

  double operator()(double tau) {
    if (tau < 0) tau = 0;
    if (!cfg_.path_consistent) return sample_degradation(cfg_.proc, tau, rng_);
    if (tau < last_tau_) renew();
    last_level_ += sample_degradation(cfg_.proc, tau - last_tau_, rng_);
    last_tau_ = tau;
    return last_level_;
  }

  void renew() noexcept {
    last_tau_ = 0;
    last_level_ = 0;
  }

 private:
  const PolicyConfig& cfg_;
  Stream& rng_;
  double last_tau_ = 0;
  double last_level_ = 0;
};

// Shared skeleton of both policies. Mid-interval probes only detect failures;
// `inspect(t_i, tau, ledger)` decides what happens at each inspection and
// returns true when the unit was replaced. It also receives the probe
// observer so path-consistent observations can continue the probes' path.
template <class Inspect>
SimOutcome run_policy(const PolicyConfig& cfg, RngStream& rng, Inspect&& inspect) {
  cfg.validate();
  const double T = cfg.horizon;
  const double TI = cfg.inspection_interval;
  const int K = cfg.mid_checks;
  const double dt = TI / K;

  SimOutcome out;
  CostLedger& ledger = out.ledger;
  Observer<RngStream> probe(cfg, rng);
  double renewed_at = 0;

  for (long i = 1; static_cast<double>(i) * TI < T; ++i) {
    const double t_i = static_cast<double>(i) * TI;
    bool inspect_now = true;
    for (int k = 1; k <= K - 1; ++k) {
      const double c = static_cast<double>(i - 1) * TI + static_cast<double>(k) * dt;
      const double x = probe(c - renewed_at);
      if (x >= cfg.thresholds.x_fc) {
        ledger.failures.push_back(c);
        renewed_at = c;
        probe.renew();
      }
      if (c >= T) {
        // An abort before the last probe also skips this interval's inspection.
        inspect_now = (k == K - 1);
        break;
      }
    }
    if (!inspect_now) continue;
    if (inspect(t_i, t_i - renewed_at, ledger, probe)) {
      renewed_at = t_i;
      probe.renew();
    }
  }
  out.cost_rate = cost_rate_from_ledger(ledger, cfg.costs, T);
  return out;
}

}  // namespace detail

/*!
 * Classical statistical CBM: physically inspect every T_I, replacing on the
 * observed level (failure at x_fc, preventive at x_pc). Failures between
 * inspections are detected by K-1 probes per interval.
 *
 * Probe draws come from `rng` itself; inspection draws come from a separate
 * lane of it, so a neural run on the same stream sees the same probe draws.
 */
inline SimOutcome simulate_classical(const PolicyConfig& cfg, RngStream rng) {
  RngStream inspect_rng = rng.lane(1);
  detail::Observer<RngStream> look(cfg, inspect_rng);
  return detail::run_policy(cfg, rng, [&](double t, double tau, CostLedger& ledger,
                                          detail::Observer<RngStream>& probe) {
    const double x = cfg.deterministic     ? cfg.proc.mean_rate() * tau
                     : cfg.path_consistent ? probe(tau)
                                           : look(tau);
    ledger.inspections.push_back(t);
    if (x >= cfg.thresholds.x_fc) {
      ledger.failures.push_back(t);
      return true;
    }
    if (x >= cfg.thresholds.x_pc) {
      ledger.preventive.push_back(t);
      return true;
    }
    return false;
  });
}

template <class F>
concept DegradationEstimator = std::regular_invocable<const F&, double> &&
    std::convertible_to<std::invoke_result_t<const F&, double>, double>;

/*!
 * Neural CBM: the inspection decision uses estimate(tau) + margin in place
 * of an observed level. Mid-interval failure probes are identical to the
 * classical policy.
 */
template <DegradationEstimator Estimator>
SimOutcome simulate_ncbm(const PolicyConfig& cfg, const Estimator& estimate,
                         double margin, RngStream rng) {
  detail::require(std::isfinite(margin), "ncbm: risk margin must be finite");
  const Thresholds& th = cfg.thresholds;
  return detail::run_policy(cfg, rng, [&](double t, double tau, CostLedger& ledger,
                                          detail::Observer<RngStream>&) {
    const double level = static_cast<double>(estimate(tau)) + margin;
    if (cfg.ncbm_semantics == NcbmSemantics::Code) {
      if (level < th.x_fc) return false;
      ledger.inspections.push_back(t);
      ledger.preventive.push_back(t);
      return true;
    }
    ledger.inspections.push_back(t);
    if (level >= th.x_fc) {
      ledger.failures.push_back(t);
      return true;
    }
    if (level >= th.x_pc) {
      ledger.preventive.push_back(t);
      return true;
    }
    return false;
  });
}

inline SimOutcome simulate_ncbm(const PolicyConfig& cfg, const MlpModel& model,
                                double margin, RngStream rng) {
  return simulate_ncbm(
      cfg, [&model](double tau) { return mlp_forward(model, tau); }, margin, rng);
}

}  // namespace cbm
