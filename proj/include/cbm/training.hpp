#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "error.hpp"
#include "gamma.hpp"
#include "neural.hpp"
#include "policy.hpp"
#include "rng.hpp"

namespace cbm {

/// (tau, x) observations in simulation order.
struct DegradationDataset {
  std::vector<Sample> records;

  std::size_t size() const noexcept { return records.size(); }
  bool empty() const noexcept { return records.empty(); }
};

/*!
 * Simulate a single unit observed every `sample_interval` years up to the
 * horizon, recording (years since replacement, sampled degradation).
 *
 * Each observation is an independent marginal draw Gamma(a*tau, b). The unit
 * is replaced (clock reset) whenever the draw reaches x_pc, which includes
 * draws at or above x_fc.
 */
inline DegradationDataset generate_training_data(const GammaProcess& proc,
                                                 const Thresholds& thresholds,
                                                 double horizon,
                                                 double sample_interval,
                                                 RngStream& rng) {
  proc.validate();
  thresholds.validate();
  detail::require(sample_interval > 0, "training data: sample interval must be > 0");
  detail::require(horizon > sample_interval,
                  "training data: horizon must exceed the sample interval");

  DegradationDataset data;
  std::uint64_t last_reset = 0;
  for (std::uint64_t i = 1; static_cast<double>(i) * sample_interval < horizon; ++i) {
    const double tau = static_cast<double>(i - last_reset) * sample_interval;
    const double x = sample_degradation(proc, tau, rng);
    data.records.push_back({tau, x});
    if (x >= thresholds.x_pc) last_reset = i;
  }
  return data;
}

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
};

namespace detail {

// Unbiased integer in [0, bound) by rejection.
inline std::uint64_t bounded(RngStream& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t r = 0;
  do r = rng(); while (r >= limit);
  return r % bound;
}

}  // namespace detail

/// Random 70/15/15 partition; validation and test get round(0.15 n) each.
inline SplitIndices split_dataset(std::size_t n, RngStream& rng) {
  if (n == 0) throw ParameterError("split_dataset: empty dataset");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  for (std::size_t i = n - 1; i > 0; --i)
    std::swap(perm[i], perm[detail::bounded(rng, i + 1)]);

  const std::size_t held = (n * 15 + 50) / 100;
  const std::size_t n_train = n - 2 * held;
  SplitIndices s;
  s.train.assign(perm.begin(), perm.begin() + n_train);
  s.validation.assign(perm.begin() + n_train, perm.begin() + n_train + held);
  s.test.assign(perm.begin() + n_train + held, perm.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.validation.begin(), s.validation.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

inline SplitIndices split_dataset(const DegradationDataset& data, RngStream& rng) {
  return split_dataset(data.size(), rng);
}

struct TrainingConfig {
  std::size_t hidden_size = 10;
  Activation activation = Activation::Tanh;
  InitScheme init = InitScheme::Uniform;
  double learning_rate = 0.3;
  std::size_t max_epochs = 20000;
  std::size_t patience = 6;  // consecutive epochs without a validation decrease
};

/// Per-epoch history. Entry e describes the weights after e updates.
struct TrainingRecord {
  std::vector<double> train_mse;  // data units
  std::vector<double> val_mse;
  std::vector<double> test_mse;
  std::vector<double> grad_norm;  // of the scaled-space loss
  std::size_t best_epoch = 0;

  std::size_t epochs() const noexcept { return train_mse.size(); }
};

struct TrainedModel {
  MlpModel model;
  TrainingRecord record;
};

namespace detail {

inline std::vector<Sample> gather(const DegradationDataset& data,
                                  std::span<const std::size_t> idx) {
  std::vector<Sample> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) {
    if (i >= data.size()) throw ParameterError("split index out of range");
    out.push_back(data.records[i]);
  }
  return out;
}

}  // namespace detail

/// Sets the model's normalization bounds from the dataset's tau and x ranges.
inline void fit_normalization(MlpModel& model, const DegradationDataset& data) {
  if (data.empty()) throw ParameterError("fit_normalization: empty dataset");
  auto [tmin, tmax] = std::minmax_element(
      data.records.begin(), data.records.end(),
      [](const Sample& l, const Sample& r) { return l.tau < r.tau; });
  auto [xmin, xmax] = std::minmax_element(
      data.records.begin(), data.records.end(),
      [](const Sample& l, const Sample& r) { return l.target < r.target; });
  if (!(tmin->tau < tmax->tau))
    throw NormalizationError("all tau values are equal; cannot normalize input");
  if (!(xmin->target < xmax->target))
    throw NormalizationError("all degradation values are equal; cannot normalize target");
  model.in_min = tmin->tau;
  model.in_max = tmax->tau;
  model.out_min = xmin->target;
  model.out_max = xmax->target;
}

/*!
 * Full-batch gradient descent on the scaled-space MSE of the training split,
 * with early stopping on the validation split.
 *
 * Training stops once validation MSE has not decreased from one epoch to the
 * next for `patience` consecutive epochs, or after `max_epochs` updates. The
 * returned model holds the weights of the best validation epoch. With an
 * empty validation split the training MSE drives model selection instead.
 */
inline TrainedModel train_model(const DegradationDataset& data,
                                const SplitIndices& splits,
                                const TrainingConfig& config,
                                RngStream& init_rng) {
  if (config.hidden_size == 0) throw ParameterError("train: hidden size must be >= 1");
  if (!(config.learning_rate > 0)) throw ParameterError("train: learning rate must be > 0");
  if (splits.train.empty()) throw ParameterError("train: empty training split");

  MlpModel model = init_model(config.hidden_size, config.activation, config.init, init_rng);
  fit_normalization(model, data);

  const std::vector<Sample> train = detail::gather(data, splits.train);
  const std::vector<Sample> val = detail::gather(data, splits.validation);
  const std::vector<Sample> test = detail::gather(data, splits.test);

  const double half_range = (model.out_max - model.out_min) / 2.0;
  const double to_data_units = half_range * half_range;
  auto data_mse = [&](const MlpModel& m, const std::vector<Sample>& batch) {
    return batch.empty() ? std::numeric_limits<double>::quiet_NaN()
                         : scaled_mse(m, batch) * to_data_units;
  };

  TrainedModel out{model, {}};
  TrainingRecord& rec = out.record;
  double best = std::numeric_limits<double>::infinity();
  double previous = std::numeric_limits<double>::infinity();
  std::size_t rising = 0;  // consecutive epochs without a decrease

  for (std::size_t epoch = 0;; ++epoch) {
    const GradientResult step = backprop_gradient(model, train);
    const double train_mse = step.mse * to_data_units;
    const double val_mse = data_mse(model, val);
    rec.train_mse.push_back(train_mse);
    rec.val_mse.push_back(val_mse);
    rec.test_mse.push_back(data_mse(model, test));
    rec.grad_norm.push_back(step.gradient.norm());

    const double monitored = val.empty() ? train_mse : val_mse;
    if (monitored < best) {
      best = monitored;
      rec.best_epoch = epoch;
      out.model = model;
    }
    rising = monitored < previous ? 0 : rising + 1;
    previous = monitored;
    if (rising >= config.patience) break;
    if (epoch == config.max_epochs) break;
    model = apply_update(model, step.gradient, config.learning_rate);
  }
  return out;
}

/// Largest signed residual (target - estimate) over the dataset.
inline double risk_margin(const MlpModel& model, const DegradationDataset& data) {
  if (data.empty()) throw ParameterError("risk_margin: empty dataset");
  double worst = -std::numeric_limits<double>::infinity();
  for (const Sample& s : data.records)
    worst = std::max(worst, s.target - mlp_forward(model, s.tau));
  return worst;
}

}  // namespace cbm
