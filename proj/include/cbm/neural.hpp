#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "rng.hpp"

namespace cbm {

// ---------------------------------------------------------------------------
// Single-neuron primitives
// ---------------------------------------------------------------------------

/// Weighted input of a threshold perceptron.
inline double weighted_sum(std::span<const double> inputs,
                           std::span<const double> weights) {
  if (inputs.size() != weights.size())
    throw ParameterError("perceptron: inputs and weights differ in length");
  return std::inner_product(inputs.begin(), inputs.end(), weights.begin(), 0.0);
}

/// 1 iff sum(w_i * x_i) exceeds the threshold.
inline int perceptron_output(std::span<const double> inputs,
                             std::span<const double> weights,
                             double threshold) {
  return weighted_sum(inputs, weights) > threshold ? 1 : 0;
}

// Largest double below one; saturated activations are held inside the open
// range instead of rounding onto its endpoints.
inline constexpr double kBelowOne = 1.0 - 0x1.0p-53;

/// Logistic function, held strictly inside (0, 1). Branches on sign so exp()
/// never overflows.
inline double sigmoid(double z) noexcept {
  double y;
  if (z >= 0) {
    y = 1.0 / (1.0 + std::exp(-z));
  } else {
    const double e = std::exp(z);
    y = e / (1.0 + e);
  }
  return std::clamp(y, std::numeric_limits<double>::min(), kBelowOne);
}

/// Hyperbolic tangent, held strictly inside (-1, 1).
inline double tanh_act(double z) noexcept {
  return std::clamp(std::tanh(z), -kBelowOne, kBelowOne);
}

enum class Activation { Sigmoid, Tanh };

inline std::string_view to_string(Activation act) noexcept {
  return act == Activation::Sigmoid ? "sigmoid" : "tanh";
}

inline Activation parse_activation(std::string_view name) {
  if (name == "sigmoid") return Activation::Sigmoid;
  if (name == "tanh") return Activation::Tanh;
  throw ParameterError("unknown activation: " + std::string(name));
}

inline double activate(Activation act, double z) noexcept {
  return act == Activation::Sigmoid ? sigmoid(z) : tanh_act(z);
}

// Derivative expressed through the activation value y = f(z).
inline double activation_slope(Activation act, double y) noexcept {
  return act == Activation::Sigmoid ? y * (1 - y) : 1 - y * y;
}

// ---------------------------------------------------------------------------
// Min-max scaling onto [-1, 1]
// ---------------------------------------------------------------------------

inline double minmax_normalize(double x, double lo, double hi) {
  if (!(lo < hi)) throw ParameterError("minmax: lo must be < hi");
  return 2.0 * (x - lo) / (hi - lo) - 1.0;
}

inline double minmax_denormalize(double y, double lo, double hi) {
  if (!(lo < hi)) throw ParameterError("minmax: lo must be < hi");
  return (y + 1.0) * (hi - lo) / 2.0 + lo;
}

// ---------------------------------------------------------------------------
// 1-H-1 regression network
// ---------------------------------------------------------------------------

/*!
 * Feed-forward network with one scalar input, H hidden units and a linear
 * scalar output.
 *
 * Inputs and targets are min-max scaled onto [-1, 1] with the stored bounds;
 * weights live in that scaled space. Inputs outside [in_min, in_max] are
 * extrapolated, not clamped.
 */
struct MlpModel {
  std::vector<double> hidden_weights;  // H x 1
  std::vector<double> hidden_biases;   // H
  std::vector<double> output_weights;  // 1 x H
  double output_bias = 0;
  Activation hidden_activation = Activation::Tanh;
  double in_min = -1, in_max = 1;
  double out_min = -1, out_max = 1;

  static constexpr std::size_t input_dim = 1;
  static constexpr std::size_t output_dim = 1;

  std::size_t hidden_size() const noexcept { return hidden_weights.size(); }

  void validate() const {
    const std::size_t h = hidden_size();
    if (h == 0) throw ParameterError("model: hidden size must be >= 1");
    if (hidden_biases.size() != h || output_weights.size() != h)
      throw ParameterError("model: parameter dimensions disagree");
    auto finite = [](double v) { return std::isfinite(v); };
    if (!std::all_of(hidden_weights.begin(), hidden_weights.end(), finite) ||
        !std::all_of(hidden_biases.begin(), hidden_biases.end(), finite) ||
        !std::all_of(output_weights.begin(), output_weights.end(), finite) ||
        !std::isfinite(output_bias))
      throw ParameterError("model: non-finite parameter");
    if (!(in_min < in_max) || !(out_min < out_max))
      throw ParameterError("model: normalization bounds must satisfy min < max");
  }

  friend bool operator==(const MlpModel&, const MlpModel&) = default;
};

/// Zero-initialized model with identity normalization.
inline MlpModel make_model(std::size_t hidden_size,
                           Activation act = Activation::Tanh) {
  if (hidden_size == 0) throw ParameterError("model: hidden size must be >= 1");
  MlpModel m;
  m.hidden_weights.assign(hidden_size, 0.0);
  m.hidden_biases.assign(hidden_size, 0.0);
  m.output_weights.assign(hidden_size, 0.0);
  m.hidden_activation = act;
  return m;
}

/// Weights and biases uniform in [-0.5, 0.5].
inline MlpModel init_model(std::size_t hidden_size, Activation act,
                           RngStream& rng) {
  MlpModel m = make_model(hidden_size, act);
  auto draw = [&rng] { return rng.uniform() - 0.5; };
  for (std::size_t j = 0; j < hidden_size; ++j) {
    m.hidden_weights[j] = draw();
    m.hidden_biases[j] = draw();
    m.output_weights[j] = draw();
  }
  m.output_bias = draw();
  return m;
}

enum class InitScheme { NguyenWidrow, Uniform };

/*!
 * Nguyen-Widrow initialization for a scalar input scaled onto [-1, 1].
 *
 * Hidden weights have magnitude 0.7*H (doubled for the sigmoid, whose active
 * region is twice as wide) with random sign, and the biases spread the unit
 * centres evenly across the input range. Output weights are uniform in
 * [-0.5, 0.5].
 */
inline MlpModel init_nguyen_widrow(std::size_t hidden_size, Activation act,
                                   RngStream& rng) {
  MlpModel m = make_model(hidden_size, act);
  const double h = static_cast<double>(hidden_size);
  const double beta = 0.7 * h * (act == Activation::Sigmoid ? 2.0 : 1.0);
  for (std::size_t j = 0; j < hidden_size; ++j) {
    const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
    const double spread =
        hidden_size == 1 ? 0.0 : -1.0 + 2.0 * static_cast<double>(j) / (h - 1);
    m.hidden_weights[j] = sign * beta;
    m.hidden_biases[j] = sign * beta * spread;
  }
  for (std::size_t j = 0; j < hidden_size; ++j)
    m.output_weights[j] = rng.uniform() - 0.5;
  m.output_bias = rng.uniform() - 0.5;
  return m;
}

inline MlpModel init_model(std::size_t hidden_size, Activation act,
                           InitScheme scheme, RngStream& rng) {
  return scheme == InitScheme::NguyenWidrow
             ? init_nguyen_widrow(hidden_size, act, rng)
             : init_model(hidden_size, act, rng);
}

/// Network output in scaled space for a scaled input.
inline double raw_forward(const MlpModel& m, double z) noexcept {
  double out = m.output_bias;
  for (std::size_t j = 0; j < m.hidden_size(); ++j)
    out += m.output_weights[j] *
           activate(m.hidden_activation,
                    m.hidden_weights[j] * z + m.hidden_biases[j]);
  return out;
}

/// Estimated degradation level tau years after replacement.
inline double mlp_forward(const MlpModel& m, double tau) {
  const double z = minmax_normalize(tau, m.in_min, m.in_max);
  return minmax_denormalize(raw_forward(m, z), m.out_min, m.out_max);
}

// ---------------------------------------------------------------------------
// Loss and gradients
// ---------------------------------------------------------------------------

/// Half sum of squared residuals.
inline double sse(std::span<const double> desired,
                  std::span<const double> outputs) {
  if (desired.size() != outputs.size())
    throw ParameterError("sse: length mismatch");
  double acc = 0;
  for (std::size_t i = 0; i < desired.size(); ++i) {
    const double r = desired[i] - outputs[i];
    acc += r * r;
  }
  return 0.5 * acc;
}

inline double mse(std::span<const double> desired,
                  std::span<const double> outputs) {
  if (desired.size() != outputs.size())
    throw ParameterError("mse: length mismatch");
  if (desired.empty()) throw ParameterError("mse: empty input");
  return 2.0 * sse(desired, outputs) / static_cast<double>(desired.size());
}

/// One (tau, target) training pair in data units.
struct Sample {
  double tau;
  double target;
};

/// Parameter-shaped container of partial derivatives.
struct Gradient {
  std::vector<double> hidden_weights;
  std::vector<double> hidden_biases;
  std::vector<double> output_weights;
  double output_bias = 0;

  explicit Gradient(std::size_t hidden_size = 0)
      : hidden_weights(hidden_size, 0.0),
        hidden_biases(hidden_size, 0.0),
        output_weights(hidden_size, 0.0) {}

  double norm() const noexcept {
    double acc = output_bias * output_bias;
    for (std::size_t j = 0; j < hidden_weights.size(); ++j)
      acc += hidden_weights[j] * hidden_weights[j] +
             hidden_biases[j] * hidden_biases[j] +
             output_weights[j] * output_weights[j];
    return std::sqrt(acc);
  }
};

struct GradientResult {
  Gradient gradient;
  double mse;  // batch MSE in scaled space
};

/// Batch MSE measured in scaled space, the quantity training minimizes.
inline double scaled_mse(const MlpModel& m, std::span<const Sample> batch) {
  if (batch.empty()) throw ParameterError("scaled_mse: empty batch");
  double acc = 0;
  for (const Sample& s : batch) {
    const double z = minmax_normalize(s.tau, m.in_min, m.in_max);
    const double d = minmax_normalize(s.target, m.out_min, m.out_max);
    const double r = raw_forward(m, z) - d;
    acc += r * r;
  }
  return acc / static_cast<double>(batch.size());
}

/*!
 * Exact gradient of the scaled-space batch MSE by back-propagation.
 *
 * For hidden unit j with activation value y_j the back-propagated error is
 * delta_j = dL/do * v_j * f'(y_j), where f' is y(1-y) for the sigmoid and
 * 1-y^2 for tanh.
 */
inline GradientResult backprop_gradient(const MlpModel& m,
                                        std::span<const Sample> batch) {
  if (batch.empty()) throw ParameterError("backprop_gradient: empty batch");
  const std::size_t h = m.hidden_size();
  const double n = static_cast<double>(batch.size());
  GradientResult res{Gradient(h), 0.0};
  Gradient& g = res.gradient;
  std::vector<double> hidden(h);

  for (const Sample& s : batch) {
    const double z = minmax_normalize(s.tau, m.in_min, m.in_max);
    const double d = minmax_normalize(s.target, m.out_min, m.out_max);
    double o = m.output_bias;
    for (std::size_t j = 0; j < h; ++j) {
      hidden[j] = activate(m.hidden_activation,
                           m.hidden_weights[j] * z + m.hidden_biases[j]);
      o += m.output_weights[j] * hidden[j];
    }
    const double r = o - d;
    res.mse += r * r;

    const double d_out = 2.0 * r / n;
    g.output_bias += d_out;
    for (std::size_t j = 0; j < h; ++j) {
      g.output_weights[j] += d_out * hidden[j];
      const double delta = d_out * m.output_weights[j] *
                           activation_slope(m.hidden_activation, hidden[j]);
      g.hidden_weights[j] += delta * z;
      g.hidden_biases[j] += delta;
    }
  }
  res.mse /= n;
  return res;
}

/// Gradient-descent step: every parameter moves by -learning_rate * grad.
inline MlpModel apply_update(const MlpModel& m, const Gradient& g,
                             double learning_rate) {
  if (!(learning_rate > 0))
    throw ParameterError("apply_update: learning rate must be > 0");
  if (g.hidden_weights.size() != m.hidden_size() ||
      g.hidden_biases.size() != m.hidden_size() ||
      g.output_weights.size() != m.hidden_size())
    throw ParameterError("apply_update: gradient shape does not match model");
  MlpModel out = m;
  for (std::size_t j = 0; j < m.hidden_size(); ++j) {
    out.hidden_weights[j] -= learning_rate * g.hidden_weights[j];
    out.hidden_biases[j] -= learning_rate * g.hidden_biases[j];
    out.output_weights[j] -= learning_rate * g.output_weights[j];
  }
  out.output_bias -= learning_rate * g.output_bias;
  return out;
}

}  // namespace cbm
