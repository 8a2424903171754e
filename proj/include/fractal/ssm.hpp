#pragma once

// Diagonal state space model: zero-order-hold discretization, the linear
// time-invariant recurrence and its convolution kernel, and the selective
// (time-variant) scan with reverse-mode gradients.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fractal/error.hpp"

namespace fractal {

using Sequence = std::vector<double>;
using HiddenState = std::vector<double>;

// Dense row-major matrix, just enough for the L x N selective inputs.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Continuous parameters with diagonal A.
struct SsmParams {
  std::vector<double> a_diag;
  std::vector<double> b;
  std::vector<double> c;
  double delta = 1.0;
  // When set, validate() also requires every a_diag entry to be <= 0.
  bool check_stability = false;

  std::size_t state_size() const noexcept { return a_diag.size(); }

  void validate() const {
    if (a_diag.empty()) throw Error(ErrorCode::DimensionMismatch, "state size must be >= 1");
    if (b.size() != a_diag.size() || c.size() != a_diag.size()) {
      throw Error(ErrorCode::DimensionMismatch, "A, B and C must share the state size");
    }
    if (!(delta > 0.0)) throw Error(ErrorCode::NonPositiveDelta, "delta must be positive");
    if (check_stability) {
      for (double a : a_diag) {
        if (a > 0.0) throw Error(ErrorCode::InvalidSpec, "unstable A entry " + std::to_string(a));
      }
    }
  }
};

struct DiscreteSsmParams {
  std::vector<double> a_bar;
  std::vector<double> b_bar;
  std::vector<double> c;

  std::size_t state_size() const noexcept { return a_bar.size(); }

  void validate() const {
    if (a_bar.empty()) throw Error(ErrorCode::DimensionMismatch, "state size must be >= 1");
    if (b_bar.size() != a_bar.size() || c.size() != a_bar.size()) {
      throw Error(ErrorCode::DimensionMismatch, "A, B and C must share the state size");
    }
  }
};

// Per-step Delta_t, B_t and C_t of the selective scan. b and c are L x N.
struct SelectiveInputs {
  std::vector<double> delta;
  Matrix b;
  Matrix c;

  std::size_t length() const noexcept { return delta.size(); }
  std::size_t state_size() const noexcept { return b.cols(); }
};

struct SelectiveGradients {
  std::vector<double> a_diag;
  std::vector<double> delta;
  Matrix b;
  Matrix c;
  Sequence x;
  HiddenState h0;
};

// Tally of elementary floating-point operations (multiply, multiply-add,
// exp each count one) performed by the instrumented kernels.
struct OpCounter {
  std::uint64_t ops = 0;
};

// Below this |Delta * a| the ZOH input gain uses its Taylor series.
inline constexpr double kZohSeriesThreshold = 1e-6;

// (exp(z) - 1) / z, continuous at z = 0.
inline double zoh_gain(double z) {
  if (std::fabs(z) < kZohSeriesThreshold) return 1.0 + z / 2.0 + z * z / 6.0;
  return std::expm1(z) / z;
}

inline DiscreteSsmParams discretize_zoh(const SsmParams& params) {
  params.validate();
  const std::size_t n = params.state_size();
  DiscreteSsmParams out{std::vector<double>(n), std::vector<double>(n), params.c};
  for (std::size_t i = 0; i < n; ++i) {
    const double z = params.delta * params.a_diag[i];
    out.a_bar[i] = std::exp(z);
    out.b_bar[i] = zoh_gain(z) * params.delta * params.b[i];
  }
  return out;
}

// Exact A_bar with the first-order input rule B_bar = Delta * B, the
// discretization the selective scan applies at every step.
inline DiscreteSsmParams discretize_euler_b(const SsmParams& params) {
  params.validate();
  const std::size_t n = params.state_size();
  DiscreteSsmParams out{std::vector<double>(n), std::vector<double>(n), params.c};
  for (std::size_t i = 0; i < n; ++i) {
    out.a_bar[i] = std::exp(params.delta * params.a_diag[i]);
    out.b_bar[i] = params.delta * params.b[i];
  }
  return out;
}

namespace detail {

inline HiddenState initial_state(const HiddenState& h0, std::size_t n) {
  if (h0.empty()) return HiddenState(n, 0.0);
  if (h0.size() != n) {
    throw Error(ErrorCode::DimensionMismatch, "initial state has " + std::to_string(h0.size()) +
                                                  " entries, expected " + std::to_string(n));
  }
  return h0;
}

inline void require_nonempty(std::span<const double> x) {
  if (x.empty()) throw Error(ErrorCode::LengthMismatch, "sequence must have length >= 1");
}

}  // namespace detail

// h_t = A_bar h_{t-1} + B_bar x_t,  y_t = C h_t. An empty h0 means zero.
inline Sequence scan_lti(const DiscreteSsmParams& disc, std::span<const double> x,
                         const HiddenState& h0 = {}) {
  disc.validate();
  detail::require_nonempty(x);
  const std::size_t n = disc.state_size();
  auto h = detail::initial_state(h0, n);
  Sequence y(x.size(), 0.0);
  for (std::size_t t = 0; t < x.size(); ++t) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      h[i] = disc.a_bar[i] * h[i] + disc.b_bar[i] * x[t];
      acc += disc.c[i] * h[i];
    }
    y[t] = acc;
  }
  return y;
}

// K = (C B_bar, C A_bar B_bar, ..., C A_bar^{L-1} B_bar).
inline std::vector<double> build_kernel(const DiscreteSsmParams& disc, std::size_t length) {
  disc.validate();
  if (length < 1) throw Error(ErrorCode::LengthMismatch, "kernel length must be >= 1");
  const std::size_t n = disc.state_size();
  std::vector<double> power(n, 1.0);
  std::vector<double> kernel(length, 0.0);
  for (std::size_t k = 0; k < length; ++k) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      acc += disc.c[i] * power[i] * disc.b_bar[i];
      power[i] *= disc.a_bar[i];
    }
    kernel[k] = acc;
  }
  return kernel;
}

// Causal convolution y_t = sum_{k <= t} K_k x_{t-k}.
inline Sequence conv_apply(std::span<const double> kernel, std::span<const double> x) {
  detail::require_nonempty(x);
  if (kernel.size() != x.size()) {
    throw Error(ErrorCode::DimensionMismatch, "kernel length " + std::to_string(kernel.size()) +
                                                  " != sequence length " +
                                                  std::to_string(x.size()));
  }
  Sequence y(x.size(), 0.0);
  for (std::size_t t = 0; t < x.size(); ++t) {
    double acc = 0.0;
    for (std::size_t k = 0; k <= t; ++k) acc += kernel[k] * x[t - k];
    y[t] = acc;
  }
  return y;
}

namespace detail {

inline void check_selective(std::span<const double> a_diag, const SelectiveInputs& in,
                            std::span<const double> x) {
  const std::size_t n = a_diag.size();
  const std::size_t len = x.size();
  require_nonempty(x);
  if (n == 0) throw Error(ErrorCode::DimensionMismatch, "state size must be >= 1");
  if (in.delta.size() != len || in.b.rows() != len || in.c.rows() != len) {
    throw Error(ErrorCode::DimensionMismatch, "selective inputs must have one row per step (" +
                                                  std::to_string(len) + ")");
  }
  if (in.b.cols() != n || in.c.cols() != n) {
    throw Error(ErrorCode::DimensionMismatch, "selective B/C rows must have " +
                                                  std::to_string(n) + " entries");
  }
  for (std::size_t t = 0; t < len; ++t) {
    if (!(in.delta[t] > 0.0)) {
      throw Error(ErrorCode::NonPositiveDelta, "delta[" + std::to_string(t) + "] must be positive");
    }
  }
}

}  // namespace detail

// Elementary operations per step and state entry in scan_selective:
// Delta*a, exp, Delta*b, A_bar*h, fused B_bar*x add, fused C*h accumulate.
inline constexpr std::uint64_t kSelectiveOpsPerState = 6;

// Time-variant scan: a_bar_t = exp(Delta_t a), b_bar_t = Delta_t b_t,
// h_t = a_bar_t * h_{t-1} + b_bar_t x_t, y_t = c_t . h_t.
// An a_diag entry of -infinity drops that state's carry entirely.
inline Sequence scan_selective(std::span<const double> a_diag, const SelectiveInputs& inputs,
                               std::span<const double> x, const HiddenState& h0 = {},
                               OpCounter* counter = nullptr) {
  detail::check_selective(a_diag, inputs, x);
  const std::size_t n = a_diag.size();
  auto h = detail::initial_state(h0, n);
  Sequence y(x.size(), 0.0);
  for (std::size_t t = 0; t < x.size(); ++t) {
    const double dt = inputs.delta[t];
    const auto b = inputs.b.row(t);
    const auto c = inputs.c.row(t);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double a_bar = std::exp(dt * a_diag[i]);
      const double b_bar = dt * b[i];
      h[i] = a_bar * h[i] + b_bar * x[t];
      acc += c[i] * h[i];
    }
    y[t] = acc;
    if (counter) counter->ops += kSelectiveOpsPerState * n;
  }
  return y;
}

// Reverse-mode gradients of sum_t upstream_t * y_t through scan_selective.
inline SelectiveGradients grad_selective(std::span<const double> a_diag,
                                         const SelectiveInputs& inputs, std::span<const double> x,
                                         const HiddenState& h0, std::span<const double> upstream) {
  detail::check_selective(a_diag, inputs, x);
  if (upstream.size() != x.size()) {
    throw Error(ErrorCode::DimensionMismatch, "upstream must have one entry per step");
  }
  const std::size_t n = a_diag.size();
  const std::size_t len = x.size();

  // states(t, i) holds h_t; row 0 is the initial state.
  Matrix states(len + 1, n);
  Matrix a_bars(len, n);
  {
    const auto init = detail::initial_state(h0, n);
    for (std::size_t i = 0; i < n; ++i) states(0, i) = init[i];
  }
  for (std::size_t t = 0; t < len; ++t) {
    const double dt = inputs.delta[t];
    for (std::size_t i = 0; i < n; ++i) {
      const double a_bar = std::exp(dt * a_diag[i]);
      a_bars(t, i) = a_bar;
      states(t + 1, i) = a_bar * states(t, i) + dt * inputs.b(t, i) * x[t];
    }
  }

  SelectiveGradients g{std::vector<double>(n, 0.0), std::vector<double>(len, 0.0),
                       Matrix(len, n), Matrix(len, n), Sequence(len, 0.0), HiddenState(n, 0.0)};
  // carry(i) = dLoss/dh_t accumulated from steps after t.
  std::vector<double> carry(n, 0.0);
  for (std::size_t t = len; t-- > 0;) {
    const double dt = inputs.delta[t];
    double g_delta = 0.0;
    double g_x = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double h_prev = states(t, i);
      const double dh = upstream[t] * inputs.c(t, i) + carry[i];
      g.c(t, i) = upstream[t] * states(t + 1, i);
      const double d_abar = dh * h_prev;
      g.a_diag[i] += d_abar * dt * a_bars(t, i);
      g_delta += d_abar * a_diag[i] * a_bars(t, i) + dh * inputs.b(t, i) * x[t];
      g.b(t, i) = dh * dt * x[t];
      g_x += dh * dt * inputs.b(t, i);
      carry[i] = dh * a_bars(t, i);
    }
    g.delta[t] = g_delta;
    g.x[t] = g_x;
  }
  g.h0 = carry;
  return g;
}

}  // namespace fractal
