// Copyright 2026 The isd-evo Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "isd/learner.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "isd/errors.h"

namespace isd {

std::size_t NetShape::param_count() const { return ParamLayout(*this).total; }

ParamLayout::ParamLayout(const NetShape& shape) {
  const std::size_t in = shape.input_dim, h = shape.hidden, a = shape.num_actions;
  enc_w = 0;
  enc_b = enc_w + in * h;
  pol_w = enc_b + h;
  pol_b = pol_w + h * a;
  ext_w = pol_b + a;
  ext_b = ext_w + h;
  int_w = ext_b + 1;
  int_b = int_w + h;
  total = int_b + 1;
}

PolicyParams PolicyParams::zeros(const NetShape& shape) {
  if (shape.input_dim <= 0 || shape.hidden <= 0 || shape.num_actions <= 0) {
    throw UsageError("policy network shape must be positive");
  }
  return PolicyParams{shape, std::vector<double>(shape.param_count(), 0.0)};
}

PolicyParams PolicyParams::initialize(const NetShape& shape, Rng& rng) {
  PolicyParams params = zeros(shape);
  const ParamLayout layout(shape);
  // Roughly one active plane per window cell.
  const double active = std::max(1.0, shape.input_dim / double(ObservationEncoder::kPlanes));
  const double enc_scale = std::sqrt(3.0 / active);
  for (std::size_t i = layout.enc_w; i < layout.enc_b; ++i) {
    params.data[i] = uniform(rng, -enc_scale, enc_scale);
  }
  for (std::size_t i = layout.pol_w; i < layout.pol_b; ++i) {
    params.data[i] = uniform(rng, -0.01, 0.01);
  }
  return params;
}

Hyperparams Hyperparams::sample(Rng& rng, double learning_rate,
                                double entropy_lo, double entropy_hi) {
  Hyperparams hp;
  hp.learning_rate = learning_rate;
  hp.entropy_cost =
      std::exp(uniform(rng, std::log(entropy_lo), std::log(entropy_hi)));
  return hp;
}

OptState OptState::for_params(const PolicyParams& params) {
  OptState opt;
  opt.mean_square.assign(params.data.size(), 0.0);
  return opt;
}

// ------------------------------------------------------------- encoder

ObservationEncoder::ObservationEncoder(int window, int num_actions)
    : window_(window),
      num_actions_(num_actions),
      input_dim_(kPlanes * window * window + num_actions + 2) {}

SparseInput ObservationEncoder::encode(const Observation& obs, int last_action,
                                       double last_intrinsic,
                                       double last_extrinsic) const {
  if (obs.size != window_) throw UsageError("observation window size mismatch");
  const int area = window_ * window_;
  SparseInput input;
  input.index.reserve(area + 3);
  input.value.reserve(area + 3);
  for (int k = 0; k < area; ++k) {
    const Cell c = obs.cells[k];
    if (c != Cell::kEmpty) {
      // Planes 0..4 hold cell kinds 1..5.
      input.add(static_cast<std::uint32_t>((static_cast<int>(c) - 1) * area + k), 1.0);
    }
    if (obs.players[k] >= kOtherPlayerBase) {
      input.add(static_cast<std::uint32_t>(5 * area + k), 1.0);
    }
  }
  const int aux = kPlanes * area;
  if (last_action >= 0 && last_action < num_actions_) {
    input.add(static_cast<std::uint32_t>(aux + last_action), 1.0);
  }
  input.add(static_cast<std::uint32_t>(aux + num_actions_), std::tanh(last_intrinsic));
  input.add(static_cast<std::uint32_t>(aux + num_actions_ + 1), std::tanh(last_extrinsic));
  return input;
}

// ------------------------------------------------------------- forward

ForwardPass forward(const PolicyParams& params, const SparseInput& input) {
  const NetShape& s = params.shape;
  const ParamLayout layout(s);
  const double* d = params.data.data();
  ForwardPass f;
  f.pre.assign(d + layout.enc_b, d + layout.enc_b + s.hidden);
  for (std::size_t n = 0; n < input.index.size(); ++n) {
    const std::uint32_t i = input.index[n];
    if (i >= static_cast<std::uint32_t>(s.input_dim)) {
      throw UsageError("input feature index out of range");
    }
    const double x = input.value[n];
    const double* row = d + layout.enc_w + static_cast<std::size_t>(i) * s.hidden;
    for (int j = 0; j < s.hidden; ++j) f.pre[j] += x * row[j];
  }
  f.hidden.resize(s.hidden);
  for (int j = 0; j < s.hidden; ++j) f.hidden[j] = std::max(0.0, f.pre[j]);

  f.logits.assign(d + layout.pol_b, d + layout.pol_b + s.num_actions);
  f.value_ext = d[layout.ext_b];
  f.value_int = d[layout.int_b];
  for (int j = 0; j < s.hidden; ++j) {
    const double h = f.hidden[j];
    if (h == 0.0) continue;
    const double* row = d + layout.pol_w + static_cast<std::size_t>(j) * s.num_actions;
    for (int k = 0; k < s.num_actions; ++k) f.logits[k] += h * row[k];
    f.value_ext += h * d[layout.ext_w + j];
    f.value_int += h * d[layout.int_w + j];
  }

  const double max_logit = *std::max_element(f.logits.begin(), f.logits.end());
  double sum = 0.0;
  for (double z : f.logits) sum += std::exp(z - max_logit);
  const double log_norm = max_logit + std::log(sum);
  f.log_probs.resize(s.num_actions);
  f.probs.resize(s.num_actions);
  for (int k = 0; k < s.num_actions; ++k) {
    f.log_probs[k] = f.logits[k] - log_norm;
    f.probs[k] = std::exp(f.log_probs[k]);
  }
  return f;
}

ActResult act(const PolicyParams& params, const SparseInput& input, Rng& rng) {
  ForwardPass f = forward(params, input);
  for (double z : f.logits) {
    if (!std::isfinite(z)) throw NumericError("non-finite policy logits");
  }
  const double draw = uniform01(rng);
  double cumulative = 0.0;
  int action = params.shape.num_actions - 1;
  for (int k = 0; k < params.shape.num_actions; ++k) {
    cumulative += f.probs[k];
    if (draw < cumulative) {
      action = k;
      break;
    }
  }
  return ActResult{action, f.log_probs[action], f.value_ext, f.value_int};
}

double entropy_of(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

// ------------------------------------------------------------- targets

Targets compute_targets(const Trajectory& traj, double discount) {
  const std::size_t n = traj.steps.size();
  Targets t;
  t.return_ext.resize(n);
  t.return_int.resize(n);
  t.advantage.resize(n);
  double g_ext = traj.bootstrap_ext;
  double g_int = traj.bootstrap_int;
  for (std::size_t k = n; k-- > 0;) {
    const TrajectoryStep& s = traj.steps[k];
    g_ext = s.reward_ext + discount * g_ext;
    g_int = s.reward_int + discount * g_int;
    t.return_ext[k] = g_ext;
    t.return_int[k] = g_int;
    t.advantage[k] = (g_ext + g_int) - (s.value_ext + s.value_int);
  }
  return t;
}

// ---------------------------------------------------------------- loss

LossReport loss_and_gradient(const PolicyParams& params,
                             std::span<const Trajectory> batch,
                             const Hyperparams& hp, std::vector<double>* grad) {
  const NetShape& s = params.shape;
  const ParamLayout layout(s);
  const double* d = params.data.data();
  if (grad != nullptr) grad->assign(layout.total, 0.0);
  LossReport report;
  if (batch.empty()) return report;
  const double scale = 1.0 / static_cast<double>(batch.size());

  std::vector<double> dlogits(s.num_actions), dhidden(s.hidden);
  for (const Trajectory& traj : batch) {
    const Targets targets = compute_targets(traj, hp.discount);
    for (std::size_t t = 0; t < traj.steps.size(); ++t) {
      const TrajectoryStep& step = traj.steps[t];
      if (step.action < 0 || step.action >= s.num_actions) {
        throw UsageError("trajectory action out of range");
      }
      const ForwardPass f = forward(params, step.input);
      const double adv = targets.advantage[t];
      const double err_ext = targets.return_ext[t] - f.value_ext;
      const double err_int = targets.return_int[t] - f.value_int;
      const double entropy = entropy_of(f.probs);

      report.policy_loss += -adv * f.log_probs[step.action];
      report.value_loss_ext += err_ext * err_ext;
      report.value_loss_int += err_int * err_int;
      report.entropy += entropy;
      ++report.steps;

      if (grad == nullptr) continue;
      double* g = grad->data();
      for (int k = 0; k < s.num_actions; ++k) {
        const double onehot = k == step.action ? 1.0 : 0.0;
        dlogits[k] = scale * (-adv * (onehot - f.probs[k]) +
                              hp.entropy_cost * f.probs[k] *
                                  (f.log_probs[k] + entropy));
      }
      const double dv_ext = scale * -2.0 * hp.baseline_cost * err_ext;
      const double dv_int = scale * -2.0 * hp.baseline_cost * err_int;

      for (int k = 0; k < s.num_actions; ++k) g[layout.pol_b + k] += dlogits[k];
      g[layout.ext_b] += dv_ext;
      g[layout.int_b] += dv_int;
      for (int j = 0; j < s.hidden; ++j) {
        const double h = f.hidden[j];
        const double* pw = d + layout.pol_w + static_cast<std::size_t>(j) * s.num_actions;
        double back = d[layout.ext_w + j] * dv_ext + d[layout.int_w + j] * dv_int;
        for (int k = 0; k < s.num_actions; ++k) back += pw[k] * dlogits[k];
        dhidden[j] = f.pre[j] > 0.0 ? back : 0.0;
        if (h != 0.0) {
          double* gw = g + layout.pol_w + static_cast<std::size_t>(j) * s.num_actions;
          for (int k = 0; k < s.num_actions; ++k) gw[k] += h * dlogits[k];
          g[layout.ext_w + j] += h * dv_ext;
          g[layout.int_w + j] += h * dv_int;
        }
        g[layout.enc_b + j] += dhidden[j];
      }
      for (std::size_t n = 0; n < step.input.index.size(); ++n) {
        const double x = step.input.value[n];
        double* gw = g + layout.enc_w +
                     static_cast<std::size_t>(step.input.index[n]) * s.hidden;
        for (int j = 0; j < s.hidden; ++j) gw[j] += x * dhidden[j];
      }
    }
  }
  report.policy_loss *= scale;
  report.value_loss_ext *= scale;
  report.value_loss_int *= scale;
  report.total = report.policy_loss +
                 hp.baseline_cost * (report.value_loss_ext + report.value_loss_int) -
                 hp.entropy_cost * report.entropy * scale;
  if (report.steps > 0) report.entropy /= static_cast<double>(report.steps);
  if (grad != nullptr) {
    double sq = 0.0;
    for (double x : *grad) sq += x * x;
    report.grad_norm = std::sqrt(sq);
  }
  return report;
}

void rmsprop_step(std::span<double> params, OptState& opt,
                  std::span<const double> grad, double learning_rate) {
  if (grad.size() != params.size()) throw UsageError("gradient size mismatch");
  if (opt.mean_square.size() != params.size()) {
    opt.mean_square.assign(params.size(), 0.0);
  }
  const bool use_momentum = opt.momentum != 0.0;
  if (use_momentum && opt.momentum_buffer.size() != params.size()) {
    opt.momentum_buffer.assign(params.size(), 0.0);
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grad[i];
    double& ms = opt.mean_square[i];
    ms = opt.decay * ms + (1.0 - opt.decay) * g * g;
    const double delta = learning_rate * g / std::sqrt(ms + opt.epsilon);
    if (use_momentum) {
      double& m = opt.momentum_buffer[i];
      m = opt.momentum * m + delta;
      params[i] -= m;
    } else {
      params[i] -= delta;
    }
  }
}

LossReport update(PolicyParams& params, OptState& opt,
                  std::span<const Trajectory> batch, const Hyperparams& hp) {
  std::vector<double> grad;
  LossReport report = loss_and_gradient(params, batch, hp, &grad);
  bool finite = std::isfinite(report.total) && std::isfinite(report.grad_norm);
  if (!finite) {
    report.skipped = true;
    return report;
  }
  rmsprop_step(params.data, opt, grad, hp.learning_rate);
  return report;
}

}  // namespace isd
