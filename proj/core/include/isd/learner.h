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
#ifndef ISD_LEARNER_H_
#define ISD_LEARNER_H_

// Compact advantage actor-critic learner.
//
// Network: sparse observation features -> ReLU hidden layer -> policy
// logits plus two linear value heads, V^E for extrinsic and V^I for
// intrinsic reward. The policy is trained on the total reward, each value
// head on its own reward stream. Optimised with RMSProp.

#include <cstdint>
#include <span>
#include <vector>

#include "isd/gridworld.h"
#include "isd/random.h"

namespace isd {

struct NetShape {
  int input_dim = 0;
  int hidden = 0;
  int num_actions = 0;

  std::size_t param_count() const;
  bool operator==(const NetShape&) const = default;
};

// Offsets of each parameter block inside PolicyParams::data.
struct ParamLayout {
  std::size_t enc_w;   // input_dim x hidden, row per input feature
  std::size_t enc_b;   // hidden
  std::size_t pol_w;   // hidden x num_actions, row per hidden unit
  std::size_t pol_b;   // num_actions
  std::size_t ext_w;   // hidden
  std::size_t ext_b;   // 1
  std::size_t int_w;   // hidden
  std::size_t int_b;   // 1
  std::size_t total;

  explicit ParamLayout(const NetShape& shape);
};

struct PolicyParams {
  NetShape shape;
  std::vector<double> data;

  static PolicyParams zeros(const NetShape& shape);
  static PolicyParams initialize(const NetShape& shape, Rng& rng);

  bool operator==(const PolicyParams&) const = default;
};

struct Hyperparams {
  double learning_rate = 4e-4;
  double entropy_cost = 1e-3;
  double baseline_cost = 0.25;
  double discount = 0.99;

  // Learning rate as given; entropy cost from LogUniform(lo, hi).
  static Hyperparams sample(Rng& rng, double learning_rate = 4e-4,
                            double entropy_lo = 2e-4, double entropy_hi = 0.01);
  bool operator==(const Hyperparams&) const = default;
};

struct OptState {
  std::vector<double> mean_square;
  std::vector<double> momentum_buffer;
  double decay = 0.99;
  double epsilon = 1e-5;
  double momentum = 0.0;

  static OptState for_params(const PolicyParams& params);
  bool operator==(const OptState&) const = default;
};

// Nonzero input features as (index, value) pairs.
struct SparseInput {
  std::vector<std::uint32_t> index;
  std::vector<double> value;

  void add(std::uint32_t i, double v) {
    index.push_back(i);
    value.push_back(v);
  }
};

// One-hot planes over the observation window (wall, apple, waste, field
// soil, aquifer soil, other player) followed by the previous action one-hot
// and squashed previous intrinsic and extrinsic rewards.
class ObservationEncoder {
 public:
  static constexpr int kPlanes = 6;

  ObservationEncoder(int window, int num_actions);

  int input_dim() const { return input_dim_; }

  // last_action < 0 means "no previous action".
  SparseInput encode(const Observation& obs, int last_action,
                     double last_intrinsic, double last_extrinsic) const;

 private:
  int window_;
  int num_actions_;
  int input_dim_;
};

struct ForwardPass {
  std::vector<double> pre;       // hidden pre-activations
  std::vector<double> hidden;    // relu(pre)
  std::vector<double> logits;
  std::vector<double> log_probs;
  std::vector<double> probs;
  double value_ext = 0.0;
  double value_int = 0.0;
};

ForwardPass forward(const PolicyParams& params, const SparseInput& input);

struct ActResult {
  int action = 0;
  double log_prob = 0.0;
  double value_ext = 0.0;
  double value_int = 0.0;
};

// Samples from the softmax policy. Throws NumericError on non-finite logits.
ActResult act(const PolicyParams& params, const SparseInput& input, Rng& rng);

struct TrajectoryStep {
  SparseInput input;
  int action = 0;
  double log_prob = 0.0;
  double reward_ext = 0.0;
  double reward_int = 0.0;
  double value_ext = 0.0;
  double value_int = 0.0;
};

// A contiguous unroll segment for one player. Bootstrap values are the value
// heads' outputs just past the segment end (0 at episode end).
struct Trajectory {
  std::vector<TrajectoryStep> steps;
  double bootstrap_ext = 0.0;
  double bootstrap_int = 0.0;
};

struct Targets {
  std::vector<double> return_ext;
  std::vector<double> return_int;
  std::vector<double> advantage;
};

// Discounted n-step returns for each reward stream and the total-reward
// advantage A_t = (G^E_t + G^I_t) - (V^E_t + V^I_t) from recorded values.
Targets compute_targets(const Trajectory& traj, double discount);

struct LossReport {
  double policy_loss = 0.0;      // sum of -A * log pi(a)
  double value_loss_ext = 0.0;   // sum of (G^E - V^E)^2
  double value_loss_int = 0.0;   // sum of (G^I - V^I)^2
  double entropy = 0.0;          // mean policy entropy per step
  double total = 0.0;            // full weighted objective
  double grad_norm = 0.0;
  std::size_t steps = 0;
  bool skipped = false;
};

// Objective summed over time and averaged over segments:
//   -A log pi(a) + baseline_cost [(G^E - V^E)^2 + (G^I - V^I)^2]
//   - entropy_cost H(pi)
// Advantages and returns are constants. When grad is non-null it receives
// the analytic gradient (resized to the parameter count).
LossReport loss_and_gradient(const PolicyParams& params,
                             std::span<const Trajectory> batch,
                             const Hyperparams& hp, std::vector<double>* grad);

// p <- p - lr * g / sqrt(ms + eps), ms <- decay * ms + (1 - decay) g^2.
void rmsprop_step(std::span<double> params, OptState& opt,
                  std::span<const double> grad, double learning_rate);

// One optimizer step on the batch. A non-finite loss or gradient leaves
// params and opt untouched and sets report.skipped.
LossReport update(PolicyParams& params, OptState& opt,
                  std::span<const Trajectory> batch, const Hyperparams& hp);

double entropy_of(std::span<const double> probs);

}  // namespace isd

#endif  // ISD_LEARNER_H_
