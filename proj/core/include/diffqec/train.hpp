// Copyright 2026 The diffqec Authors
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

#ifndef DIFFQEC_TRAIN_HPP
#define DIFFQEC_TRAIN_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "diffqec/dataset.hpp"
#include "diffqec/denoiser.hpp"
#include "diffqec/schedule.hpp"

namespace diffqec {

/// Adam with bias correction; fixed update order over parameters keeps
/// training bitwise deterministic.
class AdamOptimizer {
 public:
  AdamOptimizer(double lr, double beta1, double beta2, double eps)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(std::vector<Parameter>& params);

 private:
  double lr_, beta1_, beta2_, eps_;
  std::int64_t t_ = 0;
};

struct TrainConfig {
  int batch_size = 256;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int epochs = 10;            // total passes over the active training pool
  int epochs_per_stage = 2;   // curriculum: epochs before the next r joins
  int threads = 2;            // data-parallel shards; part of the config, so
                              // results are deterministic per configuration
  int max_steps = 0;          // optional hard cap; 0 = no cap
  std::uint64_t seed = 0;
};

struct TrainResult {
  std::vector<std::pair<int, double>> loss_curve;  // (step, batch loss)
  int steps = 0;
  double final_loss = 0.0;
};

/// Curriculum training across round counts.
///
/// `datasets` must share (d, L) and are sorted by rounds ascending
/// internally. Stage s introduces the s-th round count after
/// s * epochs_per_stage epochs; all introduced round counts keep cycling
/// round-robin, one homogeneous batch per step. Aborts with
/// std::runtime_error on NaN loss.
TrainResult train(DenoiserParams& params, const NoiseSchedule& schedule,
                  const std::vector<const Dataset*>& datasets, const TrainConfig& config);

void write_loss_curve_csv(const TrainResult& result, const std::string& path);

}  // namespace diffqec

#endif  // DIFFQEC_TRAIN_HPP
