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

#include "diffqec/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <thread>

#include "diffqec/diffusion.hpp"

namespace diffqec {

void AdamOptimizer::step(std::vector<Parameter>& params) {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (Parameter& p : params) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      double g = p.grad[i];
      p.adam_m[i] = beta1_ * p.adam_m[i] + (1.0 - beta1_) * g;
      p.adam_v[i] = beta2_ * p.adam_v[i] + (1.0 - beta2_) * g * g;
      double mhat = p.adam_m[i] / bc1;
      double vhat = p.adam_v[i] / bc2;
      p.value[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
  }
}

namespace {

// Shuffled pass over a dataset's indices; reshuffles when exhausted.
class IndexStream {
 public:
  IndexStream(std::size_t n, Rng rng) : rng_(rng), order_(n) {
    for (std::size_t i = 0; i < n; ++i) order_[i] = i;
    reshuffle();
  }

  std::size_t next() {
    if (pos_ == order_.size()) reshuffle();
    return order_[pos_++];
  }

 private:
  void reshuffle() {
    for (std::size_t i = order_.size(); i > 1; --i) {
      std::size_t j = rng_.below(i);
      std::swap(order_[i - 1], order_[j]);
    }
    pos_ = 0;
  }

  Rng rng_;
  std::vector<std::size_t> order_;
  std::size_t pos_ = 0;
};

struct ShardRange {
  std::size_t begin, count;
};

std::vector<ShardRange> shard_ranges(std::size_t n, int threads) {
  std::size_t shards = static_cast<std::size_t>(std::max(1, threads));
  shards = std::min(shards, n);
  std::vector<ShardRange> out;
  std::size_t base = n / shards, rem = n % shards, at = 0;
  for (std::size_t s = 0; s < shards; ++s) {
    std::size_t count = base + (s < rem ? 1 : 0);
    out.push_back({at, count});
    at += count;
  }
  return out;
}

}  // namespace

TrainResult train(DenoiserParams& params, const NoiseSchedule& schedule,
                  const std::vector<const Dataset*>& datasets, const TrainConfig& config) {
  if (datasets.empty()) throw std::invalid_argument("train: need at least one dataset");
  if (config.batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");
  if (config.epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
  if (config.epochs_per_stage < 1) throw std::invalid_argument("train: epochs_per_stage must be >= 1");
  params.config.validate();
  if (schedule.horizon != params.config.horizon) {
    throw std::invalid_argument("train: schedule horizon does not match config");
  }

  // Curriculum order: shortest histories first.
  std::vector<const Dataset*> pool = datasets;
  std::sort(pool.begin(), pool.end(),
            [](const Dataset* a, const Dataset* b) { return a->config.rounds < b->config.rounds; });
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const Dataset* ds = pool[i];
    if (ds->samples.empty()) throw std::invalid_argument("train: empty dataset");
    if (ds->config.distance != params.config.distance ||
        ds->config.label_bits != params.config.label_bits) {
      throw std::invalid_argument("train: dataset (d, L) does not match denoiser config");
    }
    if (i > 0 && pool[i]->config.rounds == pool[i - 1]->config.rounds) {
      throw std::invalid_argument("train: duplicate round count in curriculum");
    }
  }

  std::vector<IndexStream> streams;
  streams.reserve(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    streams.emplace_back(pool[i]->samples.size(), Rng::for_stream(config.seed, 0x5affu, i));
  }

  TrainResult result;
  AdamOptimizer optimizer(config.learning_rate, config.beta1, config.beta2, config.eps);
  int step = 0;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::size_t active = std::min(pool.size(), static_cast<std::size_t>(epoch / config.epochs_per_stage) + 1);
    std::size_t active_samples = 0;
    for (std::size_t i = 0; i < active; ++i) active_samples += pool[i]->samples.size();
    std::size_t steps_this_epoch =
        (active_samples + static_cast<std::size_t>(config.batch_size) - 1) /
        static_cast<std::size_t>(config.batch_size);

    for (std::size_t es = 0; es < steps_this_epoch; ++es) {
      if (config.max_steps > 0 && step >= config.max_steps) return result;
      const Dataset& ds = *pool[es % active];
      IndexStream& stream = streams[es % active];
      const int rounds = ds.config.rounds;

      std::vector<BatchItem> batch(static_cast<std::size_t>(config.batch_size));
      for (int i = 0; i < config.batch_size; ++i) {
        const Sample& s = ds.samples[stream.next()];
        batch[static_cast<std::size_t>(i)] = BatchItem{s.history.grid.data(), &s.label};
      }

      // Stochastic choices for the whole batch come from one per-step
      // stream, so the result is independent of sharding.
      Rng step_rng = Rng::for_stream(config.seed, 0xd1f5u, static_cast<std::uint64_t>(step));
      std::vector<int> ts(batch.size());
      std::vector<BitVector> xts(batch.size());
      for (std::size_t i = 0; i < batch.size(); ++i) {
        ts[i] = static_cast<int>(step_rng.uniform_int(1, schedule.horizon));
        xts[i] = forward_sample(*batch[i].label, ts[i], schedule, step_rng);
      }

      auto shards = shard_ranges(batch.size(), config.threads);
      std::vector<double> shard_loss(shards.size(), 0.0);
      std::vector<std::vector<std::vector<double>>> shard_grads(shards.size());
      for (auto& sg : shard_grads) {
        sg.resize(params.params.size());
        for (std::size_t pi = 0; pi < params.params.size(); ++pi) {
          sg[pi].assign(params.params[pi].size(), 0.0);
        }
      }

      auto run_shard = [&](std::size_t s) {
        const auto& range = shards[s];
        std::span<const BatchItem> view(batch.data() + range.begin, range.count);
        std::span<const int> tview(ts.data() + range.begin, range.count);
        std::vector<BitVector> xview(xts.begin() + static_cast<std::ptrdiff_t>(range.begin),
                                     xts.begin() + static_cast<std::ptrdiff_t>(range.begin + range.count));
        shard_loss[s] = training_loss_fixed(params, schedule, view, rounds, tview, xview, shard_grads[s]);
      };

      if (shards.size() == 1) {
        run_shard(0);
      } else {
        std::vector<std::thread> workers;
        for (std::size_t s = 1; s < shards.size(); ++s) workers.emplace_back(run_shard, s);
        run_shard(0);
        for (auto& w : workers) w.join();
      }

      // Ordered reduction: batch loss and gradients are weighted by shard
      // size, summed in shard order.
      double loss = 0.0;
      for (std::size_t pi = 0; pi < params.params.size(); ++pi) {
        std::fill(params.params[pi].grad.begin(), params.params[pi].grad.end(), 0.0);
      }
      const double inv_n = 1.0 / static_cast<double>(batch.size());
      for (std::size_t s = 0; s < shards.size(); ++s) {
        double w = static_cast<double>(shards[s].count) * inv_n;
        loss += w * shard_loss[s];
        for (std::size_t pi = 0; pi < params.params.size(); ++pi) {
          const auto& src = shard_grads[s][pi];
          auto& dst = params.params[pi].grad;
          for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += w * src[j];
        }
      }
      if (!std::isfinite(loss)) {
        throw std::runtime_error("train: loss diverged (non-finite) at step " + std::to_string(step));
      }

      optimizer.step(params.params);
      result.loss_curve.emplace_back(step, loss);
      result.final_loss = loss;
      ++step;
      result.steps = step;
    }
  }
  return result;
}

void write_loss_curve_csv(const TrainResult& result, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_loss_curve_csv: cannot open " + path);
  out << "step,loss\n";
  for (const auto& [step, loss] : result.loss_curve) out << step << "," << loss << "\n";
}

}  // namespace diffqec
