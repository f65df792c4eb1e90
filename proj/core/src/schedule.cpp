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

#include "diffqec/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace diffqec {

namespace {

constexpr double kPi = 3.14159265358979323846;

double cosine_sq(double u) {
  double c = std::cos(u * kPi / 2.0);
  return c * c;
}

}  // namespace

NoiseSchedule cosine_schedule(int horizon, double offset) {
  if (horizon < 1) throw std::invalid_argument("schedule horizon must be >= 1");

  NoiseSchedule schedule;
  schedule.horizon = horizon;
  schedule.offset = offset;
  schedule.betas.assign(static_cast<std::size_t>(horizon) + 1, 0.0);
  schedule.bar_alphas.assign(static_cast<std::size_t>(horizon) + 1, 1.0);

  const double f0 = cosine_sq(offset / (1.0 + offset));
  double prev_raw = 1.0;  // raw bar_alpha_0 = f(0)/f(0)
  double running = 1.0;
  for (int t = 1; t <= horizon; ++t) {
    double raw = cosine_sq((static_cast<double>(t) / horizon + offset) / (1.0 + offset)) / f0;
    double beta = 1.0 - raw / prev_raw;
    beta = std::clamp(beta, kBetaFloor, kBetaCap);
    prev_raw = raw;
    running *= (1.0 - beta);
    schedule.betas[static_cast<std::size_t>(t)] = beta;
    schedule.bar_alphas[static_cast<std::size_t>(t)] = running;
  }
  return schedule;
}

BinaryKernel kernel_at(const NoiseSchedule& schedule, int t) {
  if (t < 1 || t > schedule.horizon) throw std::invalid_argument("kernel_at: t out of range");
  double b = schedule.beta(t);
  BinaryKernel k;
  k.m[0][0] = 1.0 - b / 2.0;
  k.m[0][1] = b / 2.0;
  k.m[1][0] = b / 2.0;
  k.m[1][1] = 1.0 - b / 2.0;
  return k;
}

BinaryKernel cumulative_kernel(const NoiseSchedule& schedule, int t) {
  if (t < 0 || t > schedule.horizon) throw std::invalid_argument("cumulative_kernel: t out of range");
  BinaryKernel acc;
  acc.m[0][0] = acc.m[1][1] = 1.0;
  acc.m[0][1] = acc.m[1][0] = 0.0;
  for (int u = 1; u <= t; ++u) {
    BinaryKernel q = kernel_at(schedule, u);
    BinaryKernel next;
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        next.m[a][b] = acc.m[a][0] * q.m[0][b] + acc.m[a][1] * q.m[1][b];
      }
    }
    acc = next;
  }
  return acc;
}

std::string schedule_to_text(const NoiseSchedule& schedule) {
  nlohmann::ordered_json doc;
  doc["format"] = "diffqec-sched-1";
  doc["T"] = schedule.horizon;
  doc["offset"] = schedule.offset;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (int t = 0; t <= schedule.horizon; ++t) {
    rows.push_back({{"t", t},
                    {"beta", t == 0 ? 0.0 : schedule.beta(t)},
                    {"bar_alpha", schedule.bar_alpha(t)}});
  }
  doc["rows"] = rows;
  return doc.dump(2);
}

}  // namespace diffqec
