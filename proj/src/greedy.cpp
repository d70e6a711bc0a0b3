// Copyright 2026 The Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "flp/greedy.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <thread>

#include "flp/rng.hpp"

namespace flp {

int sample_size(int m, int k, double epsilon) {
  if (m < 1 || k < 1 || k > m) throw std::invalid_argument("need 1 <= k <= m");
  if (epsilon <= 0.0 || epsilon >= 1.0) throw std::invalid_argument("need 0 < epsilon < 1");
  const double raw = std::ceil(static_cast<double>(m) / k * std::log(1.0 / epsilon));
  return static_cast<int>(std::clamp(raw, 1.0, static_cast<double>(m)));
}

double distorted_gain(double gain_g, double fixed_cost, int round, int k) {
  return std::pow(1.0 - 1.0 / k, k - round) * gain_g - fixed_cost;
}

namespace {

// Partial Fisher-Yates: the first `count` slots end up a uniform sample
// without replacement.
std::vector<std::string> draw_sample(std::vector<std::string> pool, int count, SplitMix64& rng) {
  const int n = static_cast<int>(pool.size());
  for (int i = 0; i < count; ++i) {
    const int j = i + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n - i)));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  return pool;
}

void evaluate_candidates(const std::vector<std::string>& base, const std::vector<std::string>& sample,
                         const ValueOracle& oracle, int threads,
                         std::vector<CandidateEval>& evals) {
  const int n = static_cast<int>(sample.size());
  auto work = [&](int begin, int end) {
    for (int i = begin; i < end; ++i) {
      CandidateEval& ev = evals[i];
      ev.facility = sample[i];
      std::vector<std::string> with = base;
      with.push_back(sample[i]);
      try {
        ev.g_with = oracle.evaluate(with).g_value;
      } catch (const std::exception& ex) {
        ev.failed = true;
        ev.note = ex.what();
      }
    }
  };

  int workers = threads == 0 ? static_cast<int>(std::thread::hardware_concurrency()) : threads;
  workers = std::clamp(workers, 1, n);
  if (workers <= 1) {
    work(0, n);
    return;
  }
  std::vector<std::thread> pool;
  const int chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const int begin = w * chunk;
    const int end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back(work, begin, end);
  }
  for (std::thread& t : pool) t.join();
}

}  // namespace

std::pair<std::vector<std::string>, GreedyTrace> select_facilities(const SupplyNetwork& net,
                                                                   const SolveConfig& config,
                                                                   const ValueOracle& oracle) {
  const int m = static_cast<int>(net.facilities.size());
  if (m == 0) throw std::invalid_argument("network has no facilities");
  const int k = std::min(config.k, m);
  if (config.k < 1) throw std::invalid_argument("k must be >= 1");

  GreedyTrace trace;
  trace.rng_algorithm = SplitMix64::kAlgorithm;
  trace.seed = config.seed;
  trace.k = k;
  trace.sample_count = sample_size(m, k, config.epsilon);

  std::vector<std::string> universe;
  universe.reserve(m);
  for (const Facility& f : net.facilities) universe.push_back(f.id);

  SplitMix64 rng(config.seed);
  std::vector<std::string> selected;
  std::set<std::string> selected_set;
  double g_current = 0.0;

  for (int round = 1; round <= k; ++round) {
    GreedyIteration iter;
    iter.round = round;

    std::vector<std::string> pool;
    for (const std::string& id : universe) {
      if (selected_set.count(id) == 0) pool.push_back(id);
    }
    if (pool.empty()) break;
    const int take = std::min<int>(trace.sample_count, static_cast<int>(pool.size()));
    iter.sampled = draw_sample(std::move(pool), take, rng);

    std::vector<std::string> ordered = iter.sampled;
    std::sort(ordered.begin(), ordered.end());
    std::vector<CandidateEval> evals(ordered.size());
    evaluate_candidates(selected, ordered, oracle, config.threads, evals);

    int best = -1;
    for (std::size_t i = 0; i < evals.size(); ++i) {
      CandidateEval& ev = evals[i];
      if (ev.failed) continue;
      ev.gain_g = ev.g_with - g_current;
      ev.fixed_cost = net.facility(ev.facility)->fixed_cost;
      ev.distorted_gain = distorted_gain(ev.gain_g, ev.fixed_cost, round, k);
      // Strict > keeps the smallest facility id on ties (candidates sorted).
      if (best < 0 || ev.distorted_gain > evals[best].distorted_gain) {
        best = static_cast<int>(i);
      }
    }
    if (best >= 0) {
      iter.chosen = evals[best].facility;
      iter.incremental_gain = evals[best].distorted_gain;
      if (iter.incremental_gain > 0.0) {
        iter.accepted = true;
        selected.push_back(iter.chosen);
        selected_set.insert(iter.chosen);
        // Reuse the accepted candidate's evaluation as next round's g(S).
        g_current = evals[best].g_with;
      }
    }
    iter.g_after = g_current;
    iter.selected_after.assign(selected_set.begin(), selected_set.end());
    iter.evals = std::move(evals);
    trace.iterations.push_back(std::move(iter));
  }

  std::sort(selected.begin(), selected.end());
  trace.selected = selected;
  trace.counters = oracle.counters().snapshot();
  return {selected, trace};
}

}  // namespace flp
