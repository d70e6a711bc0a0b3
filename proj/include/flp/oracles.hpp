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

//
// Value oracles: given an open facility set S, compute the optimal (or
// approximate) profit of allocating client demand through S, and optionally
// the allocation itself.
//
//   ExactOracle              min-cost flow on the quantized network
//   MultistageSinkhornOracle stage-1 transport on the reduced single-channel
//                            network, stage-2 per-facility transport to
//                            spread each facility's allocation over its real
//                            channels; reports the realized profit of the
//                            recovered plan under original channel profits
//   SinglestageSinkhornOracle stage-1 only; objective value under abstract
//                            channel profits, no allocation plan
//
// Oracles are immutable after construction and safe to call concurrently.
//

#ifndef FLP_ORACLES_HPP_
#define FLP_ORACLES_HPP_

#include <atomic>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "flp/decouple.hpp"
#include "flp/grid.hpp"
#include "flp/model.hpp"
#include "flp/sinkhorn.hpp"

namespace flp {

struct CallCounterSnapshot {
  long stage1_calls = 0;
  long stage2_calls = 0;
  long oracle_invocations = 0;
};

class CallCounter {
 public:
  void add_stage1(long n = 1) const { stage1_ += n; }
  void add_stage2(long n = 1) const { stage2_ += n; }
  void add_invocation() const { invocations_ += 1; }

  CallCounterSnapshot snapshot() const {
    return {stage1_.load(), stage2_.load(), invocations_.load()};
  }

 private:
  mutable std::atomic<long> stage1_{0};
  mutable std::atomic<long> stage2_{0};
  mutable std::atomic<long> invocations_{0};
};

struct OracleDiagnostics {
  int sinkhorn_calls = 0;       // scaling solves spent on this evaluation
  int sinkhorn_iterations = 0;
  bool converged = true;
  double wall_seconds = 0.0;
};

struct OracleResult {
  double g_value = 0.0;
  std::optional<AllocationPlan> plan;
  OracleDiagnostics diagnostics;
};

class ValueOracle {
 public:
  virtual ~ValueOracle() = default;
  virtual std::string name() const = 0;
  // open_set holds original facility ids; order does not matter.
  virtual OracleResult evaluate(const std::vector<std::string>& open_set) const = 0;

  const CallCounter& counters() const { return counters_; }

 protected:
  CallCounter counters_;
};

class ExactOracle : public ValueOracle {
 public:
  ExactOracle(const SupplyNetwork& net, const SolveConfig& config);

  std::string name() const override { return "exact"; }
  OracleResult evaluate(const std::vector<std::string>& open_set) const override;

  double flow_quantum() const { return quantum_; }

 private:
  SupplyNetwork net_;
  double quantum_ = 0.0;
  double feasibility_units_ = 0.0;
};

// Shared stage-1 structures: the decoupled network, its single-channel
// reduction, and dense profit caches. Profits depend only on the network, so
// a subset evaluation is a row/column selection.
class SinkhornPipeline {
 public:
  SinkhornPipeline(const SupplyNetwork& net, const SolveConfig& config);

  struct Row {
    std::string reduced_id;
    std::string original_id;
    double cap = 0.0;             // stage-1 supply
    bool split = false;           // single real channel, bypasses stage 2
    std::string sole_channel;     // set when split
    int stage2 = -1;              // index into stage2_ when coupled
    int original_idx = -1;        // position of original_id among net facilities
    int sole_channel_idx = -1;    // position of sole_channel among net channels
  };

  struct Stage1Solve {
    std::vector<int> rows, cols;  // indices into rows_ / col_ids_
    TransportProblem problem;
    TransportPlan plan;
    int iterations = 0;
    bool converged = true;
  };

  Stage1Solve solve_stage1(const std::vector<std::string>& open_set,
                           const CallCounter& counters) const;

  OracleResult recover_plan(const std::vector<std::string>& open_set, const Stage1Solve& stage1,
                            const CallCounter& counters) const;

  double stage1_objective(const Stage1Solve& stage1) const;

  const DecoupleReport& decoupled() const { return decoupled_; }
  const ReducedNetwork& reduced() const { return reduced_; }

 private:
  struct Stage2Cache {
    std::vector<std::string> channels;
    std::vector<int> channel_idx;  // positions among net channels
    std::vector<double> ccaps;
    std::vector<int> cols;        // global column indices the facility serves
    Grid<double> profit;          // channels x cols
    Grid<std::uint8_t> allowed;
  };

  SinkhornOptions options_for(const TransportProblem& problem) const;

  SupplyNetwork net_;
  SolveConfig config_;
  DecoupleReport decoupled_;
  ReducedNetwork reduced_;
  std::vector<Row> rows_;
  std::map<std::string, std::vector<int>> rows_of_original_;
  std::vector<std::string> col_ids_;
  std::vector<double> col_demand_;
  double total_demand_ = 0.0;
  // Caps of the original network indexed densely for the recovery clamp:
  // facility index i and channel index e as positions in the sorted id lists.
  std::vector<double> fcap_by_facility_;
  std::vector<double> ccap_by_facility_channel_;  // i * channel count + e
  Grid<double> stage1_profit_;
  Grid<std::uint8_t> stage1_allowed_;
  std::vector<Stage2Cache> stage2_;
};

class MultistageSinkhornOracle : public ValueOracle {
 public:
  MultistageSinkhornOracle(const SupplyNetwork& net, const SolveConfig& config)
      : pipeline_(net, config) {}

  std::string name() const override { return "sinkhorn2"; }
  OracleResult evaluate(const std::vector<std::string>& open_set) const override;

  const SinkhornPipeline& pipeline() const { return pipeline_; }

 private:
  SinkhornPipeline pipeline_;
};

class SinglestageSinkhornOracle : public ValueOracle {
 public:
  SinglestageSinkhornOracle(const SupplyNetwork& net, const SolveConfig& config)
      : pipeline_(net, config) {}

  std::string name() const override { return "sinkhorn1"; }
  OracleResult evaluate(const std::vector<std::string>& open_set) const override;

 private:
  SinkhornPipeline pipeline_;
};

std::unique_ptr<ValueOracle> make_oracle(OracleKind kind, const SupplyNetwork& net,
                                         const SolveConfig& config);

}  // namespace flp

#endif  // FLP_ORACLES_HPP_
