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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "flp/model.hpp"
#include "flp/rng.hpp"
#include "test_support.hpp"

using flp::AllocationEntry;
using flp::AllocationPlan;
using flp::ObjectiveBreakdown;
using flp::SupplyNetwork;
using flp_test::NetworkBuilder;

namespace {

SupplyNetwork one_facility_one_client() {
  return NetworkBuilder()
      .penalty(5.0)
      .facility("f1", 7.0, 10.0, {{"ground", 10.0}})
      .client("c1", 5.0)
      .edge("f1", "c1", "ground", 1.0)
      .build();
}

// Independent feasibility repair for generated plans: scale everything by the
// worst constraint overshoot. Deliberately distinct from the library's
// per-group clamping.
std::vector<AllocationEntry> make_feasible(const SupplyNetwork& net,
                                           std::vector<AllocationEntry> entries) {
  double worst = 1.0;
  std::map<std::string, double> client_frac, facility_units;
  std::map<std::pair<std::string, std::string>, double> channel_units;
  for (const auto& a : entries) {
    const double units = a.fraction * net.client(a.client)->demand;
    client_frac[a.client] += a.fraction;
    facility_units[a.facility] += units;
    channel_units[{a.facility, a.channel}] += units;
  }
  for (const auto& [cid, frac] : client_frac) worst = std::max(worst, frac);
  for (const auto& [fid, units] : facility_units) {
    const double cap = net.facility(fid)->fcap;
    if (cap > 0.0) worst = std::max(worst, units / cap);
  }
  for (const auto& [key, units] : channel_units) {
    const double cap = net.facility(key.first)->channel_caps.at(key.second);
    if (cap > 0.0) worst = std::max(worst, units / cap);
  }
  for (auto& a : entries) a.fraction /= worst * 1.0000001;
  return entries;
}

}  // namespace

TEST_CASE("validate flags a channel cap above the facility cap") {
  SupplyNetwork net = NetworkBuilder()
                          .penalty(5.0)
                          .facility("1", 1.0, 10.0, {{"e", 12.0}})
                          .client("c1", 1.0)
                          .build();
  const auto violations = flp::validate(net);
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].entity == "facility 1");
  CHECK(violations[0].rule.find("exceeds fcap") != std::string::npos);
}

TEST_CASE("validate accepts a well-formed instance") {
  CHECK(flp::validate(one_facility_one_client()).empty());
}

TEST_CASE("validate flags an edge on an undeclared channel") {
  SupplyNetwork net = NetworkBuilder()
                          .penalty(5.0)
                          .channel("air")
                          .facility("f1", 1.0, 10.0, {{"ground", 5.0}})
                          .client("c1", 1.0)
                          .edge("f1", "c1", "air", 1.0)
                          .build();
  const auto violations = flp::validate(net);
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].entity.find("edge (f1, c1, air)") != std::string::npos);
  CHECK(violations[0].rule.find("not declared") != std::string::npos);
}

TEST_CASE("profit is penalty minus cost on existing edges and zero otherwise") {
  SupplyNetwork net = one_facility_one_client();
  CHECK(flp::profit_of(net, "f1", "c1", "ground") == doctest::Approx(4.0));
  CHECK(flp::profit_of(net, "f1", "c1", "air") == 0.0);
  CHECK(flp::profit_of(net, "f9", "c1", "ground") == 0.0);

  SupplyNetwork boundary = NetworkBuilder()
                               .penalty(5.0)
                               .facility("f1", 0.0, 10.0, {{"ground", 10.0}})
                               .client("c1", 5.0)
                               .edge("f1", "c1", "ground", 5.0 - 1e-3)
                               .build();
  CHECK(flp::profit_of(boundary, "f1", "c1", "ground") == doctest::Approx(1e-3));
}

TEST_CASE("empty open set pays the full penalty") {
  SupplyNetwork net = one_facility_one_client();
  const AllocationPlan plan = flp::finalize_plan(net, {});
  const ObjectiveBreakdown b = flp::evaluate_objective(net, {}, plan, 1e-7);
  CHECK(b.total == doctest::Approx(5.0 * 5.0));
  CHECK(b.profit == 0.0);
}

TEST_CASE("single facility serving everything") {
  SupplyNetwork net = one_facility_one_client();
  const AllocationPlan plan = flp::finalize_plan(net, {{"f1", "c1", "ground", 1.0}});
  const ObjectiveBreakdown b = flp::evaluate_objective(net, {"f1"}, plan, 1e-7);
  CHECK(b.fixed_cost_total == doctest::Approx(7.0));
  CHECK(b.shipping_cost_total == doctest::Approx(5.0));
  CHECK(b.penalty_total == doctest::Approx(0.0));
  CHECK(b.total == doctest::Approx(12.0));
  CHECK(b.profit == doctest::Approx(20.0));  // (5 - 1) * 5
}

TEST_CASE("objective equals penalty mass plus fixed costs minus profit") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const SupplyNetwork net = flp_test::random_integer_network(seed, 4, 6, 2);
    std::vector<std::string> open;
    for (const auto& f : net.facilities) open.push_back(f.id);

    flp::SplitMix64 rng(seed * 977);
    std::vector<AllocationEntry> entries;
    for (const auto& e : net.edges) {
      if (rng.next_double() < 0.5) continue;
      entries.push_back({e.facility, e.client, e.channel, 0.8 * rng.next_double()});
    }
    const AllocationPlan plan = flp::finalize_plan(net, make_feasible(net, entries));
    const ObjectiveBreakdown b = flp::evaluate_objective(net, open, plan, 1e-7);

    double fixed = 0.0;
    for (const auto& f : net.facilities) fixed += f.fixed_cost;
    const double expected = fixed + net.penalty_C * net.total_demand() - b.profit;
    CHECK(b.total == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("evaluation does not depend on entry order") {
  const SupplyNetwork net = flp_test::random_integer_network(7, 3, 5, 2);
  std::vector<std::string> open;
  for (const auto& f : net.facilities) open.push_back(f.id);

  std::vector<AllocationEntry> entries;
  flp::SplitMix64 rng(123);
  for (const auto& e : net.edges) {
    entries.push_back({e.facility, e.client, e.channel, 0.2 * rng.next_double()});
  }
  entries = make_feasible(net, entries);

  const auto b1 = flp::evaluate_objective(net, open, flp::finalize_plan(net, entries), 1e-7);
  std::mt19937 shuffler(99);
  std::shuffle(entries.begin(), entries.end(), shuffler);
  const auto b2 = flp::evaluate_objective(net, open, flp::finalize_plan(net, entries), 1e-7);
  CHECK(b1.total == b2.total);  // bitwise: same canonical summation order
  CHECK(b1.profit == b2.profit);
}

TEST_CASE("shipping more on any edge strictly lowers the objective") {
  SupplyNetwork net = one_facility_one_client();
  const AllocationPlan half = flp::finalize_plan(net, {{"f1", "c1", "ground", 0.5}});
  const AllocationPlan more = flp::finalize_plan(net, {{"f1", "c1", "ground", 0.6}});
  const double j_half = flp::evaluate_objective(net, {"f1"}, half, 1e-7).total;
  const double j_more = flp::evaluate_objective(net, {"f1"}, more, 1e-7).total;
  CHECK(j_more < j_half);
}

TEST_CASE("infeasible plans are rejected with the offending constraint") {
  SupplyNetwork net = one_facility_one_client();

  SUBCASE("over-allocated client") {
    const AllocationPlan plan = flp::finalize_plan(net, {{"f1", "c1", "ground", 1.5}});
    CHECK_THROWS_WITH_AS(flp::evaluate_objective(net, {"f1"}, plan, 1e-7),
                         doctest::Contains("exceeds the client's demand"), std::invalid_argument);
  }
  SUBCASE("shipping from a closed facility") {
    const AllocationPlan plan = flp::finalize_plan(net, {{"f1", "c1", "ground", 0.5}});
    CHECK_THROWS_WITH_AS(flp::evaluate_objective(net, {}, plan, 1e-7),
                         doctest::Contains("not in the open set"), std::invalid_argument);
  }
  SUBCASE("shipping on a missing edge") {
    SupplyNetwork two = NetworkBuilder()
                            .penalty(5.0)
                            .facility("f1", 1.0, 10.0, {{"ground", 5.0}, {"air", 5.0}})
                            .client("c1", 5.0)
                            .edge("f1", "c1", "ground", 1.0)
                            .build();
    const AllocationPlan plan = flp::finalize_plan(two, {{"f1", "c1", "air", 0.5}});
    CHECK_THROWS_WITH_AS(flp::evaluate_objective(two, {"f1"}, plan, 1e-7),
                         doctest::Contains("does not exist"), std::invalid_argument);
  }
}

TEST_CASE("plan slack tolerates round-off but not real violations") {
  SupplyNetwork net = one_facility_one_client();
  const AllocationPlan ok = flp::finalize_plan(net, {{"f1", "c1", "ground", 1.0 + 1e-9}});
  CHECK_NOTHROW(flp::evaluate_objective(net, {"f1"}, ok, 1e-7 * net.max_demand()));
  CHECK(flp::check_plan(net, {"f1"}, ok, 1e-7 * net.max_demand()).empty());
}
