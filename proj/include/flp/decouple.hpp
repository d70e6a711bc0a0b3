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
// Network transformations that remove the coupling between fulfilment
// channels where the facility capacity allows it. A facility whose channel
// caps sum to at most fcap can treat each channel as a stand-alone single-
// channel facility; when the caps oversubscribe fcap, the cap of a channel
// whose profit is pointwise dominated by every other channel can be trimmed
// without changing the optimal allocation value. Facilities where no channel
// is dominated stay coupled and are handled by the reduced single-channel
// approximation below.
//

#ifndef FLP_DECOUPLE_HPP_
#define FLP_DECOUPLE_HPP_

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "flp/model.hpp"

namespace flp {

// Channel id used by the reduced single-channel model.
inline constexpr const char* kAbstractChannel = "alpha";

struct CapReduction {
  std::string facility;
  std::string channel;
  double old_ccap = 0.0;
  double new_ccap = 0.0;
};

struct DecoupleReport {
  std::vector<CapReduction> reductions;
  std::vector<std::string> fully_decoupled;  // original facilities that were split
  SupplyNetwork network;                     // transformed network
  // pseudo facility id ("<facility>-<channel>") -> (original facility, channel)
  std::map<std::string, std::pair<std::string, std::string>> back_mapping;
};

// True iff the total channel capacity fits under fcap, making the facility
// capacity constraint redundant for any allocation.
bool fcap_redundant(const Facility& facility);

// Repeatedly trims the cap of a dominated channel (profit at most every other
// channel's for every client of the facility, missing edges counting as
// profit 0 on both sides) down to max(0, fcap - sum of the other caps).
// Channels trimmed to zero are removed together with their edges. Stops once
// fcap_redundant holds or no dominated channel with positive cap remains.
// Jointly dominated channels are trimmed smallest channel id first.
std::vector<CapReduction> trim_dominated_channel_caps(SupplyNetwork& net,
                                                      const std::string& facility_id);

// Trims every oversubscribed facility, then splits each facility whose caps
// now fit under fcap into one single-channel pseudo facility per channel
// (id "<facility>-<channel>", fcap = ccap, fixed cost carried on the first
// part). Facilities that stay oversubscribed pass through unchanged.
DecoupleReport decouple_network(const SupplyNetwork& net);

struct ReducedNetwork {
  SupplyNetwork network;  // one channel (kAbstractChannel) per facility, ccap = fcap
  // facility -> original channel -> capacity share of that channel
  std::map<std::string, std::map<std::string, double>> weights;
  // (facility, client) -> capacity-weighted average profit
  std::map<std::pair<std::string, std::string>, double> profits;
};

// Merges each facility's channels into one abstract channel whose per-client
// profit is the ccap-weighted average of the channel profits (missing edges
// contribute 0). Facilities with zero total channel capacity are dropped.
ReducedNetwork reduce_to_single_channel(const SupplyNetwork& net);

}  // namespace flp

#endif  // FLP_DECOUPLE_HPP_
