// Copyright 2026 The voipqos Authors
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

#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "voipqos/sim_time.hpp"

namespace voipqos::netsim {

/// Single-parity XOR block code: one parity packet after every `block_k`
/// data packets.
struct FecConfig {
  int block_k = 4;
  int parity = 1;

  void validate() const;
  friend bool operator==(const FecConfig&, const FecConfig&) = default;
};

/// Indices of data packets rebuilt from one block. With a single XOR parity
/// exactly one missing data packet can be rebuilt, and only if the parity
/// packet itself arrived.
std::vector<std::size_t> fec_recover(std::span<const bool> data_received, bool parity_received);

/// Tracks block fates at the receiver and reports recoveries once every
/// packet of a block has been delivered or dropped.
class FecDecoder {
 public:
  struct Recovery {
    std::uint64_t seq = 0;
    SimTime sent{};
    SimTime at{};
  };

  void on_data_sent(std::uint64_t block, int k);
  void on_parity_sent(std::uint64_t block);
  /// Block of a data packet whose parity will never be sent (FEC turned off
  /// or flow stopped mid-block).
  void abandon_parity(std::uint64_t block);

  std::vector<Recovery> on_resolved(std::uint64_t block, bool parity, std::uint64_t seq, SimTime sent, bool delivered,
                                    SimTime when);

  std::size_t open_blocks() const { return blocks_.size(); }

 private:
  struct Block {
    int k = 0;
    int data_sent = 0;
    bool parity_sent = false;
    bool parity_abandoned = false;
    int resolved = 0;
    bool parity_delivered = false;
    std::vector<std::pair<std::uint64_t, SimTime>> lost;
    SimTime last{};
  };

  std::vector<Recovery> try_complete(std::uint64_t block);

  std::map<std::uint64_t, Block> blocks_;
};

}  // namespace voipqos::netsim
