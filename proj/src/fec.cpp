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

#include "voipqos/fec.hpp"

#include "voipqos/error.hpp"

namespace voipqos::netsim {

void FecConfig::validate() const {
  if (block_k < 1) throw InvalidInput("fec.block_k must be >= 1");
  if (parity != 1) throw InvalidInput("fec.parity must be 1 (single XOR parity)");
}

std::vector<std::size_t> fec_recover(std::span<const bool> data_received, bool parity_received) {
  std::vector<std::size_t> missing;
  for (std::size_t i = 0; i < data_received.size(); ++i) {
    if (!data_received[i]) missing.push_back(i);
  }
  if (missing.size() == 1 && parity_received) return missing;
  return {};
}

void FecDecoder::on_data_sent(std::uint64_t block, int k) {
  Block& b = blocks_[block];
  b.k = k;
  b.data_sent += 1;
}

void FecDecoder::on_parity_sent(std::uint64_t block) { blocks_[block].parity_sent = true; }

void FecDecoder::abandon_parity(std::uint64_t block) {
  auto it = blocks_.find(block);
  if (it == blocks_.end() || it->second.parity_sent) return;
  it->second.parity_abandoned = true;
  try_complete(block);
}

std::vector<FecDecoder::Recovery> FecDecoder::on_resolved(std::uint64_t block, bool parity, std::uint64_t seq,
                                                          SimTime sent, bool delivered, SimTime when) {
  auto it = blocks_.find(block);
  if (it == blocks_.end()) return {};
  Block& b = it->second;
  b.resolved += 1;
  if (when > b.last) b.last = when;
  if (parity) {
    b.parity_delivered = delivered;
  } else if (!delivered) {
    b.lost.emplace_back(seq, sent);
  }
  return try_complete(block);
}

std::vector<FecDecoder::Recovery> FecDecoder::try_complete(std::uint64_t block) {
  auto it = blocks_.find(block);
  Block& b = it->second;
  const bool all_data = b.data_sent == b.k || b.parity_abandoned;
  const int expected = b.data_sent + (b.parity_sent ? 1 : 0);
  const bool parity_pending = !b.parity_sent && !b.parity_abandoned;
  if (!all_data || parity_pending || b.resolved < expected) return {};

  std::vector<Recovery> out;
  if (b.parity_sent && b.parity_delivered && b.lost.size() == 1) {
    out.push_back({b.lost.front().first, b.lost.front().second, b.last});
  }
  blocks_.erase(it);
  return out;
}

}  // namespace voipqos::netsim
