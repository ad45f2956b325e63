#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fedar/trust.hpp"

namespace fedar::selection {

using ClientId = std::string;

struct Selection {
  std::vector<ClientId> candidates;    // top ceil(|S| * F) of S
  std::vector<ClientId> participants;  // random subset of candidates, S order
  std::vector<ClientId> interested;    // S minus participants, S order
};

// Clients of the RA list whose trust reaches min_trust, by trust descending
// then id ascending.
std::vector<ClientId> eligible(const trust::Snapshot& trust,
                               const std::vector<ClientId>& ra_list,
                               int min_trust);

Selection select_participants(const std::vector<ClientId>& eligible_sorted,
                              double fraction, double subsample_ratio,
                              std::uint64_t round_seed);

}  // namespace fedar::selection
