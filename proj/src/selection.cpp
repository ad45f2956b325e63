#include "fedar/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "fedar/errors.hpp"
#include "fedar/rng.hpp"

namespace fedar::selection {
namespace {

// Keeps 10 * 0.3 from rounding up to 4.
constexpr double kRoundingSlack = 1e-9;

}  // namespace

std::vector<ClientId> eligible(const trust::Snapshot& trust,
                               const std::vector<ClientId>& ra_list,
                               int min_trust) {
  std::vector<std::pair<int, ClientId>> ranked;
  for (const ClientId& id : std::set<ClientId>(ra_list.begin(), ra_list.end())) {
    const auto it = trust.find(id);
    if (it != trust.end() && it->second >= min_trust) {
      ranked.emplace_back(it->second, id);
    }
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  std::vector<ClientId> out;
  out.reserve(ranked.size());
  for (auto& [score, id] : ranked) out.push_back(std::move(id));
  return out;
}

Selection select_participants(const std::vector<ClientId>& eligible_sorted,
                              double fraction, double subsample_ratio,
                              std::uint64_t round_seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw ConfigError("client_fraction", "must lie in (0, 1]");
  }
  if (!(subsample_ratio > 0.0 && subsample_ratio <= 1.0)) {
    throw ConfigError("subsample_ratio", "must lie in (0, 1]");
  }
  Selection sel;
  if (eligible_sorted.empty()) return sel;

  const auto top = std::clamp<std::size_t>(
      static_cast<std::size_t>(
          std::ceil(static_cast<double>(eligible_sorted.size()) * fraction -
                    kRoundingSlack)),
      1, eligible_sorted.size());
  sel.candidates.assign(eligible_sorted.begin(),
                        eligible_sorted.begin() + static_cast<std::ptrdiff_t>(top));

  const auto keep = std::max<std::size_t>(
      1, static_cast<std::size_t>(
             std::floor(static_cast<double>(top) * subsample_ratio +
                        kRoundingSlack)));
  std::vector<std::size_t> picks(top);
  std::iota(picks.begin(), picks.end(), std::size_t{0});
  if (keep < top) {
    Rng rng(round_seed);
    std::shuffle(picks.begin(), picks.end(), rng);
    picks.resize(keep);
    std::sort(picks.begin(), picks.end());
  }

  std::set<ClientId> chosen;
  for (const std::size_t i : picks) {
    sel.participants.push_back(sel.candidates[i]);
    chosen.insert(sel.candidates[i]);
  }
  for (const ClientId& id : eligible_sorted) {
    if (!chosen.contains(id)) sel.interested.push_back(id);
  }
  return sel;
}

}  // namespace fedar::selection
