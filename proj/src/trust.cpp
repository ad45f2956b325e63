#include "fedar/trust.hpp"

#include <algorithm>

#include "fedar/errors.hpp"

namespace fedar::trust {

void TrustConstants::validate() const {
  if (reward <= 0) throw ConfigError("trust.reward", "must be positive");
  if (interested < 0) throw ConfigError("trust.interested", "must be >= 0");
  if (penalty >= 0) throw ConfigError("trust.penalty", "must be negative");
  if (blame >= penalty) {
    throw ConfigError("trust.blame", "must be below the penalty");
  }
  if (ban >= blame) throw ConfigError("trust.ban", "must be below the blame");
}

TrustLedger::TrustLedger(TrustConstants constants, FailureRateBasis basis)
    : constants_(constants), basis_(basis) {
  constants_.validate();
}

void TrustLedger::register_client(const ClientId& id) {
  const auto [it, inserted] =
      clients_.try_emplace(id, ClientRecord{constants_.initial, {}});
  if (!inserted) throw TrustError("client '" + id + "' is already registered");
}

bool TrustLedger::is_registered(const ClientId& id) const {
  return clients_.contains(id);
}

void TrustLedger::open_round(int round,
                             const std::vector<ClientId>& participants) {
  if (round <= current_round_) {
    throw TrustError("round " + std::to_string(round) +
                     " does not follow round " + std::to_string(current_round_));
  }
  for (const ClientId& id : participants) require(id);
  current_round_ = round;
  participants_ = std::set<ClientId>(participants.begin(), participants.end());
  pending_ = participants_;
  trust_list_.clear();
}

double TrustLedger::failure_rate_at(const ClientRecord& rec, int round) const {
  const auto failures = std::count_if(
      rec.history.begin(), rec.history.end(),
      [](const HistoryEntry& e) { return e.outcome == Outcome::kFailure; });
  const int denominator = basis_ == FailureRateBasis::kRoundIndex
                              ? std::max(round, rec.participation_count())
                              : rec.participation_count();
  if (denominator == 0) return 0.0;
  return static_cast<double>(failures) / denominator;
}

double TrustLedger::failure_rate(const ClientId& id) const {
  return failure_rate_at(require(id), current_round_);
}

int TrustLedger::update_trust_score(int round, const ClientId& id,
                                    bool responded_in_time,
                                    bool deviation_exceeded) {
  ClientRecord& rec = require(id);
  if (round != current_round_ || !pending_.contains(id)) {
    throw TrustError("client '" + id + "' has no open participation in round " +
                     std::to_string(round));
  }
  pending_.erase(id);

  if (responded_in_time && !deviation_exceeded) {
    rec.history.push_back({round, Outcome::kSuccess});
    rec.trust_score += constants_.reward;
  } else if (responded_in_time) {
    rec.history.push_back({round, Outcome::kFailure});
    rec.trust_score += constants_.ban;
  } else {
    rec.history.push_back({round, Outcome::kFailure});
    const double f = failure_rate_at(rec, round);
    if (f < 0.2) {
      rec.trust_score += constants_.penalty;
    } else if (f < 0.5) {
      rec.trust_score += constants_.blame;
    } else {
      rec.trust_score += constants_.ban;
    }
  }
  trust_list_.emplace_back(id, rec.trust_score);
  return rec.trust_score;
}

void TrustLedger::credit_interested(const std::vector<ClientId>& ids) {
  for (const ClientId& id : ids) {
    if (participants_.contains(id)) {
      throw TrustError("participant '" + id +
                       "' cannot receive an interested credit");
    }
    require(id).trust_score += constants_.interested;
  }
}

Snapshot TrustLedger::snapshot() const {
  Snapshot out;
  for (const auto& [id, rec] : clients_) out.emplace(id, rec.trust_score);
  return out;
}

int TrustLedger::score(const ClientId& id) const {
  return require(id).trust_score;
}

const ClientRecord& TrustLedger::record(const ClientId& id) const {
  return require(id);
}

ClientRecord& TrustLedger::require(const ClientId& id) {
  const auto it = clients_.find(id);
  if (it == clients_.end()) {
    throw TrustError("client '" + id + "' is not registered");
  }
  return it->second;
}

const ClientRecord& TrustLedger::require(const ClientId& id) const {
  const auto it = clients_.find(id);
  if (it == clients_.end()) {
    throw TrustError("client '" + id + "' is not registered");
  }
  return it->second;
}

}  // namespace fedar::trust
