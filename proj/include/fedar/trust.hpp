#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace fedar::trust {

using ClientId = std::string;

// Trust points per event.
struct TrustConstants {
  int initial = 50;
  int reward = 8;
  int interested = 1;
  int penalty = -2;
  int blame = -8;
  int ban = -16;

  // Throws ConfigError unless reward > 0 and ban < blame < penalty < 0.
  void validate() const;
};

// Failure-rate denominator: the client's own participation count, or the
// raw round index.
enum class FailureRateBasis { kParticipation, kRoundIndex };

enum class Outcome { kSuccess = 0, kFailure = 1 };

struct HistoryEntry {
  int round = 0;
  Outcome outcome = Outcome::kSuccess;
};

struct ClientRecord {
  int trust_score = 0;
  std::vector<HistoryEntry> history;

  int participation_count() const noexcept {
    return static_cast<int>(history.size());
  }
};

using Snapshot = std::map<ClientId, int>;

// Per-client trust scores and participation history. Owned and mutated by
// the orchestrator only.
class TrustLedger {
 public:
  explicit TrustLedger(TrustConstants constants = {},
                       FailureRateBasis basis = FailureRateBasis::kParticipation);

  void register_client(const ClientId& id);
  bool is_registered(const ClientId& id) const;

  // Declares who trains in round i; update_trust_score is only accepted for
  // these clients, once each.
  void open_round(int round, const std::vector<ClientId>& participants);

  double failure_rate(const ClientId& id) const;

  int update_trust_score(int round, const ClientId& id, bool responded_in_time,
                         bool deviation_exceeded);

  void credit_interested(const std::vector<ClientId>& ids);

  Snapshot snapshot() const;
  int score(const ClientId& id) const;
  const ClientRecord& record(const ClientId& id) const;

  // (client, score) pairs appended by update_trust_score during the current
  // round, in call order.
  const std::vector<std::pair<ClientId, int>>& trust_list() const noexcept {
    return trust_list_;
  }

  const TrustConstants& constants() const noexcept { return constants_; }

 private:
  ClientRecord& require(const ClientId& id);
  const ClientRecord& require(const ClientId& id) const;
  double failure_rate_at(const ClientRecord& rec, int round) const;

  TrustConstants constants_;
  FailureRateBasis basis_;
  std::map<ClientId, ClientRecord> clients_;
  int current_round_ = 0;
  std::set<ClientId> participants_;
  std::set<ClientId> pending_;
  std::vector<std::pair<ClientId, int>> trust_list_;
};

}  // namespace fedar::trust
