#include "fedar/config_io.hpp"

#include <yaml-cpp/yaml.h>

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string_view>

#include "fedar/errors.hpp"

namespace fedar::cli {
namespace {

using Keys = std::initializer_list<std::string_view>;

std::string join(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

class Parser {
 public:
  explicit Parser(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Mark& mark, const std::string& field,
                         const std::string& message) const {
    throw ConfigError(field, message, where(mark));
  }

  std::string where(const YAML::Mark& mark) const {
    if (mark.is_null()) return source_ + ": ";
    return source_ + ":" + std::to_string(mark.line + 1) + ":" +
           std::to_string(mark.column + 1) + ": ";
  }

  // Location of the deepest recorded field that prefixes `field`.
  YAML::Mark mark_for(const std::string& field) const {
    std::string probe = field;
    while (!probe.empty()) {
      if (const auto it = marks_.find(probe); it != marks_.end()) {
        return it->second;
      }
      const auto cut = probe.find_last_of(".[");
      if (cut == std::string::npos) break;
      probe.resize(cut);
    }
    return YAML::Mark::null_mark();
  }

  void require_map(const YAML::Node& node, const std::string& path) {
    if (!node.IsMap()) fail(node.Mark(), path, "expected a mapping");
    marks_[path] = node.Mark();
  }

  void check_keys(const YAML::Node& node, const std::string& path, Keys allowed) {
    for (const auto& kv : node) {
      const auto key = kv.first.as<std::string>();
      bool known = false;
      for (const auto a : allowed) known = known || a == key;
      if (!known) {
        fail(kv.first.Mark(), path.empty() ? "<root>" : path,
             "unknown key '" + key + "'");
      }
    }
  }

  template <typename T>
  bool read(const YAML::Node& map, const std::string& path, const char* key,
            T& out) {
    const YAML::Node node = map[key];
    if (!node.IsDefined() || node.IsNull()) return false;
    const std::string field = join(path, key);
    marks_[field] = node.Mark();
    out = convert<T>(node, field);
    return true;
  }

  template <typename T>
  T convert(const YAML::Node& node, const std::string& field) {
    if (!node.IsScalar()) fail(node.Mark(), field, "expected a scalar");
    if constexpr (std::is_same_v<T, std::size_t> ||
                  std::is_same_v<T, std::uint64_t>) {
      long long v = 0;
      try {
        v = node.as<long long>();
      } catch (const YAML::Exception&) {
        fail(node.Mark(), field, "expected a nonnegative integer");
      }
      if (v < 0) fail(node.Mark(), field, "expected a nonnegative integer");
      return static_cast<T>(v);
    } else {
      try {
        return node.as<T>();
      } catch (const YAML::Exception&) {
        fail(node.Mark(), field, std::string("expected ") + type_name<T>());
      }
    }
  }

  template <typename T>
  static const char* type_name() {
    if constexpr (std::is_same_v<T, bool>) return "true or false";
    if constexpr (std::is_same_v<T, int>) return "an integer";
    if constexpr (std::is_same_v<T, double>) return "a number";
    return "a string";
  }

  void record(const std::string& field, const YAML::Mark& mark) {
    marks_[field] = mark;
  }

 private:
  std::string source_;
  std::map<std::string, YAML::Mark> marks_;
};

void parse_profile(Parser& p, const YAML::Node& node, const std::string& path,
                   resource::ResourceProfile& out) {
  p.require_map(node, path);
  p.check_keys(node, path, {"memory_mb", "bandwidth_mbps", "battery_pct"});
  p.read(node, path, "memory_mb", out.memory_mb);
  p.read(node, path, "bandwidth_mbps", out.bandwidth_mbps);
  p.read(node, path, "battery_pct", out.battery_pct);
}

std::set<int> parse_labels(Parser& p, const YAML::Node& node,
                           const std::string& path) {
  p.record(path, node.Mark());
  std::set<int> out;
  if (node.IsSequence()) {
    for (std::size_t i = 0; i < node.size(); ++i) {
      out.insert(p.convert<int>(node[i], path + "[" + std::to_string(i) + "]"));
    }
    return out;
  }
  // "lo-hi" range shorthand
  const auto text = p.convert<std::string>(node, path);
  int lo = 0, hi = 0;
  char dash = 0;
  std::istringstream in(text);
  if (!(in >> lo >> dash >> hi) || dash != '-' || lo > hi || !in.eof()) {
    p.fail(node.Mark(), path, "expected a list of labels or a range like 0-9");
  }
  for (int k = lo; k <= hi; ++k) out.insert(k);
  return out;
}

void parse_task(Parser& p, const YAML::Node& node, resource::TaskSpec& task) {
  const std::string path = "task";
  p.require_map(node, path);
  p.check_keys(node, path,
               {"requirement", "min_trust", "timeout", "timeout_schedule",
                "gamma", "gamma_scale", "batch_size", "local_epochs", "eta",
                "client_fraction", "subsample_ratio", "max_rounds",
                "target_accuracy"});
  if (node["requirement"]) {
    parse_profile(p, node["requirement"], "task.requirement", task.requirement);
  }
  p.read(node, path, "min_trust", task.min_trust);
  p.read(node, path, "timeout", task.timeout);
  if (const auto sched = node["timeout_schedule"]; sched && !sched.IsNull()) {
    if (!sched.IsSequence()) {
      p.fail(sched.Mark(), "task.timeout_schedule", "expected a list");
    }
    for (std::size_t i = 0; i < sched.size(); ++i) {
      task.timeout_schedule.push_back(p.convert<double>(
          sched[i], "task.timeout_schedule[" + std::to_string(i) + "]"));
    }
  }
  if (const auto g = node["gamma"]; g && !g.IsNull()) {
    p.record("task.gamma", g.Mark());
    if (g.IsScalar() && g.Scalar() == "auto") {
      task.gamma.reset();
    } else {
      task.gamma = p.convert<double>(g, "task.gamma");
    }
  }
  p.read(node, path, "gamma_scale", task.gamma_scale);
  p.read(node, path, "batch_size", task.batch_size);
  p.read(node, path, "local_epochs", task.local_epochs);
  p.read(node, path, "eta", task.eta);
  p.read(node, path, "client_fraction", task.client_fraction);
  p.read(node, path, "subsample_ratio", task.subsample_ratio);
  p.read(node, path, "max_rounds", task.max_rounds);
  double target = 0.0;
  if (p.read(node, path, "target_accuracy", target)) task.target_accuracy = target;
}

void parse_trust(Parser& p, const YAML::Node& node, ExperimentConfig& cfg) {
  const std::string path = "trust";
  p.require_map(node, path);
  p.check_keys(node, path,
               {"initial", "reward", "interested", "penalty", "blame", "ban",
                "failure_rate_basis"});
  p.read(node, path, "initial", cfg.trust.initial);
  p.read(node, path, "reward", cfg.trust.reward);
  p.read(node, path, "interested", cfg.trust.interested);
  p.read(node, path, "penalty", cfg.trust.penalty);
  p.read(node, path, "blame", cfg.trust.blame);
  p.read(node, path, "ban", cfg.trust.ban);
  std::string basis;
  if (p.read(node, path, "failure_rate_basis", basis)) {
    if (basis == "participation") {
      cfg.failure_basis = trust::FailureRateBasis::kParticipation;
    } else if (basis == "round_index") {
      cfg.failure_basis = trust::FailureRateBasis::kRoundIndex;
    } else {
      p.fail(node["failure_rate_basis"].Mark(), "trust.failure_rate_basis",
             "expected participation or round_index");
    }
  }
}

void parse_server(Parser& p, const YAML::Node& node, ServerOptions& opts) {
  const std::string path = "server";
  p.require_map(node, path);
  p.check_keys(node, path,
               {"mode", "deviation_gate", "similarity_gate",
                "similarity_threshold", "async_mixing", "merge_late",
                "async_close_factor", "late_delay_fraction", "parallel"});
  std::string mode;
  if (p.read(node, path, "mode", mode)) {
    if (mode == "sync") {
      opts.mode = AggregationMode::kSync;
    } else if (mode == "async") {
      opts.mode = AggregationMode::kAsync;
    } else {
      p.fail(node["mode"].Mark(), "server.mode", "expected sync or async");
    }
  }
  p.read(node, path, "deviation_gate", opts.deviation_gate);
  p.read(node, path, "similarity_gate", opts.similarity_gate);
  p.read(node, path, "similarity_threshold", opts.similarity_threshold);
  p.read(node, path, "async_mixing", opts.async_mixing);
  p.read(node, path, "merge_late", opts.merge_late);
  p.read(node, path, "async_close_factor", opts.async_close_factor);
  p.read(node, path, "late_delay_fraction", opts.late_delay_fraction);
  p.read(node, path, "parallel", opts.parallel);
}

void parse_data(Parser& p, const YAML::Node& node, DataConfig& data) {
  const std::string path = "data";
  p.require_map(node, path);
  p.check_keys(node, path,
               {"source", "idx_dir", "pool_size", "test_cap", "noise_sd",
                "max_shift"});
  std::string source;
  if (p.read(node, path, "source", source)) {
    if (source == "auto") {
      data.source = DataSource::kAuto;
    } else if (source == "synthetic") {
      data.source = DataSource::kSynthetic;
    } else if (source == "idx") {
      data.source = DataSource::kIdx;
    } else {
      p.fail(node["source"].Mark(), "data.source",
             "expected auto, synthetic or idx");
    }
  }
  p.read(node, path, "idx_dir", data.idx_dir);
  p.read(node, path, "pool_size", data.pool_size);
  p.read(node, path, "test_cap", data.test_cap);
  p.read(node, path, "noise_sd", data.noise_sd);
  p.read(node, path, "max_shift", data.max_shift);
}

void parse_sweep(Parser& p, const YAML::Node& node, SweepOptions& sweep) {
  const std::string path = "sweep";
  p.require_map(node, path);
  p.check_keys(node, path,
               {"batch_epochs", "straggler_counts", "straggler_late_probability"});
  if (const auto grid = node["batch_epochs"]; grid && !grid.IsNull()) {
    if (!grid.IsSequence()) p.fail(grid.Mark(), "sweep.batch_epochs", "expected a list");
    sweep.batch_epochs.clear();
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const std::string field = "sweep.batch_epochs[" + std::to_string(i) + "]";
      if (!grid[i].IsSequence() || grid[i].size() != 2) {
        p.fail(grid[i].Mark(), field, "expected a [batch_size, epochs] pair");
      }
      sweep.batch_epochs.emplace_back(p.convert<std::size_t>(grid[i][0], field),
                                      p.convert<int>(grid[i][1], field));
    }
  }
  if (const auto counts = node["straggler_counts"]; counts && !counts.IsNull()) {
    if (!counts.IsSequence()) {
      p.fail(counts.Mark(), "sweep.straggler_counts", "expected a list");
    }
    sweep.straggler_counts.clear();
    for (std::size_t i = 0; i < counts.size(); ++i) {
      sweep.straggler_counts.push_back(p.convert<int>(
          counts[i], "sweep.straggler_counts[" + std::to_string(i) + "]"));
    }
  }
  p.read(node, path, "straggler_late_probability", sweep.straggler_late_probability);
}

void parse_behavior(Parser& p, const YAML::Node& node, const std::string& path,
                    clientsim::ClientBehavior& b) {
  p.require_map(node, path);
  p.check_keys(node, path,
               {"kind", "late_probability", "latency_multiplier",
                "flip_fraction", "poison_seed", "deviant_scale"});
  std::string kind;
  if (p.read(node, path, "kind", kind)) {
    if (kind == "reliable") {
      b.kind = clientsim::BehaviorKind::kReliable;
    } else if (kind == "straggler") {
      b.kind = clientsim::BehaviorKind::kStraggler;
    } else if (kind == "poisoner") {
      b.kind = clientsim::BehaviorKind::kPoisoner;
    } else {
      p.fail(node["kind"].Mark(), join(path, "kind"),
             "expected reliable, straggler or poisoner");
    }
  }
  p.read(node, path, "late_probability", b.late_probability);
  p.read(node, path, "latency_multiplier", b.latency_multiplier);
  double flip = 0.0;
  if (p.read(node, path, "flip_fraction", flip)) {
    b.poison = data::PoisonSpec{flip, 0};
    p.read(node, path, "poison_seed", b.poison->label_map_seed);
  }
  double scale = 1.0;
  if (p.read(node, path, "deviant_scale", scale)) b.deviant_scale = scale;
}

void parse_client(Parser& p, const YAML::Node& node, const std::string& path,
                  ClientConfig& c) {
  p.require_map(node, path);
  p.check_keys(node, path,
               {"id", "labels", "samples", "activation", "resources",
                "battery_drain", "resource_noise", "behavior"});
  if (!p.read(node, path, "id", c.id)) p.fail(node.Mark(), path, "missing key 'id'");
  if (!node["labels"]) p.fail(node.Mark(), path, "missing key 'labels'");
  c.labels = parse_labels(p, node["labels"], join(path, "labels"));
  if (!p.read(node, path, "samples", c.samples)) {
    p.fail(node.Mark(), path, "missing key 'samples'");
  }
  p.read(node, path, "activation", c.activation);
  if (node["resources"]) {
    parse_profile(p, node["resources"], join(path, "resources"), c.resources);
  }
  p.read(node, path, "battery_drain", c.battery_drain);
  p.read(node, path, "resource_noise", c.resource_noise);
  if (node["behavior"]) {
    parse_behavior(p, node["behavior"], join(path, "behavior"), c.behavior);
  }
}

void emit_profile(YAML::Emitter& out, const resource::ResourceProfile& r) {
  out << YAML::Flow << YAML::BeginMap;
  out << YAML::Key << "memory_mb" << YAML::Value << fmt_double(r.memory_mb);
  out << YAML::Key << "bandwidth_mbps" << YAML::Value << fmt_double(r.bandwidth_mbps);
  out << YAML::Key << "battery_pct" << YAML::Value << fmt_double(r.battery_pct);
  out << YAML::EndMap;
}

}  // namespace

ExperimentConfig parse_config(std::string_view text, std::string_view source_name) {
  Parser p{std::string(source_name)};
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    p.fail(e.mark, "", "syntax error: " + e.msg);
  }
  if (!root.IsMap()) p.fail(root.Mark(), "<root>", "expected a mapping");
  p.check_keys(root, "",
               {"name", "seed", "num_features", "num_classes", "task", "trust",
                "server", "cost", "data", "sweep", "clients"});

  ExperimentConfig cfg;
  p.read(root, "", "name", cfg.name);
  p.read(root, "", "seed", cfg.seed);
  p.read(root, "", "num_features", cfg.num_features);
  p.read(root, "", "num_classes", cfg.num_classes);
  if (root["task"]) parse_task(p, root["task"], cfg.task);
  if (root["trust"]) parse_trust(p, root["trust"], cfg);
  if (root["server"]) parse_server(p, root["server"], cfg.server);
  if (const auto cost = root["cost"]) {
    p.require_map(cost, "cost");
    p.check_keys(cost, "cost", {"base_compute_cost", "transmission_cost"});
    p.read(cost, "cost", "base_compute_cost", cfg.cost.base_compute_cost);
    p.read(cost, "cost", "transmission_cost", cfg.cost.transmission_cost);
  }
  if (root["data"]) parse_data(p, root["data"], cfg.data);
  if (root["sweep"]) parse_sweep(p, root["sweep"], cfg.sweep);

  const auto clients = root["clients"];
  if (!clients || !clients.IsSequence()) {
    p.fail(clients ? clients.Mark() : root.Mark(), "clients",
           "expected a list of clients");
  }
  p.record("clients", clients.Mark());
  for (std::size_t i = 0; i < clients.size(); ++i) {
    ClientConfig c;
    parse_client(p, clients[i], "clients[" + std::to_string(i) + "]", c);
    cfg.clients.push_back(std::move(c));
  }

  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    p.fail(p.mark_for(e.field()), e.field(), e.message());
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string());
}

std::string dump_config(const ExperimentConfig& cfg) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "name" << YAML::Value << cfg.name;
  out << YAML::Key << "seed" << YAML::Value << cfg.seed;
  out << YAML::Key << "num_features" << YAML::Value << cfg.num_features;
  out << YAML::Key << "num_classes" << YAML::Value << cfg.num_classes;

  const auto& t = cfg.task;
  out << YAML::Key << "task" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "requirement" << YAML::Value;
  emit_profile(out, t.requirement);
  out << YAML::Key << "min_trust" << YAML::Value << t.min_trust;
  out << YAML::Key << "timeout" << YAML::Value << fmt_double(t.timeout);
  if (!t.timeout_schedule.empty()) {
    out << YAML::Key << "timeout_schedule" << YAML::Value << YAML::Flow
        << YAML::BeginSeq;
    for (const double v : t.timeout_schedule) out << fmt_double(v);
    out << YAML::EndSeq;
  }
  out << YAML::Key << "gamma" << YAML::Value
      << (t.gamma ? fmt_double(*t.gamma) : std::string("auto"));
  out << YAML::Key << "gamma_scale" << YAML::Value << fmt_double(t.gamma_scale);
  out << YAML::Key << "batch_size" << YAML::Value << t.batch_size;
  out << YAML::Key << "local_epochs" << YAML::Value << t.local_epochs;
  out << YAML::Key << "eta" << YAML::Value << fmt_double(t.eta);
  out << YAML::Key << "client_fraction" << YAML::Value
      << fmt_double(t.client_fraction);
  out << YAML::Key << "subsample_ratio" << YAML::Value
      << fmt_double(t.subsample_ratio);
  out << YAML::Key << "max_rounds" << YAML::Value << t.max_rounds;
  if (t.target_accuracy) {
    out << YAML::Key << "target_accuracy" << YAML::Value
        << fmt_double(*t.target_accuracy);
  }
  out << YAML::EndMap;

  out << YAML::Key << "trust" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "initial" << YAML::Value << cfg.trust.initial;
  out << YAML::Key << "reward" << YAML::Value << cfg.trust.reward;
  out << YAML::Key << "interested" << YAML::Value << cfg.trust.interested;
  out << YAML::Key << "penalty" << YAML::Value << cfg.trust.penalty;
  out << YAML::Key << "blame" << YAML::Value << cfg.trust.blame;
  out << YAML::Key << "ban" << YAML::Value << cfg.trust.ban;
  out << YAML::Key << "failure_rate_basis" << YAML::Value
      << (cfg.failure_basis == trust::FailureRateBasis::kParticipation
              ? "participation"
              : "round_index");
  out << YAML::EndMap;

  const auto& s = cfg.server;
  out << YAML::Key << "server" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "mode" << YAML::Value << to_string(s.mode);
  out << YAML::Key << "deviation_gate" << YAML::Value << s.deviation_gate;
  out << YAML::Key << "similarity_gate" << YAML::Value << s.similarity_gate;
  out << YAML::Key << "similarity_threshold" << YAML::Value
      << fmt_double(s.similarity_threshold);
  out << YAML::Key << "async_mixing" << YAML::Value << fmt_double(s.async_mixing);
  out << YAML::Key << "merge_late" << YAML::Value << s.merge_late;
  out << YAML::Key << "async_close_factor" << YAML::Value
      << fmt_double(s.async_close_factor);
  out << YAML::Key << "late_delay_fraction" << YAML::Value
      << fmt_double(s.late_delay_fraction);
  out << YAML::Key << "parallel" << YAML::Value << s.parallel;
  out << YAML::EndMap;

  out << YAML::Key << "cost" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "base_compute_cost" << YAML::Value
      << fmt_double(cfg.cost.base_compute_cost);
  out << YAML::Key << "transmission_cost" << YAML::Value
      << fmt_double(cfg.cost.transmission_cost);
  out << YAML::EndMap;

  const auto& d = cfg.data;
  out << YAML::Key << "data" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "source" << YAML::Value
      << (d.source == DataSource::kAuto        ? "auto"
          : d.source == DataSource::kSynthetic ? "synthetic"
                                               : "idx");
  if (!d.idx_dir.empty()) out << YAML::Key << "idx_dir" << YAML::Value << d.idx_dir;
  out << YAML::Key << "pool_size" << YAML::Value << d.pool_size;
  out << YAML::Key << "test_cap" << YAML::Value << d.test_cap;
  out << YAML::Key << "noise_sd" << YAML::Value << fmt_double(d.noise_sd);
  out << YAML::Key << "max_shift" << YAML::Value << d.max_shift;
  out << YAML::EndMap;

  out << YAML::Key << "sweep" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "batch_epochs" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (const auto& [b, e] : cfg.sweep.batch_epochs) {
    out << YAML::Flow << YAML::BeginSeq << b << e << YAML::EndSeq;
  }
  out << YAML::EndSeq;
  out << YAML::Key << "straggler_counts" << YAML::Value << YAML::Flow
      << cfg.sweep.straggler_counts;
  out << YAML::Key << "straggler_late_probability" << YAML::Value
      << fmt_double(cfg.sweep.straggler_late_probability);
  out << YAML::EndMap;

  out << YAML::Key << "clients" << YAML::Value << YAML::BeginSeq;
  for (const ClientConfig& c : cfg.clients) {
    out << YAML::BeginMap;
    out << YAML::Key << "id" << YAML::Value << c.id;
    out << YAML::Key << "labels" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (const int l : c.labels) out << l;
    out << YAML::EndSeq;
    out << YAML::Key << "samples" << YAML::Value << c.samples;
    if (!c.activation.empty()) {
      out << YAML::Key << "activation" << YAML::Value << c.activation;
    }
    out << YAML::Key << "resources" << YAML::Value;
    emit_profile(out, c.resources);
    out << YAML::Key << "battery_drain" << YAML::Value << fmt_double(c.battery_drain);
    out << YAML::Key << "resource_noise" << YAML::Value << c.resource_noise;
    const auto& b = c.behavior;
    out << YAML::Key << "behavior" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "kind" << YAML::Value << clientsim::to_string(b.kind);
    out << YAML::Key << "late_probability" << YAML::Value
        << fmt_double(b.late_probability);
    out << YAML::Key << "latency_multiplier" << YAML::Value
        << fmt_double(b.latency_multiplier);
    if (b.poison) {
      out << YAML::Key << "flip_fraction" << YAML::Value
          << fmt_double(b.poison->flip_fraction);
      out << YAML::Key << "poison_seed" << YAML::Value << b.poison->label_map_seed;
    }
    if (b.deviant_scale) {
      out << YAML::Key << "deviant_scale" << YAML::Value
          << fmt_double(*b.deviant_scale);
    }
    out << YAML::EndMap;
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace fedar::cli
