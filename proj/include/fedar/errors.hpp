#pragma once

#include <stdexcept>
#include <string>

namespace fedar {

// Invalid shapes, parameters or experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what)
      : std::runtime_error(what), message_(what) {}
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field.empty() ? message : field + ": " + message),
        field_(std::move(field)),
        message_(message) {}

  // "<location> <field>: <message>", e.g. "cfg.yaml:3:5: task.eta: ...".
  ConfigError(std::string field, const std::string& message,
              const std::string& location)
      : std::runtime_error(location + (field.empty() ? message
                                                     : field + ": " + message)),
        field_(std::move(field)),
        message_(message) {}
  const std::string& field() const noexcept { return field_; }
  const std::string& message() const noexcept { return message_; }

 private:
  std::string field_;
  std::string message_;
};

// Bad sample data: labels out of range, empty batches, empty test sets.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

class LoadError : public std::runtime_error {
 public:
  enum class Kind { kOpen, kBadMagic, kCountMismatch, kTruncated };

  LoadError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

class PartitionError : public std::runtime_error {
 public:
  PartitionError(int label, const std::string& what)
      : std::runtime_error(what), label_(label) {}

  int label() const noexcept { return label_; }

 private:
  int label_;
};

// Ledger misuse: duplicate registration, updates for non-participants.
class TrustError : public std::logic_error {
 public:
  explicit TrustError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace fedar
