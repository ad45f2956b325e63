#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "fedar/experiment.hpp"

namespace fedar::cli {

// Parses and validates a YAML experiment config (JSON is accepted too).
// Errors are ConfigErrors whose text starts with "<source>:<line>:<column>:"
// followed by the field path, e.g.
//   table2.yaml:14:5: clients[2].behavior: unknown key 'late_prob'
ExperimentConfig parse_config(std::string_view text,
                              std::string_view source_name = "<config>");

// Throws std::ios_base::failure when the file cannot be read.
ExperimentConfig load_config(const std::filesystem::path& path);

// Emits a complete config document that parse_config reads back unchanged.
std::string dump_config(const ExperimentConfig& config);

}  // namespace fedar::cli
