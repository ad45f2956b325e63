#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "fedar/numcore.hpp"

namespace fedar::data {

using ClientId = std::string;

struct Sample {
  std::vector<double> features;
  int label = 0;

  bool operator==(const Sample&) const = default;
};

struct ClientDataset {
  ClientId client_id;
  std::vector<Sample> samples;
  std::set<int> label_set;

  std::size_t size() const noexcept { return samples.size(); }
};

struct FederationData {
  std::vector<ClientDataset> clients;
  std::vector<Sample> test_set;
  std::size_t total_size = 0;
  std::vector<std::string> warnings;
};

struct PoisonSpec {
  double flip_fraction = 0.0;
  std::uint64_t label_map_seed = 0;
};

// One row of a federation table: who gets how many samples of which labels.
struct PartitionEntry {
  ClientId client_id;
  std::set<int> label_set;
  std::size_t sample_count = 0;
};

// Reads an IDX image/label file pair as distributed for MNIST. Pixels are
// scaled by 1/255 and flattened row-major.
std::vector<Sample> load_idx(const std::filesystem::path& images_path,
                             const std::filesystem::path& labels_path);

struct SynthOptions {
  double noise_sd = 0.45;
  // Maximum translation, in pixels, applied to a class template per sample.
  int max_shift = 4;
};

// Class-conditional Gaussian digits on a 28x28 grid, clamped to [0, 1].
// Labels are balanced to within one sample per class.
std::vector<Sample> synth_digits(std::size_t num_samples, int num_classes,
                                 std::uint64_t seed, SynthOptions options = {});

// Draws each client's samples without replacement, spread evenly over its
// label set (lower labels absorb any remainder). What is left of the pool,
// shuffled and capped at test_cap, becomes the test set.
FederationData partition(std::span<const PartitionEntry> table,
                         std::vector<Sample> pool, std::uint64_t seed,
                         std::size_t test_cap = 2000);

std::vector<numcore::Batch> shuffle_and_batch(const ClientDataset& ds,
                                              std::size_t batch_size,
                                              std::uint64_t seed);

ClientDataset poison(const ClientDataset& ds, const PoisonSpec& spec,
                     int num_classes = 10);

// Packs samples, in order, into a single batch.
numcore::Batch to_batch(std::span<const Sample> samples);

}  // namespace fedar::data
