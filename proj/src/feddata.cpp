#include "fedar/feddata.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

#include "fedar/errors.hpp"
#include "fedar/rng.hpp"

namespace fedar::data {
namespace {

constexpr std::uint32_t kImagesMagic = 0x00000803;
constexpr std::uint32_t kLabelsMagic = 0x00000801;

constexpr int kSide = 28;
constexpr double kBackground = -0.6;
constexpr double kStroke = 0.9;
// Templates are a fixed "alphabet"; the seed only drives sampling.
constexpr std::uint64_t kTemplateSeed = 0x7e3a11c5d1a6f00dULL;

std::uint32_t read_be32(std::istream& in, const std::string& what) {
  std::array<unsigned char, 4> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), 4)) {
    throw LoadError(LoadError::Kind::kTruncated, what + ": truncated header");
  }
  return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) |
         (std::uint32_t{b[2]} << 8) | std::uint32_t{b[3]};
}

std::ifstream open_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw LoadError(LoadError::Kind::kOpen, "cannot open " + path.string());
  }
  return in;
}

using Image = std::array<double, kSide * kSide>;

void draw_segment(Image& img, Rng& rng) {
  std::uniform_int_distribution<int> coord(4, kSide - 5);
  const int x0 = coord(rng), y0 = coord(rng), x1 = coord(rng), y1 = coord(rng);
  const int steps = std::max(std::abs(x1 - x0), std::abs(y1 - y0)) * 2 + 1;
  for (int s = 0; s <= steps; ++s) {
    const double t = static_cast<double>(s) / steps;
    const int cx = static_cast<int>(std::lround(x0 + t * (x1 - x0)));
    const int cy = static_cast<int>(std::lround(y0 + t * (y1 - y0)));
    for (int dy = 0; dy <= 1; ++dy) {
      for (int dx = 0; dx <= 1; ++dx) {
        const int x = std::min(cx + dx, kSide - 1);
        const int y = std::min(cy + dy, kSide - 1);
        img[static_cast<std::size_t>(y * kSide + x)] = kStroke;
      }
    }
  }
}

// Every class shares a common body; three strokes make each class distinct.
std::vector<Image> class_templates(int num_classes) {
  Rng shared_rng(kTemplateSeed);
  Image body;
  body.fill(kBackground);
  draw_segment(body, shared_rng);
  draw_segment(body, shared_rng);

  std::vector<Image> templates;
  templates.reserve(static_cast<std::size_t>(num_classes));
  for (int k = 0; k < num_classes; ++k) {
    Rng rng(derive_seed(kTemplateSeed, static_cast<std::uint64_t>(k) + 1));
    Image img = body;
    for (int s = 0; s < 3; ++s) draw_segment(img, rng);
    templates.push_back(img);
  }
  return templates;
}

}  // namespace

std::vector<Sample> load_idx(const std::filesystem::path& images_path,
                             const std::filesystem::path& labels_path) {
  auto images = open_binary(images_path);
  auto labels = open_binary(labels_path);
  const std::string img_name = images_path.string();
  const std::string lbl_name = labels_path.string();

  const std::uint32_t img_magic = read_be32(images, img_name);
  if (img_magic != kImagesMagic) {
    throw LoadError(LoadError::Kind::kBadMagic,
                    img_name + ": bad image magic number");
  }
  const std::uint32_t lbl_magic = read_be32(labels, lbl_name);
  if (lbl_magic != kLabelsMagic) {
    throw LoadError(LoadError::Kind::kBadMagic,
                    lbl_name + ": bad label magic number");
  }

  const std::uint32_t count = read_be32(images, img_name);
  const std::uint32_t rows = read_be32(images, img_name);
  const std::uint32_t cols = read_be32(images, img_name);
  const std::uint32_t label_count = read_be32(labels, lbl_name);
  if (label_count != count) {
    throw LoadError(LoadError::Kind::kCountMismatch,
                    "image count " + std::to_string(count) +
                        " does not match label count " +
                        std::to_string(label_count));
  }

  const std::size_t pixels = std::size_t{rows} * cols;
  std::vector<unsigned char> raw(pixels);
  std::vector<Sample> out;
  out.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    if (!images.read(reinterpret_cast<char*>(raw.data()),
                     static_cast<std::streamsize>(pixels))) {
      throw LoadError(LoadError::Kind::kTruncated,
                      img_name + ": truncated at image " + std::to_string(i));
    }
    char label = 0;
    if (!labels.get(label)) {
      throw LoadError(LoadError::Kind::kTruncated,
                      lbl_name + ": truncated at label " + std::to_string(i));
    }
    Sample s;
    s.features.resize(pixels);
    std::transform(raw.begin(), raw.end(), s.features.begin(),
                   [](unsigned char px) { return px / 255.0; });
    s.label = static_cast<unsigned char>(label);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<Sample> synth_digits(std::size_t num_samples, int num_classes,
                                 std::uint64_t seed, SynthOptions options) {
  if (num_samples == 0) throw ConfigError("synth_digits needs num_samples > 0");
  if (num_classes <= 0) throw ConfigError("synth_digits needs num_classes > 0");

  const auto templates = class_templates(num_classes);
  Rng rng(seed);

  std::vector<int> labels(num_samples);
  for (std::size_t i = 0; i < num_samples; ++i) {
    labels[i] = static_cast<int>(i % static_cast<std::size_t>(num_classes));
  }
  std::shuffle(labels.begin(), labels.end(), rng);

  std::normal_distribution<double> noise(0.0, options.noise_sd);
  std::uniform_int_distribution<int> shift(-options.max_shift,
                                           options.max_shift);
  std::vector<Sample> out(num_samples);
  for (std::size_t i = 0; i < num_samples; ++i) {
    const Image& tpl = templates[static_cast<std::size_t>(labels[i])];
    const int dx = shift(rng);
    const int dy = shift(rng);
    auto& f = out[i].features;
    f.resize(kSide * kSide);
    for (int y = 0; y < kSide; ++y) {
      for (int x = 0; x < kSide; ++x) {
        const int sx = x - dx;
        const int sy = y - dy;
        const bool inside = sx >= 0 && sx < kSide && sy >= 0 && sy < kSide;
        const double mean =
            inside ? tpl[static_cast<std::size_t>(sy * kSide + sx)]
                   : kBackground;
        f[static_cast<std::size_t>(y * kSide + x)] =
            std::clamp(mean + noise(rng), 0.0, 1.0);
      }
    }
    out[i].label = labels[i];
  }
  return out;
}

FederationData partition(std::span<const PartitionEntry> table,
                         std::vector<Sample> pool, std::uint64_t seed,
                         std::size_t test_cap) {
  Rng rng(seed);

  // Per-label queues of pool indices, shuffled once.
  std::map<int, std::vector<std::size_t>> by_label;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    by_label[pool[i].label].push_back(i);
  }
  for (auto& [label, idx] : by_label) std::shuffle(idx.begin(), idx.end(), rng);

  FederationData fed;
  std::vector<bool> taken(pool.size(), false);
  for (const PartitionEntry& entry : table) {
    if (entry.label_set.empty()) {
      throw ConfigError(entry.client_id, "empty label set");
    }
    const std::size_t per_label = entry.sample_count / entry.label_set.size();
    std::size_t extra = entry.sample_count % entry.label_set.size();

    ClientDataset ds{entry.client_id, {}, entry.label_set};
    ds.samples.reserve(entry.sample_count);
    for (const int label : entry.label_set) {
      const std::size_t want = per_label + (extra > 0 ? 1 : 0);
      if (extra > 0) --extra;
      auto& queue = by_label[label];
      if (queue.size() < want) {
        throw PartitionError(
            label, "not enough samples of label " + std::to_string(label) +
                       " for " + entry.client_id + ": need " +
                       std::to_string(want) + ", have " +
                       std::to_string(queue.size()));
      }
      for (std::size_t k = 0; k < want; ++k) {
        const std::size_t idx = queue.back();
        queue.pop_back();
        taken[idx] = true;
        ds.samples.push_back(std::move(pool[idx]));
      }
    }
    std::shuffle(ds.samples.begin(), ds.samples.end(), rng);
    fed.total_size += ds.size();
    fed.clients.push_back(std::move(ds));
  }

  std::vector<std::size_t> rest;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (!taken[i]) rest.push_back(i);
  }
  std::shuffle(rest.begin(), rest.end(), rng);
  rest.resize(std::min(rest.size(), test_cap));
  std::sort(rest.begin(), rest.end());
  fed.test_set.reserve(rest.size());
  for (const std::size_t i : rest) fed.test_set.push_back(std::move(pool[i]));
  if (fed.test_set.empty()) {
    fed.warnings.push_back("partition left no samples for the test set");
  }
  return fed;
}

std::vector<numcore::Batch> shuffle_and_batch(const ClientDataset& ds,
                                              std::size_t batch_size,
                                              std::uint64_t seed) {
  if (batch_size == 0) throw ConfigError("batch_size", "must be at least 1");
  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<numcore::Batch> batches;
  batches.reserve((order.size() + batch_size - 1) / batch_size);
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    const std::size_t end = std::min(order.size(), start + batch_size);
    const std::size_t features = ds.samples[order[start]].features.size();
    std::vector<double> inputs;
    inputs.reserve((end - start) * features);
    std::vector<int> labels;
    labels.reserve(end - start);
    for (std::size_t k = start; k < end; ++k) {
      const Sample& s = ds.samples[order[k]];
      inputs.insert(inputs.end(), s.features.begin(), s.features.end());
      labels.push_back(s.label);
    }
    batches.emplace_back(features, std::move(inputs), std::move(labels));
  }
  return batches;
}

ClientDataset poison(const ClientDataset& ds, const PoisonSpec& spec,
                     int num_classes) {
  if (spec.flip_fraction < 0.0 || spec.flip_fraction > 1.0) {
    throw ConfigError("flip_fraction", "must lie in [0, 1]");
  }
  ClientDataset out = ds;
  const auto flips = static_cast<std::size_t>(
      std::floor(spec.flip_fraction * static_cast<double>(ds.size())));
  if (flips == 0 || num_classes < 2) return out;

  Rng rng(spec.label_map_seed);
  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);

  std::uniform_int_distribution<int> other(0, num_classes - 2);
  for (std::size_t k = 0; k < flips; ++k) {
    int& label = out.samples[order[k]].label;
    const int draw = other(rng);
    label = draw < label ? draw : draw + 1;
  }
  return out;
}

numcore::Batch to_batch(std::span<const Sample> samples) {
  if (samples.empty()) return numcore::Batch(numcore::kImageFeatures, {}, {});
  const std::size_t features = samples.front().features.size();
  std::vector<double> inputs;
  inputs.reserve(samples.size() * features);
  std::vector<int> labels;
  labels.reserve(samples.size());
  for (const Sample& s : samples) {
    if (s.features.size() != features) {
      throw DataError("samples have differing feature lengths");
    }
    inputs.insert(inputs.end(), s.features.begin(), s.features.end());
    labels.push_back(s.label);
  }
  return numcore::Batch(features, std::move(inputs), std::move(labels));
}

}  // namespace fedar::data
