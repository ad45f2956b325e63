#include "doctest.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <set>

#include "fedar/errors.hpp"
#include "fedar/experiment.hpp"
#include "fedar/feddata.hpp"

using namespace fedar;
using data::Sample;

namespace {

namespace fs = std::filesystem;

void put_be32(std::ofstream& out, std::uint32_t v) {
  const char bytes[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16),
                         static_cast<char>(v >> 8), static_cast<char>(v)};
  out.write(bytes, 4);
}

struct IdxFiles {
  fs::path images;
  fs::path labels;
};

// Writes count 28x28 images whose pixel i is (i + k) % 256 for image k.
IdxFiles write_idx(const std::string& tag, std::uint32_t count,
                   std::uint32_t label_count, std::uint32_t image_magic = 0x803,
                   std::size_t drop_bytes = 0) {
  const fs::path dir = fs::temp_directory_path() / "fedar_idx_test";
  fs::create_directories(dir);
  IdxFiles files{dir / (tag + "-images"), dir / (tag + "-labels")};

  std::string body;
  for (std::uint32_t k = 0; k < count; ++k) {
    for (std::uint32_t i = 0; i < 784; ++i) body.push_back(static_cast<char>((i + k) % 256));
  }
  body.resize(body.size() - drop_bytes);
  {
    std::ofstream out(files.images, std::ios::binary);
    put_be32(out, image_magic);
    put_be32(out, count);
    put_be32(out, 28);
    put_be32(out, 28);
    out.write(body.data(), static_cast<std::streamsize>(body.size()));
  }
  {
    std::ofstream out(files.labels, std::ios::binary);
    put_be32(out, 0x801);
    put_be32(out, label_count);
    for (std::uint32_t k = 0; k < label_count; ++k) out.put(static_cast<char>(k % 10));
  }
  return files;
}

LoadError::Kind load_error_kind(const IdxFiles& f) {
  try {
    data::load_idx(f.images, f.labels);
  } catch (const LoadError& e) {
    return e.kind();
  }
  FAIL("expected a LoadError");
  return LoadError::Kind::kOpen;
}

std::vector<data::PartitionEntry> table_entries(const ExperimentConfig& cfg) {
  std::vector<data::PartitionEntry> out;
  for (const auto& c : cfg.clients) out.push_back({c.id, c.labels, c.samples});
  return out;
}

}  // namespace

TEST_CASE("load_idx: well-formed pair") {
  const auto f = write_idx("ok", 2, 2);
  const auto samples = data::load_idx(f.images, f.labels);
  REQUIRE(samples.size() == 2);
  CHECK(samples[0].features.size() == 784);
  CHECK(samples[1].label == 1);
  CHECK(samples[0].features[0] == 0.0);
  CHECK(samples[0].features[255] == 1.0);  // byte 255 scales to exactly 1
  CHECK(samples[1].features[3] == 4.0 / 255.0);
}

TEST_CASE("load_idx: distinct errors") {
  CHECK(load_error_kind(write_idx("count", 3, 2)) == LoadError::Kind::kCountMismatch);
  CHECK(load_error_kind(write_idx("magic", 2, 2, 0x804)) == LoadError::Kind::kBadMagic);
  CHECK(load_error_kind(write_idx("short", 2, 2, 0x803, 10)) == LoadError::Kind::kTruncated);
  CHECK(load_error_kind({"/nonexistent/a", "/nonexistent/b"}) == LoadError::Kind::kOpen);
}

TEST_CASE("synth_digits: deterministic, seed-sensitive, balanced") {
  const auto a = data::synth_digits(1000, 10, 17);
  const auto b = data::synth_digits(1000, 10, 17);
  const auto c = data::synth_digits(1000, 10, 18);
  CHECK(a == b);
  CHECK(a != c);

  std::map<int, int> counts;
  for (const Sample& s : a) {
    ++counts[s.label];
    CHECK(s.features.size() == 784);
    CHECK(std::all_of(s.features.begin(), s.features.end(),
                      [](double v) { return v >= 0.0 && v <= 1.0; }));
  }
  REQUIRE(counts.size() == 10);
  for (const auto& [label, n] : counts) {
    CHECK(n >= 90);
    CHECK(n <= 110);
  }
  CHECK_THROWS_AS(data::synth_digits(0, 10, 1), ConfigError);
}

TEST_CASE("synth_digits: a softmax model fits it within 50 epochs") {
  data::ClientDataset ds{"fit", data::synth_digits(1000, 10, 3), {}};
  const auto all = data::to_batch(ds.samples);
  numcore::ModelParams w(784, 10);
  resource::TaskSpec task;
  task.eta = 0.05;
  double acc = 0.0;
  int epoch = 0;
  const auto batches = data::shuffle_and_batch(ds, task.batch_size, 9);
  while (epoch < 50 && acc <= 0.9) {
    for (const auto& b : batches) numcore::train_step(w, b, task.eta);
    acc = numcore::accuracy(w, all);
    ++epoch;
  }
  MESSAGE("training accuracy " << acc << " after " << epoch << " epochs");
  CHECK(acc > 0.9);
}

TEST_CASE("partition: twelve-robot federation") {
  const auto cfg = table2_config();
  const auto pool = data::synth_digits(12000, 10, 5);
  const auto fed = data::partition(table_entries(cfg), pool, 5, 2000);
  REQUIRE(fed.clients.size() == 12);
  CHECK(fed.total_size == 9300);

  const auto& robot3 = fed.clients[2];
  CHECK(robot3.client_id == "robot03");
  CHECK(robot3.size() == 400);
  for (const Sample& s : robot3.samples) CHECK(s.label <= 3);

  std::size_t sum = 0;
  for (const auto& c : fed.clients) {
    sum += c.size();
    for (const Sample& s : c.samples) CHECK(c.label_set.count(s.label) == 1);
  }
  CHECK(sum == fed.total_size);
  CHECK(fed.test_set.size() == 2000);
  CHECK(fed.warnings.empty());
}

TEST_CASE("partition: no duplication, test set disjoint") {
  // Tag every pool sample through its first feature.
  std::vector<Sample> pool;
  for (int i = 0; i < 300; ++i) {
    Sample s;
    s.features = {static_cast<double>(i), 0.0};
    s.label = i % 3;
    pool.push_back(s);
  }
  const std::vector<data::PartitionEntry> table{
      {"a", {0, 1}, 50}, {"b", {2}, 40}, {"c", {0, 1, 2}, 61}};
  const auto fed = data::partition(table, pool, 11, 1000);
  std::set<double> seen;
  std::size_t total = 0;
  for (const auto& c : fed.clients) {
    for (const auto& s : c.samples) {
      CHECK(seen.insert(s.features[0]).second);
      ++total;
    }
  }
  for (const auto& s : fed.test_set) CHECK(seen.insert(s.features[0]).second);
  CHECK(total == 151);
  CHECK(seen.size() == 300);
}

TEST_CASE("partition: test set cap and empty remainder") {
  const auto pool = data::synth_digits(100, 10, 2);
  const std::vector<data::PartitionEntry> half{{"a", {0, 1, 2, 3, 4}, 50}};
  CHECK(data::partition(half, pool, 1, 20).test_set.size() == 20);

  std::set<int> all;
  for (int l = 0; l < 10; ++l) all.insert(l);
  const std::vector<data::PartitionEntry> everything{{"a", all, 100}};
  const auto fed = data::partition(everything, pool, 1, 2000);
  CHECK(fed.test_set.empty());
  CHECK(fed.warnings.size() == 1);
}

TEST_CASE("partition: shortage names the label") {
  const auto pool = data::synth_digits(100, 10, 2);  // 10 per label
  const std::vector<data::PartitionEntry> table{{"a", {3}, 11}};
  try {
    data::partition(table, pool, 1);
    FAIL("expected PartitionError");
  } catch (const PartitionError& e) {
    CHECK(e.label() == 3);
    CHECK(std::string(e.what()).find("label 3") != std::string::npos);
  }
}

TEST_CASE("shuffle_and_batch") {
  data::ClientDataset ds{"c", data::synth_digits(101, 10, 4), {}};
  auto hundred = ds;
  hundred.samples.resize(100);

  const auto five = data::shuffle_and_batch(hundred, 20, 1);
  CHECK(five.size() == 5);
  for (const auto& b : five) CHECK(b.rows() == 20);

  const auto six = data::shuffle_and_batch(ds, 20, 1);
  REQUIRE(six.size() == 6);
  CHECK(six.back().rows() == 1);

  // Every sample exactly once; same seed, same order.
  std::multiset<double> original, batched;
  for (const auto& s : ds.samples) {
    original.insert(std::accumulate(s.features.begin(), s.features.end(), 0.0));
  }
  for (const auto& b : six) {
    for (std::size_t r = 0; r < b.rows(); ++r) {
      const auto row = b.row(r);
      batched.insert(std::accumulate(row.begin(), row.end(), 0.0));
    }
  }
  CHECK(original == batched);

  const auto again = data::shuffle_and_batch(ds, 20, 1);
  const auto other = data::shuffle_and_batch(ds, 20, 2);
  bool same = true, differs = false;
  for (std::size_t i = 0; i < six.size(); ++i) {
    same = same && std::equal(six[i].labels().begin(), six[i].labels().end(),
                              again[i].labels().begin());
    differs = differs || !std::equal(six[i].inputs().begin(), six[i].inputs().end(),
                                     other[i].inputs().begin(),
                                     other[i].inputs().end());
  }
  CHECK(same);
  CHECK(differs);
  CHECK_THROWS_AS(data::shuffle_and_batch(ds, 0, 1), ConfigError);
}

TEST_CASE("batches respect the client's label set") {
  const auto pool = data::synth_digits(2000, 10, 8);
  const std::vector<data::PartitionEntry> table{{"r5", {4, 5, 6}, 300}};
  const auto fed = data::partition(table, pool, 3);
  for (const auto& b : data::shuffle_and_batch(fed.clients[0], 20, 6)) {
    for (const int l : b.labels()) CHECK((l >= 4 && l <= 6));
  }
}

TEST_CASE("poison") {
  const auto pool = data::synth_digits(400, 10, 6);
  const data::ClientDataset ds{"p", pool, {0, 1, 2, 3, 4, 5, 6, 7, 8, 9}};

  const auto none = data::poison(ds, {0.0, 1});
  CHECK(none.samples == ds.samples);

  const auto all = data::poison(ds, {1.0, 1});
  for (std::size_t i = 0; i < ds.size(); ++i) {
    CHECK(all.samples[i].label != ds.samples[i].label);
    CHECK(all.samples[i].features == ds.samples[i].features);
  }

  const auto half = data::poison(ds, {0.5, 7});
  const auto half_again = data::poison(ds, {0.5, 7});
  std::size_t flipped = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (half.samples[i].label != ds.samples[i].label) ++flipped;
    CHECK(half.samples[i].features == ds.samples[i].features);
  }
  CHECK(flipped == 200);
  CHECK(half.samples == half_again.samples);

  // Floor of a fractional count.
  auto small = ds;
  small.samples.resize(7);
  std::size_t small_flips = 0;
  const auto sp = data::poison(small, {0.5, 3});
  for (std::size_t i = 0; i < 7; ++i) small_flips += sp.samples[i].label != small.samples[i].label;
  CHECK(small_flips == 3);
}

TEST_CASE("poison: replacement labels cover the other classes uniformly") {
  std::vector<Sample> same_label(9000, Sample{{0.5}, 2});
  const data::ClientDataset ds{"u", same_label, {2}};
  const auto out = data::poison(ds, {1.0, 13});
  std::map<int, int> counts;
  for (const auto& s : out.samples) ++counts[s.label];
  CHECK(counts.count(2) == 0);
  CHECK(counts.size() == 9);
  for (const auto& [label, n] : counts) {
    CHECK(n > 850);
    CHECK(n < 1150);
  }
}
