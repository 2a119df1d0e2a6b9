// Copyright 2026 The MorphMLP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "morphmlp/dataset.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <set>

namespace morph {

static_assert(std::endian::native == std::endian::little,
              "dataset I/O assumes a little-endian host");

namespace {

constexpr std::size_t kMagicLen = sizeof(kDatasetMagic) - 1;
constexpr std::uint64_t kPatternSeed = 0x5eed'c4a1'2026ULL;

template <typename U>
void put(std::ostream& os, U value) {
  os.write(reinterpret_cast<const char*>(&value), sizeof(U));
}

template <typename U>
U get(std::istream& is) {
  U value{};
  if (!is.read(reinterpret_cast<char*>(&value), sizeof(U)))
    throw DatasetError("dataset: truncated file");
  return value;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument("synthetic dataset: " + message);
}

// Distinct +/-1 patterns, one per class, from a fixed generator.
std::vector<std::vector<int>> class_patterns(std::int64_t classes, std::int64_t len) {
  require(len < 31 && classes <= (std::int64_t{1} << len),
          "num_classes exceeds the number of distinct sign patterns");
  Rng rng(kPatternSeed);
  std::set<std::uint32_t> used;
  std::vector<std::vector<int>> patterns;
  while (static_cast<std::int64_t>(patterns.size()) < classes) {
    const auto bits = static_cast<std::uint32_t>(rng() & ((std::uint64_t{1} << len) - 1));
    if (!used.insert(bits).second) continue;
    std::vector<int> p(static_cast<std::size_t>(len));
    for (std::int64_t j = 0; j < len; ++j) p[j] = (bits >> j) & 1u ? 1 : -1;
    patterns.push_back(std::move(p));
  }
  return patterns;
}

Dataset make_chunk_parity(const SynthOptions& o) {
  const auto h = o.input.height, w = o.input.width, c = o.channels, p = o.patch;
  require(!o.input.is_video(), "chunk_parity needs an image input");
  require(h % p == 0 && w % p == 0, "input must be a multiple of the patch size");
  require(o.chunk_len >= 1 && o.chunk_len <= w / p, "chunk_len exceeds the token row");
  require(o.num_classes >= 2, "need at least two classes");
  const auto patterns = class_patterns(o.num_classes, o.chunk_len);

  Dataset d;
  d.sample_shape = {h, w, c};
  d.num_classes = o.num_classes;
  const auto per = d.sample_numel();
  d.inputs.resize(static_cast<std::size_t>(per * o.size));
  d.labels.resize(static_cast<std::size_t>(o.size));
  Rng rng(o.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_int_distribution<std::int32_t> pick(0, static_cast<std::int32_t>(o.num_classes - 1));
  for (std::int64_t n = 0; n < o.size; ++n) {
    const auto label = pick(rng);
    d.labels[n] = label;
    float* x = d.inputs.data() + n * per;
    for (std::int64_t i = 0; i < per; ++i) x[i] = static_cast<float>(o.noise * noise(rng));
    for (std::int64_t j = 0; j < o.chunk_len; ++j) {
      const double v = o.amplitude * patterns[label][j];
      for (std::int64_t r = 0; r < p; ++r)
        for (std::int64_t s = 0; s < p; ++s)
          for (std::int64_t ch = 0; ch < c; ++ch)
            x[(r * w + j * p + s) * c + ch] += static_cast<float>(v);
    }
  }
  return d;
}

Dataset make_frame_order(const SynthOptions& o) {
  const auto h = o.input.height, w = o.input.width, t = o.input.frames, c = o.channels;
  const auto p = o.patch, tb = o.tubelet;
  require(o.input.is_video(), "frame_order needs a video input");
  require(h % p == 0 && w % p == 0, "input must be a multiple of the patch size");
  require(t % tb == 0 && t / tb >= 2, "frames must be at least two whole tubelets");
  const auto rows = h / p, cols = w / p, steps = t / tb;
  require(cols >= 3, "need at least three token columns to tell the directions apart");

  Dataset d;
  d.sample_shape = {h, w, t, c};
  d.num_classes = 2;
  const auto per = d.sample_numel();
  d.inputs.resize(static_cast<std::size_t>(per * o.size));
  d.labels.resize(static_cast<std::size_t>(o.size));
  Rng rng(o.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_int_distribution<std::int32_t> coin(0, 1);
  std::uniform_int_distribution<std::int64_t> row_dist(0, rows - 1), col_dist(0, cols - 1);
  std::vector<std::int64_t> order(static_cast<std::size_t>(steps));
  for (std::int64_t n = 0; n < o.size; ++n) {
    const auto label = coin(rng);
    d.labels[n] = label;
    const auto row = row_dist(rng), start = col_dist(rng);
    const std::int64_t dir = label == 0 ? 1 : -1;  // class 0 moves right
    std::iota(order.begin(), order.end(), 0);
    if (o.shuffle_frames) std::shuffle(order.begin(), order.end(), rng);
    float* x = d.inputs.data() + n * per;
    for (std::int64_t i = 0; i < per; ++i) x[i] = static_cast<float>(o.noise * noise(rng));
    for (std::int64_t k = 0; k < steps; ++k) {
      const auto col = ((start + dir * order[k]) % cols + cols) % cols;
      for (std::int64_t f = k * tb; f < (k + 1) * tb; ++f)
        for (std::int64_t r = row * p; r < (row + 1) * p; ++r)
          for (std::int64_t s = col * p; s < (col + 1) * p; ++s)
            for (std::int64_t ch = 0; ch < c; ++ch)
              x[((r * w + s) * t + f) * c + ch] += static_cast<float>(o.amplitude);
    }
  }
  return d;
}

}  // namespace

template <typename T>
Tensor<T> Dataset::batch_inputs(std::span<const std::int64_t> indices) const {
  const auto per = sample_numel();
  Shape shape{static_cast<std::int64_t>(indices.size())};
  shape.insert(shape.end(), sample_shape.begin(), sample_shape.end());
  std::vector<T> values(static_cast<std::size_t>(per) * indices.size());
  for (std::size_t b = 0; b < indices.size(); ++b) {
    if (indices[b] < 0 || indices[b] >= size())
      throw std::out_of_range("dataset: sample index " + std::to_string(indices[b]));
    const float* src = inputs.data() + indices[b] * per;
    std::copy(src, src + per, values.begin() + static_cast<std::ptrdiff_t>(b * per));
  }
  return Tensor<T>(std::move(shape), std::move(values));
}

std::vector<std::int32_t> Dataset::batch_labels(std::span<const std::int64_t> indices) const {
  std::vector<std::int32_t> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(labels.at(static_cast<std::size_t>(i)));
  return out;
}

Dataset Dataset::subset(std::span<const std::int64_t> indices) const {
  Dataset d;
  d.sample_shape = sample_shape;
  d.num_classes = num_classes;
  const auto per = sample_numel();
  for (auto i : indices) {
    if (i < 0 || i >= size()) throw std::out_of_range("dataset: sample index " + std::to_string(i));
    d.inputs.insert(d.inputs.end(), inputs.begin() + i * per, inputs.begin() + (i + 1) * per);
    d.labels.push_back(labels[static_cast<std::size_t>(i)]);
  }
  return d;
}

void Dataset::validate() const {
  if (num_classes < 1) throw DatasetError("dataset: class count must be positive");
  if (static_cast<std::int64_t>(inputs.size()) != sample_numel() * size())
    throw DatasetError("dataset: payload holds " + std::to_string(inputs.size()) +
                       " scalars, expected " + std::to_string(sample_numel() * size()));
  for (auto label : labels)
    if (label < 0 || label >= num_classes)
      throw DatasetError("dataset: label " + std::to_string(label) + " outside [0, " +
                         std::to_string(num_classes) + ")");
}

SynthKind parse_synth_kind(const std::string& text) {
  if (text == "chunk_parity") return SynthKind::chunk_parity;
  if (text == "frame_order") return SynthKind::frame_order;
  throw std::invalid_argument("unknown synthetic dataset '" + text +
                              "' (expected chunk_parity or frame_order)");
}

std::string to_string(SynthKind kind) {
  return kind == SynthKind::chunk_parity ? "chunk_parity" : "frame_order";
}

Dataset make_synthetic(const SynthOptions& options) {
  require(options.size >= 0, "size must be non-negative");
  require(options.patch >= 1 && options.channels >= 1, "patch and channels must be positive");
  return options.kind == SynthKind::chunk_parity ? make_chunk_parity(options)
                                                 : make_frame_order(options);
}

void write_dataset(const Dataset& data, const std::filesystem::path& path, DType dtype) {
  data.validate();
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw DatasetError("dataset: cannot open " + path.string() + " for writing");
  os.write(kDatasetMagic, kMagicLen);
  put<std::uint8_t>(os, static_cast<std::uint8_t>(dtype));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(data.sample_shape.size()));
  for (auto e : data.sample_shape) put<std::uint64_t>(os, static_cast<std::uint64_t>(e));
  put<std::uint64_t>(os, static_cast<std::uint64_t>(data.size()));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(data.num_classes));
  if (dtype == DType::f32) {
    os.write(reinterpret_cast<const char*>(data.inputs.data()),
             static_cast<std::streamsize>(data.inputs.size() * sizeof(float)));
  } else {
    const std::vector<double> wide(data.inputs.begin(), data.inputs.end());
    os.write(reinterpret_cast<const char*>(wide.data()),
             static_cast<std::streamsize>(wide.size() * sizeof(double)));
  }
  os.write(reinterpret_cast<const char*>(data.labels.data()),
           static_cast<std::streamsize>(data.labels.size() * sizeof(std::int32_t)));
  if (!os) throw DatasetError("dataset: write failed for " + path.string());
}

Dataset read_dataset(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DatasetError("dataset: cannot open " + path.string());
  char magic[kMagicLen];
  if (!is.read(magic, kMagicLen) || std::memcmp(magic, kDatasetMagic, kMagicLen) != 0)
    throw DatasetError("dataset: bad magic, not an MDAT1 file: " + path.string());
  const auto code = get<std::uint8_t>(is);
  if (code > 1) throw DatasetError("dataset: unknown dtype code " + std::to_string(code));
  Dataset d;
  d.sample_shape.resize(get<std::uint32_t>(is));
  for (auto& e : d.sample_shape) e = static_cast<std::int64_t>(get<std::uint64_t>(is));
  const auto count = get<std::uint64_t>(is);
  d.num_classes = get<std::uint32_t>(is);
  const auto total = static_cast<std::size_t>(count) * static_cast<std::size_t>(d.sample_numel());
  d.inputs.resize(total);
  if (code == 0) {
    if (!is.read(reinterpret_cast<char*>(d.inputs.data()),
                 static_cast<std::streamsize>(total * sizeof(float))))
      throw DatasetError("dataset: truncated payload");
  } else {
    std::vector<double> wide(total);
    if (!is.read(reinterpret_cast<char*>(wide.data()),
                 static_cast<std::streamsize>(total * sizeof(double))))
      throw DatasetError("dataset: truncated payload");
    std::transform(wide.begin(), wide.end(), d.inputs.begin(),
                   [](double v) { return static_cast<float>(v); });
  }
  d.labels.resize(static_cast<std::size_t>(count));
  if (!is.read(reinterpret_cast<char*>(d.labels.data()),
               static_cast<std::streamsize>(count * sizeof(std::int32_t))))
    throw DatasetError("dataset: truncated labels");
  d.validate();
  return d;
}

BatchSampler::BatchSampler(std::int64_t dataset_size, std::int64_t batch_size, std::uint64_t seed)
    : batch_size_(batch_size), rng_(seed), order_(static_cast<std::size_t>(dataset_size)) {
  if (dataset_size <= 0) throw std::invalid_argument("batch sampler: empty dataset");
  if (batch_size <= 0) throw std::invalid_argument("batch sampler: batch size must be positive");
  reshuffle();
}

void BatchSampler::reshuffle() {
  std::iota(order_.begin(), order_.end(), 0);
  std::shuffle(order_.begin(), order_.end(), rng_);
  cursor_ = 0;
}

std::vector<std::int64_t> BatchSampler::next() {
  std::vector<std::int64_t> batch;
  batch.reserve(static_cast<std::size_t>(batch_size_));
  while (static_cast<std::int64_t>(batch.size()) < batch_size_) {
    if (cursor_ == order_.size()) reshuffle();
    batch.push_back(order_[cursor_++]);
  }
  return batch;
}

double logistic_probe_accuracy(const Dataset& train, const Dataset* eval,
                               const ProbeOptions& options) {
  train.validate();
  const auto n = train.size(), f = train.sample_numel(), k = train.num_classes;
  if (n == 0) throw std::invalid_argument("logistic probe: empty training set");
  std::vector<double> w(static_cast<std::size_t>((f + 1) * k), 0.0);
  std::vector<double> grad(w.size()), logits(static_cast<std::size_t>(k));

  auto scores = [&](const float* x) {
    for (std::int64_t c = 0; c < k; ++c) logits[c] = w[f * k + c];
    for (std::int64_t i = 0; i < f; ++i) {
      const double xi = x[i];
      const double* row = w.data() + i * k;
      for (std::int64_t c = 0; c < k; ++c) logits[c] += xi * row[c];
    }
  };

  for (std::int64_t epoch = 0; epoch < options.epochs; ++epoch) {
    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::int64_t s = 0; s < n; ++s) {
      const float* x = train.inputs.data() + s * f;
      scores(x);
      const double top = *std::max_element(logits.begin(), logits.end());
      double z = 0.0;
      for (auto& v : logits) z += (v = std::exp(v - top));
      for (std::int64_t c = 0; c < k; ++c)
        logits[c] = logits[c] / z - (c == train.labels[s] ? 1.0 : 0.0);
      for (std::int64_t i = 0; i < f; ++i) {
        double* row = grad.data() + i * k;
        for (std::int64_t c = 0; c < k; ++c) row[c] += x[i] * logits[c];
      }
      for (std::int64_t c = 0; c < k; ++c) grad[f * k + c] += logits[c];
    }
    for (std::size_t i = 0; i < w.size(); ++i)
      w[i] -= options.lr * (grad[i] / static_cast<double>(n) + options.l2 * w[i]);
  }

  const Dataset& target = eval ? *eval : train;
  if (target.size() == 0) return 0.0;
  std::int64_t correct = 0;
  for (std::int64_t s = 0; s < target.size(); ++s) {
    scores(target.inputs.data() + s * f);
    const auto best = std::max_element(logits.begin(), logits.end()) - logits.begin();
    correct += best == target.labels[s];
  }
  return static_cast<double>(correct) / static_cast<double>(target.size());
}

template Tensor<float> Dataset::batch_inputs(std::span<const std::int64_t>) const;
template Tensor<double> Dataset::batch_inputs(std::span<const std::int64_t>) const;

}  // namespace morph
