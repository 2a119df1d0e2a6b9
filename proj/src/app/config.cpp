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

#include "morphmlp/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace morph {

namespace {

namespace pt = boost::property_tree;

const std::set<std::string> kModelKeys = {
    "variant", "input", "num_classes", "in_channels", "mlp_ratio", "patch_size",
    "tubelet", "gate", "channel_bias", "pathways", "group_rule", "stoch_depth",
    "wiring", "temporal", "temporal_group_width", "depths", "channels", "chunk_lens",
    "group_widths"};
const std::set<std::string> kTrainKeys = {
    "steps", "batch_size", "lr", "warmup", "min_lr", "weight_decay", "beta1", "beta2",
    "label_smoothing", "seed", "log_every", "dtype"};
const std::set<std::string> kDataKeys = {
    "kind", "path", "eval_path", "train_size", "eval_size", "seed", "eval_seed",
    "noise", "amplitude", "classes", "chunk_len", "shuffle_frames"};

class Reader {
 public:
  Reader(const pt::ptree& section, std::string name, std::string origin)
      : section_(section), name_(std::move(name)), origin_(std::move(origin)) {}

  bool has(const std::string& key) const { return section_.count(key) > 0; }

  std::string str(const std::string& key) const { return section_.get<std::string>(key); }

  template <typename U>
  U get(const std::string& key) const {
    const auto text = str(key);
    std::istringstream is(text);
    is.imbue(std::locale::classic());
    U value{};
    if (!(is >> value) || !(is >> std::ws).eof()) fail(key, "cannot parse '" + text + "'");
    return value;
  }

  bool flag(const std::string& key) const {
    const auto text = str(key);
    if (text == "true" || text == "1" || text == "on" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "off" || text == "no") return false;
    fail(key, "expected true or false, got '" + text + "'");
    return false;
  }

  std::vector<std::int64_t> list(const std::string& key) const {
    std::vector<std::int64_t> out;
    std::istringstream is(str(key));
    is.imbue(std::locale::classic());
    std::string item;
    while (std::getline(is, item, ',')) {
      std::istringstream one(item);
      std::int64_t v = 0;
      if (!(one >> v) || !(one >> std::ws).eof()) fail(key, "bad list item '" + item + "'");
      out.push_back(v);
    }
    if (out.empty()) fail(key, "empty list");
    return out;
  }

  [[noreturn]] void fail(const std::string& key, const std::string& why) const {
    throw ConfigError(origin_ + ": [" + name_ + "] " + key + ": " + why);
  }

 private:
  const pt::ptree& section_;
  std::string name_;
  std::string origin_;
};

void apply_model(const Reader& r, ModelConfig& m) {
  if (r.has("variant")) {
    const auto v = r.str("variant");
    if (v == "custom") {
      m.variant = "custom";
    } else {
      try {
        m = ModelConfig::published(v);
      } catch (const std::exception& e) {
        r.fail("variant", e.what());
      }
    }
  }
  try {
    if (r.has("input")) m.input = InputShape::parse(r.str("input"));
    if (r.has("pathways")) m.pathways = parse_pathways(r.str("pathways"));
    if (r.has("group_rule")) m.group_rule = parse_group_rule(r.str("group_rule"));
    if (r.has("wiring")) m.wiring = parse_video_wiring(r.str("wiring"));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("[model]: ") + e.what());
  }
  if (r.has("num_classes")) m.num_classes = r.get<std::int64_t>("num_classes");
  if (r.has("in_channels")) m.in_channels = r.get<std::int64_t>("in_channels");
  if (r.has("mlp_ratio")) m.mlp_ratio = r.get<std::int64_t>("mlp_ratio");
  if (r.has("patch_size")) m.patch_size = r.get<std::int64_t>("patch_size");
  if (r.has("tubelet")) m.tubelet = r.get<std::int64_t>("tubelet");
  if (r.has("gate")) m.gate = r.flag("gate");
  if (r.has("channel_bias")) m.channel_bias = r.flag("channel_bias");
  if (r.has("stoch_depth")) m.stoch_depth_max = r.get<double>("stoch_depth");
  if (r.has("temporal")) m.temporal_enabled = r.flag("temporal");
  if (r.has("temporal_group_width"))
    m.temporal_group_width = r.get<std::int64_t>("temporal_group_width");

  // Per-stage lists. Any list resizes the stage vector; a one-element list
  // broadcasts over the stages named by the others.
  std::vector<std::int64_t> depths, channels, chunks, widths;
  if (r.has("depths")) depths = r.list("depths");
  if (r.has("channels")) channels = r.list("channels");
  if (r.has("chunk_lens")) chunks = r.list("chunk_lens");
  if (r.has("group_widths")) widths = r.list("group_widths");
  std::size_t n = m.stages.size();
  for (const auto* l : {&depths, &channels, &chunks, &widths}) n = std::max(n, l->size());
  auto pick = [&](const std::vector<std::int64_t>& l, const char* key, std::size_t j,
                  std::int64_t fallback) {
    if (l.empty()) return fallback;
    if (l.size() == 1) return l[0];
    if (l.size() != n) r.fail(key, "expected " + std::to_string(n) + " entries");
    return l[j];
  };
  m.stages.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    auto& s = m.stages[j];
    s.depth = pick(depths, "depths", j, s.depth);
    s.channels = pick(channels, "channels", j, s.channels);
    s.chunk_len = pick(chunks, "chunk_lens", j, s.chunk_len);
    s.group_width = pick(widths, "group_widths", j, s.group_width);
  }
}

void apply_train(const Reader& r, RunConfig& c) {
  auto& t = c.train;
  if (r.has("steps")) t.steps = r.get<std::int64_t>("steps");
  if (r.has("batch_size")) t.batch_size = r.get<std::int64_t>("batch_size");
  if (r.has("lr")) t.schedule.base_lr = r.get<double>("lr");
  if (r.has("warmup")) t.schedule.warmup_steps = r.get<std::int64_t>("warmup");
  if (r.has("min_lr")) t.schedule.floor_lr = r.get<double>("min_lr");
  if (r.has("weight_decay")) t.adamw.weight_decay = r.get<double>("weight_decay");
  if (r.has("beta1")) t.adamw.beta1 = r.get<double>("beta1");
  if (r.has("beta2")) t.adamw.beta2 = r.get<double>("beta2");
  if (r.has("label_smoothing")) t.label_smoothing = r.get<double>("label_smoothing");
  if (r.has("seed")) t.seed = r.get<std::uint64_t>("seed");
  if (r.has("log_every")) t.log_every = r.get<std::int64_t>("log_every");
  if (r.has("dtype")) {
    const auto d = r.str("dtype");
    if (d != "f32" && d != "f64") r.fail("dtype", "expected f32 or f64, got '" + d + "'");
    c.double_precision = d == "f64";
  }
}

void apply_data(const Reader& r, DataConfig& d) {
  if (r.has("kind")) {
    const auto kind = r.str("kind");
    if (kind == "file") {
      d.source = "file";
    } else {
      d.source = "synthetic";
      try {
        d.synth.kind = parse_synth_kind(kind);
      } catch (const std::exception& e) {
        r.fail("kind", e.what());
      }
    }
  }
  if (r.has("path")) d.path = r.str("path");
  if (r.has("eval_path")) d.eval_path = r.str("eval_path");
  if (r.has("train_size")) d.synth.size = r.get<std::int64_t>("train_size");
  if (r.has("eval_size")) d.eval_size = r.get<std::int64_t>("eval_size");
  if (r.has("seed")) d.synth.seed = r.get<std::uint64_t>("seed");
  if (r.has("eval_seed")) d.eval_seed = r.get<std::uint64_t>("eval_seed");
  if (r.has("noise")) d.synth.noise = r.get<double>("noise");
  if (r.has("amplitude")) d.synth.amplitude = r.get<double>("amplitude");
  if (r.has("classes")) d.synth.num_classes = r.get<std::int64_t>("classes");
  if (r.has("chunk_len")) d.synth.chunk_len = r.get<std::int64_t>("chunk_len");
  if (r.has("shuffle_frames")) d.synth.shuffle_frames = r.flag("shuffle_frames");
  if (d.source == "file" && d.path.empty()) r.fail("path", "required when kind = file");
}

void check_keys(const pt::ptree& section, const std::string& name,
                const std::set<std::string>& allowed, const std::string& origin) {
  for (const auto& [key, value] : section)
    if (!allowed.count(key))
      throw ConfigError(origin + ": unknown key '" + key + "' in [" + name + "]");
}

SynthOptions synth_for(const RunConfig& c) {
  SynthOptions o = c.data.synth;
  o.input = c.model.input;
  o.channels = c.model.in_channels;
  o.patch = c.model.patch_size;
  o.tubelet = c.model.tubelet;
  return o;
}

}  // namespace

RunConfig parse_config(std::istream& in, const std::string& origin) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(origin + ": line " + std::to_string(e.line()) + ": " + e.message());
  }
  RunConfig config;
  config.model.variant = "custom";
  for (const auto& [name, section] : tree) {
    if (section.empty() && !section.data().empty())
      throw ConfigError(origin + ": key '" + name + "' outside of a section");
    if (name == "model") {
      check_keys(section, name, kModelKeys, origin);
      apply_model(Reader(section, name, origin), config.model);
    } else if (name == "train") {
      check_keys(section, name, kTrainKeys, origin);
      apply_train(Reader(section, name, origin), config);
    } else if (name == "data") {
      check_keys(section, name, kDataKeys, origin);
      apply_data(Reader(section, name, origin), config.data);
    } else {
      throw ConfigError(origin + ": unknown section [" + name + "]");
    }
  }
  try {
    config.model.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse_config(in, path.string());
}

Dataset make_train_set(const RunConfig& c) {
  if (c.data.source == "file") return read_dataset(c.data.path);
  return make_synthetic(synth_for(c));
}

Dataset make_eval_set(const RunConfig& c) {
  if (c.data.source == "file")
    return c.data.eval_path.empty() ? read_dataset(c.data.path) : read_dataset(c.data.eval_path);
  auto o = synth_for(c);
  o.size = c.data.eval_size;
  o.seed = c.data.eval_seed;
  return make_synthetic(o);
}

}  // namespace morph
