/* Copyright 2026 The lencap Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License. */

#include "lencap/data.hpp"

#include <algorithm>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "json.hpp"

namespace lencap {

namespace {
using nlohmann::json;
}

const std::vector<std::string>& category_words() {
  static const std::vector<std::string> words = {"dog",  "cat",   "bird",    "horse", "sheep", "cow",
                                                 "car",  "truck", "bicycle", "boat",  "bench", "kite"};
  return words;
}

const std::vector<std::string>& color_words() {
  static const std::vector<std::string> words = {"red",   "blue",  "green", "yellow",
                                                 "black", "white", "brown", "orange"};
  return words;
}

const std::vector<std::string>& size_words() {
  static const std::vector<std::string> words = {"small", "big", "tiny"};
  return words;
}

const std::vector<std::vector<std::string>>& relation_phrases() {
  static const std::vector<std::vector<std::string>> phrases = {
      {"next", "to"}, {"behind"}, {"in", "front", "of"}, {"near"}, {"beside"}, {"under"}};
  return phrases;
}

const std::vector<std::string>& setting_words() {
  static const std::vector<std::string> words = {"park", "street", "beach", "field", "kitchen", "yard"};
  return words;
}

const std::vector<std::vector<std::string>>& modifier_phrases() {
  static const std::vector<std::vector<std::string>> phrases = {
      {"at", "sunset"}, {"at", "night"}, {"in", "the", "morning"}, {"on", "a", "sunny", "day"}};
  return phrases;
}

namespace {

// The word that distinguishes each relation/modifier phrase from glue.
const std::vector<std::string>& relation_heads() {
  static const std::vector<std::string> heads = {"next", "behind", "front", "near", "beside", "under"};
  return heads;
}

const std::vector<std::string>& modifier_heads() {
  static const std::vector<std::string> heads = {"sunset", "night", "morning", "sunny"};
  return heads;
}

bool starts_with_vowel(const std::string& w) {
  if (w.empty()) return false;
  const char c = w[0];
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u';
}

// Optional attribute units in the fixed order captions disclose them.
// Including a prefix of this list yields a grammatical caption; longer
// prefixes strictly extend the mentioned-attribute set.
struct Unit {
  enum Kind { obj_rel, color, size, modifier } kind;
  int obj;   // object index for obj_rel/color/size
  int cost;  // token cost
};

int relation_cost(int rel) { return static_cast<int>(relation_phrases()[static_cast<size_t>(rel)].size()); }

std::vector<Unit> build_units(const Scene& s) {
  const int n = static_cast<int>(s.objects.size());
  std::vector<Unit> units;
  auto add_obj_rel = [&](int k) {
    if (k < n) units.push_back({Unit::obj_rel, k, relation_cost(s.relations[static_cast<size_t>(k - 1)]) + 2});
  };
  auto add_color = [&](int k) {
    if (k < n && s.objects[static_cast<size_t>(k)].color >= 0) units.push_back({Unit::color, k, 1});
  };
  auto add_size = [&](int k) {
    if (k < n && s.objects[static_cast<size_t>(k)].size >= 0) units.push_back({Unit::size, k, 1});
  };
  add_obj_rel(1);
  add_color(0);
  if (s.modifier >= 0)
    units.push_back({Unit::modifier, -1,
                     static_cast<int>(modifier_phrases()[static_cast<size_t>(s.modifier)].size())});
  add_obj_rel(2);
  add_color(1);
  add_size(0);
  add_size(1);
  add_color(2);
  add_size(2);
  add_obj_rel(3);
  add_color(3);
  add_size(3);
  return units;
}

// "a <category0> in the <setting>"
constexpr int kBaseCost = 5;

// Token pads that adjust length without mentioning any attribute.
struct Pad {
  enum Kind { is_after_np1, standing, very, there_is, that_is } kind;
  int idx;  // relation index for standing/that_is, object index for very
  int cost;
};

struct IncludedSet {
  int rendered_objects = 1;
  std::vector<bool> color, size;
  bool modifier = false;
};

IncludedSet make_included(const Scene& s, const std::vector<Unit>& units, int k) {
  IncludedSet inc;
  inc.color.assign(s.objects.size(), false);
  inc.size.assign(s.objects.size(), false);
  for (int u = 0; u < k; ++u) {
    const Unit& unit = units[static_cast<size_t>(u)];
    switch (unit.kind) {
      case Unit::obj_rel: inc.rendered_objects = unit.obj + 1; break;
      case Unit::color: inc.color[static_cast<size_t>(unit.obj)] = true; break;
      case Unit::size: inc.size[static_cast<size_t>(unit.obj)] = true; break;
      case Unit::modifier: inc.modifier = true; break;
    }
  }
  return inc;
}

std::vector<Pad> available_pads(const IncludedSet& inc) {
  std::vector<Pad> pads;
  pads.push_back({Pad::is_after_np1, -1, 1});
  for (int j = 0; j + 1 < inc.rendered_objects; ++j) pads.push_back({Pad::standing, j, 1});
  for (int k = 0; k < inc.rendered_objects; ++k)
    if (inc.size[static_cast<size_t>(k)]) pads.push_back({Pad::very, k, 1});
  pads.push_back({Pad::there_is, -1, 2});
  for (int j = 0; j + 1 < inc.rendered_objects; ++j) pads.push_back({Pad::that_is, j, 2});
  return pads;
}

bool pad_conflicts(const Pad& pad, const std::vector<Pad>& chosen) {
  for (const Pad& c : chosen) {
    const bool is_vs_there = (pad.kind == Pad::is_after_np1 && c.kind == Pad::there_is) ||
                             (pad.kind == Pad::there_is && c.kind == Pad::is_after_np1);
    const bool is_vs_that0 = (pad.kind == Pad::is_after_np1 && c.kind == Pad::that_is && c.idx == 0) ||
                             (pad.kind == Pad::that_is && pad.idx == 0 && c.kind == Pad::is_after_np1);
    if (is_vs_there || is_vs_that0) return true;
  }
  return false;
}

bool cover_pads(const std::vector<Pad>& pads, size_t from, int rem, std::vector<Pad>& chosen) {
  if (rem == 0) return true;
  for (size_t i = from; i < pads.size(); ++i) {
    const Pad& pad = pads[i];
    if (pad.cost > rem) continue;
    if (pad_conflicts(pad, chosen)) continue;
    chosen.push_back(pad);
    if (cover_pads(pads, i + 1, rem - pad.cost, chosen)) return true;
    chosen.pop_back();
  }
  return false;
}

std::optional<std::vector<Pad>> pads_exact(int need, const IncludedSet& inc) {
  std::vector<Pad> chosen;
  if (need == 0) return chosen;
  if (!cover_pads(available_pads(inc), 0, need, chosen)) return std::nullopt;
  return chosen;
}

bool has_pad(const std::vector<Pad>& pads, Pad::Kind kind, int idx = -1) {
  for (const Pad& p : pads)
    if (p.kind == kind && p.idx == idx) return true;
  return false;
}

std::vector<std::string> assemble(const Scene& s, const IncludedSet& inc, const std::vector<Pad>& pads) {
  std::vector<std::string> out;
  auto np = [&](int k) {
    std::vector<std::string> words;
    if (has_pad(pads, Pad::very, k)) words.push_back("very");
    if (inc.size[static_cast<size_t>(k)])
      words.push_back(size_words()[static_cast<size_t>(s.objects[static_cast<size_t>(k)].size)]);
    if (inc.color[static_cast<size_t>(k)])
      words.push_back(color_words()[static_cast<size_t>(s.objects[static_cast<size_t>(k)].color)]);
    words.push_back(category_words()[static_cast<size_t>(s.objects[static_cast<size_t>(k)].category)]);
    out.push_back(starts_with_vowel(words.front()) ? "an" : "a");
    out.insert(out.end(), words.begin(), words.end());
  };

  if (has_pad(pads, Pad::there_is)) {
    out.push_back("there");
    out.push_back("is");
  }
  np(0);
  if (has_pad(pads, Pad::is_after_np1)) out.push_back("is");
  for (int k = 1; k < inc.rendered_objects; ++k) {
    const int j = k - 1;
    if (has_pad(pads, Pad::that_is, j)) {
      out.push_back("that");
      out.push_back("is");
    }
    if (has_pad(pads, Pad::standing, j)) out.push_back("standing");
    const auto& rel = relation_phrases()[static_cast<size_t>(s.relations[static_cast<size_t>(j)])];
    out.insert(out.end(), rel.begin(), rel.end());
    np(k);
  }
  out.push_back("in");
  out.push_back("the");
  out.push_back(setting_words()[static_cast<size_t>(s.setting)]);
  if (inc.modifier) {
    const auto& mod = modifier_phrases()[static_cast<size_t>(s.modifier)];
    out.insert(out.end(), mod.begin(), mod.end());
  }
  return out;
}

struct RenderedRef {
  std::vector<std::string> tokens;
  int units_included = 0;
};

std::optional<RenderedRef> render_band(const Scene& s, const std::vector<Unit>& units,
                                       const std::vector<int>& prefix_cost, int target, int k_min) {
  const int n_units = static_cast<int>(units.size());
  int kg = 0;
  while (kg < n_units && kBaseCost + prefix_cost[static_cast<size_t>(kg + 1)] <= target + 1) ++kg;
  // hitting the target exactly wins over including one more attribute unit
  for (const int want : {target, target + 1, target - 1}) {
    if (want < 5) continue;
    for (const int k : {kg, kg - 1, kg + 1}) {
      if (k < k_min || k < 0 || k > n_units) continue;
      const int len = kBaseCost + prefix_cost[static_cast<size_t>(k)];
      if (len > want) continue;
      IncludedSet inc = make_included(s, units, k);
      auto pads = pads_exact(want - len, inc);
      if (!pads) continue;
      RenderedRef ref;
      ref.tokens = assemble(s, inc, *pads);
      ref.units_included = k;
      if (static_cast<int>(ref.tokens.size()) != want)
        throw std::logic_error("render_band: assembled length mismatch");
      return ref;
    }
  }
  return std::nullopt;
}

std::optional<std::vector<RenderedRef>> render_all(const Scene& s, std::vector<int> targets) {
  s.validate();
  std::sort(targets.begin(), targets.end());
  const std::vector<Unit> units = build_units(s);
  std::vector<int> prefix_cost(units.size() + 1, 0);
  for (size_t u = 0; u < units.size(); ++u) prefix_cost[u + 1] = prefix_cost[u] + units[u].cost;

  std::vector<RenderedRef> refs;
  int prev_k = -1;
  for (int target : targets) {
    auto ref = render_band(s, units, prefix_cost, target, prev_k + 1);
    if (!ref) return std::nullopt;
    prev_k = ref->units_included;
    refs.push_back(std::move(*ref));
  }
  return refs;
}

int full_length(const Scene& s) {
  int len = kBaseCost;
  for (const Unit& u : build_units(s)) len += u.cost;
  return len;
}

Scene draw_scene(Rng& rng) {
  Scene s;
  const int n = rng.uniform_int(1, 4);
  std::vector<int> cats(category_words().size());
  for (size_t i = 0; i < cats.size(); ++i) cats[i] = static_cast<int>(i);
  rng.shuffle(cats);
  for (int k = 0; k < n; ++k) {
    SceneObject obj;
    obj.category = cats[static_cast<size_t>(k)];
    if (rng.uniform() < 0.8) obj.color = rng.uniform_int(0, static_cast<int>(color_words().size()) - 1);
    if (rng.uniform() < 0.5) obj.size = rng.uniform_int(0, static_cast<int>(size_words().size()) - 1);
    s.objects.push_back(obj);
  }
  for (int j = 0; j + 1 < n; ++j)
    s.relations.push_back(rng.uniform_int(0, static_cast<int>(relation_phrases().size()) - 1));
  s.setting = rng.uniform_int(0, static_cast<int>(setting_words().size()) - 1);
  if (rng.uniform() < 0.8) s.modifier = rng.uniform_int(0, static_cast<int>(modifier_phrases().size()) - 1);
  return s;
}

// Fills in absent attributes (colors, then sizes, then the modifier) until
// the fully verbose caption is long enough for the longest target band.
void enrich_scene(Scene& s, Rng& rng) {
  constexpr int kMinFull = 24;
  while (full_length(s) < kMinFull) {
    bool added = false;
    for (auto& obj : s.objects) {
      if (obj.color < 0) {
        obj.color = rng.uniform_int(0, static_cast<int>(color_words().size()) - 1);
        added = true;
        break;
      }
    }
    if (!added) {
      for (auto& obj : s.objects) {
        if (obj.size < 0) {
          obj.size = rng.uniform_int(0, static_cast<int>(size_words().size()) - 1);
          added = true;
          break;
        }
      }
    }
    if (!added && s.modifier < 0) {
      s.modifier = rng.uniform_int(0, static_cast<int>(modifier_phrases().size()) - 1);
      added = true;
    }
    if (!added) break;
  }
}

json scene_to_json(const Scene& s) {
  json objs = json::array();
  for (const auto& obj : s.objects) {
    json o;
    o["category"] = category_words()[static_cast<size_t>(obj.category)];
    o["color"] = obj.color >= 0 ? json(color_words()[static_cast<size_t>(obj.color)]) : json(nullptr);
    o["size"] = obj.size >= 0 ? json(size_words()[static_cast<size_t>(obj.size)]) : json(nullptr);
    objs.push_back(o);
  }
  json rels = json::array();
  for (int r : s.relations) {
    std::string joined;
    for (const auto& w : relation_phrases()[static_cast<size_t>(r)]) {
      if (!joined.empty()) joined += ' ';
      joined += w;
    }
    rels.push_back(joined);
  }
  json out;
  out["objects"] = objs;
  out["relations"] = rels;
  out["setting"] = setting_words()[static_cast<size_t>(s.setting)];
  out["modifier"] =
      s.modifier >= 0 ? json([&] {
        std::string joined;
        for (const auto& w : modifier_phrases()[static_cast<size_t>(s.modifier)]) {
          if (!joined.empty()) joined += ' ';
          joined += w;
        }
        return joined;
      }())
                      : json(nullptr);
  return out;
}

int index_of(const std::vector<std::string>& words, const std::string& w, const char* what) {
  for (size_t i = 0; i < words.size(); ++i)
    if (words[i] == w) return static_cast<int>(i);
  throw std::runtime_error(std::string("corpus: unknown ") + what + " '" + w + "'");
}

int index_of_phrase(const std::vector<std::vector<std::string>>& phrases, const std::string& joined,
                    const char* what) {
  for (size_t i = 0; i < phrases.size(); ++i) {
    std::string j;
    for (const auto& w : phrases[i]) {
      if (!j.empty()) j += ' ';
      j += w;
    }
    if (j == joined) return static_cast<int>(i);
  }
  throw std::runtime_error(std::string("corpus: unknown ") + what + " '" + joined + "'");
}

Scene scene_from_json(const json& j) {
  Scene s;
  for (const auto& o : j.at("objects")) {
    SceneObject obj;
    obj.category = index_of(category_words(), o.at("category").get<std::string>(), "category");
    if (!o.at("color").is_null()) obj.color = index_of(color_words(), o.at("color").get<std::string>(), "color");
    if (!o.at("size").is_null()) obj.size = index_of(size_words(), o.at("size").get<std::string>(), "size");
    s.objects.push_back(obj);
  }
  for (const auto& r : j.at("relations"))
    s.relations.push_back(index_of_phrase(relation_phrases(), r.get<std::string>(), "relation"));
  s.setting = index_of(setting_words(), j.at("setting").get<std::string>(), "setting");
  if (!j.at("modifier").is_null())
    s.modifier = index_of_phrase(modifier_phrases(), j.at("modifier").get<std::string>(), "modifier");
  s.validate();
  return s;
}

}  // namespace

void Scene::validate() const {
  if (objects.empty() || objects.size() > 4) throw std::invalid_argument("Scene: need 1..4 objects");
  if (relations.size() != objects.size() - 1)
    throw std::invalid_argument("Scene: relations count must be objects-1");
  for (const auto& obj : objects) {
    if (obj.category < 0 || obj.category >= static_cast<int>(category_words().size()))
      throw std::invalid_argument("Scene: category out of range");
    if (obj.color < -1 || obj.color >= static_cast<int>(color_words().size()))
      throw std::invalid_argument("Scene: color out of range");
    if (obj.size < -1 || obj.size >= static_cast<int>(size_words().size()))
      throw std::invalid_argument("Scene: size out of range");
  }
  for (int r : relations)
    if (r < 0 || r >= static_cast<int>(relation_phrases().size()))
      throw std::invalid_argument("Scene: relation out of range");
  if (setting < 0 || setting >= static_cast<int>(setting_words().size()))
    throw std::invalid_argument("Scene: setting out of range");
  if (modifier < -1 || modifier >= static_cast<int>(modifier_phrases().size()))
    throw std::invalid_argument("Scene: modifier out of range");
}

std::string scene_signature(const Scene& scene) {
  std::ostringstream out;
  for (const auto& obj : scene.objects) out << 'o' << obj.category << 'c' << obj.color << 's' << obj.size << '|';
  out << 'r';
  for (int r : scene.relations) out << r << ',';
  out << "|g" << scene.setting << "|m" << scene.modifier;
  return out.str();
}

std::vector<const CaptionedImage*> Corpus::split_images(const std::string& split) const {
  std::vector<const CaptionedImage*> out;
  for (const auto& img : images)
    if (img.split == split) out.push_back(&img);
  return out;
}

std::vector<std::vector<std::string>> render_references(const Scene& scene,
                                                        const std::vector<int>& targets) {
  auto refs = render_all(scene, targets);
  if (!refs)
    throw std::runtime_error("render_references: scene cannot reach target lengths " +
                             scene_signature(scene));
  std::vector<std::vector<std::string>> out;
  out.reserve(refs->size());
  for (auto& r : *refs) out.push_back(std::move(r.tokens));
  return out;
}

int count_attribute_mentions(const Scene& scene, const std::vector<std::string>& ref) {
  std::vector<std::string> attr_words;
  for (const auto& obj : scene.objects) {
    attr_words.push_back(category_words()[static_cast<size_t>(obj.category)]);
    if (obj.color >= 0) attr_words.push_back(color_words()[static_cast<size_t>(obj.color)]);
    if (obj.size >= 0) attr_words.push_back(size_words()[static_cast<size_t>(obj.size)]);
  }
  for (int r : scene.relations) attr_words.push_back(relation_heads()[static_cast<size_t>(r)]);
  attr_words.push_back(setting_words()[static_cast<size_t>(scene.setting)]);
  if (scene.modifier >= 0) attr_words.push_back(modifier_heads()[static_cast<size_t>(scene.modifier)]);

  // Count each token occurrence that matches a scene attribute word, with
  // multiplicity capped by how often the word occurs among the attributes.
  int count = 0;
  std::vector<std::string> pool = attr_words;
  for (const auto& tok : ref) {
    auto it = std::find(pool.begin(), pool.end(), tok);
    if (it != pool.end()) {
      pool.erase(it);
      ++count;
    }
  }
  return count;
}

int total_attribute_count(const Scene& scene) {
  int count = static_cast<int>(scene.objects.size());  // categories
  for (const auto& obj : scene.objects) {
    if (obj.color >= 0) ++count;
    if (obj.size >= 0) ++count;
  }
  count += static_cast<int>(scene.relations.size());
  count += 1;  // setting
  if (scene.modifier >= 0) ++count;
  return count;
}

int multi_hot_dim() {
  return static_cast<int>(category_words().size() + color_words().size() + size_words().size() +
                          relation_phrases().size() + setting_words().size() + modifier_phrases().size()) +
         4;  // object-count one-hot
}

Tensor1 scene_multi_hot(const Scene& scene) {
  Tensor1 mh(multi_hot_dim());
  int off = 0;
  for (const auto& obj : scene.objects) mh[off + obj.category] = 1.0;
  off += static_cast<int>(category_words().size());
  for (const auto& obj : scene.objects)
    if (obj.color >= 0) mh[off + obj.color] = 1.0;
  off += static_cast<int>(color_words().size());
  for (const auto& obj : scene.objects)
    if (obj.size >= 0) mh[off + obj.size] = 1.0;
  off += static_cast<int>(size_words().size());
  for (int r : scene.relations) mh[off + r] = 1.0;
  off += static_cast<int>(relation_phrases().size());
  mh[off + scene.setting] = 1.0;
  off += static_cast<int>(setting_words().size());
  if (scene.modifier >= 0) mh[off + scene.modifier] = 1.0;
  off += static_cast<int>(modifier_phrases().size());
  mh[off + static_cast<int>(scene.objects.size()) - 1] = 1.0;
  return mh;
}

Tensor2 make_feature_projection(uint64_t seed) {
  const int a = multi_hot_dim();
  Tensor2 proj(kFeatureDim, a);
  Rng rng(Rng::mix(seed, 0x70726f6aULL));
  // per-attribute signal well above the additive noise floor, so scene
  // content is recoverable from features while prediction stays non-trivial
  const double scale = 3.0 / std::sqrt(static_cast<double>(a));
  for (double& x : proj.v) x = rng.normal(0.0, scale);
  return proj;
}

Tensor1 scene_to_features(const Scene& scene, const Tensor2& projection, double noise_sigma,
                          Rng& noise_rng) {
  const Tensor1 mh = scene_multi_hot(scene);
  if (projection.cols != mh.size()) throw std::invalid_argument("scene_to_features: projection shape");
  Tensor1 f(projection.rows);
  for (int r = 0; r < projection.rows; ++r) {
    double s = 0.0;
    const double* row = projection.row(r);
    for (int c = 0; c < projection.cols; ++c) s += row[c] * mh[c];
    f[r] = s + noise_rng.normal(0.0, noise_sigma);
  }
  return f;
}

Corpus gen_corpus(int n_train, int n_val, int n_test, uint64_t seed) {
  if (n_train < 1 || n_val < 1 || n_test < 1)
    throw std::invalid_argument("gen_corpus: split sizes must be >= 1");
  const int total = n_train + n_val + n_test;
  const Tensor2 proj = make_feature_projection(seed);

  Corpus corpus;
  corpus.images.reserve(static_cast<size_t>(total));
  std::unordered_set<std::string> used;

  for (int id = 0; id < total; ++id) {
    bool accepted = false;
    for (int attempt = 0; attempt < 500 && !accepted; ++attempt) {
      Rng rng(Rng::mix(seed, static_cast<uint64_t>(id), static_cast<uint64_t>(attempt)));
      Scene scene = draw_scene(rng);
      enrich_scene(scene, rng);
      const int full = full_length(scene);
      if (full < 24 || full > 29) continue;
      if (build_units(scene).size() < 5) continue;
      const std::string sig = scene_signature(scene);
      if (used.count(sig)) continue;
      auto refs = render_all(scene, kTargetLengths);
      if (!refs) continue;
      if (refs->back().units_included != static_cast<int>(build_units(scene).size())) continue;

      CaptionedImage img;
      img.id = id;
      img.split = id < n_train ? "train" : (id < n_train + n_val ? "val" : "test");
      img.scene = scene;
      for (auto& r : *refs) img.refs.push_back(std::move(r.tokens));
      Rng noise(Rng::mix(seed, static_cast<uint64_t>(id), 0x6e6f6973ULL));
      img.features = scene_to_features(scene, proj, kFeatureNoiseSigma, noise);
      corpus.images.push_back(std::move(img));
      used.insert(sig);
      accepted = true;
    }
    if (!accepted) throw std::runtime_error("gen_corpus: exhausted scene attempts for image " + std::to_string(id));
  }
  return corpus;
}

Vocab build_vocab(const Corpus& corpus, int marker_max_len) {
  if (corpus.images.empty()) throw std::invalid_argument("build_vocab: empty corpus");
  std::set<std::string> tokens;
  for (const auto& img : corpus.images)
    for (const auto& ref : img.refs) tokens.insert(ref.begin(), ref.end());
  return Vocab::build(std::vector<std::string>(tokens.begin(), tokens.end()), marker_max_len);
}

void save_corpus_jsonl(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_corpus_jsonl: cannot write " + path);
  for (const auto& img : corpus.images) {
    json line;
    line["id"] = img.id;
    line["split"] = img.split;
    line["features"] = img.features.v;
    line["refs"] = img.refs;
    line["scene"] = scene_to_json(img.scene);
    out << line.dump() << '\n';
  }
}

Corpus load_corpus_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_corpus_jsonl: cannot read " + path);
  Corpus corpus;
  std::string line;
  int lineno = 0;
  int feature_dim = -1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw std::runtime_error("load_corpus_jsonl: bad JSON at line " + std::to_string(lineno) + ": " +
                               e.what());
    }
    CaptionedImage img;
    img.id = j.at("id").get<int>();
    img.split = j.at("split").get<std::string>();
    if (img.split != "train" && img.split != "val" && img.split != "test")
      throw std::runtime_error("load_corpus_jsonl: bad split at line " + std::to_string(lineno));
    img.features.v = j.at("features").get<std::vector<double>>();
    if (feature_dim < 0) feature_dim = img.features.size();
    if (img.features.size() != feature_dim)
      throw std::runtime_error("load_corpus_jsonl: inconsistent feature dims");
    img.refs = j.at("refs").get<std::vector<std::vector<std::string>>>();
    if (img.refs.empty()) throw std::runtime_error("load_corpus_jsonl: image without references");
    img.scene = scene_from_json(j.at("scene"));
    corpus.images.push_back(std::move(img));
  }
  if (corpus.images.empty()) throw std::runtime_error("load_corpus_jsonl: empty corpus " + path);
  return corpus;
}

}  // namespace lencap
