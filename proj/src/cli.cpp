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

#include "lencap/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "lencap/checkpoint.hpp"
#include "lencap/data.hpp"
#include "lencap/decode.hpp"
#include "lencap/metrics.hpp"
#include "lencap/train.hpp"

namespace lencap {
namespace cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// checkpoint/corpus/flag combinations that cannot work together -> exit 4
struct IncompatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt(double x, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, x);
  return buf;
}

std::vector<int> parse_int_list(const std::string& text, const char* what) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw std::invalid_argument(std::string(what) + ": cannot parse '" + item + "'");
    }
  }
  if (out.empty()) throw std::invalid_argument(std::string(what) + ": empty list");
  return out;
}

std::string corpus_file(const std::string& data_path) {
  if (fs::is_directory(data_path)) return (fs::path(data_path) / "corpus.jsonl").string();
  return data_path;
}

struct CandidateLine {
  int id = 0;
  std::vector<std::string> words;
  int desired_length = -1;  // -1 = absent
  int chosen_length = -1;
  double logprob = 0.0;
};

std::vector<CandidateLine> read_candidates(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read candidates file " + path);
  std::vector<CandidateLine> lines;
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    if (raw.empty()) continue;
    json j;
    try {
      j = json::parse(raw);
    } catch (const json::exception& e) {
      throw std::runtime_error(path + ": bad JSON at line " + std::to_string(lineno) + ": " + e.what());
    }
    CandidateLine line;
    line.id = j.at("id").get<int>();
    line.words = j.at("caption").get<std::vector<std::string>>();
    if (j.contains("desired_length") && !j.at("desired_length").is_null())
      line.desired_length = j.at("desired_length").get<int>();
    if (j.contains("chosen_length") && !j.at("chosen_length").is_null())
      line.chosen_length = j.at("chosen_length").get<int>();
    if (j.contains("logprob")) line.logprob = j.at("logprob").get<double>();
    lines.push_back(std::move(line));
  }
  if (lines.empty()) throw std::runtime_error(path + ": no candidates");
  return lines;
}

Vocab checkpoint_compatible_vocab(const LoadedCheckpoint& ckpt, const Corpus& corpus) {
  const int markers = ckpt.model.config().variant == Variant::marker ? ckpt.model.config().max_length : 0;
  Vocab rebuilt = build_vocab(corpus, markers);
  if (rebuilt.hash() != ckpt.vocab.hash())
    throw IncompatError("checkpoint vocabulary does not match this corpus (hash mismatch)");
  return rebuilt;
}

// ---- gen-data ----------------------------------------------------------

struct GenDataArgs {
  std::string out;
  uint64_t seed = 1234;
  std::string sizes = "2000,250,250";
  bool force = false;
};

int cmd_gen_data(const GenDataArgs& a) {
  const std::vector<int> sizes = parse_int_list(a.sizes, "--sizes");
  if (sizes.size() != 3) throw std::invalid_argument("--sizes: expected train,val,test");
  fs::create_directories(a.out);
  const fs::path corpus_path = fs::path(a.out) / "corpus.jsonl";
  const fs::path vocab_path = fs::path(a.out) / "vocab.txt";
  if (fs::exists(corpus_path) && !a.force)
    throw std::runtime_error(corpus_path.string() + " exists (use --force to overwrite)");

  const Corpus corpus = gen_corpus(sizes[0], sizes[1], sizes[2], a.seed);
  save_corpus_jsonl(corpus, corpus_path.string());
  const Vocab vocab = build_vocab(corpus, 0);
  vocab.save(vocab_path.string());
  std::cout << "wrote " << corpus_path.string() << " (" << corpus.images.size() << " images) and "
            << vocab_path.string() << " (" << vocab.size() << " tokens)\n";
  return 0;
}

// ---- train -------------------------------------------------------------

struct TrainArgs {
  std::string data;
  std::string model = "base";
  std::string out;
  std::string log;
  uint64_t seed = 42;
  int epochs = 12;
  int batch = 32;
  double lr = 1e-3;
  int embed_dim = 64;
  int hidden_dim = 128;
  int max_length = 30;
};

int cmd_train(const TrainArgs& a) {
  const Corpus corpus = load_corpus_jsonl(corpus_file(a.data));
  const Variant variant = variant_from_name(a.model);
  const Vocab vocab = build_vocab(corpus, variant == Variant::marker ? a.max_length : 0);

  ModelConfig config;
  config.variant = variant;
  config.vocab_size = vocab.size();
  config.embed_dim = a.embed_dim;
  config.hidden_dim = a.hidden_dim;
  config.feature_dim = corpus.images.front().features.size();
  config.max_length = a.max_length;

  TrainOpts opts;
  opts.epochs = a.epochs;
  opts.batch_size = a.batch;
  opts.adam.lr = a.lr;
  opts.seed = a.seed;

  TrainResult result = train(corpus, vocab, config, opts);
  for (const EpochLog& row : result.log)
    std::cout << "epoch " << row.epoch << " train " << fmt(row.train_loss, 6) << " val "
              << fmt(row.val_loss, 6) << "\n";

  CheckpointMeta meta{a.seed, a.epochs, result.best_val_loss, result.best_epoch};
  save_checkpoint(a.out, result.model, vocab, meta);

  const std::string log_path = a.log.empty() ? a.out + ".log.csv" : a.log;
  std::ofstream log(log_path, std::ios::binary);
  if (!log) throw std::runtime_error("cannot write " + log_path);
  log << "epoch,train_loss,val_loss\n";
  for (const EpochLog& row : result.log)
    log << row.epoch << ',' << fmt(row.train_loss, 6) << ',' << fmt(row.val_loss, 6) << '\n';

  std::cout << "saved checkpoint " << a.out << " (best epoch " << result.best_epoch << ", val "
            << fmt(result.best_val_loss, 6) << ") and " << log_path << "\n";
  return 0;
}

// ---- caption -----------------------------------------------------------

struct CaptionArgs {
  std::string ckpt;
  std::string data;
  std::string split = "test";
  std::string out;
  int length = 0;  // 0 = absent
  bool predict_length = false;
  bool fixlen = false;
  int beam = 5;
};

DecodeResult decode_one(const CaptionModel& model, const Tensor1& features, const CaptionArgs& a) {
  DecodeOpts opts;
  opts.beam_size = a.beam;
  if (a.predict_length) return generate_with_predicted_length(model, features, opts);
  if (a.length > 0) {
    opts.hard_constrain = a.fixlen;
    return generate_with_length(model, features, a.length, opts);
  }
  // no length flag: base decodes freely, marker picks its own marker
  if (model.config().variant == Variant::marker)
    return generate_with_predicted_length(model, features, opts);
  opts.mode = DecodeMode::free_run;
  const std::vector<Hypothesis> hyps = beam_search(model, features, opts);
  DecodeResult res;
  res.caption = content_tokens(hyps.front().tokens, model);
  res.logprob = hyps.front().logprob;
  res.finished = hyps.front().finished;
  return res;
}

int cmd_caption(const CaptionArgs& a) {
  if (a.length > 0 && a.predict_length)
    throw std::invalid_argument("--length and --predict-length are mutually exclusive");
  if (a.fixlen && a.length == 0) throw std::invalid_argument("--fixlen requires --length");
  if (a.fixlen && a.predict_length)
    throw std::invalid_argument("--fixlen cannot be combined with --predict-length");

  const LoadedCheckpoint ckpt = load_checkpoint(a.ckpt);
  const Corpus corpus = load_corpus_jsonl(corpus_file(a.data));
  checkpoint_compatible_vocab(ckpt, corpus);
  const Variant variant = ckpt.model.config().variant;

  if (variant == Variant::base && a.length > 0 && !a.fixlen)
    throw IncompatError("a base model cannot condition on --length; add --fixlen");
  if (variant == Variant::base && a.predict_length)
    throw IncompatError("a base model has no usable length prediction pipeline");
  if (variant == Variant::lenemb && a.length == 0 && !a.predict_length)
    throw IncompatError("a lenemb model needs --length or --predict-length");

  const auto images = corpus.split_images(a.split);
  if (images.empty()) throw std::runtime_error("split '" + a.split + "' is empty");

  std::ofstream out(a.out, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + a.out);
  for (const CaptionedImage* img : images) {
    const DecodeResult res = decode_one(ckpt.model, img->features, a);
    json line;
    line["id"] = img->id;
    line["caption"] = ckpt.vocab.decode(res.caption);
    line["desired_length"] = a.length > 0 ? json(a.length) : json(nullptr);
    line["chosen_length"] =
        (a.predict_length || (a.length == 0 && variant == Variant::marker)) && res.chosen_length > 0
            ? json(res.chosen_length)
            : json(nullptr);
    line["logprob"] = res.logprob;
    out << line.dump() << '\n';
  }
  std::cout << "wrote " << a.out << " (" << images.size() << " captions)\n";
  return 0;
}

// ---- eval --------------------------------------------------------------

struct EvalArgs {
  std::string cands;
  std::string data;
  std::string split = "test";
  std::string out = "report.json";
  std::string hist;
  std::string bad_words_file;
};

std::set<int> bad_word_ids(const Vocab& vocab, const std::string& file) {
  std::vector<std::string> words;
  if (file.empty()) {
    words = metrics::default_bad_ending_words();
  } else {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot read bad-word list " + file);
    std::string w;
    while (in >> w) words.push_back(w);
    if (words.empty()) throw std::runtime_error("bad-word list " + file + " is empty");
  }
  std::set<int> ids;
  for (const auto& w : words) {
    const int id = vocab.id(w);
    if (id != Vocab::unk_id || w == vocab.token(Vocab::unk_id)) ids.insert(id);
  }
  if (ids.empty()) ids.insert(Vocab::unk_id);
  return ids;
}

struct EvalInputs {
  std::vector<metrics::TokenSeq> candidates;
  std::vector<metrics::RefSet> refs;
  std::optional<std::vector<int>> desired;
};

EvalInputs assemble_eval_inputs(const std::vector<CandidateLine>& lines, const Corpus& corpus,
                                const std::string& split, const Vocab& vocab) {
  std::map<int, const CaptionedImage*> by_id;
  for (const CaptionedImage* img : corpus.split_images(split)) by_id[img->id] = img;
  if (by_id.empty()) throw std::runtime_error("split '" + split + "' is empty");

  std::map<int, const CandidateLine*> cand_by_id;
  for (const auto& line : lines) {
    if (!by_id.count(line.id))
      throw std::runtime_error("candidate id " + std::to_string(line.id) + " is not in split '" +
                               split + "'");
    cand_by_id[line.id] = &line;
  }
  std::vector<int> missing;
  for (const auto& [id, img] : by_id)
    if (!cand_by_id.count(id)) missing.push_back(id);
  if (!missing.empty()) {
    std::string msg = "candidates missing for ids:";
    for (int id : missing) msg += " " + std::to_string(id);
    throw std::runtime_error(msg);
  }

  EvalInputs inputs;
  bool all_desired = true;
  std::vector<int> desired;
  for (const auto& [id, img] : by_id) {
    const CandidateLine& line = *cand_by_id.at(id);
    inputs.candidates.push_back(vocab.encode(line.words));
    metrics::RefSet refs;
    for (const auto& ref : img->refs) refs.push_back(vocab.encode(ref));
    inputs.refs.push_back(std::move(refs));
    const int d = line.desired_length > 0 ? line.desired_length : line.chosen_length;
    if (d > 0)
      desired.push_back(d);
    else
      all_desired = false;
  }
  if (all_desired) inputs.desired = std::move(desired);
  return inputs;
}

int cmd_eval(const EvalArgs& a) {
  const Corpus corpus = load_corpus_jsonl(corpus_file(a.data));
  const Vocab vocab = build_vocab(corpus, 0);
  const std::vector<CandidateLine> lines = read_candidates(a.cands);
  const EvalInputs inputs = assemble_eval_inputs(lines, corpus, a.split, vocab);

  const metrics::EvalReport report =
      metrics::evaluate_all(inputs.candidates, inputs.refs, bad_word_ids(vocab, a.bad_words_file),
                            inputs.desired);

  static const std::vector<std::pair<std::string, std::string>> rows = {
      {"bleu4", "BLEU4"}, {"rougeL", "ROUGE_L"}, {"ciderD", "CIDEr-D"},
      {"mcider", "mCIDEr"}, {"ber", "BER"}, {"lenmse", "LenMSE"}};
  for (const auto& [key, label] : rows) {
    if (!report.values.count(key)) continue;
    std::cout << label << std::string(10 - label.size(), ' ') << fmt(report.values.at(key), 4) << "\n";
  }
  std::cout << "images    " << report.n_images << "\n";

  json j;
  j["metrics"] = report.values;
  j["n_images"] = report.n_images;
  std::ofstream out(a.out, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + a.out);
  out << j.dump(2) << '\n';

  const std::string hist_path = a.hist.empty() ? a.out + ".lengths.csv" : a.hist;
  std::ofstream hist(hist_path, std::ios::binary);
  if (!hist) throw std::runtime_error("cannot write " + hist_path);
  hist << "length,count\n";
  for (const auto& [len, count] : metrics::length_histogram(inputs.candidates))
    hist << len << ',' << count << '\n';
  return 0;
}

// ---- sweep -------------------------------------------------------------

struct SweepArgs {
  std::vector<std::string> ckpts;
  std::string data;
  std::string split = "test";
  std::string lengths = "7,10,16,22,28";
  std::string out;
  int beam = 5;
};

int cmd_sweep(const SweepArgs& a) {
  const std::vector<int> lengths = parse_int_list(a.lengths, "--lengths");
  const Corpus corpus = load_corpus_jsonl(corpus_file(a.data));
  const Vocab eval_vocab = build_vocab(corpus, 0);
  const auto images = corpus.split_images(a.split);
  if (images.empty()) throw std::runtime_error("split '" + a.split + "' is empty");

  std::vector<metrics::RefSet> refs;
  for (const CaptionedImage* img : images) {
    metrics::RefSet r;
    for (const auto& ref : img->refs) r.push_back(eval_vocab.encode(ref));
    refs.push_back(std::move(r));
  }
  const std::set<int> bad_ids = bad_word_ids(eval_vocab, "");

  std::ofstream out(a.out, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + a.out);
  out << "model,desired_length,bleu4,rougeL,ciderD,mcider,ber,lenmse\n";

  for (const std::string& ckpt_path : a.ckpts) {
    const LoadedCheckpoint ckpt = load_checkpoint(ckpt_path);
    checkpoint_compatible_vocab(ckpt, corpus);
    const std::string tag = variant_name(ckpt.model.config().variant);
    for (int t : lengths) {
      DecodeOpts opts;
      opts.beam_size = a.beam;
      std::vector<metrics::TokenSeq> cands;
      std::vector<int> desired;
      for (const CaptionedImage* img : images) {
        const DecodeResult res = generate_with_length(ckpt.model, img->features, t, opts);
        cands.push_back(eval_vocab.encode(ckpt.vocab.decode(res.caption)));
        desired.push_back(t);
      }
      const metrics::EvalReport report = metrics::evaluate_all(cands, refs, bad_ids, desired);
      out << tag << ',' << t << ',' << fmt(report.values.at("bleu4"), 4) << ','
          << fmt(report.values.at("rougeL"), 4) << ',' << fmt(report.values.at("ciderD"), 4) << ','
          << fmt(report.values.at("mcider"), 4) << ',' << fmt(report.values.at("ber"), 4) << ','
          << fmt(report.values.at("lenmse"), 4) << '\n';
      std::cout << tag << " length " << t << " done\n";
    }
  }
  return 0;
}

// ---- len-dist ----------------------------------------------------------

struct LenDistArgs {
  std::vector<std::string> cands;
  std::string data;
  std::string split = "test";
  std::string out;
};

int cmd_len_dist(const LenDistArgs& a) {
  if (a.cands.empty()) throw std::invalid_argument("len-dist: need at least one candidates file");
  const Corpus corpus = load_corpus_jsonl(corpus_file(a.data));
  const auto images = corpus.split_images(a.split);
  if (images.empty()) throw std::runtime_error("split '" + a.split + "' is empty");

  std::vector<std::string> names;
  std::vector<std::map<int, int>> hists;
  int max_len = 0;
  for (const std::string& path : a.cands) {
    names.push_back(fs::path(path).stem().string());
    std::map<int, int> hist;
    for (const CandidateLine& line : read_candidates(path)) {
      const int len = static_cast<int>(line.words.size());
      hist[len] += 1;
      max_len = std::max(max_len, len);
    }
    hists.push_back(std::move(hist));
  }
  std::map<int, int> ref_hist;
  for (const CaptionedImage* img : images)
    for (const auto& ref : img->refs) {
      const int len = static_cast<int>(ref.size());
      ref_hist[len] += 1;
      max_len = std::max(max_len, len);
    }

  std::ofstream out(a.out, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + a.out);
  out << "length";
  for (const auto& n : names) out << ",count_" << n;
  out << ",count_references\n";
  for (int len = 0; len <= max_len; ++len) {
    out << len;
    for (const auto& h : hists) {
      auto it = h.find(len);
      out << ',' << (it == h.end() ? 0 : it->second);
    }
    auto it = ref_hist.find(len);
    out << ',' << (it == ref_hist.end() ? 0 : it->second) << '\n';
  }
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"length-controllable caption models on a synthetic corpus", "lencap"};
  app.require_subcommand(1);

  GenDataArgs gen;
  CLI::App* gen_cmd = app.add_subcommand("gen-data", "generate the synthetic corpus");
  gen_cmd->add_option("--out", gen.out, "output directory")->required();
  gen_cmd->add_option("--seed", gen.seed, "corpus seed")->envname("LENCAP_SEED");
  gen_cmd->add_option("--sizes", gen.sizes, "train,val,test image counts");
  gen_cmd->add_flag("--force", gen.force, "overwrite existing output");

  TrainArgs tr;
  CLI::App* train_cmd = app.add_subcommand("train", "train a captioning model");
  train_cmd->add_option("--data", tr.data, "corpus directory or jsonl")->required();
  train_cmd->add_option("--model", tr.model, "base | lenemb | marker")
      ->check(CLI::IsMember({"base", "lenemb", "marker"}));
  train_cmd->add_option("--out", tr.out, "checkpoint path")->required();
  train_cmd->add_option("--log", tr.log, "training-log csv (default <out>.log.csv)");
  train_cmd->add_option("--seed", tr.seed, "training seed")->envname("LENCAP_SEED");
  train_cmd->add_option("--epochs", tr.epochs, "training epochs");
  train_cmd->add_option("--batch", tr.batch, "mini-batch size");
  train_cmd->add_option("--lr", tr.lr, "Adam learning rate");
  train_cmd->add_option("--embed-dim", tr.embed_dim, "embedding width");
  train_cmd->add_option("--hidden-dim", tr.hidden_dim, "LSTM width");
  train_cmd->add_option("--max-length", tr.max_length, "max caption length");

  CaptionArgs cap;
  CLI::App* cap_cmd = app.add_subcommand("caption", "caption a corpus split");
  cap_cmd->add_option("--ckpt", cap.ckpt, "checkpoint path")->required();
  cap_cmd->add_option("--data", cap.data, "corpus directory or jsonl")->required();
  cap_cmd->add_option("--split", cap.split, "train | val | test");
  cap_cmd->add_option("--out", cap.out, "candidates jsonl path")->required();
  cap_cmd->add_option("--length", cap.length, "desired caption length");
  cap_cmd->add_flag("--predict-length", cap.predict_length, "use the model's own length choice");
  cap_cmd->add_flag("--fixlen", cap.fixlen, "mask eos before the desired length, then force it");
  cap_cmd->add_option("--beam", cap.beam, "beam size");

  EvalArgs ev;
  CLI::App* eval_cmd = app.add_subcommand("eval", "score candidates against references");
  eval_cmd->add_option("--cands", ev.cands, "candidates jsonl")->required();
  eval_cmd->add_option("--data", ev.data, "corpus directory or jsonl")->required();
  eval_cmd->add_option("--split", ev.split, "train | val | test");
  eval_cmd->add_option("--out", ev.out, "report json path");
  eval_cmd->add_option("--hist", ev.hist, "length histogram csv (default <out>.lengths.csv)");
  eval_cmd->add_option("--bad-words", ev.bad_words_file, "newline/space separated bad-ending words");

  SweepArgs sw;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "score models across desired lengths");
  sweep_cmd->add_option("--ckpt", sw.ckpts, "checkpoint path (repeatable)")->required();
  sweep_cmd->add_option("--data", sw.data, "corpus directory or jsonl")->required();
  sweep_cmd->add_option("--split", sw.split, "train | val | test");
  sweep_cmd->add_option("--lengths", sw.lengths, "comma-separated desired lengths");
  sweep_cmd->add_option("--out", sw.out, "sweep csv path")->required();
  sweep_cmd->add_option("--beam", sw.beam, "beam size");

  LenDistArgs ld;
  CLI::App* ld_cmd = app.add_subcommand("len-dist", "emit length histograms for plotting");
  ld_cmd->add_option("--cands", ld.cands, "candidates jsonl (repeatable)")->required();
  ld_cmd->add_option("--data", ld.data, "corpus directory or jsonl")->required();
  ld_cmd->add_option("--split", ld.split, "train | val | test");
  ld_cmd->add_option("--out", ld.out, "histogram csv path")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (gen_cmd->parsed()) return cmd_gen_data(gen);
    if (train_cmd->parsed()) return cmd_train(tr);
    if (cap_cmd->parsed()) return cmd_caption(cap);
    if (eval_cmd->parsed()) return cmd_eval(ev);
    if (sweep_cmd->parsed()) return cmd_sweep(sw);
    if (ld_cmd->parsed()) return cmd_len_dist(ld);
  } catch (const IncompatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const CheckpointVersionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}

}  // namespace cli
}  // namespace lencap
