// Copyright 2026 The MCRF Authors.
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

#include "mcrf/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "mcrf/errors.h"

namespace mcrf {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

namespace {

class Writer {
 public:
  template <typename T>
  void pod(T v) {
    const char* p = reinterpret_cast<const char*>(&v);
    out_.append(p, sizeof(T));
  }
  void str32(std::string_view s) {
    pod(static_cast<std::uint32_t>(s.size()));
    out_.append(s);
  }
  void str64(std::string_view s) {
    pod(static_cast<std::uint64_t>(s.size()));
    out_.append(s);
  }
  void raw(std::string_view s) { out_.append(s); }
  void doubles(std::span<const double> v) {
    out_.append(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(double));
  }
  std::string take() && { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}

  template <typename T>
  T pod(std::string_view what) {
    need(sizeof(T), what);
    T v;
    std::memcpy(&v, in_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string_view bytes(std::size_t n, std::string_view what) {
    need(n, what);
    std::string_view s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::string str32(std::string_view what) {
    return std::string(bytes(pod<std::uint32_t>(what), what));
  }
  std::string str64(std::string_view what) {
    return std::string(bytes(pod<std::uint64_t>(what), what));
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  void need(std::size_t n, std::string_view what) {
    if (in_.size() - pos_ < n) {
      throw FormatError(fmt::format("checkpoint truncated while reading {}", what));
    }
  }
  std::string_view in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_checkpoint(const Model& model, const RunConfig& config,
                                 const Vocabulary& vocab, const CheckpointMeta& meta) {
  const nlohmann::json meta_json = {
      {"max_length", meta.max_length},
      {"word_dim", model.options().word_dim},
      {"vocab_size", vocab.size()},
      {"vocab_hash", fmt::format("{:016x}", vocab.hash())},
      {"dev_accuracy", meta.dev.accuracy},
      {"dev_macro_f1", meta.dev.macro_f1},
      {"best_epoch", meta.best_epoch},
  };
  Writer w;
  w.raw(kCheckpointMagic);
  w.pod(kCheckpointVersion);
  w.str64(config.canonical());
  w.str64(meta_json.dump());
  w.pod(static_cast<std::uint64_t>(vocab.size()));
  for (const std::string& tok : vocab.tokens()) w.str32(tok);
  const std::vector<NamedTensor> tensors = model.tensors();
  w.pod(static_cast<std::uint64_t>(tensors.size()));
  for (const NamedTensor& t : tensors) {
    w.str32(t.name);
    w.pod(static_cast<std::uint64_t>(t.tensor.rows()));
    w.pod(static_cast<std::uint64_t>(t.tensor.cols()));
    w.doubles(t.tensor.values());
  }
  return std::move(w).take();
}

LoadedCheckpoint deserialize_checkpoint(std::string_view bytes) {
  Reader r(bytes);
  if (r.bytes(kCheckpointMagic.size(), "magic") != kCheckpointMagic) {
    throw FormatError("not a checkpoint (bad magic bytes)");
  }
  const auto version = r.pod<std::uint32_t>("version");
  if (version != kCheckpointVersion) {
    throw FormatError(fmt::format("checkpoint format version {} unsupported (expected {})",
                                  version, kCheckpointVersion));
  }
  RunConfig config = RunConfig::parse(r.str64("config"));
  nlohmann::json meta_json;
  try {
    meta_json = nlohmann::json::parse(r.str64("metadata"));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(fmt::format("checkpoint metadata: {}", e.what()));
  }

  const auto vocab_size = r.pod<std::uint64_t>("vocabulary size");
  std::vector<std::string> tokens;
  tokens.reserve(vocab_size);
  for (std::uint64_t i = 0; i < vocab_size; ++i) tokens.push_back(r.str32("vocabulary"));
  Vocabulary vocab = Vocabulary::from_tokens(std::move(tokens));

  CheckpointMeta meta;
  std::string stored_hash;
  std::size_t word_dim = 0;
  std::size_t stored_vocab_size = 0;
  try {
    meta.max_length = meta_json.at("max_length").get<std::size_t>();
    meta.dev.accuracy = meta_json.at("dev_accuracy").get<double>();
    meta.dev.macro_f1 = meta_json.at("dev_macro_f1").get<double>();
    meta.best_epoch = meta_json.at("best_epoch").get<int>();
    stored_hash = meta_json.at("vocab_hash").get<std::string>();
    stored_vocab_size = meta_json.at("vocab_size").get<std::size_t>();
    word_dim = meta_json.at("word_dim").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(fmt::format("checkpoint metadata: {}", e.what()));
  }
  if (stored_hash != fmt::format("{:016x}", vocab.hash()) ||
      stored_vocab_size != vocab.size()) {
    throw FormatError(fmt::format(
        "vocabulary mismatch: checkpoint vocab hash {} ({} tokens) but stored "
        "vocabulary hashes to {:016x} ({} tokens)",
        stored_hash, stored_vocab_size, vocab.hash(), vocab.size()));
  }

  ModelOptions options = ModelOptions::from_config(config, meta.max_length);
  if (options.word_dim != word_dim) {
    throw FormatError(fmt::format("checkpoint word_dim {} disagrees with config {}",
                                  word_dim, options.word_dim));
  }
  Rng unused(0);
  Model model =
      Model::create(options, Tensor::zeros({vocab.size(), options.word_dim}), unused);

  std::vector<NamedTensor> expected = model.tensors();
  const auto count = r.pod<std::uint64_t>("tensor count");
  if (count != expected.size()) {
    throw FormatError(fmt::format("checkpoint has {} tensors, model expects {}", count,
                                  expected.size()));
  }
  for (NamedTensor& t : expected) {
    const std::string name = r.str32("tensor name");
    const auto rows = r.pod<std::uint64_t>("tensor rows");
    const auto cols = r.pod<std::uint64_t>("tensor cols");
    if (name != t.name || rows != t.tensor.rows() || cols != t.tensor.cols()) {
      throw FormatError(fmt::format("checkpoint tensor {} [{}x{}] where {} {} expected",
                                    name, rows, cols, t.name, t.tensor.shape().str()));
    }
    const std::string_view data = r.bytes(rows * cols * sizeof(double), name);
    std::memcpy(t.tensor.mutable_values().data(), data.data(), data.size());
  }
  if (!r.done()) throw FormatError("trailing bytes after checkpoint tensors");
  if (model.encoder().word_embeddings.rows() != vocab.size()) {
    throw FormatError(fmt::format("vocabulary mismatch: checkpoint vocab hash {:016x}",
                                  vocab.hash()));
  }
  return {std::move(config), std::move(vocab), meta, std::move(model)};
}

void save_checkpoint(const std::filesystem::path& path, const Model& model,
                     const RunConfig& config, const Vocabulary& vocab,
                     const CheckpointMeta& meta) {
  const std::string bytes = serialize_checkpoint(model, config, vocab, meta);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(fmt::format("cannot write {}", tmp.string()));
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError(fmt::format("short write to {}", tmp.string()));
  }
  std::filesystem::rename(tmp, path);
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open checkpoint {}", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_checkpoint(buf.str());
}

}  // namespace mcrf
