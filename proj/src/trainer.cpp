#include "ldntag/trainer.hpp"

#include <charconv>
#include <cmath>
#include <random>
#include <stdexcept>

#include "ldntag/bytes.hpp"
#include "ldntag/util.hpp"

namespace ldntag {

TrainConfig::TrainConfig() { ldn.stopwords = default_stopwords(); }

namespace {

std::uint64_t parse_u64_value(std::string_view key, std::string_view value) {
  std::uint64_t out{};
  auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || p != value.data() + value.size())
    throw std::runtime_error("bad value for '" + std::string(key) + "': '" +
                             std::string(value) + "'");
  return out;
}

double parse_double_value(std::string_view key, std::string_view value) {
  double out{};
  auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || p != value.data() + value.size())
    throw std::runtime_error("bad value for '" + std::string(key) + "': '" +
                             std::string(value) + "'");
  return out;
}

bool parse_bool_value(std::string_view key, std::string_view value) {
  if (value == "true") return true;
  if (value == "false") return false;
  throw std::runtime_error("bad value for '" + std::string(key) + "': '" +
                           std::string(value) + "' (expected true or false)");
}

}  // namespace

TrainConfig parse_train_config(std::string_view text) {
  TrainConfig cfg;
  std::size_t line_no = 0;
  for (std::string_view line : split(text, '\n')) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw std::runtime_error("line " + std::to_string(line_no) +
                               ": expected key = value");
    std::string_view key = trim(line.substr(0, eq));
    std::string_view value = trim(line.substr(eq + 1));
    try {
      if (key == "epochs")
        cfg.epochs = parse_u64_value(key, value);
      else if (key == "learning_rate")
        cfg.learning_rate = parse_double_value(key, value);
      else if (key == "batch_size")
        cfg.batch_size = parse_u64_value(key, value);
      else if (key == "l2")
        cfg.l2 = parse_double_value(key, value);
      else if (key == "seed")
        cfg.seed = parse_u64_value(key, value);
      else if (key == "shuffle")
        cfg.shuffle = parse_bool_value(key, value);
      else if (key == "hidden_dim")
        cfg.hidden_dim = parse_u64_value(key, value);
      else if (key == "ldn_x")
        cfg.ldn.x = parse_u64_value(key, value);
      else if (key == "ldn_include_o")
        cfg.ldn.include_o_category = parse_bool_value(key, value);
      else if (key == "ldn_similarity_floor")
        cfg.ldn.similarity_floor = parse_double_value(key, value);
      else if (key == "use_word")
        cfg.features.use_word = parse_bool_value(key, value);
      else if (key == "use_ldn")
        cfg.features.use_ldn = parse_bool_value(key, value);
      else if (key == "use_ortho")
        cfg.features.use_ortho = parse_bool_value(key, value);
      else if (key == "prefix_buckets")
        cfg.features.prefix_buckets =
            static_cast<std::uint32_t>(parse_u64_value(key, value));
      else if (key == "suffix_buckets")
        cfg.features.suffix_buckets =
            static_cast<std::uint32_t>(parse_u64_value(key, value));
      else if (key == "hash_seed")
        cfg.features.hash_seed = parse_u64_value(key, value);
      else
        throw std::runtime_error("unknown config key '" + std::string(key) + "'");
    } catch (const std::runtime_error& ex) {
      throw std::runtime_error("line " + std::to_string(line_no) + ": " + ex.what());
    }
  }
  validate(cfg);
  return cfg;
}

TrainConfig load_train_config(const std::string& path) {
  return parse_train_config(read_text_file(path));
}

void validate(const TrainConfig& cfg) {
  if (cfg.epochs < 1) throw std::runtime_error("epochs must be >= 1");
  if (!(cfg.learning_rate > 0.0) || !std::isfinite(cfg.learning_rate))
    throw std::runtime_error("learning_rate must be positive");
  if (cfg.batch_size < 1) throw std::runtime_error("batch_size must be >= 1");
  if (cfg.l2 < 0.0 || !std::isfinite(cfg.l2))
    throw std::runtime_error("l2 must be >= 0");
  if (cfg.ldn.x < 1) throw std::runtime_error("ldn_x must be >= 1");
  if (cfg.ldn.similarity_floor < 0.0 || cfg.ldn.similarity_floor > 1.0)
    throw std::runtime_error("ldn_similarity_floor must be in [0, 1]");
  validate(cfg.features);
}

namespace {

void axpy(std::vector<double>& dst, const std::vector<double>& src) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

void accumulate(CrfGradients& total, const CrfGradients& g) {
  axpy(total.w1.data(), g.w1.data());
  axpy(total.b1, g.b1);
  axpy(total.w2.data(), g.w2.data());
  axpy(total.b2, g.b2);
  axpy(total.transitions.data(), g.transitions.data());
  axpy(total.start_scores, g.start_scores);
  axpy(total.stop_scores, g.stop_scores);
}

void sgd_step(std::vector<double>& params, const std::vector<double>& grads,
              double scale, double lr, double l2) {
  for (std::size_t i = 0; i < params.size(); ++i)
    params[i] -= lr * (grads[i] * scale + l2 * params[i]);
}

}  // namespace

ModelArtifact train(const Dataset& data, const EmbeddingStore& store,
                    const TrainConfig& cfg, const EpochCallback& on_epoch) {
  validate(cfg);
  if (data.sentences.empty()) throw std::runtime_error("no training sentences");

  LdnIndex index = build_index(data, store, cfg.ldn);
  const std::size_t f_dim = feature_dim(cfg.features, store.dim(), index.num_slots());
  const std::size_t t_count = num_bio_tags(data.tagset.size());

  const std::size_t n = data.sentences.size();
  std::vector<Matrix> feats;
  std::vector<std::vector<std::size_t>> gold;
  feats.reserve(n);
  gold.reserve(n);
  for (const auto& s : data.sentences) {
    feats.push_back(featurize_sentence(s, store, index, cfg.features, cfg.ldn));
    std::vector<std::size_t> tags;
    tags.reserve(s.tokens.size());
    for (const auto& tok : s.tokens) tags.push_back(tag_index(tok.tag));
    gold.push_back(std::move(tags));
  }

  CrfModel model = make_crf(t_count, f_dim, cfg.hidden_dim);
  std::mt19937_64 rng(cfg.seed);
  for (double& w : model.w1.data()) w = uniform_range(rng, -0.1, 0.1);
  for (double& w : model.w2.data()) w = uniform_range(rng, -0.1, 0.1);
  const TransitionMask mask = constrained_transitions(data.tagset);
  apply_mask(model, mask);

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.shuffle) shuffle_indices(order, rng);
    double epoch_loss = 0.0;
    for (std::size_t begin = 0; begin < n; begin += cfg.batch_size) {
      const std::size_t end = std::min(begin + cfg.batch_size, n);
      CrfGradients batch = make_gradients(model);
      for (std::size_t b = begin; b < end; ++b) {
        const std::size_t i = order[b];
        try {
          auto [loss, g] = nll_and_gradient(model, feats[i], gold[i]);
          epoch_loss += loss;
          accumulate(batch, g);
        } catch (const std::runtime_error& ex) {
          throw std::runtime_error("training failed at epoch " +
                                   std::to_string(epoch + 1) + ": " + ex.what());
        }
      }
      const double scale = 1.0 / static_cast<double>(end - begin);
      const double lr = cfg.learning_rate;
      sgd_step(model.w1.data(), batch.w1.data(), scale, lr, cfg.l2);
      sgd_step(model.b1, batch.b1, scale, lr, cfg.l2);
      sgd_step(model.w2.data(), batch.w2.data(), scale, lr, cfg.l2);
      sgd_step(model.b2, batch.b2, scale, lr, cfg.l2);
      sgd_step(model.stop_scores, batch.stop_scores, scale, lr, cfg.l2);
      for (std::size_t i = 0; i < t_count; ++i)
        for (std::size_t j = 0; j < t_count; ++j)
          if (mask.allowed(i, j))
            model.transitions(i, j) -= lr * (batch.transitions(i, j) * scale +
                                             cfg.l2 * model.transitions(i, j));
      for (std::size_t j = 0; j < t_count; ++j)
        if (mask.start_ok(j))
          model.start_scores[j] -=
              lr * (batch.start_scores[j] * scale + cfg.l2 * model.start_scores[j]);
    }
    epoch_loss /= static_cast<double>(n);
    if (!std::isfinite(epoch_loss))
      throw std::runtime_error("training diverged at epoch " + std::to_string(epoch + 1));
    if (on_epoch) on_epoch(epoch, epoch_loss);
  }

  ModelArtifact artifact;
  artifact.tagset = data.tagset;
  artifact.features = cfg.features;
  artifact.ldn = cfg.ldn;
  artifact.index = std::move(index);
  artifact.crf = std::move(model);
  artifact.embedding_checksum = store.checksum();
  artifact.embedding_dim = store.dim();
  artifact.training_seed = cfg.seed;
  return artifact;
}

void check_embeddings(const ModelArtifact& artifact, const EmbeddingStore& store,
                      bool allow_checksum_mismatch) {
  if (store.dim() != artifact.embedding_dim)
    throw std::runtime_error("embedding dimension " + std::to_string(store.dim()) +
                             " does not match the model (expected " +
                             std::to_string(artifact.embedding_dim) + ")");
  if (store.checksum() != artifact.embedding_checksum && !allow_checksum_mismatch)
    throw ChecksumMismatch("embedding file checksum does not match the model");
}

std::vector<BioTag> predict(const ModelArtifact& artifact, const EmbeddingStore& store,
                            const Sentence& sentence) {
  Matrix feats =
      featurize_sentence(sentence, store, artifact.index, artifact.features, artifact.ldn);
  ViterbiResult best = viterbi(emissions(artifact.crf, feats), artifact.crf);
  std::vector<BioTag> tags;
  tags.reserve(best.tags.size());
  for (std::size_t idx : best.tags) tags.push_back(tag_from_index(idx));
  return tags;
}

Dataset predict_dataset(const ModelArtifact& artifact, const EmbeddingStore& store,
                        const Dataset& input) {
  Dataset out = input;
  out.tagset = artifact.tagset;
  for (auto& s : out.sentences) {
    auto tags = predict(artifact, store, s);
    for (std::size_t t = 0; t < s.tokens.size(); ++t) s.tokens[t].tag = tags[t];
  }
  return out;
}

namespace {

constexpr char kMagic[4] = {'L', 'D', 'N', 'M'};
constexpr std::uint32_t kModelVersion = 1;
enum SectionId : std::uint32_t {
  kSecTagset = 1,
  kSecFeatures = 2,
  kSecLdn = 3,
  kSecIndex = 4,
  kSecCrf = 5,
  kSecMeta = 6,
};

void write_section(ByteWriter& out, std::uint32_t id, const std::vector<std::uint8_t>& payload) {
  out.u32(id);
  out.u64(payload.size());
  out.raw(payload);
}

ByteReader read_section(ByteReader& in, std::uint32_t expected_id,
                        std::vector<std::uint8_t>& storage) {
  const std::uint32_t id = in.u32();
  if (id != expected_id)
    throw std::runtime_error("malformed model file: expected section " +
                             std::to_string(expected_id) + ", found " + std::to_string(id));
  const std::uint64_t len = in.u64();
  storage = in.raw(len);
  return ByteReader(storage);
}

void require_drained(const ByteReader& r, std::uint32_t id) {
  if (!r.done())
    throw std::runtime_error("malformed model file: section " + std::to_string(id) +
                             " has trailing bytes");
}

}  // namespace

std::vector<std::uint8_t> serialize_model(const ModelArtifact& a) {
  ByteWriter out;
  out.raw(std::span<const std::uint8_t>(
      reinterpret_cast<const std::uint8_t*>(kMagic), sizeof(kMagic)));
  out.u32(kModelVersion);

  {
    ByteWriter w;
    w.u32(static_cast<std::uint32_t>(a.tagset.size()));
    for (const auto& name : a.tagset.names()) w.str(name);
    write_section(out, kSecTagset, w.take());
  }
  {
    ByteWriter w;
    w.u8(a.features.use_word ? 1 : 0);
    w.u8(a.features.use_ldn ? 1 : 0);
    w.u8(a.features.use_ortho ? 1 : 0);
    w.u32(a.features.prefix_buckets);
    w.u32(a.features.suffix_buckets);
    w.u64(a.features.hash_seed);
    write_section(out, kSecFeatures, w.take());
  }
  {
    ByteWriter w;
    w.u64(a.ldn.x);
    w.u8(a.ldn.include_o_category ? 1 : 0);
    w.f64(a.ldn.similarity_floor);
    w.u64(a.ldn.stopwords.size());
    for (const auto& word : a.ldn.stopwords) w.str(word);  // std::set: sorted
    write_section(out, kSecLdn, w.take());
  }
  write_section(out, kSecIndex, persist_index(a.index));
  {
    ByteWriter w;
    w.u64(a.crf.num_tags);
    w.u64(a.crf.feature_dim);
    w.u64(a.crf.hidden_dim);
    for (double v : a.crf.w1.data()) w.f64(v);
    for (double v : a.crf.b1) w.f64(v);
    for (double v : a.crf.w2.data()) w.f64(v);
    for (double v : a.crf.b2) w.f64(v);
    for (double v : a.crf.transitions.data()) w.f64(v);
    for (double v : a.crf.start_scores) w.f64(v);
    for (double v : a.crf.stop_scores) w.f64(v);
    write_section(out, kSecCrf, w.take());
  }
  {
    ByteWriter w;
    w.u64(a.embedding_checksum);
    w.u64(a.embedding_dim);
    w.u64(a.training_seed);
    write_section(out, kSecMeta, w.take());
  }
  return out.take();
}

ModelArtifact deserialize_model(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes);
  auto magic = in.raw(sizeof(kMagic));
  for (std::size_t i = 0; i < sizeof(kMagic); ++i)
    if (magic[i] != static_cast<std::uint8_t>(kMagic[i]))
      throw std::runtime_error("not a model file");
  const std::uint32_t version = in.u32();
  if (version != kModelVersion)
    throw std::runtime_error("unsupported model version " + std::to_string(version));

  ModelArtifact a;
  std::vector<std::uint8_t> storage;
  {
    ByteReader r = read_section(in, kSecTagset, storage);
    const std::uint32_t count = r.u32();
    std::vector<std::string> names;
    names.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) names.push_back(r.str());
    require_drained(r, kSecTagset);
    a.tagset = TagSet(std::move(names));
  }
  {
    ByteReader r = read_section(in, kSecFeatures, storage);
    a.features.use_word = r.u8() != 0;
    a.features.use_ldn = r.u8() != 0;
    a.features.use_ortho = r.u8() != 0;
    a.features.prefix_buckets = r.u32();
    a.features.suffix_buckets = r.u32();
    a.features.hash_seed = r.u64();
    require_drained(r, kSecFeatures);
    validate(a.features);
  }
  {
    ByteReader r = read_section(in, kSecLdn, storage);
    a.ldn.x = r.u64();
    a.ldn.include_o_category = r.u8() != 0;
    a.ldn.similarity_floor = r.f64();
    const std::uint64_t count = r.u64();
    a.ldn.stopwords.clear();
    for (std::uint64_t i = 0; i < count; ++i) a.ldn.stopwords.insert(r.str());
    require_drained(r, kSecLdn);
    if (a.ldn.x < 1) throw std::runtime_error("malformed model file: ldn_x is 0");
  }
  {
    read_section(in, kSecIndex, storage);
    a.index = restore_index(storage);
  }
  {
    ByteReader r = read_section(in, kSecCrf, storage);
    const std::uint64_t t_count = r.u64();
    const std::uint64_t f_dim = r.u64();
    const std::uint64_t h_dim = r.u64();
    if (t_count < 1 || t_count > 10000 || f_dim < 1 || f_dim > 10000000 ||
        h_dim > 1000000)
      throw std::runtime_error("malformed model file: implausible CRF shape");
    a.crf = make_crf(t_count, f_dim, h_dim);
    for (double& v : a.crf.w1.data()) v = r.f64();
    for (double& v : a.crf.b1) v = r.f64();
    for (double& v : a.crf.w2.data()) v = r.f64();
    for (double& v : a.crf.b2) v = r.f64();
    for (double& v : a.crf.transitions.data()) v = r.f64();
    for (double& v : a.crf.start_scores) v = r.f64();
    for (double& v : a.crf.stop_scores) v = r.f64();
    require_drained(r, kSecCrf);
  }
  {
    ByteReader r = read_section(in, kSecMeta, storage);
    a.embedding_checksum = r.u64();
    a.embedding_dim = r.u64();
    a.training_seed = r.u64();
    require_drained(r, kSecMeta);
  }
  if (!in.done())
    throw std::runtime_error("malformed model file: trailing bytes after last section");

  std::vector<std::string> expected_order = a.tagset.names();
  expected_order.push_back("O");
  if (a.index.category_order() != expected_order)
    throw std::runtime_error("model file is internally inconsistent: index slots");
  if (a.crf.num_tags != num_bio_tags(a.tagset.size()))
    throw std::runtime_error("model file is internally inconsistent: tag count");
  if (a.crf.feature_dim != feature_dim(a.features, a.embedding_dim, a.index.num_slots()))
    throw std::runtime_error("model file is internally inconsistent: feature width");
  return a;
}

void save_model(const ModelArtifact& artifact, const std::string& path) {
  write_binary_file(path, serialize_model(artifact));
}

ModelArtifact load_model(const std::string& path) {
  return deserialize_model(read_binary_file(path));
}

}  // namespace ldntag
