#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "ldntag/corpus.hpp"
#include "ldntag/embeddings.hpp"
#include "ldntag/eval.hpp"
#include "ldntag/ldn.hpp"
#include "ldntag/trainer.hpp"
#include "ldntag/util.hpp"

namespace {

using namespace ldntag;

struct TrainArgs {
  std::string data, embeddings, out;
  std::string config, tagset, stopwords;
  double split = 0.0;
  std::uint64_t seed = 0;
  bool seed_given = false;
  bool quiet = false;
};

struct TagArgs {
  std::string model, embeddings, input, output;
  bool force = false;
};

struct EvalArgs {
  std::string gold, pred, tagset, report;
  bool fold_case = false;
};

struct NeighborArgs {
  std::string model, embeddings, token;
  std::size_t k = 0;
  bool force = false;
};

int run_train(const TrainArgs& args) {
  TagSet tagset = args.tagset.empty() ? TagSet::wnut17() : TagSet::from_file(args.tagset);
  TrainConfig cfg = args.config.empty() ? TrainConfig{} : load_train_config(args.config);
  if (args.seed_given) cfg.seed = args.seed;
  if (!args.stopwords.empty()) cfg.ldn.stopwords = load_stopwords(args.stopwords);
  validate(cfg);

  EmbeddingStore store = EmbeddingStore::load(args.embeddings);
  Dataset corpus = parse_conll(read_text_file(args.data), tagset);
  std::fprintf(stderr, "loaded %zu sentences, %zu embedding rows (dim %zu)\n",
               corpus.sentences.size(), store.size(), store.dim());

  Dataset heldout;
  bool have_heldout = false;
  if (args.split > 0.0) {
    auto [train_part, held_part] = split_dataset(corpus, args.split, cfg.seed);
    corpus = std::move(train_part);
    heldout = std::move(held_part);
    have_heldout = true;
    const std::string heldout_path = args.out + ".heldout";
    write_text_file(heldout_path, to_conll(heldout));
    std::fprintf(stderr, "split: %zu train / %zu heldout (heldout written to %s)\n",
                 corpus.sentences.size(), heldout.sentences.size(), heldout_path.c_str());
  }

  EpochCallback on_epoch;
  if (!args.quiet) {
    const std::size_t total = cfg.epochs;
    on_epoch = [total](std::size_t epoch, double nll) {
      std::fprintf(stderr, "epoch %4zu/%zu  mean nll %.6f\n", epoch + 1, total, nll);
    };
  }
  ModelArtifact artifact = train(corpus, store, cfg, on_epoch);
  save_model(artifact, args.out);
  std::fprintf(stderr, "model written to %s\n", args.out.c_str());

  if (have_heldout) {
    Dataset pred = predict_dataset(artifact, store, heldout);
    std::string report = render_report(score(heldout, pred), artifact.tagset);
    std::fputs(report.c_str(), stdout);
  }
  return 0;
}

int run_tag(const TagArgs& args) {
  ModelArtifact artifact = load_model(args.model);
  EmbeddingStore store = EmbeddingStore::load(args.embeddings);
  check_embeddings(artifact, store, args.force);

  Dataset input = parse_untagged(read_text_file(args.input), artifact.tagset);
  Dataset pred = predict_dataset(artifact, store, input);
  std::string conll = to_conll(pred);
  if (args.output == "-")
    std::fputs(conll.c_str(), stdout);
  else
    write_text_file(args.output, conll);
  return 0;
}

int run_eval(const EvalArgs& args) {
  TagSet tagset = args.tagset.empty() ? TagSet::wnut17() : TagSet::from_file(args.tagset);
  Dataset gold = parse_conll(read_text_file(args.gold), tagset);
  Dataset pred = parse_conll(read_text_file(args.pred), tagset);
  ScoreReport report = score(gold, pred, args.fold_case);
  std::fputs(render_report(report, tagset).c_str(), stdout);
  if (!args.report.empty()) write_text_file(args.report, report_key_values(report, tagset));
  return 0;
}

int run_neighbors(const NeighborArgs& args) {
  ModelArtifact artifact = load_model(args.model);
  EmbeddingStore store = EmbeddingStore::load(args.embeddings);
  check_embeddings(artifact, store, args.force);

  LdnConfig query_cfg = artifact.ldn;
  if (args.k > 0) query_cfg.x = args.k;

  const std::string normalized = normalize_token(args.token);
  if (normalized.empty()) {
    std::printf("no evidence for '%s': normalizes to nothing\n", args.token.c_str());
    return 0;
  }
  if (artifact.ldn.stopwords.count(normalized)) {
    std::printf("no evidence for '%s': stop word\n", args.token.c_str());
    return 0;
  }
  auto vec = store.lookup(normalized);
  if (!vec) {
    std::printf("no evidence for '%s': not in the embedding vocabulary\n",
                args.token.c_str());
    return 0;
  }

  auto neighbors = knn(store, artifact.index.tokens(), *vec, query_cfg.x);
  std::printf("%zu nearest indexed neighbors of '%s':\n", neighbors.size(),
              args.token.c_str());
  for (const auto& nb : neighbors) {
    const TagHistogram& hist = artifact.index.entries().at(nb.token);
    std::printf("  %-20s sim %+.6f  counts [", nb.token.c_str(), nb.similarity);
    for (std::size_t slot = 0; slot < hist.counts.size(); ++slot)
      std::printf("%s%s:%llu", slot == 0 ? "" : " ",
                  artifact.index.category_order()[slot].c_str(),
                  static_cast<unsigned long long>(hist.counts[slot]));
    std::printf("]\n");
  }

  LdnFeature feature = ldn_vector(artifact.index, store, query_cfg,
                                  make_token(args.token));
  if (!feature.support) {
    std::printf("aggregated distribution: no support\n");
    return 0;
  }
  std::printf("aggregated distribution:\n");
  for (std::size_t slot = 0; slot < feature.distribution.size(); ++slot)
    std::printf("  %-16s %.6f\n", artifact.index.category_order()[slot].c_str(),
                feature.distribution[slot]);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Named-entity tagger built on neighbor tag distributions"};
  app.require_subcommand(1);

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Train a model on a tagged corpus");
  train_cmd->add_option("--data", train_args.data, "training corpus (token<TAB>tag lines)")
      ->required();
  train_cmd->add_option("--embeddings", train_args.embeddings, "word vector file")
      ->required();
  train_cmd->add_option("--out", train_args.out, "model output path")->required();
  train_cmd->add_option("--config", train_args.config, "key = value training config");
  train_cmd->add_option("--tagset", train_args.tagset, "category list, one per line");
  train_cmd->add_option("--stopwords", train_args.stopwords, "stop word list");
  train_cmd->add_option("--split", train_args.split,
                        "train fraction; the rest is held out and scored");
  train_cmd->add_option("--seed", train_args.seed, "override the config seed");
  train_cmd->add_flag("--quiet", train_args.quiet, "suppress per-epoch loss lines");

  TagArgs tag_args;
  auto* tag_cmd = app.add_subcommand("tag", "Tag an untagged corpus");
  tag_cmd->add_option("--model", tag_args.model, "trained model file")->required();
  tag_cmd->add_option("--embeddings", tag_args.embeddings, "word vector file")->required();
  tag_cmd->add_option("--input", tag_args.input, "one token per line, blank line breaks")
      ->required();
  tag_cmd->add_option("--output", tag_args.output, "output path, '-' for stdout")
      ->required();
  tag_cmd->add_flag("--force", tag_args.force, "allow an embedding checksum mismatch");

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "Score predictions against gold tags");
  eval_cmd->add_option("--gold", eval_args.gold, "gold corpus")->required();
  eval_cmd->add_option("--pred", eval_args.pred, "predicted corpus")->required();
  eval_cmd->add_option("--tagset", eval_args.tagset, "category list, one per line");
  eval_cmd->add_option("--report", eval_args.report, "also write key = value metrics here");
  eval_cmd->add_flag("--fold-case", eval_args.fold_case,
                     "compare surface forms case-insensitively");

  NeighborArgs nb_args;
  auto* nb_cmd = app.add_subcommand("neighbors", "Inspect the neighbor evidence for a token");
  nb_cmd->add_option("--model", nb_args.model, "trained model file")->required();
  nb_cmd->add_option("--embeddings", nb_args.embeddings, "word vector file")->required();
  nb_cmd->add_option("--token", nb_args.token, "query token")->required();
  nb_cmd->add_option("-k,--neighbors", nb_args.k, "neighbor count (default: model's)")
      ->check(CLI::PositiveNumber);
  nb_cmd->add_flag("--force", nb_args.force, "allow an embedding checksum mismatch");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (train_cmd->parsed()) {
      train_args.seed_given = train_cmd->count("--seed") > 0;
      return run_train(train_args);
    }
    if (tag_cmd->parsed()) return run_tag(tag_args);
    if (eval_cmd->parsed()) return run_eval(eval_args);
    if (nb_cmd->parsed()) return run_neighbors(nb_args);
  } catch (const ldntag::ChecksumMismatch& ex) {
    std::fprintf(stderr, "error: %s (pass --force to proceed anyway)\n", ex.what());
    return 3;
  } catch (const std::exception& ex) {
    std::fprintf(stderr, "error: %s\n", ex.what());
    return 2;
  }
  return 2;
}
