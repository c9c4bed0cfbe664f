#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>

#include <CLI11.hpp>
#include <json.hpp>

#include "higen/gradcheck.hpp"
#include "higen/metrics.hpp"
#include "higen/training.hpp"

namespace fs = std::filesystem;
using namespace higen;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

struct CommonFlags {
  std::string config_path;
  std::string corpus;
  std::string checkpoint;
  std::string out;
  std::string split = "test";
  std::string mode;
  std::optional<std::uint64_t> seed;
};

// Config file first, then flag overrides.
TrainConfig resolve_config(const CommonFlags& flags) {
  TrainConfig cfg = flags.config_path.empty() ? TrainConfig{} : parse_config_file(flags.config_path);
  if (flags.seed) cfg.seed = *flags.seed;
  if (!flags.mode.empty()) cfg.attention_mode = parse_attention_mode(flags.mode);
  return cfg;
}

void announce(const TrainConfig& cfg) {
  std::cout << "# resolved config\n";
  print_config(std::cout, cfg);
  std::cout.flush();
}

std::vector<std::string> flatten(const std::vector<std::vector<std::string>>& sentences) {
  std::vector<std::string> out;
  for (const auto& sentence : sentences) out.insert(out.end(), sentence.begin(), sentence.end());
  return out;
}

struct LoadedCorpus {
  Vocabulary vocab;
  TagVocabulary tags;
  std::vector<Document> docs;
};

LoadedCorpus load_split(const std::string& dir, const std::string& split) {
  LoadedCorpus out;
  out.vocab = Vocabulary::load((fs::path(dir) / "vocab.txt").string());
  out.tags = TagVocabulary::load((fs::path(dir) / "tags.txt").string());
  out.docs = read_corpus_jsonl((fs::path(dir) / (split + ".jsonl")).string());
  for (Document& doc : out.docs) encode_document(doc, out.vocab, out.tags);
  return out;
}

int cmd_preprocess(const CommonFlags& flags) {
  TrainConfig cfg = resolve_config(flags);
  announce(cfg);

  std::vector<Document> docs = read_corpus_jsonl(flags.corpus);
  std::vector<Document> usable;
  for (Document& doc : docs) {
    if (doc.token_sentences.empty()) {
      std::cerr << "dropping document '" << doc.id << "': no sentences after tokenization\n";
      continue;
    }
    usable.push_back(std::move(doc));
  }
  if (usable.empty()) throw DataError("no usable documents in " + flags.corpus);

  // tf-idf tags for documents the corpus left untagged
  std::vector<std::vector<std::string>> fallback = extract_tags_tfidf(usable, cfg.tfidf_k);
  for (std::size_t i = 0; i < usable.size(); ++i) {
    if (usable[i].tags.empty()) usable[i].tags = fallback[i];
  }

  VocabBuild vocab = build_vocab(usable, cfg.vocab_cap);
  std::set<std::string> tag_set;
  for (const Document& doc : usable) tag_set.insert(doc.tags.begin(), doc.tags.end());
  TagVocabulary tags(std::vector<std::string>(tag_set.begin(), tag_set.end()));

  SplitResult splits = split(usable, cfg.seed, cfg.val_count, cfg.test_count);

  fs::create_directories(flags.out);
  write_corpus_jsonl((fs::path(flags.out) / "train.jsonl").string(), splits.train);
  write_corpus_jsonl((fs::path(flags.out) / "val.jsonl").string(), splits.val);
  write_corpus_jsonl((fs::path(flags.out) / "test.jsonl").string(), splits.test);
  vocab.vocab.save((fs::path(flags.out) / "vocab.txt").string());
  tags.save((fs::path(flags.out) / "tags.txt").string());

  std::cout << "documents " << usable.size() << " train " << splits.train.size() << " val "
            << splits.val.size() << " test " << splits.test.size() << '\n'
            << "vocab_size " << vocab.vocab.size() << " coverage " << vocab.coverage << '\n'
            << "num_tags " << tags.size() << '\n';
  return 0;
}

int cmd_stats(const CommonFlags& flags) {
  TrainConfig cfg = resolve_config(flags);
  announce(cfg);

  std::vector<Document> docs = read_corpus_jsonl(flags.corpus);
  CorpusStats stats = corpus_stats(docs, cfg.vocab_cap);

  nlohmann::json obj;
  obj["num_documents"] = stats.num_documents;
  obj["unique_tags"] = stats.unique_tags;
  obj["unique_words"] = stats.unique_words;
  obj["avg_tags_per_image"] = stats.avg_tags_per_image;
  obj["avg_sentences"] = stats.avg_sentences;
  obj["avg_words_per_sentence"] = stats.avg_words_per_sentence;
  obj["top_k_word_coverage"] = stats.top_k_word_coverage;
  obj["coverage_k"] = stats.coverage_k;
  std::string text = obj.dump(2);
  if (flags.out.empty()) {
    std::cout << text << '\n';
  } else {
    std::ofstream out(flags.out);
    if (!out) throw DataError("cannot open " + flags.out + " for writing");
    out << text << '\n';
  }
  return 0;
}

int cmd_train(const CommonFlags& flags) {
  TrainConfig cfg = resolve_config(flags);

  LoadedCorpus train_corpus = load_split(flags.corpus, "train");
  std::vector<Document> val_docs;
  fs::path val_path = fs::path(flags.corpus) / "val.jsonl";
  if (fs::exists(val_path)) {
    val_docs = read_corpus_jsonl(val_path.string());
    for (Document& doc : val_docs) encode_document(doc, train_corpus.vocab, train_corpus.tags);
  }

  // The vocabulary files are authoritative for V and L.
  cfg.vocab_size = train_corpus.vocab.size();
  cfg.num_tags = train_corpus.tags.size();
  announce(cfg);

  std::vector<EpochRow> log;
  Checkpoint ckpt = train(cfg, train_corpus.docs, val_docs, &log, &std::cout);
  save_checkpoint(flags.out, ckpt);
  write_epoch_log(flags.out + ".csv", log);
  std::cout << "checkpoint " << flags.out << " best_epoch " << ckpt.epoch << " best_val "
            << ckpt.best_val << '\n';
  return 0;
}

int cmd_generate(const CommonFlags& flags) {
  Checkpoint ckpt = load_checkpoint(flags.checkpoint);
  TrainConfig cfg = ckpt.config;
  if (!flags.mode.empty()) cfg.attention_mode = parse_attention_mode(flags.mode);
  if (flags.seed) cfg.seed = *flags.seed;
  announce(cfg);

  LoadedCorpus corpus = load_split(flags.corpus, flags.split);

  std::ofstream reports(flags.out);
  if (!reports) throw DataError("cannot open " + flags.out + " for writing");
  std::ofstream attention(flags.out + ".attn.jsonl");
  if (!attention) throw DataError("cannot open " + flags.out + ".attn.jsonl for writing");

  for (const Document& doc : corpus.docs) {
    ExampleInput input = load_example_input(doc);
    GeneratedReport generated = run_generation(input, ckpt.params, cfg);

    std::vector<std::vector<std::string>> sentences;
    for (const auto& ids : generated.report.sentences) {
      std::vector<std::string> tokens;
      for (int id : ids) tokens.push_back(corpus.vocab.token(id));
      sentences.push_back(std::move(tokens));
    }
    reports << report_json(doc.id, sentences, generated.report.stop_probs,
                           generated.report.truncated)
            << '\n';
    attention << attention_record_json(doc.id, generated.attention) << '\n';
  }
  std::cout << "reports " << corpus.docs.size() << " -> " << flags.out << '\n';
  return 0;
}

struct CandidateReport {
  std::string id;
  std::vector<std::vector<std::string>> sentences;
};

std::vector<CandidateReport> read_generated_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::vector<CandidateReport> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (!obj.contains("id") || !obj.contains("sentences")) {
      throw DataError(path + ":" + std::to_string(line_no) + ": need id and sentences");
    }
    CandidateReport report;
    report.id = obj.at("id").get<std::string>();
    report.sentences = obj.at("sentences").get<std::vector<std::vector<std::string>>>();
    out.push_back(std::move(report));
  }
  return out;
}

int cmd_evaluate(const CommonFlags& flags, const std::string& candidates_path) {
  TrainConfig cfg = resolve_config(flags);
  announce(cfg);

  std::vector<CandidateReport> candidates = read_generated_jsonl(candidates_path);
  if (candidates.empty()) throw DataError("no candidate reports in " + candidates_path);
  std::vector<Document> ref_docs = read_corpus_jsonl(flags.corpus);
  std::map<std::string, std::vector<std::vector<std::string>>> refs_by_id;
  for (const Document& doc : ref_docs) {
    refs_by_id[doc.id].push_back(flatten(doc.token_sentences));
  }

  std::vector<EvalPair> pairs;
  std::vector<std::vector<std::vector<std::string>>> reports;
  for (const CandidateReport& cand : candidates) {
    auto it = refs_by_id.find(cand.id);
    if (it == refs_by_id.end()) {
      throw DataError("candidate '" + cand.id + "' has no reference in " + flags.corpus);
    }
    pairs.push_back(EvalPair{flatten(cand.sentences), it->second});
    reports.push_back(cand.sentences);
  }

  EvalReport report = evaluate_corpus(pairs, reports);
  {
    std::ofstream out(flags.out);
    if (!out) throw DataError("cannot open " + flags.out + " for writing");
    out << eval_report_json(report) << '\n';
  }
  {
    std::ofstream csv(flags.out + ".per_image.csv");
    if (!csv) throw DataError("cannot open " + flags.out + ".per_image.csv for writing");
    csv << "id,bleu1,bleu2,bleu3,bleu4,rouge_l,sentences,normal_sentences\n";
    csv.precision(17);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      std::vector<EvalPair> one{pairs[i]};
      long normal = 0;
      static const std::set<std::string> kNormalTokens = {"no", "normal", "clear", "stable"};
      for (const auto& sentence : reports[i]) {
        for (const std::string& token : sentence) {
          if (kNormalTokens.count(token)) {
            ++normal;
            break;
          }
        }
      }
      csv << candidates[i].id << ',' << bleu(one, 1) << ',' << bleu(one, 2) << ',' << bleu(one, 3)
          << ',' << bleu(one, 4) << ',' << rouge_l(one) << ',' << reports[i].size() << ','
          << normal << '\n';
    }
  }
  std::cout << eval_report_json(report) << '\n';
  return 0;
}

int cmd_gradcheck(const CommonFlags& flags) {
  TrainConfig cfg = flags.config_path.empty() ? toy_config() : parse_config_file(flags.config_path);
  if (flags.seed) cfg.seed = *flags.seed;
  if (!flags.mode.empty()) cfg.attention_mode = parse_attention_mode(flags.mode);
  announce(cfg);

  ToyExample example = make_toy_example(cfg, cfg.seed + 101);
  ParameterStore params = gradcheck_params(cfg);
  LossBuilder builder = [&](Tape& tape, const ParameterStore& p) {
    ModelVars vars = register_model(tape, p);
    return example_loss_graph(tape, example.doc, example.input, vars, cfg).total;
  };
  double err = gradient_check(builder, params, 1e-4);
  std::cout << "max_relative_error " << err << '\n';
  return err < 1e-3 ? 0 : kExitNumeric;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hierarchical tagged-image report generator"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string candidates_path;

  auto add_common = [&flags](CLI::App* cmd) {
    cmd->add_option("--config", flags.config_path, "flat key=value config file");
    cmd->add_option("--seed", flags.seed, "PRNG seed override");
    cmd->add_option("--corpus", flags.corpus, "corpus file or preprocessed directory");
    cmd->add_option("--checkpoint", flags.checkpoint, "checkpoint path");
    cmd->add_option("--out", flags.out, "output path");
    cmd->add_option("--split", flags.split, "train, val or test")
        ->check(CLI::IsMember({"train", "val", "test"}));
    cmd->add_option("--mode", flags.mode, "attention mode override")
        ->check(CLI::IsMember({"none", "visual_only", "semantic_only", "co"}));
  };

  CLI::App* preprocess = app.add_subcommand("preprocess", "tokenize, tag, split a raw corpus");
  add_common(preprocess);
  CLI::App* train_cmd = app.add_subcommand("train", "train a model on a preprocessed corpus");
  add_common(train_cmd);
  CLI::App* generate = app.add_subcommand("generate", "decode reports for a split");
  add_common(generate);
  CLI::App* evaluate = app.add_subcommand("evaluate", "score generated reports against references");
  add_common(evaluate);
  evaluate->add_option("--candidates", candidates_path, "generated reports JSONL");
  CLI::App* gradcheck_cmd = app.add_subcommand("gradcheck", "finite-difference gradient self-check");
  add_common(gradcheck_cmd);
  CLI::App* stats = app.add_subcommand("stats", "corpus statistics");
  add_common(stats);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitUsage;
  }

  auto require = [](const std::string& value, const char* flag) {
    if (value.empty()) {
      std::cerr << "missing required flag " << flag << '\n';
      std::exit(kExitUsage);
    }
  };

  try {
    if (preprocess->parsed()) {
      require(flags.corpus, "--corpus");
      require(flags.out, "--out");
      return cmd_preprocess(flags);
    }
    if (train_cmd->parsed()) {
      require(flags.corpus, "--corpus");
      require(flags.out, "--out");
      return cmd_train(flags);
    }
    if (generate->parsed()) {
      require(flags.checkpoint, "--checkpoint");
      require(flags.corpus, "--corpus");
      require(flags.out, "--out");
      return cmd_generate(flags);
    }
    if (evaluate->parsed()) {
      require(candidates_path, "--candidates");
      require(flags.corpus, "--corpus");
      require(flags.out, "--out");
      return cmd_evaluate(flags, candidates_path);
    }
    if (gradcheck_cmd->parsed()) return cmd_gradcheck(flags);
    if (stats->parsed()) {
      require(flags.corpus, "--corpus");
      return cmd_stats(flags);
    }
  } catch (const DivergenceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
