#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "higen/model.hpp"

using namespace higen;
namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  std::string cmd = std::string(HIGEN_CLI_PATH) + " " + args;
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// A small raw corpus with feature files, plus the toy config on disk.
struct Scratch {
  fs::path dir = fs::path("cli_scratch");

  Scratch() {
    fs::remove_all(dir);
    fs::create_directories(dir);

    TrainConfig cfg = toy_config();
    std::vector<Document> docs;
    const char* reports[4] = {
        "Heart size is normal. No pleural effusion.",
        "Lungs are clear. Stable appearance.",
        "Mild cardiomegaly seen. No pneumothorax.",
        "Degenerative changes noted. Heart is stable.",
    };
    for (int i = 0; i < 4; ++i) {
      Document doc;
      doc.id = "img" + std::to_string(i);
      doc.raw_text = reports[i];
      std::string feat = (dir / ("feat" + std::to_string(i) + ".hgt")).string();
      Rng rng(100 + static_cast<std::uint64_t>(i));
      write_tensor_file(feat, uniform_init({cfg.regions(), cfg.dim_d}, rng, 1.0));
      doc.feature_path = feat;
      docs.push_back(doc);
    }
    write_corpus_jsonl((dir / "raw.jsonl").string(), docs);

    TrainConfig file_cfg = cfg;
    file_cfg.val_count = 0;
    file_cfg.test_count = 1;
    file_cfg.vocab_cap = 50;
    file_cfg.epochs = 2;
    file_cfg.lr_rnn = 1e-3;
    file_cfg.lr_cnn = 1e-3;
    std::ofstream out(dir / "config.txt");
    out << config_text(file_cfg);
  }
};

}  // namespace

TEST_CASE("cli pipeline: preprocess, stats, train, generate, evaluate") {
  Scratch scratch;
  fs::path dir = scratch.dir;
  std::string cfg = " --config " + (dir / "config.txt").string();

  // stats on the raw corpus
  CHECK(run("stats --corpus " + (dir / "raw.jsonl").string() + " --out " +
            (dir / "stats.json").string() + cfg + " > /dev/null 2>&1") == 0);
  auto stats = nlohmann::json::parse(slurp(dir / "stats.json"));
  CHECK(stats.at("num_documents") == 4);
  CHECK(stats.at("avg_sentences") == 2.0);

  // preprocess into train/val/test plus vocabularies
  CHECK(run("preprocess --corpus " + (dir / "raw.jsonl").string() + " --out " +
            (dir / "prep").string() + cfg + " > /dev/null 2>&1") == 0);
  CHECK(fs::exists(dir / "prep" / "train.jsonl"));
  CHECK(fs::exists(dir / "prep" / "vocab.txt"));
  CHECK(fs::exists(dir / "prep" / "tags.txt"));

  // train for two epochs
  std::string ckpt = (dir / "model.hgc").string();
  CHECK(run("train --corpus " + (dir / "prep").string() + " --out " + ckpt + cfg +
            " > /dev/null 2>&1") == 0);
  CHECK(fs::exists(ckpt));
  CHECK(fs::exists(ckpt + ".csv"));

  // identical seeds give byte-identical checkpoints
  std::string ckpt2 = (dir / "model2.hgc").string();
  CHECK(run("train --corpus " + (dir / "prep").string() + " --out " + ckpt2 + cfg +
            " > /dev/null 2>&1") == 0);
  CHECK(slurp(ckpt) == slurp(ckpt2));
  CHECK(slurp(ckpt + ".csv") == slurp(ckpt2 + ".csv"));

  // generate reports for the train split, twice, byte-identically
  std::string reports = (dir / "reports.jsonl").string();
  CHECK(run("generate --checkpoint " + ckpt + " --corpus " + (dir / "prep").string() +
            " --split train --out " + reports + " > /dev/null 2>&1") == 0);
  CHECK(fs::exists(reports));
  CHECK(fs::exists(reports + ".attn.jsonl"));
  std::string again = (dir / "reports2.jsonl").string();
  CHECK(run("generate --checkpoint " + ckpt + " --corpus " + (dir / "prep").string() +
            " --split train --out " + again + " > /dev/null 2>&1") == 0);
  CHECK(slurp(reports) == slurp(again));

  // evaluate the generated reports against the split references
  std::string eval = (dir / "eval.json").string();
  CHECK(run("evaluate --candidates " + reports + " --corpus " +
            (dir / "prep" / "train.jsonl").string() + " --out " + eval + " > /dev/null 2>&1") ==
        0);
  auto report = nlohmann::json::parse(slurp(eval));
  CHECK(report.contains("bleu1"));
  CHECK(report.contains("cider"));
  CHECK(fs::exists(eval + ".per_image.csv"));
}

TEST_CASE("cli evaluate scores identical files at bleu one") {
  Scratch scratch;
  fs::path dir = scratch.dir;

  // candidates that copy the references verbatim
  std::vector<Document> refs = read_corpus_jsonl((dir / "raw.jsonl").string());
  std::ofstream cand(dir / "cand.jsonl");
  for (const Document& doc : refs) {
    nlohmann::json obj;
    obj["id"] = doc.id;
    obj["sentences"] = doc.token_sentences;
    obj["stop_probs"] = std::vector<double>(doc.token_sentences.size(), 1.0);
    obj["truncated"] = false;
    cand << obj.dump() << '\n';
  }
  cand.close();

  std::string eval = (dir / "self_eval.json").string();
  CHECK(run("evaluate --candidates " + (dir / "cand.jsonl").string() + " --corpus " +
            (dir / "raw.jsonl").string() + " --out " + eval + " > /dev/null 2>&1") == 0);
  auto report = nlohmann::json::parse(slurp(eval));
  CHECK(report.at("bleu1").get<double>() == 1.0);
  CHECK(report.at("bleu4").get<double>() == 1.0);
  CHECK(report.at("rouge_l").get<double>() == 1.0);
}

TEST_CASE("cli train with zero epochs snapshots the initial model") {
  Scratch scratch;
  fs::path dir = scratch.dir;
  CHECK(run("preprocess --corpus " + (dir / "raw.jsonl").string() + " --out " +
            (dir / "prep").string() + " --config " + (dir / "config.txt").string() +
            " > /dev/null 2>&1") == 0);

  // override epochs via a second config
  TrainConfig cfg = parse_config_file((dir / "config.txt").string());
  cfg.epochs = 0;
  std::ofstream out(dir / "zero.txt");
  out << config_text(cfg);
  out.close();

  std::string ckpt = (dir / "zero.hgc").string();
  CHECK(run("train --corpus " + (dir / "prep").string() + " --out " + ckpt + " --config " +
            (dir / "zero.txt").string() + " > /dev/null 2>&1") == 0);
  CHECK(fs::exists(ckpt));

  // log body is empty: header only
  std::string log = slurp(ckpt + ".csv");
  CHECK(log == "epoch,train_loss,val_loss,l_tag,l_sent,l_word,l_reg\n");
}

TEST_CASE("cli gradcheck passes on the toy configuration") {
  CHECK(run("gradcheck --seed 5 > /dev/null 2>&1") == 0);
}

TEST_CASE("cli exit codes distinguish usage and data errors") {
  CHECK(run("bogus_verb > /dev/null 2>&1") == 1);
  CHECK(run("train --no-such-flag > /dev/null 2>&1") == 1);
  CHECK(run("stats --corpus does_not_exist.jsonl > /dev/null 2>&1") == 2);
  CHECK(run("train --corpus nowhere --out x.hgc > /dev/null 2>&1") == 2);
  CHECK(run("stats > /dev/null 2>&1") == 1);  // missing required flag
}
