#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "higen/errors.hpp"
#include "higen/tensor.hpp"

namespace higen {

// One image-report pair. Sentences hold vocabulary ids once encoded; the raw
// report text is kept for reference output.
struct Document {
  std::string id;
  std::string raw_text;
  std::vector<std::vector<std::string>> token_sentences;
  std::vector<std::vector<int>> sentences;  // vocabulary ids
  std::vector<std::string> tags;
  std::vector<int> tag_ids;
  std::string feature_path;  // "HGT1" file with shape [N x D]
  std::string image_path;    // grayscale pixel grid
};

// Word vocabulary with four reserved ids ahead of the kept tokens.
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kStart = 1;
  static constexpr int kEnd = 2;
  static constexpr int kUnk = 3;
  static constexpr int kReserved = 4;

  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> kept_tokens);

  int id(const std::string& token) const;  // kUnk when not kept
  const std::string& token(int id) const;
  int size() const { return kReserved + static_cast<int>(kept_.size()); }

  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

 private:
  std::vector<std::string> kept_;
  std::map<std::string, int> ids_;
};

// Tag vocabulary; plain bijection, no reserved entries.
class TagVocabulary {
 public:
  TagVocabulary() = default;
  explicit TagVocabulary(std::vector<std::string> tags);

  int id(const std::string& tag) const;  // -1 when unknown
  const std::string& tag(int id) const;
  int size() const { return static_cast<int>(tags_.size()); }

  void save(const std::string& path) const;
  static TagVocabulary load(const std::string& path);

 private:
  std::vector<std::string> tags_;
  std::map<std::string, int> ids_;
};

struct CorpusStats {
  int num_documents = 0;
  int unique_tags = 0;
  int unique_words = 0;
  double avg_tags_per_image = 0.0;
  double avg_sentences = 0.0;
  double avg_words_per_sentence = 0.0;
  double top_k_word_coverage = 0.0;
  int coverage_k = 0;
};

// Lowercases, splits sentences on . ? ! (the delimiters are consumed), then
// whitespace-tokenizes and drops any token containing a non-alphabetic
// character. Empty sentences are dropped.
std::vector<std::vector<std::string>> tokenize(const std::string& text);

struct VocabBuild {
  Vocabulary vocab;
  double coverage = 0.0;  // kept-token occurrences / total occurrences
};

// Keeps the max_size most frequent tokens (ties broken lexicographically).
VocabBuild build_vocab(const std::vector<Document>& docs, int max_size);

// Per-document top-k tokens by tf-idf; tf is the in-document count and
// idf = ln(num_docs / doc_freq). Ties break by tf, then lexicographically.
std::vector<std::vector<std::string>> extract_tags_tfidf(const std::vector<Document>& docs, int k);

struct SplitResult {
  std::vector<Document> train, val, test;
};

// Deterministic shuffle under the seed, then val/test/train assignment.
SplitResult split(const std::vector<Document>& docs, std::uint64_t seed, int val_count,
                  int test_count);

CorpusStats corpus_stats(const std::vector<Document>& docs, int coverage_k = 1000);

// Fills Document::sentences and tag_ids from the token sentences and tags.
void encode_document(Document& doc, const Vocabulary& vocab, const TagVocabulary& tags);

// JSON Lines corpus io. Fields: id, report, tags (optional), features
// (optional), image (optional). Tokenizes the report on read.
std::vector<Document> read_corpus_jsonl(const std::string& path);
void write_corpus_jsonl(const std::string& path, const std::vector<Document>& docs);

}  // namespace higen
