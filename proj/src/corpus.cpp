#include "higen/corpus.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "higen/rng.hpp"

namespace higen {

using nlohmann::json;

namespace {

const std::array<std::string, 4> kReservedNames = {"<pad>", "<start>", "<end>", "<unk>"};

bool all_alpha(const std::string& token) {
  for (unsigned char c : token) {
    if (!std::isalpha(c)) return false;
  }
  return !token.empty();
}

}  // namespace

std::vector<std::vector<std::string>> tokenize(const std::string& text) {
  std::vector<std::vector<std::string>> sentences;
  std::vector<std::string> current;
  std::string token;

  auto flush_token = [&]() {
    if (!token.empty() && all_alpha(token)) current.push_back(token);
    token.clear();
  };
  auto flush_sentence = [&]() {
    flush_token();
    if (!current.empty()) sentences.push_back(std::move(current));
    current.clear();
  };

  for (unsigned char c : text) {
    if (c == '.' || c == '?' || c == '!') {
      flush_sentence();
    } else if (std::isspace(c)) {
      flush_token();
    } else {
      token.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  flush_sentence();
  return sentences;
}

Vocabulary::Vocabulary(std::vector<std::string> kept_tokens) : kept_(std::move(kept_tokens)) {
  for (std::size_t i = 0; i < kept_.size(); ++i) {
    ids_[kept_[i]] = kReserved + static_cast<int>(i);
  }
}

int Vocabulary::id(const std::string& token) const {
  auto it = ids_.find(token);
  return it == ids_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::token(int id) const {
  if (id < 0 || id >= size()) throw DomainError("token id " + std::to_string(id) + " out of range");
  if (id < kReserved) return kReservedNames[static_cast<std::size_t>(id)];
  return kept_[static_cast<std::size_t>(id - kReserved)];
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open " + path + " for writing");
  for (const std::string& t : kept_) out << t << '\n';
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  std::vector<std::string> kept;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) kept.push_back(line);
  }
  return Vocabulary(std::move(kept));
}

TagVocabulary::TagVocabulary(std::vector<std::string> tags) : tags_(std::move(tags)) {
  for (std::size_t i = 0; i < tags_.size(); ++i) ids_[tags_[i]] = static_cast<int>(i);
  if (ids_.size() != tags_.size()) throw DomainError("duplicate tags in tag vocabulary");
}

int TagVocabulary::id(const std::string& tag) const {
  auto it = ids_.find(tag);
  return it == ids_.end() ? -1 : it->second;
}

const std::string& TagVocabulary::tag(int id) const {
  if (id < 0 || id >= size()) throw DomainError("tag id " + std::to_string(id) + " out of range");
  return tags_[static_cast<std::size_t>(id)];
}

void TagVocabulary::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open " + path + " for writing");
  for (const std::string& t : tags_) out << t << '\n';
}

TagVocabulary TagVocabulary::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  std::vector<std::string> tags;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) tags.push_back(line);
  }
  return TagVocabulary(std::move(tags));
}

VocabBuild build_vocab(const std::vector<Document>& docs, int max_size) {
  if (max_size < 1) throw DomainError("build_vocab: max_size must be >= 1");
  std::map<std::string, long> counts;
  long total = 0;
  for (const Document& doc : docs) {
    for (const auto& sentence : doc.token_sentences) {
      for (const std::string& token : sentence) {
        ++counts[token];
        ++total;
      }
    }
  }
  if (total == 0) throw DomainError("build_vocab: empty corpus");

  std::vector<std::pair<std::string, long>> ranked(counts.begin(), counts.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  std::vector<std::string> kept;
  long kept_occurrences = 0;
  for (std::size_t i = 0; i < ranked.size() && i < static_cast<std::size_t>(max_size); ++i) {
    kept.push_back(ranked[i].first);
    kept_occurrences += ranked[i].second;
  }

  VocabBuild out;
  out.vocab = Vocabulary(std::move(kept));
  out.coverage = static_cast<double>(kept_occurrences) / static_cast<double>(total);
  return out;
}

std::vector<std::vector<std::string>> extract_tags_tfidf(const std::vector<Document>& docs, int k) {
  if (k < 1) throw DomainError("extract_tags_tfidf: k must be >= 1");
  std::map<std::string, int> doc_freq;
  for (const Document& doc : docs) {
    std::set<std::string> seen;
    for (const auto& sentence : doc.token_sentences) {
      seen.insert(sentence.begin(), sentence.end());
    }
    for (const std::string& token : seen) ++doc_freq[token];
  }

  double num_docs = static_cast<double>(docs.size());
  std::vector<std::vector<std::string>> out;
  out.reserve(docs.size());
  for (const Document& doc : docs) {
    std::map<std::string, int> tf;
    for (const auto& sentence : doc.token_sentences) {
      for (const std::string& token : sentence) ++tf[token];
    }
    struct Entry {
      std::string token;
      double score;
      int tf;
    };
    std::vector<Entry> entries;
    entries.reserve(tf.size());
    for (const auto& [token, count] : tf) {
      double idf = std::log(num_docs / doc_freq.at(token));
      entries.push_back({token, count * idf, count});
    }
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
      if (a.score != b.score) return a.score > b.score;
      if (a.tf != b.tf) return a.tf > b.tf;
      return a.token < b.token;
    });
    std::vector<std::string> tags;
    for (std::size_t i = 0; i < entries.size() && i < static_cast<std::size_t>(k); ++i) {
      tags.push_back(entries[i].token);
    }
    out.push_back(std::move(tags));
  }
  return out;
}

SplitResult split(const std::vector<Document>& docs, std::uint64_t seed, int val_count,
                  int test_count) {
  if (val_count < 0 || test_count < 0 ||
      val_count + test_count >= static_cast<int>(docs.size())) {
    throw DomainError("split: val " + std::to_string(val_count) + " + test " +
                      std::to_string(test_count) + " must leave a nonempty train set of " +
                      std::to_string(docs.size()) + " documents");
  }
  std::vector<std::size_t> order(docs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);

  SplitResult out;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const Document& doc = docs[order[i]];
    if (i < static_cast<std::size_t>(val_count)) {
      out.val.push_back(doc);
    } else if (i < static_cast<std::size_t>(val_count + test_count)) {
      out.test.push_back(doc);
    } else {
      out.train.push_back(doc);
    }
  }
  return out;
}

CorpusStats corpus_stats(const std::vector<Document>& docs, int coverage_k) {
  if (docs.empty()) throw DomainError("corpus_stats: empty corpus");

  CorpusStats stats;
  stats.num_documents = static_cast<int>(docs.size());
  stats.coverage_k = coverage_k;

  std::set<std::string> tags;
  std::map<std::string, long> word_counts;
  long total_sentences = 0;
  long total_words = 0;
  long total_tags = 0;
  for (const Document& doc : docs) {
    total_tags += static_cast<long>(doc.tags.size());
    tags.insert(doc.tags.begin(), doc.tags.end());
    total_sentences += static_cast<long>(doc.token_sentences.size());
    for (const auto& sentence : doc.token_sentences) {
      total_words += static_cast<long>(sentence.size());
      for (const std::string& token : sentence) ++word_counts[token];
    }
  }

  stats.unique_tags = static_cast<int>(tags.size());
  stats.unique_words = static_cast<int>(word_counts.size());
  stats.avg_tags_per_image = static_cast<double>(total_tags) / docs.size();
  stats.avg_sentences = static_cast<double>(total_sentences) / docs.size();
  stats.avg_words_per_sentence =
      total_sentences == 0 ? 0.0 : static_cast<double>(total_words) / total_sentences;

  if (total_words > 0) {
    std::vector<long> counts;
    counts.reserve(word_counts.size());
    for (const auto& [token, count] : word_counts) counts.push_back(count);
    std::sort(counts.rbegin(), counts.rend());
    long covered = 0;
    for (std::size_t i = 0; i < counts.size() && i < static_cast<std::size_t>(coverage_k); ++i) {
      covered += counts[i];
    }
    stats.top_k_word_coverage = static_cast<double>(covered) / total_words;
  }
  return stats;
}

void encode_document(Document& doc, const Vocabulary& vocab, const TagVocabulary& tags) {
  doc.sentences.clear();
  for (const auto& sentence : doc.token_sentences) {
    std::vector<int> ids;
    ids.reserve(sentence.size());
    for (const std::string& token : sentence) ids.push_back(vocab.id(token));
    doc.sentences.push_back(std::move(ids));
  }
  doc.tag_ids.clear();
  for (const std::string& tag : doc.tags) {
    int id = tags.id(tag);
    if (id >= 0) doc.tag_ids.push_back(id);
  }
}

std::vector<Document> read_corpus_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus file " + path);
  std::vector<Document> docs;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (!obj.is_object() || !obj.contains("id") || !obj.contains("report")) {
      throw DataError(path + ":" + std::to_string(line_no) + ": need object with id and report");
    }
    Document doc;
    doc.id = obj.at("id").get<std::string>();
    doc.raw_text = obj.at("report").get<std::string>();
    doc.token_sentences = tokenize(doc.raw_text);
    if (obj.contains("tags")) doc.tags = obj.at("tags").get<std::vector<std::string>>();
    if (obj.contains("features")) doc.feature_path = obj.at("features").get<std::string>();
    if (obj.contains("image")) doc.image_path = obj.at("image").get<std::string>();
    docs.push_back(std::move(doc));
  }
  return docs;
}

void write_corpus_jsonl(const std::string& path, const std::vector<Document>& docs) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path + " for writing");
  for (const Document& doc : docs) {
    json obj;
    obj["id"] = doc.id;
    obj["report"] = doc.raw_text;
    obj["tags"] = doc.tags;
    if (!doc.feature_path.empty()) obj["features"] = doc.feature_path;
    if (!doc.image_path.empty()) obj["image"] = doc.image_path;
    out << obj.dump() << '\n';
  }
}

}  // namespace higen
