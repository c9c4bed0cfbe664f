#pragma once

#include <string>
#include <utility>
#include <vector>

#include "higen/errors.hpp"

namespace higen {

// One scored report: the flattened candidate token sequence against one or
// more reference token sequences.
struct EvalPair {
  std::vector<std::string> candidate;
  std::vector<std::vector<std::string>> references;
};

// Corpus-level BLEU up to n-grams: geometric mean of clipped modified
// precisions times the brevity penalty exp(min(0, 1 - r/c)), with r summed
// from each segment's closest reference length.
double bleu(const std::vector<EvalPair>& pairs, int n);

// Mean LCS-based F-measure with beta = 1.2, best reference per pair.
double rouge_l(const std::vector<EvalPair>& pairs);

// tf-idf n-gram cosine consensus (n = 1..4) with candidate counts clipped to
// the reference, a Gaussian length penalty (sigma = 6) and x10 scaling; idf
// comes from the reference corpus. Degenerate single-pair corpora score 0
// because every idf is ln(1) = 0.
double cider(const std::vector<EvalPair>& pairs);

// Portion of sentences containing any of the tokens no/normal/clear/stable,
// and its exact complement.
std::pair<double, double> normality_portion(
    const std::vector<std::vector<std::vector<std::string>>>& reports);

struct EvalReport {
  double bleu1 = 0.0, bleu2 = 0.0, bleu3 = 0.0, bleu4 = 0.0;
  double rouge_l = 0.0;
  double cider = 0.0;
  double normality = 0.0;
  double abnormality = 0.0;
};

EvalReport evaluate_corpus(const std::vector<EvalPair>& pairs,
                           const std::vector<std::vector<std::vector<std::string>>>& reports);

std::string eval_report_json(const EvalReport& report);

}  // namespace higen
