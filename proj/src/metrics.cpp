#include "higen/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <set>

#include <json.hpp>

namespace higen {

namespace {

using Counts = std::map<std::string, double>;

// n-gram key: tokens joined with an unlikely separator byte.
std::string ngram_key(const std::vector<std::string>& tokens, std::size_t start, int n) {
  std::string key;
  for (int i = 0; i < n; ++i) {
    if (i) key.push_back('\x1f');
    key += tokens[start + static_cast<std::size_t>(i)];
  }
  return key;
}

Counts ngram_counts(const std::vector<std::string>& tokens, int n) {
  Counts counts;
  if (static_cast<int>(tokens.size()) < n) return counts;
  for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= tokens.size(); ++i) {
    counts[ngram_key(tokens, i, n)] += 1.0;
  }
  return counts;
}

int lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<int> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

void require_pairs(const std::vector<EvalPair>& pairs, const char* what) {
  if (pairs.empty()) throw DomainError(std::string(what) + ": no pairs");
  for (const EvalPair& p : pairs) {
    if (p.references.empty()) throw DomainError(std::string(what) + ": pair without references");
  }
}

}  // namespace

double bleu(const std::vector<EvalPair>& pairs, int n) {
  if (n < 1 || n > 4) throw DomainError("bleu: n must be in 1..4");
  require_pairs(pairs, "bleu");

  std::vector<double> matched(static_cast<std::size_t>(n), 0.0);
  std::vector<double> attempted(static_cast<std::size_t>(n), 0.0);
  double candidate_len = 0.0;
  double reference_len = 0.0;

  for (const EvalPair& pair : pairs) {
    candidate_len += static_cast<double>(pair.candidate.size());

    // closest reference length; ties prefer the shorter reference
    long best_diff = -1;
    std::size_t closest = 0;
    for (const auto& ref : pair.references) {
      long diff = std::labs(static_cast<long>(ref.size()) -
                            static_cast<long>(pair.candidate.size()));
      if (best_diff < 0 || diff < best_diff ||
          (diff == best_diff && ref.size() < closest)) {
        best_diff = diff;
        closest = ref.size();
      }
    }
    reference_len += static_cast<double>(closest);

    for (int k = 1; k <= n; ++k) {
      Counts cand = ngram_counts(pair.candidate, k);
      Counts clip;
      for (const auto& ref : pair.references) {
        for (const auto& [gram, count] : ngram_counts(ref, k)) {
          double& best = clip[gram];
          best = std::max(best, count);
        }
      }
      for (const auto& [gram, count] : cand) {
        attempted[static_cast<std::size_t>(k - 1)] += count;
        auto it = clip.find(gram);
        if (it != clip.end()) {
          matched[static_cast<std::size_t>(k - 1)] += std::min(count, it->second);
        }
      }
    }
  }

  double log_precision = 0.0;
  for (int k = 0; k < n; ++k) {
    if (matched[static_cast<std::size_t>(k)] <= 0.0 ||
        attempted[static_cast<std::size_t>(k)] <= 0.0) {
      return 0.0;
    }
    log_precision +=
        std::log(matched[static_cast<std::size_t>(k)] / attempted[static_cast<std::size_t>(k)]) /
        n;
  }
  double brevity =
      candidate_len >= reference_len ? 1.0 : std::exp(1.0 - reference_len / candidate_len);
  return brevity * std::exp(log_precision);
}

double rouge_l(const std::vector<EvalPair>& pairs) {
  require_pairs(pairs, "rouge_l");
  constexpr double kBeta = 1.2;

  double total = 0.0;
  for (const EvalPair& pair : pairs) {
    double best = 0.0;
    for (const auto& ref : pair.references) {
      if (pair.candidate.empty() || ref.empty()) continue;
      double lcs = static_cast<double>(lcs_length(pair.candidate, ref));
      if (lcs == 0.0) continue;
      double precision = lcs / static_cast<double>(pair.candidate.size());
      double recall = lcs / static_cast<double>(ref.size());
      double f = (1.0 + kBeta * kBeta) * precision * recall / (recall + kBeta * kBeta * precision);
      best = std::max(best, f);
    }
    total += best;
  }
  return total / static_cast<double>(pairs.size());
}

double cider(const std::vector<EvalPair>& pairs) {
  require_pairs(pairs, "cider");
  constexpr int kMaxN = 4;
  constexpr double kSigma = 6.0;

  // document frequency over reference sets, per n-gram order
  std::vector<Counts> doc_freq(kMaxN);
  for (const EvalPair& pair : pairs) {
    for (int n = 1; n <= kMaxN; ++n) {
      std::set<std::string> seen;
      for (const auto& ref : pair.references) {
        for (const auto& [gram, count] : ngram_counts(ref, n)) seen.insert(gram);
      }
      for (const std::string& gram : seen) doc_freq[static_cast<std::size_t>(n - 1)][gram] += 1.0;
    }
  }
  double log_corpus = std::log(static_cast<double>(pairs.size()));

  auto tfidf = [&](const std::vector<std::string>& tokens, int n) {
    Counts vec = ngram_counts(tokens, n);
    double norm_sq = 0.0;
    for (auto& [gram, count] : vec) {
      const Counts& df_map = doc_freq[static_cast<std::size_t>(n - 1)];
      auto it = df_map.find(gram);
      double df = it == df_map.end() ? 0.0 : it->second;
      count *= log_corpus - std::log(std::max(1.0, df));
      norm_sq += count * count;
    }
    return std::make_pair(std::move(vec), std::sqrt(norm_sq));
  };

  double total = 0.0;
  for (const EvalPair& pair : pairs) {
    double pair_score = 0.0;
    for (int n = 1; n <= kMaxN; ++n) {
      auto [cand_vec, cand_norm] = tfidf(pair.candidate, n);
      double sim_sum = 0.0;
      for (const auto& ref : pair.references) {
        auto [ref_vec, ref_norm] = tfidf(ref, n);
        if (cand_norm == 0.0 || ref_norm == 0.0) continue;
        double dot = 0.0;
        for (const auto& [gram, weight] : cand_vec) {
          auto it = ref_vec.find(gram);
          if (it != ref_vec.end()) dot += std::min(weight, it->second) * it->second;
        }
        double delta = static_cast<double>(pair.candidate.size()) -
                       static_cast<double>(ref.size());
        sim_sum += dot / (cand_norm * ref_norm) *
                   std::exp(-delta * delta / (2.0 * kSigma * kSigma));
      }
      pair_score += sim_sum / static_cast<double>(pair.references.size());
    }
    total += 10.0 * pair_score / kMaxN;
  }
  return total / static_cast<double>(pairs.size());
}

std::pair<double, double> normality_portion(
    const std::vector<std::vector<std::vector<std::string>>>& reports) {
  static const std::set<std::string> kNormalTokens = {"no", "normal", "clear", "stable"};
  long total = 0;
  long normal = 0;
  for (const auto& report : reports) {
    for (const auto& sentence : report) {
      ++total;
      for (const std::string& token : sentence) {
        if (kNormalTokens.count(token)) {
          ++normal;
          break;
        }
      }
    }
  }
  if (total == 0) throw DomainError("normality_portion: no sentences");
  double portion = static_cast<double>(normal) / static_cast<double>(total);
  return {portion, 1.0 - portion};
}

EvalReport evaluate_corpus(const std::vector<EvalPair>& pairs,
                           const std::vector<std::vector<std::vector<std::string>>>& reports) {
  EvalReport out;
  out.bleu1 = bleu(pairs, 1);
  out.bleu2 = bleu(pairs, 2);
  out.bleu3 = bleu(pairs, 3);
  out.bleu4 = bleu(pairs, 4);
  out.rouge_l = rouge_l(pairs);
  out.cider = cider(pairs);
  auto [normal, abnormal] = normality_portion(reports);
  out.normality = normal;
  out.abnormality = abnormal;
  return out;
}

std::string eval_report_json(const EvalReport& report) {
  nlohmann::json obj;
  obj["bleu1"] = report.bleu1;
  obj["bleu2"] = report.bleu2;
  obj["bleu3"] = report.bleu3;
  obj["bleu4"] = report.bleu4;
  obj["rouge_l"] = report.rouge_l;
  obj["cider"] = report.cider;
  obj["normality_portion"] = report.normality;
  obj["abnormality_portion"] = report.abnormality;
  return obj.dump();
}

}  // namespace higen
