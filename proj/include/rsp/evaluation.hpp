#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "rsp/annotation.hpp"
#include "rsp/tree.hpp"

namespace rsp {

struct PRF {
  double recall = 0.0;
  double precision = 0.0;
  double f1 = 0.0;
};

// One bracket per internal node: (span, the node's own label). Unary chain
// members share a span; POS leaves are excluded; the root counts.
inline std::vector<std::pair<Span, std::string>> labeled_brackets(
    const Tree& tree) {
  std::vector<std::pair<Span, std::string>> out;
  auto walk = [&](const Tree& node, int start, auto&& self) -> int {
    if (node.is_leaf()) return start + 1;
    int end = start;
    for (const Tree& c : node.children) end = self(c, end, self);
    out.push_back({Span{start, end}, node.label});
    return end;
  };
  walk(tree, 0, walk);
  return out;
}

namespace detail {

using BracketBag = std::map<std::pair<Span, std::string>, std::size_t>;

inline BracketBag bracket_bag(const Tree& t) {
  BracketBag bag;
  for (const auto& b : labeled_brackets(t)) ++bag[b];
  return bag;
}

}  // namespace detail

// Micro-averaged labeled-bracket precision/recall/F1 over aligned tree lists.
inline PRF prf(const std::vector<Tree>& gold, const std::vector<Tree>& pred) {
  require(gold.size() == pred.size(), "prf: gold/pred sentence counts differ");
  std::size_t n_gold = 0, n_pred = 0, n_match = 0;
  for (std::size_t k = 0; k < gold.size(); ++k) {
    require(sentence_of(gold[k]) == sentence_of(pred[k]),
            strcat("prf: token mismatch in sentence ", k));
    detail::BracketBag g = detail::bracket_bag(gold[k]);
    detail::BracketBag p = detail::bracket_bag(pred[k]);
    for (const auto& [bracket, count] : g) n_gold += count;
    for (const auto& [bracket, count] : p) {
      n_pred += count;
      auto it = g.find(bracket);
      if (it != g.end()) n_match += std::min(count, it->second);
    }
  }
  PRF out;
  out.recall = n_gold == 0 ? 0.0 : 100.0 * static_cast<double>(n_match) /
                                       static_cast<double>(n_gold);
  out.precision = n_pred == 0 ? 0.0 : 100.0 * static_cast<double>(n_match) /
                                          static_cast<double>(n_pred);
  out.f1 = (out.precision + out.recall) == 0.0
               ? 0.0
               : 2.0 * out.precision * out.recall /
                     (out.precision + out.recall);
  return out;
}

struct PartialMetrics {
  double correct_constituents_pct = 0.0;
  double error_free_pct = 0.0;
  std::size_t declaration_count = 0;
  std::size_t correct_declarations = 0;
  std::size_t sentence_count = 0;
  std::size_t error_free_sentences = 0;
};

// Checks each declaration against the predicted tree: a constituent
// declaration holds iff the span is a constituent (with matching label
// sequence when one was declared); a non-constituent declaration holds iff
// the span is not a constituent.
inline bool declaration_satisfied(const SpanDeclaration& d,
                                  const Parse& pred_spans) {
  const LabelSeq& seq = pred_spans.at(d.span);
  if (d.kind == SpanDeclaration::Kind::non_constituent) return seq.empty();
  if (seq.empty()) return false;
  return !d.label || *d.label == seq;
}

inline PartialMetrics partial_metrics(
    const std::vector<Tree>& preds,
    const std::vector<PartialAnnotation>& anns) {
  require(preds.size() == anns.size(),
          "partial_metrics: prediction/annotation counts differ");
  PartialMetrics m;
  m.sentence_count = anns.size();
  for (std::size_t k = 0; k < anns.size(); ++k) {
    require(sentence_of(preds[k]) == anns[k].sentence,
            strcat("partial_metrics: token mismatch in sentence ", k));
    Parse spans = tree_to_spans(preds[k]);
    bool all_ok = true;
    for (const SpanDeclaration& d : anns[k].declarations) {
      ++m.declaration_count;
      bool ok = declaration_satisfied(d, spans);
      m.correct_declarations += ok;
      all_ok = all_ok && ok;
    }
    m.error_free_sentences += all_ok;  // vacuously error-free if undeclared
  }
  m.correct_constituents_pct =
      m.declaration_count == 0
          ? 0.0
          : 100.0 * static_cast<double>(m.correct_declarations) /
                static_cast<double>(m.declaration_count);
  m.error_free_pct = m.sentence_count == 0
                         ? 0.0
                         : 100.0 * static_cast<double>(m.error_free_sentences) /
                               static_cast<double>(m.sentence_count);
  return m;
}

// Token-level POS tag accuracy (percent).
inline double pos_accuracy(const std::vector<Tree>& gold,
                           const std::vector<Tree>& pred) {
  require(gold.size() == pred.size(),
          "pos_accuracy: gold/pred sentence counts differ");
  std::size_t total = 0, correct = 0;
  for (std::size_t k = 0; k < gold.size(); ++k) {
    require(sentence_of(gold[k]) == sentence_of(pred[k]),
            strcat("pos_accuracy: token mismatch in sentence ", k));
    auto g = pos_tags_of(gold[k]);
    auto p = pos_tags_of(pred[k]);
    total += g.size();
    for (std::size_t t = 0; t < g.size(); ++t) correct += g[t] == p[t];
  }
  return total == 0 ? 0.0
                    : 100.0 * static_cast<double>(correct) /
                          static_cast<double>(total);
}

// One-sided two-sample difference-between-proportions test. Advisory output
// only: p-value for "proportion 2 > proportion 1".
inline double proportion_test_pvalue(std::size_t hits1, std::size_t n1,
                                     std::size_t hits2, std::size_t n2) {
  require(n1 > 0 && n2 > 0, "proportion test: empty sample");
  double p1 = static_cast<double>(hits1) / static_cast<double>(n1);
  double p2 = static_cast<double>(hits2) / static_cast<double>(n2);
  double pooled = static_cast<double>(hits1 + hits2) /
                  static_cast<double>(n1 + n2);
  double se = std::sqrt(pooled * (1.0 - pooled) *
                        (1.0 / static_cast<double>(n1) +
                         1.0 / static_cast<double>(n2)));
  if (se == 0.0) return p2 > p1 ? 0.0 : 1.0;
  double z = (p2 - p1) / se;
  return 0.5 * std::erfc(z / std::sqrt(2.0));
}

}  // namespace rsp
