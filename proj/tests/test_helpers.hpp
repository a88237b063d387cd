#pragma once

#include <string>
#include <vector>

#include "rsp/common.hpp"
#include "rsp/tree.hpp"

namespace rsp::testing {

// The running example tree used throughout the tests:
// "She enjoys playing tennis ."
inline Tree example_tree() {
  auto trees = parse_ptb(
      "(S (NP (PRP She)) (VP (VBZ enjoys) (S (VP (VBG playing) "
      "(NP (NN tennis))))) (. .))");
  return trees.at(0);
}

// Random well-formed tree over a fixed small alphabet. Internal nodes get
// 1..3 children; unary chains appear with small probability.
inline Tree random_tree(Rng& rng, int max_tokens = 8) {
  static const std::vector<std::string> labels = {"S", "NP", "VP", "PP"};
  static const std::vector<std::string> tags = {"DT", "NN", "VB", "IN"};
  static const std::vector<std::string> words = {"a", "b", "c", "d", "e"};

  int n = 1 + static_cast<int>(rng.index(static_cast<std::size_t>(max_tokens)));
  auto build = [&](int lo, int hi, int depth, auto&& self) -> Tree {
    Tree node{labels[rng.index(labels.size())], "", {}};
    if (hi - lo == 1) {
      Tree leaf{tags[rng.index(tags.size())], words[rng.index(words.size())],
                {}};
      if (depth > 0 && rng.bernoulli(0.3)) {
        node.children.push_back(std::move(leaf));
        return node;  // unary non-terminal above a single tagged word
      }
      return leaf;
    }
    // split into 2..min(3,width) parts
    int width = hi - lo;
    int parts = 2 + static_cast<int>(rng.index(
                        static_cast<std::size_t>(std::min(2, width - 1))));
    std::vector<int> cuts{lo, hi};
    while (static_cast<int>(cuts.size()) < parts + 1) {
      int c = lo + 1 + static_cast<int>(
                           rng.index(static_cast<std::size_t>(width - 1)));
      bool dup = false;
      for (int x : cuts) dup = dup || x == c;
      if (!dup) cuts.push_back(c);
    }
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k)
      node.children.push_back(self(cuts[k], cuts[k + 1], depth + 1, self));
    if (depth > 0 && rng.bernoulli(0.2) && node.label != labels[0])
      return Tree{labels[0], "", {std::move(node)}};  // unary chain
    return node;
  };
  Tree t = build(0, n, 0, build);
  if (t.is_leaf()) t = Tree{labels[rng.index(labels.size())], "", {std::move(t)}};
  return t;
}

}  // namespace rsp::testing
