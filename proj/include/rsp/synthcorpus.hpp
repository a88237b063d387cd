#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "rsp/annotation.hpp"
#include "rsp/common.hpp"
#include "rsp/tree.hpp"

namespace rsp {

struct Production {
  double weight = 1.0;
  std::string lhs;
  std::vector<std::string> rhs;

  bool operator==(const Production&) const = default;
  auto operator<=>(const Production&) const = default;
};

// Weighted CFG. Symbols appearing on a left-hand side are non-terminals;
// the rest are terminals. A non-terminal whose productions rewrite to single
// terminals is a preterminal (POS tag) and may rewrite no other way.
struct Grammar {
  std::string start = "S";
  std::vector<Production> productions;

  std::map<std::string, std::vector<std::size_t>> by_lhs;
  std::set<std::string> nonterminals;
  std::set<std::string> preterminals;

  void index() {
    by_lhs.clear();
    nonterminals.clear();
    preterminals.clear();
    for (std::size_t k = 0; k < productions.size(); ++k) {
      by_lhs[productions[k].lhs].push_back(k);
      nonterminals.insert(productions[k].lhs);
    }
    for (const auto& [lhs, prods] : by_lhs) {
      bool all_single_terminal = true;
      for (std::size_t k : prods) {
        const auto& rhs = productions[k].rhs;
        all_single_terminal = all_single_terminal && rhs.size() == 1 &&
                              !nonterminals.count(rhs[0]);
      }
      if (all_single_terminal) preterminals.insert(lhs);
    }
  }

  void validate() const {
    require(!productions.empty(), "grammar: no productions");
    require(nonterminals.count(start),
            strcat("grammar: start symbol '", start, "' has no productions"));
    for (const Production& p : productions) {
      require(p.weight > 0.0, strcat("grammar: non-positive weight for ",
                                     p.lhs));
      require(!p.rhs.empty(), strcat("grammar: empty right-hand side for ",
                                     p.lhs));
      if (!preterminals.count(p.lhs)) {
        for (const std::string& sym : p.rhs)
          require(nonterminals.count(sym),
                  strcat("grammar: bare terminal '", sym,
                         "' outside a preterminal rule for ", p.lhs));
      }
    }
    // productive: can derive a finite terminal string
    std::set<std::string> productive(preterminals.begin(), preterminals.end());
    bool changed = true;
    while (changed) {
      changed = false;
      for (const Production& p : productions) {
        if (productive.count(p.lhs)) continue;
        bool all = true;
        for (const std::string& sym : p.rhs)
          all = all && (productive.count(sym) || !nonterminals.count(sym));
        if (all) {
          productive.insert(p.lhs);
          changed = true;
        }
      }
    }
    for (const std::string& nt : nonterminals)
      require(productive.count(nt),
              strcat("grammar: non-terminal ", nt, " is unproductive"));
    // reachable from start
    std::set<std::string> reachable{start};
    changed = true;
    while (changed) {
      changed = false;
      for (const Production& p : productions) {
        if (!reachable.count(p.lhs)) continue;
        for (const std::string& sym : p.rhs)
          if (nonterminals.count(sym) && reachable.insert(sym).second)
            changed = true;
      }
    }
    for (const std::string& nt : nonterminals)
      require(reachable.count(nt),
              strcat("grammar: non-terminal ", nt, " is unreachable"));
  }
};

// One production per line: `WEIGHT LHS -> RHS...`; '#' comments.
inline Grammar parse_grammar(const std::string& text,
                             const std::string& start = "S") {
  Grammar g;
  g.start = start;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::vector<std::string> toks = split_ws(line);
    if (toks.empty()) continue;
    if (toks.size() < 4 || toks[2] != "->")
      fail("grammar line ", lineno, ": expected `WEIGHT LHS -> RHS...`");
    Production p;
    try {
      std::size_t used = 0;
      p.weight = std::stod(toks[0], &used);
      require(used == toks[0].size(), "trailing junk");
    } catch (...) {
      fail("grammar line ", lineno, ": bad weight '", toks[0], "'");
    }
    p.lhs = toks[1];
    p.rhs.assign(toks.begin() + 3, toks.end());
    g.productions.push_back(std::move(p));
  }
  g.index();
  g.validate();
  return g;
}

inline Grammar load_grammar(const std::string& path,
                            const std::string& start = "S") {
  std::ifstream in(path);
  if (!in) fail("cannot open grammar file: ", path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  try {
    return parse_grammar(text, start);
  } catch (const Error& e) {
    fail(path, ": ", e.what());
  }
}

namespace detail {

// Weighted top-down expansion. Returns false when the partial derivation
// already exceeds the leaf budget (the attempt is then rejected).
inline bool expand_symbol(const Grammar& g, const std::string& sym, Rng& rng,
                          std::size_t max_leaves, std::size_t depth,
                          std::size_t& leaves, Tree& out) {
  if (depth > 256) return false;  // runaway derivation, reject attempt
  const auto& prods = g.by_lhs.at(sym);
  double total = 0.0;
  for (std::size_t k : prods) total += g.productions[k].weight;
  double u = rng.uniform01() * total;
  std::size_t chosen = prods.back();
  for (std::size_t k : prods) {
    u -= g.productions[k].weight;
    if (u < 0.0) {
      chosen = k;
      break;
    }
  }
  const Production& p = g.productions[chosen];
  if (g.preterminals.count(sym)) {
    if (++leaves > max_leaves) return false;
    out = Tree{sym, p.rhs[0], {}};
    return true;
  }
  out = Tree{sym, "", {}};
  out.children.reserve(p.rhs.size());
  for (const std::string& child_sym : p.rhs) {
    Tree child;
    if (!expand_symbol(g, child_sym, rng, max_leaves, depth + 1, leaves,
                       child))
      return false;
    out.children.push_back(std::move(child));
  }
  return true;
}

}  // namespace detail

// Samples `count` trees by weighted top-down expansion, rejecting derivations
// longer than max_len tokens. Deterministic in seed; each sentence draws from
// its own forked stream.
inline std::vector<Tree> sample_corpus(const Grammar& g, std::size_t count,
                                       std::size_t max_len,
                                       std::uint64_t seed) {
  require(count >= 1, "sample_corpus: count must be >= 1");
  constexpr std::size_t kMaxAttempts = 10000;
  std::vector<Tree> trees;
  trees.reserve(count);
  Rng root(seed);
  for (std::size_t s = 0; s < count; ++s) {
    Rng rng = root.fork(s);
    bool ok = false;
    for (std::size_t attempt = 0; attempt < kMaxAttempts && !ok; ++attempt) {
      Tree t;
      std::size_t leaves = 0;
      if (detail::expand_symbol(g, g.start, rng, max_len, 0, leaves, t)) {
        trees.push_back(std::move(t));
        ok = true;
      }
    }
    if (!ok)
      fail("sample_corpus: no derivation of length <= ", max_len, " found in ",
           kMaxAttempts, " attempts");
  }
  return trees;
}

// ---- built-in source/target grammar pair ----
//
// The two grammars share a newswire-flavoured core. The target grammar adds
// geometry-style constructions that never occur in the source: flat equation
// noun phrases ("AB = 4"), noun-label compounds ("chord BD"), and
// right-attaching participials ("the segment labeled x").

namespace detail {

inline const char* builtin_core_text() {
  return R"(# shared core
1.0  S  -> NP VP PUNCT
1.0  NP -> DT NN
0.4  NP -> DT JJ NN
0.35 NP -> NP PP
1.0  PP -> IN NP
1.0  VP -> VBZ NP
0.4  VP -> VBZ PP
1.0  PUNCT -> .
1.0  DT -> the
0.4  DT -> a
1.0  NN -> line
0.9  NN -> figure
0.8  NN -> point
0.7  NN -> plan
0.6  NN -> report
1.0  JJ -> new
0.7  JJ -> equal
0.5  JJ -> small
1.0  IN -> in
0.8  IN -> of
0.7  IN -> with
0.6  IN -> at
0.5  IN -> to
1.0  VBZ -> shows
0.8  VBZ -> has
0.9  VBZ -> is
)";
}

inline const char* builtin_source_only_text() {
  return R"(# source-only: finance-flavoured constructions
0.5  NP -> PRP
0.3  NP -> NNP
0.2  NP -> NP CC NP
0.6  VP -> VBD NP
0.3  VP -> VBD PP
1.0  PRP -> it
0.7  PRP -> he
0.6  PRP -> she
1.0  VBD -> rose
0.9  VBD -> fell
0.8  VBD -> bought
0.7  VBD -> sold
1.0  CC -> and
0.4  CC -> but
1.0  NNP -> Acme
0.8  NNP -> Delta
0.6  NNP -> Omega
0.9  NN -> price
0.8  NN -> company
0.7  NN -> investor
0.6  NN -> quarter
0.5  NN -> profit
0.5  JJ -> strong
0.4  JJ -> late
0.6  VBZ -> sees
0.5  VBZ -> buys
)";
}

inline const char* builtin_target_only_text() {
  return R"(# target-only: geometry-flavoured constructions
0.5  S  -> VB NP PUNCT
0.7  S  -> VB NP PP PUNCT
1.1  S  -> PP COMMA NP VP PUNCT
1.0  NP -> NN NNP
0.9  NP -> NNP SYM NUM
0.8  NP -> DT NN VP
0.45 NP -> NP CONJ NP
0.8  VP -> VBN NNP
0.5  VP -> VBZ JJ PP
1.0  COMMA -> ,
1.0  CONJ -> and
0.4  CONJ -> or
1.0  VB -> Find
0.8  VB -> Examine
0.6  VB -> Draw
1.0  VBN -> labeled
0.8  VBN -> designated
0.6  VBN -> shown
0.5  VBN -> indicated
1.0  SYM -> =
1.0  NUM -> 4
0.9  NUM -> 5
0.8  NUM -> 9
0.7  NUM -> 10
0.6  NUM -> 24
0.5  NUM -> 3
1.0  NNP -> AB
0.9  NNP -> AC
0.8  NNP -> BD
0.7  NNP -> CD
0.6  NNP -> PQ
0.5  NNP -> E
0.4  NNP -> x
0.3  NNP -> t
0.9  NN -> chord
0.8  NN -> diameter
0.7  NN -> segment
0.6  NN -> triangle
0.5  NN -> angle
0.4  NN -> radius
0.3  NN -> hypotenuse
0.2  NN -> center
0.6  JJ -> perpendicular
0.4  JJ -> parallel
0.3  VBZ -> equals
)";
}

}  // namespace detail

inline std::vector<Production> builtin_shared_core() {
  return parse_grammar(detail::builtin_core_text()).productions;
}

inline std::pair<Grammar, Grammar> builtin_grammars() {
  std::string core = detail::builtin_core_text();
  Grammar source = parse_grammar(core + detail::builtin_source_only_text());
  Grammar target = parse_grammar(core + detail::builtin_target_only_text());
  return {std::move(source), std::move(target)};
}

// ---- partial-annotation synthesis ----

struct AnnotationPolicy {
  double constituent_mean = 2.8;     // declarations per sentence
  double nonconstituent_mean = 0.3;  // explicit non-constituents per sentence
  double label_prob = 0.0;           // chance a declaration carries its label
  std::uint64_t seed = 1;
};

// Emits one markup line per tree. Constituent declarations are sampled from
// the gold tree's non-root constituents; explicit non-constituent
// declarations from spans the gold tree rejects. Everything stays mutually
// non-crossing so the markup nests.
inline std::vector<std::string> make_partial_annotations(
    const std::vector<Tree>& trees, const AnnotationPolicy& policy) {
  Rng root(policy.seed);
  std::vector<std::string> lines;
  lines.reserve(trees.size());
  for (std::size_t s = 0; s < trees.size(); ++s) {
    Rng rng = root.fork(s);
    const Tree& tree = trees[s];
    Parse gold = tree_to_spans(tree);
    const int n = static_cast<int>(gold.n());

    std::vector<Span> constituents;
    std::vector<Span> rejects;
    for_each_span(gold.n(), [&](Span sp) {
      if (sp == Span{0, n}) return;
      if (!gold.at(sp).empty())
        constituents.push_back(sp);
      else
        rejects.push_back(sp);
    });

    std::vector<SpanDeclaration> decls;
    auto compatible = [&](Span sp) {
      for (const SpanDeclaration& d : decls)
        if (crosses(sp, d.span)) return false;
      return true;
    };

    shuffle(constituents, rng);
    std::size_t want = static_cast<std::size_t>(
        rng.poisson(policy.constituent_mean));
    for (Span sp : constituents) {
      if (decls.size() >= want) break;
      std::optional<LabelSeq> label;
      if (rng.bernoulli(policy.label_prob)) label = gold.at(sp);
      decls.push_back({sp, SpanDeclaration::Kind::constituent, label});
    }

    shuffle(rejects, rng);
    std::size_t want_nc = static_cast<std::size_t>(
        rng.poisson(policy.nonconstituent_mean));
    std::size_t got_nc = 0;
    for (Span sp : rejects) {
      if (got_nc >= want_nc) break;
      if (!compatible(sp)) continue;
      decls.push_back({sp, SpanDeclaration::Kind::non_constituent,
                       std::nullopt});
      ++got_nc;
    }

    std::sort(decls.begin(), decls.end(),
              [](const SpanDeclaration& a, const SpanDeclaration& b) {
                return a.span < b.span;
              });
    lines.push_back(write_markup(sentence_of(tree), decls));
  }
  return lines;
}

inline void write_lines(const std::string& path,
                        const std::vector<std::string>& lines) {
  std::ofstream out(path);
  if (!out) fail("cannot write file: ", path);
  for (const std::string& line : lines) out << line << '\n';
}

}  // namespace rsp
