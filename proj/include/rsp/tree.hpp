#pragma once

#include <algorithm>
#include <compare>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "rsp/common.hpp"

namespace rsp {

struct Sentence {
  std::vector<std::string> tokens;

  std::size_t size() const { return tokens.size(); }
  std::string joined() const {
    std::string s;
    for (std::size_t t = 0; t < tokens.size(); ++t) {
      if (t) s += ' ';
      s += tokens[t];
    }
    return s;
  }
  bool operator==(const Sentence&) const = default;
};

// Fencepost span: covers tokens i..j-1, width j-i.
struct Span {
  int i = 0;
  int j = 0;
  int width() const { return j - i; }
  auto operator<=>(const Span&) const = default;
};

inline bool crosses(Span a, Span b) {
  return (a.i < b.i && b.i < a.j && a.j < b.j) ||
         (b.i < a.i && a.i < b.j && b.j < a.j);
}

inline bool nests_in(Span inner, Span outer) {
  return outer.i <= inner.i && inner.j <= outer.j;
}

// Top-down chain of non-terminals over one span. Empty = non-constituent.
struct LabelSeq {
  std::vector<std::string> symbols;

  bool empty() const { return symbols.empty(); }
  auto operator<=>(const LabelSeq&) const = default;

  std::string joined(char sep = '+') const {
    std::string s;
    for (std::size_t k = 0; k < symbols.size(); ++k) {
      if (k) s += sep;
      s += symbols[k];
    }
    return s;
  }
};

inline LabelSeq label_seq(std::initializer_list<std::string> symbols) {
  return LabelSeq{std::vector<std::string>(symbols)};
}

// Number of spans of a sentence with n tokens.
inline std::size_t span_count(std::size_t n) { return n * (n + 1) / 2; }

// Flat index of (i,j) in the (i asc, j asc) enumeration of spans(n).
inline std::size_t span_index(Span s, std::size_t n) {
  auto i = static_cast<std::size_t>(s.i);
  auto j = static_cast<std::size_t>(s.j);
  return i * n - i * (i - 1) / 2 + (j - i - 1);
}

template <class Fn>
void for_each_span(std::size_t n, Fn&& fn) {
  for (int i = 0; i < static_cast<int>(n); ++i)
    for (int j = i + 1; j <= static_cast<int>(n); ++j) fn(Span{i, j});
}

// Total map spans(x) -> LabelSeq. Not necessarily tree-shaped: the selected
// (non-empty) spans may cross.
struct Parse {
  Sentence sentence;
  std::vector<LabelSeq> labels;  // indexed by span_index

  explicit Parse(Sentence s = {})
      : sentence(std::move(s)), labels(span_count(sentence.size())) {}

  std::size_t n() const { return sentence.size(); }
  LabelSeq& at(Span s) { return labels[span_index(s, n())]; }
  const LabelSeq& at(Span s) const { return labels[span_index(s, n())]; }
  bool operator==(const Parse&) const = default;
};

// Phrase-structure tree. Internal nodes carry a non-terminal; leaves carry
// (POS tag, token), with the tag stored in `label`.
struct Tree {
  std::string label;
  std::string token;            // leaves only
  std::vector<Tree> children;   // empty for leaves

  bool is_leaf() const { return children.empty(); }
  bool operator==(const Tree&) const = default;

  std::size_t leaf_count() const {
    if (is_leaf()) return 1;
    std::size_t n = 0;
    for (const Tree& c : children) n += c.leaf_count();
    return n;
  }

  std::size_t internal_count() const {
    if (is_leaf()) return 0;
    std::size_t n = 1;
    for (const Tree& c : children) n += c.internal_count();
    return n;
  }
};

inline void collect_leaves(const Tree& t, std::vector<const Tree*>& out) {
  if (t.is_leaf()) {
    out.push_back(&t);
    return;
  }
  for (const Tree& c : t.children) collect_leaves(c, out);
}

inline Sentence sentence_of(const Tree& t) {
  std::vector<const Tree*> leaves;
  collect_leaves(t, leaves);
  Sentence s;
  s.tokens.reserve(leaves.size());
  for (const Tree* leaf : leaves) s.tokens.push_back(leaf->token);
  return s;
}

// POS tag per token position.
inline std::vector<std::string> pos_tags_of(const Tree& t) {
  std::vector<const Tree*> leaves;
  collect_leaves(t, leaves);
  std::vector<std::string> tags;
  tags.reserve(leaves.size());
  for (const Tree* leaf : leaves) tags.push_back(leaf->label);
  return tags;
}

// ---- bracketed-format IO ----

namespace detail {

inline std::string escape_token(const std::string& tok) {
  if (tok == "(") return "-LRB-";
  if (tok == ")") return "-RRB-";
  return tok;
}

inline std::string unescape_token(const std::string& tok) {
  if (tok == "-LRB-") return "(";
  if (tok == "-RRB-") return ")";
  return tok;
}

struct PtbToken {
  enum Kind { open, close, symbol } kind;
  std::string text;
  std::size_t pos;  // 1-based byte offset in the input
};

inline std::vector<PtbToken> lex_ptb(const std::string& text) {
  std::vector<PtbToken> toks;
  std::string cur;
  std::size_t cur_pos = 0;
  auto flush = [&] {
    if (!cur.empty()) {
      toks.push_back({PtbToken::symbol, cur, cur_pos});
      cur.clear();
    }
  };
  for (std::size_t k = 0; k < text.size(); ++k) {
    char c = text[k];
    if (c == '(') {
      flush();
      toks.push_back({PtbToken::open, "(", k + 1});
    } else if (c == ')') {
      flush();
      toks.push_back({PtbToken::close, ")", k + 1});
    } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      flush();
    } else {
      if (cur.empty()) cur_pos = k + 1;
      cur += c;
    }
  }
  flush();
  return toks;
}

inline bool is_root_wrapper(const Tree& t) {
  return !t.is_leaf() && t.children.size() == 1 && !t.children[0].is_leaf() &&
         (t.label == "TOP" || t.label == "ROOT");
}

}  // namespace detail

// Parses a sequence of balanced bracketed trees. Leaves are `(POS token)`;
// an outer TOP/ROOT wrapper (or a PTB-style unlabeled wrapper) is stripped.
inline std::vector<Tree> parse_ptb(const std::string& text) {
  std::vector<detail::PtbToken> toks = detail::lex_ptb(text);
  std::vector<Tree> trees;

  struct Frame {
    Tree node;
    bool has_label = false;
    std::size_t open_pos;
  };
  std::vector<Frame> stack;

  for (const auto& tok : toks) {
    switch (tok.kind) {
      case detail::PtbToken::open:
        stack.push_back(Frame{Tree{}, false, tok.pos});
        break;
      case detail::PtbToken::symbol:
        if (stack.empty())
          fail("stray token '", tok.text, "' outside parentheses at offset ",
               tok.pos);
        if (!stack.back().has_label) {
          stack.back().node.label = tok.text;
          stack.back().has_label = true;
        } else if (stack.back().node.children.empty() &&
                   stack.back().node.token.empty()) {
          stack.back().node.token = detail::unescape_token(tok.text);
        } else {
          fail("unexpected token '", tok.text, "' at offset ", tok.pos,
               ": node already complete");
        }
        break;
      case detail::PtbToken::close: {
        if (stack.empty()) fail("unbalanced ')' at offset ", tok.pos);
        Frame frame = std::move(stack.back());
        stack.pop_back();
        Tree& node = frame.node;
        bool is_leaf = !node.token.empty();
        if (is_leaf && !node.children.empty())
          fail("node with both token and children at offset ", frame.open_pos);
        if (!is_leaf && node.children.empty())
          fail("empty node at offset ", frame.open_pos);
        if (!frame.has_label || node.label.empty()) {
          // PTB files wrap each tree as "( (S ...) )"; accept that shape at
          // the top level only.
          if (stack.empty() && !is_leaf && node.children.size() == 1 &&
              !node.children[0].is_leaf()) {
            node = std::move(node.children[0]);
          } else {
            fail("internal node without label at offset ", frame.open_pos);
          }
        }
        if (stack.empty()) {
          if (detail::is_root_wrapper(node)) node = std::move(node.children[0]);
          trees.push_back(std::move(node));
        } else {
          stack.back().node.children.push_back(std::move(node));
        }
        break;
      }
    }
  }
  if (!stack.empty())
    fail("unbalanced '(' at offset ", text.size() + 1, " (opened at offset ",
         stack.back().open_pos, ")");
  return trees;
}

inline std::string write_ptb(const Tree& t) {
  std::string out;
  auto emit = [&](const Tree& node, auto&& self) -> void {
    out += '(';
    out += node.label;
    if (node.is_leaf()) {
      out += ' ';
      out += detail::escape_token(node.token);
    } else {
      for (const Tree& c : node.children) {
        out += ' ';
        self(c, self);
      }
    }
    out += ')';
  };
  emit(t, emit);
  return out;
}

inline std::vector<Tree> read_trees_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open tree file: ", path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return parse_ptb(text);
}

inline void write_trees_file(const std::string& path,
                             const std::vector<Tree>& trees) {
  std::ofstream out(path);
  if (!out) fail("cannot write tree file: ", path);
  for (const Tree& t : trees) out << write_ptb(t) << '\n';
}

// ---- tree <-> span labeling ----

namespace detail {

// Walks the tree, recording each constituent's collapsed label chain.
// Returns the end fencepost of the subtree rooted at `node`.
inline int record_spans(const Tree& node, int start, Parse& parse) {
  if (node.is_leaf()) return start + 1;
  LabelSeq chain;
  const Tree* cur = &node;
  chain.symbols.push_back(cur->label);
  while (cur->children.size() == 1 && !cur->children[0].is_leaf()) {
    cur = &cur->children[0];
    chain.symbols.push_back(cur->label);
  }
  int end = start;
  for (const Tree& c : cur->children) end = record_spans(c, end, parse);
  parse.at(Span{start, end}) = std::move(chain);
  return end;
}

}  // namespace detail

// Every constituent span maps to its top-down chain of non-terminals (unary
// chains collapsed); every other span maps to the empty sequence.
inline Parse tree_to_spans(const Tree& tree) {
  require(!tree.is_leaf(), "tree_to_spans: root must be an internal node");
  Parse parse(sentence_of(tree));
  int end = detail::record_spans(tree, 0, parse);
  require(end == static_cast<int>(parse.n()), "tree/sentence length mismatch");
  return parse;
}

// Inverse of tree_to_spans. `pos` supplies the tag for every token position.
// The selected spans must be pairwise non-crossing and include (0,n).
inline Tree spans_to_tree(const Parse& parse,
                          const std::vector<std::string>& pos) {
  const int n = static_cast<int>(parse.n());
  require(n >= 1, "spans_to_tree: empty sentence");
  require(pos.size() == parse.n(), "spans_to_tree: POS count != token count");

  std::vector<Span> selected;
  for_each_span(parse.n(), [&](Span s) {
    if (!parse.at(s).empty()) selected.push_back(s);
  });
  if (parse.at(Span{0, n}).empty())
    fail("spans_to_tree: whole-sentence span (0,", n, ") is unlabeled");
  for (std::size_t a = 0; a < selected.size(); ++a)
    for (std::size_t b = a + 1; b < selected.size(); ++b)
      if (crosses(selected[a], selected[b]))
        fail("spans_to_tree: crossing spans (", selected[a].i, ",",
             selected[a].j, ") and (", selected[b].i, ",", selected[b].j, ")");

  auto leaf_at = [&](int t) -> Tree {
    if (pos[static_cast<std::size_t>(t)].empty())
      fail("spans_to_tree: missing POS for token ", t);
    return Tree{pos[static_cast<std::size_t>(t)],
                parse.sentence.tokens[static_cast<std::size_t>(t)],
                {}};
  };

  // selected is sorted by (i asc, j asc); within a fixed i the widest selected
  // span shows up last.
  auto build = [&](Span s, auto&& self) -> Tree {
    const LabelSeq& chain = parse.at(s);
    std::vector<Tree> kids;
    int t = s.i;
    while (t < s.j) {
      // widest selected span starting at t that nests strictly inside s
      Span best{-1, -1};
      for (Span cand : selected) {
        if (cand.i != t) continue;
        if (cand == s || cand.j > s.j) continue;
        if (best.i < 0 || cand.j > best.j) best = cand;
      }
      if (best.i >= 0) {
        kids.push_back(self(best, self));
        t = best.j;
      } else {
        kids.push_back(leaf_at(t));
        ++t;
      }
    }
    Tree node{chain.symbols.back(), "", std::move(kids)};
    for (std::size_t k = chain.symbols.size() - 1; k-- > 0;)
      node = Tree{chain.symbols[k], "", {std::move(node)}};
    return node;
  };
  return build(Span{0, n}, build);
}

// ---- label vocabulary ----

struct LabelVocab {
  std::vector<LabelSeq> seqs;        // seqs[0] is the empty sequence
  std::map<LabelSeq, int> index;

  int size() const { return static_cast<int>(seqs.size()); }

  int id_of(const LabelSeq& seq) const {
    auto it = index.find(seq);
    return it == index.end() ? -1 : it->second;
  }

  static LabelVocab from_seqs(const std::vector<LabelSeq>& nonempty) {
    LabelVocab v;
    v.seqs.push_back(LabelSeq{});
    v.index[LabelSeq{}] = 0;
    for (const LabelSeq& s : nonempty) {
      if (v.index.emplace(s, v.size()).second) v.seqs.push_back(s);
    }
    return v;
  }
};

// Distinct label sequences observed across the trees, the empty sequence
// first, then by frequency (desc) with lexicographic tie-break.
inline LabelVocab collect_label_vocab(const std::vector<Tree>& trees) {
  require(!trees.empty(), "collect_label_vocab: empty tree list");
  std::map<LabelSeq, std::size_t> freq;
  for (const Tree& t : trees) {
    Parse p = tree_to_spans(t);
    for (const LabelSeq& seq : p.labels)
      if (!seq.empty()) ++freq[seq];
  }
  std::vector<LabelSeq> order;
  order.reserve(freq.size());
  for (const auto& [seq, count] : freq) order.push_back(seq);
  std::stable_sort(order.begin(), order.end(),
                   [&](const LabelSeq& a, const LabelSeq& b) {
                     return freq.at(a) > freq.at(b);
                   });
  return LabelVocab::from_seqs(order);
}

// POS tag vocabulary, frequency desc then lexicographic.
struct PosVocab {
  std::vector<std::string> tags;
  std::map<std::string, int> index;

  int size() const { return static_cast<int>(tags.size()); }
  int id_of(const std::string& tag) const {
    auto it = index.find(tag);
    return it == index.end() ? -1 : it->second;
  }

  static PosVocab from_trees(const std::vector<Tree>& trees) {
    require(!trees.empty(), "PosVocab: empty tree list");
    std::map<std::string, std::size_t> freq;
    for (const Tree& t : trees)
      for (const std::string& tag : pos_tags_of(t)) ++freq[tag];
    std::vector<std::string> order;
    for (const auto& [tag, count] : freq) order.push_back(tag);
    std::stable_sort(order.begin(), order.end(),
                     [&](const std::string& a, const std::string& b) {
                       return freq.at(a) > freq.at(b);
                     });
    PosVocab v;
    for (const std::string& tag : order) {
      v.index[tag] = v.size();
      v.tags.push_back(tag);
    }
    return v;
  }
};

}  // namespace rsp
