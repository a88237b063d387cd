#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "rsp/common.hpp"
#include "rsp/tree.hpp"

namespace rsp {

struct SpanDeclaration {
  enum class Kind { constituent, non_constituent };

  Span span;
  Kind kind = Kind::constituent;
  std::optional<LabelSeq> label;  // constituents only; absent = unlabeled

  bool operator==(const SpanDeclaration&) const = default;
};

// A sentence with some spans declared constituent (possibly labeled) or
// explicitly non-constituent. Constituent declarations never cross.
struct PartialAnnotation {
  Sentence sentence;
  std::vector<SpanDeclaration> declarations;
};

namespace detail {

inline bool valid_markup_label(const std::string& text) {
  if (text.empty()) return false;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t plus = text.find('+', start);
    std::size_t end = plus == std::string::npos ? text.size() : plus;
    if (end == start) return false;
    char c = text[start];
    if (!(c >= 'A' && c <= 'Z')) return false;
    if (plus == std::string::npos) break;
    start = plus + 1;
  }
  return true;
}

inline LabelSeq parse_markup_label(const std::string& text) {
  LabelSeq seq;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t plus = text.find('+', start);
    std::size_t end = plus == std::string::npos ? text.size() : plus;
    seq.symbols.push_back(text.substr(start, end - start));
    if (plus == std::string::npos) break;
    start = plus + 1;
  }
  return seq;
}

}  // namespace detail

// Markup grammar, over whitespace-separated tokens:
//   [        open an unlabeled constituent
//   [NP      open a labeled constituent (chains as [S+VP)
//   ]        close the innermost open constituent
//   { }      open/close an explicit non-constituent declaration
// Pairs may nest but not cross.
inline PartialAnnotation parse_markup(const std::string& line) {
  struct Open {
    SpanDeclaration::Kind kind;
    std::optional<LabelSeq> label;
    int start;
  };
  PartialAnnotation ann;
  std::vector<Open> stack;

  for (const std::string& tok : split_ws(line)) {
    int here = static_cast<int>(ann.sentence.tokens.size());
    if (tok == "[") {
      stack.push_back({SpanDeclaration::Kind::constituent, std::nullopt, here});
    } else if (tok.size() > 1 && tok[0] == '[') {
      std::string text = tok.substr(1);
      if (!detail::valid_markup_label(text))
        fail("bad constituent label '", tok, "' in markup");
      stack.push_back({SpanDeclaration::Kind::constituent,
                       detail::parse_markup_label(text), here});
    } else if (tok == "{") {
      stack.push_back(
          {SpanDeclaration::Kind::non_constituent, std::nullopt, here});
    } else if (tok == "]" || tok == "}") {
      auto kind = tok == "]" ? SpanDeclaration::Kind::constituent
                             : SpanDeclaration::Kind::non_constituent;
      if (stack.empty()) fail("unbalanced '", tok, "' in markup");
      if (stack.back().kind != kind)
        fail("brace and bracket pairs cross in markup near '", tok, "'");
      Open open = stack.back();
      stack.pop_back();
      if (open.start == here) fail("empty bracket pair in markup");
      ann.declarations.push_back(
          SpanDeclaration{Span{open.start, here}, kind, open.label});
    } else if (tok.find_first_of("[]{}") != std::string::npos) {
      fail("token '", tok, "' mixes markup delimiters and text");
    } else {
      ann.sentence.tokens.push_back(tok);
    }
  }
  if (!stack.empty()) fail("unclosed markup pair opened at token ",
                           stack.back().start);

  // canonicalize: sort by span, merge duplicates, reject conflicts
  std::stable_sort(ann.declarations.begin(), ann.declarations.end(),
                   [](const SpanDeclaration& a, const SpanDeclaration& b) {
                     return a.span < b.span;
                   });
  std::vector<SpanDeclaration> merged;
  for (const SpanDeclaration& d : ann.declarations) {
    if (!merged.empty() && merged.back().span == d.span) {
      SpanDeclaration& prev = merged.back();
      if (prev.kind != d.kind)
        fail("span (", d.span.i, ",", d.span.j,
             ") declared both constituent and non-constituent");
      if (prev.label && d.label && *prev.label != *d.label)
        fail("span (", d.span.i, ",", d.span.j,
             ") declared with conflicting labels");
      if (!prev.label) prev.label = d.label;
      continue;
    }
    merged.push_back(d);
  }
  ann.declarations = std::move(merged);
  return ann;
}

// All explicit declarations plus one non-constituent declaration for every
// span that crosses a declared constituent, in (i,j) order. `max_implied`
// caps the number of implied declarations kept.
inline std::vector<SpanDeclaration> derive_training_declarations(
    const PartialAnnotation& ann,
    std::size_t max_implied = static_cast<std::size_t>(-1)) {
  std::vector<Span> constituents;
  for (const SpanDeclaration& d : ann.declarations)
    if (d.kind == SpanDeclaration::Kind::constituent)
      constituents.push_back(d.span);

  std::vector<SpanDeclaration> out = ann.declarations;
  std::size_t implied = 0;
  for_each_span(ann.sentence.size(), [&](Span s) {
    bool declared = false;
    for (const SpanDeclaration& d : ann.declarations)
      declared = declared || d.span == s;
    if (declared) return;
    for (Span c : constituents) {
      if (crosses(s, c)) {
        if (implied < max_implied) {
          out.push_back(SpanDeclaration{
              s, SpanDeclaration::Kind::non_constituent, std::nullopt});
          ++implied;
        }
        return;
      }
    }
  });
  std::sort(out.begin(), out.end(),
            [](const SpanDeclaration& a, const SpanDeclaration& b) {
              return a.span < b.span;
            });
  return out;
}

// One annotated sentence per line; '#' comments and blank lines ignored.
inline std::vector<PartialAnnotation> read_markup_file(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open markup file: ", path);
  std::vector<PartialAnnotation> anns;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    bool blank = line.find_first_not_of(" \t\r") == std::string::npos;
    if (blank || line[line.find_first_not_of(" \t\r")] == '#') continue;
    try {
      anns.push_back(parse_markup(line));
    } catch (const Error& e) {
      fail(path, ":", lineno, ": ", e.what());
    }
  }
  return anns;
}

// Renders declarations back into markup. Requires the constituent spans to
// be pairwise non-crossing and nothing to cross anything (so the linear
// bracket text nests properly).
inline std::string write_markup(const Sentence& sentence,
                                const std::vector<SpanDeclaration>& decls) {
  for (std::size_t a = 0; a < decls.size(); ++a)
    for (std::size_t b = a + 1; b < decls.size(); ++b)
      if (crosses(decls[a].span, decls[b].span))
        fail("write_markup: declarations cross");

  std::string out;
  auto emit = [&](const std::string& piece) {
    if (!out.empty()) out += ' ';
    out += piece;
  };
  int n = static_cast<int>(sentence.size());
  for (int t = 0; t <= n; ++t) {
    // closers first (innermost first: larger start)
    std::vector<const SpanDeclaration*> closing;
    for (const SpanDeclaration& d : decls)
      if (d.span.j == t) closing.push_back(&d);
    std::sort(closing.begin(), closing.end(),
              [](const SpanDeclaration* a, const SpanDeclaration* b) {
                return a->span.i > b->span.i;
              });
    for (const SpanDeclaration* d : closing)
      emit(d->kind == SpanDeclaration::Kind::constituent ? "]" : "}");
    if (t == n) break;
    // openers (outermost first: larger end)
    std::vector<const SpanDeclaration*> opening;
    for (const SpanDeclaration& d : decls)
      if (d.span.i == t) opening.push_back(&d);
    std::sort(opening.begin(), opening.end(),
              [](const SpanDeclaration* a, const SpanDeclaration* b) {
                return a->span.j > b->span.j;
              });
    for (const SpanDeclaration* d : opening) {
      if (d->kind == SpanDeclaration::Kind::non_constituent) {
        emit("{");
      } else if (d->label) {
        emit("[" + d->label->joined('+'));
      } else {
        emit("[");
      }
    }
    emit(sentence.tokens[static_cast<std::size_t>(t)]);
  }
  return out;
}

}  // namespace rsp
