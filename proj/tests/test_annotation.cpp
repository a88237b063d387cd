#include <catch2/catch_amalgamated.hpp>

#include <cstdio>

#include "rsp/annotation.hpp"
#include "test_helpers.hpp"

using namespace rsp;

namespace {

std::vector<Span> constituent_spans(const PartialAnnotation& ann) {
  std::vector<Span> out;
  for (const auto& d : ann.declarations)
    if (d.kind == SpanDeclaration::Kind::constituent) out.push_back(d.span);
  return out;
}

}  // namespace

TEST_CASE("markup: diameter sentence", "[annotation]") {
  auto ann = parse_markup(
      "[ Diameter AC ] is perpendicular [ to chord BD ] [ at E ] .");
  CHECK(ann.sentence.tokens.size() == 10);
  CHECK(ann.sentence.tokens[0] == "Diameter");
  CHECK(ann.sentence.tokens[9] == ".");
  CHECK(constituent_spans(ann) ==
        std::vector<Span>{{0, 2}, {4, 7}, {7, 9}});
  for (const auto& d : ann.declarations) CHECK(!d.label.has_value());
}

TEST_CASE("markup: nested brackets", "[annotation]") {
  auto ann = parse_markup(
      "Given [ the circle [ at the right ] with [ designated center , "
      "designated perpendicular , and radius 5 ] ] .");
  CHECK(ann.sentence.tokens.size() == 17);
  CHECK(constituent_spans(ann) ==
        std::vector<Span>{{1, 16}, {3, 6}, {7, 16}});
}

TEST_CASE("markup: labels and braces", "[annotation]") {
  auto ann = parse_markup("[NP the dog ] { barks loudly }");
  REQUIRE(ann.declarations.size() == 2);
  CHECK(ann.declarations[0].span == Span{0, 2});
  CHECK(ann.declarations[0].kind == SpanDeclaration::Kind::constituent);
  REQUIRE(ann.declarations[0].label.has_value());
  CHECK(*ann.declarations[0].label == label_seq({"NP"}));
  CHECK(ann.declarations[1].span == Span{2, 4});
  CHECK(ann.declarations[1].kind == SpanDeclaration::Kind::non_constituent);

  auto chain = parse_markup("[S+VP eats fish ]");
  REQUIRE(chain.declarations.size() == 1);
  CHECK(*chain.declarations[0].label == label_seq({"S", "VP"}));
}

TEST_CASE("markup: errors", "[annotation]") {
  CHECK_THROWS_WITH(parse_markup("[ ] word"),
                    Catch::Matchers::ContainsSubstring("empty bracket"));
  CHECK_THROWS_WITH(parse_markup("[ a { b ] c }"),
                    Catch::Matchers::ContainsSubstring("cross"));
  CHECK_THROWS(parse_markup("[ a b"));
  CHECK_THROWS(parse_markup("a ] b"));
  CHECK_THROWS(parse_markup("[np lower ]"));
  CHECK_THROWS(parse_markup("[ { a } ]"));    // same span, conflicting kinds
  CHECK_THROWS(parse_markup("[NP [VP a ] ]"));  // same span, conflicting labels
}

TEST_CASE("markup: no markup means no declarations", "[annotation]") {
  auto ann = parse_markup("just a plain sentence .");
  CHECK(ann.declarations.empty());
  CHECK(ann.sentence.tokens.size() == 5);
}

TEST_CASE("derived declarations include crossing spans", "[annotation]") {
  auto ann = parse_markup(
      "[ Diameter AC ] is perpendicular [ to chord BD ] [ at E ] .");
  auto decls = derive_training_declarations(ann);

  auto find = [&](Span s) -> const SpanDeclaration* {
    for (const auto& d : decls)
      if (d.span == s) return &d;
    return nullptr;
  };
  const SpanDeclaration* implied = find(Span{3, 6});  // perpendicular to chord
  REQUIRE(implied != nullptr);
  CHECK(implied->kind == SpanDeclaration::Kind::non_constituent);

  // every returned declaration is explicit or crosses a constituent
  auto explicit_spans = constituent_spans(ann);
  for (const auto& d : decls) {
    bool is_explicit = false;
    for (const auto& e : ann.declarations) is_explicit |= e.span == d.span;
    if (is_explicit) continue;
    bool crosses_some = false;
    for (Span c : explicit_spans) crosses_some |= crosses(d.span, c);
    CHECK(crosses_some);
    CHECK(d.kind == SpanDeclaration::Kind::non_constituent);
  }

  // sorted by (i,j)
  for (std::size_t k = 1; k < decls.size(); ++k)
    CHECK(decls[k - 1].span < decls[k].span);
}

TEST_CASE("derived declarations: brute-force crossing oracle", "[annotation]") {
  // n=4, single constituent (1,3)
  PartialAnnotation ann;
  ann.sentence.tokens = {"a", "b", "c", "d"};
  ann.declarations.push_back(
      {Span{1, 3}, SpanDeclaration::Kind::constituent, std::nullopt});

  auto decls = derive_training_declarations(ann);
  std::vector<Span> implied;
  for (const auto& d : decls)
    if (d.span != Span{1, 3}) implied.push_back(d.span);
  CHECK(implied == std::vector<Span>{{0, 2}, {2, 4}});

  // empty annotation -> empty list
  PartialAnnotation empty;
  empty.sentence.tokens = {"a", "b"};
  CHECK(derive_training_declarations(empty).empty());
}

TEST_CASE("implied cap", "[annotation]") {
  PartialAnnotation ann;
  ann.sentence.tokens = {"a", "b", "c", "d"};
  ann.declarations.push_back(
      {Span{1, 3}, SpanDeclaration::Kind::constituent, std::nullopt});
  auto capped = derive_training_declarations(ann, 1);
  CHECK(capped.size() == 2);  // the explicit one plus a single implied
}

TEST_CASE("crosses properties", "[annotation][property]") {
  Rng rng(99);
  int n = 10;
  for (int iter = 0; iter < 2000; ++iter) {
    int ai = static_cast<int>(rng.index(static_cast<std::size_t>(n)));
    int aj = ai + 1 + static_cast<int>(rng.index(static_cast<std::size_t>(n - ai)));
    int bi = static_cast<int>(rng.index(static_cast<std::size_t>(n)));
    int bj = bi + 1 + static_cast<int>(rng.index(static_cast<std::size_t>(n - bi)));
    Span a{ai, aj}, b{bi, bj};
    CHECK(crosses(a, b) == crosses(b, a));  // symmetric
    CHECK(!crosses(a, a));                  // irreflexive
    bool nested = nests_in(a, b) || nests_in(b, a);
    bool disjoint = aj <= bi || bj <= ai;
    if (nested || disjoint) CHECK(!crosses(a, b));
    if (crosses(a, b)) CHECK((!nested && !disjoint));
  }
}

TEST_CASE("markup round trip via write_markup", "[annotation][property]") {
  Rng rng(7);
  for (int iter = 0; iter < 200; ++iter) {
    Tree t = testing::random_tree(rng);
    Parse p = tree_to_spans(t);
    std::vector<SpanDeclaration> decls;
    for_each_span(p.n(), [&](Span s) {
      if (!p.at(s).empty() && rng.bernoulli(0.4) && s.j - s.i < static_cast<int>(p.n()))
        decls.push_back({s, SpanDeclaration::Kind::constituent,
                         rng.bernoulli(0.5) ? std::optional<LabelSeq>(p.at(s))
                                            : std::nullopt});
    });
    std::string line = write_markup(sentence_of(t), decls);
    PartialAnnotation back = parse_markup(line);
    CHECK(back.sentence == sentence_of(t));
    CHECK(back.declarations == decls);
  }
}

TEST_CASE("markup file reading", "[annotation]") {
  std::string path = "test_markup_tmp.txt";
  {
    std::ofstream out(path);
    out << "# a comment\n\n[ the dog ] barks .\n";
  }
  auto anns = read_markup_file(path);
  REQUIRE(anns.size() == 1);
  CHECK(anns[0].sentence.tokens.size() == 4);
  std::remove(path.c_str());
}
