#include <catch2/catch_amalgamated.hpp>

#include <map>

#include "rsp/evaluation.hpp"
#include "rsp/synthcorpus.hpp"

using namespace rsp;

namespace {

void count_productions(const Tree& t, std::map<std::string, std::size_t>& out) {
  if (t.is_leaf()) {
    ++out[t.label + " -> " + t.token];
    return;
  }
  std::string key = t.label + " ->";
  for (const Tree& c : t.children) key += " " + c.label;
  ++out[key];
  for (const Tree& c : t.children) count_productions(c, out);
}

}  // namespace

TEST_CASE("grammar parsing and validation", "[synthcorpus]") {
  Grammar g = parse_grammar(
      "# comment\n"
      "1.0 S -> NP VP\n"
      "1.0 NP -> NN\n"
      "2.0 VP -> VB NP\n"
      "1.0 VP -> VB\n"
      "1.0 NN -> dog\n"
      "1.0 VB -> runs\n");
  CHECK(g.productions.size() == 6);
  CHECK(g.preterminals == std::set<std::string>{"NN", "VB"});

  CHECK_THROWS_WITH(parse_grammar("1.0 S -> NP x\n1.0 NP -> y\n"),
                    Catch::Matchers::ContainsSubstring("bare terminal"));
  CHECK_THROWS_WITH(parse_grammar("0.0 S -> x\n"),
                    Catch::Matchers::ContainsSubstring("weight"));
  CHECK_THROWS_WITH(parse_grammar("1.0 S -> x\n1.0 A -> y\n"),
                    Catch::Matchers::ContainsSubstring("unreachable"));
  CHECK_THROWS_WITH(
      parse_grammar("1.0 S -> A\n1.0 A -> A A\n"),
      Catch::Matchers::ContainsSubstring("unproductive"));
  CHECK_THROWS(parse_grammar("1.0 S ->\n"));
  CHECK_THROWS(parse_grammar("nope S -> x\n"));
}

TEST_CASE("trivial grammar sampling", "[synthcorpus]") {
  Grammar g = parse_grammar("1.0 S -> NN\n1.0 NN -> w\n");
  auto trees = sample_corpus(g, 5, 10, 42);
  REQUIRE(trees.size() == 5);
  for (const Tree& t : trees) CHECK(write_ptb(t) == "(S (NN w))");
}

TEST_CASE("sampling is deterministic in the seed", "[synthcorpus]") {
  auto [source, target] = builtin_grammars();
  auto a = sample_corpus(source, 25, 20, 7);
  auto b = sample_corpus(source, 25, 20, 7);
  auto c = sample_corpus(source, 25, 20, 8);
  CHECK(a == b);
  CHECK(a != c);
}

TEST_CASE("rejection cap reports impossible grammars", "[synthcorpus]") {
  Grammar g = parse_grammar(
      "1.0 S -> A A A A\n1.0 A -> a\n");  // always 4 tokens
  CHECK_THROWS_WITH(sample_corpus(g, 1, 3, 1),
                    Catch::Matchers::ContainsSubstring("attempts"));
}

TEST_CASE("production frequencies match weights", "[synthcorpus][property]") {
  Grammar g = parse_grammar(
      "1.0 S -> A B\n"
      "3.0 S -> B A\n"
      "1.0 A -> x\n"
      "1.0 A -> y\n"
      "2.0 B -> z\n");
  auto trees = sample_corpus(g, 10000, 10, 99);
  std::map<std::string, std::size_t> counts;
  for (const Tree& t : trees) count_productions(t, counts);

  // S -> B A has weight share 3/4 of 10000 draws
  double p = 0.75;
  double sigma = std::sqrt(10000 * p * (1 - p));
  CHECK(std::abs(static_cast<double>(counts["S -> B A"]) - 7500.0) <
        3.0 * sigma);

  // A -> x has share 1/2 of 10000 A-expansions
  double asigma = std::sqrt(10000 * 0.25);
  CHECK(std::abs(static_cast<double>(counts["A -> x"]) - 5000.0) <
        3.0 * asigma);
}

TEST_CASE("builtin grammars validate and share exactly the core",
          "[synthcorpus]") {
  auto [source, target] = builtin_grammars();
  // validate() already ran inside parse_grammar; sanity-check shapes
  CHECK(source.start == "S");
  CHECK(target.start == "S");

  std::set<Production> src(source.productions.begin(),
                           source.productions.end());
  std::set<Production> tgt(target.productions.begin(),
                           target.productions.end());
  std::set<Production> core;
  for (const Production& p : builtin_shared_core()) core.insert(p);

  std::set<Production> inter;
  for (const Production& p : src)
    if (tgt.count(p)) inter.insert(p);
  CHECK(inter == core);
}

TEST_CASE("source corpus never uses target-only productions",
          "[synthcorpus]") {
  auto [source, target] = builtin_grammars();
  std::set<Production> src(source.productions.begin(),
                           source.productions.end());

  auto trees = sample_corpus(source, 300, 24, 5);
  std::set<std::string> target_only_keys;
  for (const Production& p : target.productions) {
    if (src.count(p)) continue;
    std::string key = p.lhs + " ->";
    for (const std::string& sym : p.rhs) key += " " + sym;
    target_only_keys.insert(key);
  }
  std::map<std::string, std::size_t> counts;
  for (const Tree& t : trees) count_productions(t, counts);
  for (const auto& [key, count] : counts) {
    INFO(key);
    CHECK(!target_only_keys.count(key));
  }
}

TEST_CASE("partial annotation synthesis round-trips", "[synthcorpus]") {
  auto [source, target] = builtin_grammars();
  auto trees = sample_corpus(target, 63, 20, 11);

  AnnotationPolicy policy;
  policy.seed = 23;
  policy.label_prob = 0.3;
  auto lines = make_partial_annotations(trees, policy);
  REQUIRE(lines.size() == trees.size());

  std::vector<PartialAnnotation> anns;
  std::size_t constituent_total = 0, nonconstituent_total = 0;
  for (std::size_t k = 0; k < lines.size(); ++k) {
    PartialAnnotation ann = parse_markup(lines[k]);
    CHECK(ann.sentence == sentence_of(trees[k]));
    for (const auto& d : ann.declarations) {
      if (d.kind == SpanDeclaration::Kind::constituent)
        ++constituent_total;
      else
        ++nonconstituent_total;
    }
    anns.push_back(std::move(ann));
  }

  // gold trees satisfy every declaration
  PartialMetrics m = partial_metrics(trees, anns);
  CHECK(m.correct_constituents_pct == 100.0);
  CHECK(m.error_free_pct == 100.0);

  // totals near policy means (Poisson over 63 sentences, wide 4-sigma bands,
  // clipped slightly low because short sentences run out of candidates)
  CHECK(constituent_total > 125);
  CHECK(constituent_total < 235);
  CHECK(nonconstituent_total > 3);
  CHECK(nonconstituent_total < 40);
}

TEST_CASE("zero-mean policy yields bare sentences", "[synthcorpus]") {
  auto [source, target] = builtin_grammars();
  auto trees = sample_corpus(target, 5, 16, 3);
  AnnotationPolicy policy;
  policy.constituent_mean = 0.0;
  policy.nonconstituent_mean = 0.0;
  auto lines = make_partial_annotations(trees, policy);
  for (std::size_t k = 0; k < lines.size(); ++k) {
    PartialAnnotation ann = parse_markup(lines[k]);
    CHECK(ann.declarations.empty());
    CHECK(ann.sentence == sentence_of(trees[k]));
  }
}
