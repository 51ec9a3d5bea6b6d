#include <cmath>

#include "doctest.h"
#include "staccato/synth.hpp"
#include "staccato/tuner.hpp"
#include "support/fixtures.hpp"

using namespace staccato;
using staccato::testing::TempDir;

namespace {

std::vector<LineMatch> lines(std::initializer_list<std::uint32_t> ids) {
  std::vector<LineMatch> out;
  std::size_t rank = 1;
  for (auto id : ids) out.push_back(LineMatch{id, 0.5, rank++});
  return out;
}

}  // namespace

TEST_CASE("size model recovers planted coefficients") {
  std::vector<SizeSample> s;
  for (std::size_t m : {1, 5, 20, 45}) {
    for (std::size_t k : {1, 10, 80}) {
      s.push_back({m, k, 20.0 * m * k + 58.0 * k + 1234.0});
    }
  }
  auto model = fit_size_model(s);
  CHECK(std::abs(model.a - 20.0) < 1e-6);
  CHECK(std::abs(model.b - 58.0) < 1e-6);
  CHECK(std::abs(model.c - 1234.0) < 1e-6);
  CHECK(model.r_squared > 0.999999);
  CHECK_FALSE(model.degenerate);
  CHECK(model.predict(35, 80) == doctest::Approx(20.0 * 35 * 80 + 58.0 * 80 + 1234.0));
  // 20*m*k + 58*k + 1234 <= 45540 at m = 35 gives k = 58.
  CHECK(model.k_for(35, 45540) == 58);
  CHECK(model.k_for(1000, 1000) == 0);
}

TEST_CASE("size model edge cases") {
  std::vector<SizeSample> two{{1, 1, 10}, {2, 2, 20}};
  CHECK_THROWS_AS(fit_size_model(two), std::invalid_argument);
  std::vector<SizeSample> flat{{1, 1, 500}, {2, 4, 500}, {8, 3, 500}};
  auto model = fit_size_model(flat);
  CHECK(model.degenerate);
  CHECK(model.a == 0.0);
  CHECK(model.b == 0.0);
  CHECK(model.c == doctest::Approx(500.0));
}

TEST_CASE("size model fitted on measured chain sizes") {
  TempDir dir("fit");
  SynthOptions o;
  o.lines = 12;
  o.merge_rate = 0.0;
  auto corpus = write_synthetic(dir.path(), generate_corpus(o));
  std::vector<SizeSample> s;
  for (auto [m, k] : std::vector<std::pair<std::size_t, std::size_t>>{{1, 2}, {4, 2}, {1, 8}, {4, 8}}) {
    corpus.materialize(Mode::staccato(m, k));
    s.push_back({m, k, static_cast<double>(corpus.mode_bytes(Mode::staccato(m, k)))});
  }
  CHECK(fit_size_model(s).r_squared >= 0.99);
}

TEST_CASE("scoring") {
  std::set<std::uint32_t> truth{1, 2, 3, 4};
  auto same = score_query("q", lines({4, 3, 2, 1}), truth);
  CHECK(same.precision == 1.0);
  CHECK(same.recall == 1.0);
  CHECK(same.f1 == 1.0);

  auto miss = score_query("q", lines({7, 8}), truth);
  CHECK(miss.precision == 0.0);
  CHECK(miss.recall == 0.0);
  CHECK(miss.f1 == 0.0);

  auto wide = score_query("q", lines({1, 2, 3, 4, 5, 6, 7, 8}), truth);
  CHECK(wide.precision == 0.5);
  CHECK(wide.recall == 1.0);
  CHECK(wide.f1 == doctest::Approx(2.0 / 3.0));

  auto none = score_query("q", {}, truth);
  CHECK(none.precision == 1.0);
  CHECK(none.recall == 0.0);
  CHECK(score_query("q", {}, {}).recall == 1.0);
}

TEST_CASE("evaluate aggregates and ignores order") {
  Truth truth{{"a", {1, 2}}, {"b", {3}}};
  std::map<std::string, std::vector<LineMatch>> r1{{"a", lines({1, 2})}, {"b", lines({4})}};
  std::map<std::string, std::vector<LineMatch>> r2{{"a", lines({2, 1})}, {"b", lines({4})}};
  auto e1 = evaluate(r1, truth);
  auto e2 = evaluate(r2, truth);
  CHECK(e1.mean_recall == 0.5);
  CHECK(e1.mean_precision == 0.5);
  CHECK(e1.mean_recall == e2.mean_recall);
  CHECK(e1.mean_f1 == e2.mean_f1);
  std::map<std::string, std::vector<LineMatch>> unknown{{"zzz", lines({1})}};
  CHECK_THROWS_AS(evaluate(unknown, truth), std::invalid_argument);
}

TEST_CASE("probe bound") {
  CHECK(max_probes(1) == 2);
  CHECK(max_probes(2) == 3);
  CHECK(max_probes(64) == 8);
  CHECK(max_probes(65) == 9);
}

TEST_CASE("tuning a small synthetic corpus") {
  TempDir dir("tune");
  SynthOptions o;
  o.lines = 30;
  o.plant_rate = 0.3;
  auto synth = generate_corpus(o);
  auto corpus = write_synthetic(dir.path(), synth);

  TuneOptions zero;
  zero.recall_min = 0.0;
  auto easy = tune(corpus, synth.queries, synth.truth, zero);
  REQUIRE(easy.feasible);
  CHECK(easy.m == 1);
  // The model's boundary k, shrunk only if the measured size overshoots.
  CHECK(easy.k >= 1);
  CHECK(easy.k <= easy.model.k_for(1, static_cast<double>(easy.budget_bytes)));
  CHECK(easy.bytes <= easy.budget_bytes);
  CHECK(easy.probes.size() <= max_probes(easy.max_edges));

  const auto before = corpus.manifest().modes;
  TuneOptions strict;
  strict.recall_min = 0.9;
  strict.size_fraction = 0.1;
  auto r = tune(corpus, synth.queries, synth.truth, strict);
  CHECK(r.probes.size() <= max_probes(r.max_edges));
  CHECK(format_tune_report(r).rfind("# tune v1\n", 0) == 0);
  if (r.feasible) {
    CHECK(r.recall >= 0.9);
    CHECK(r.bytes <= r.budget_bytes);
    CHECK(corpus.has_mode(Mode::staccato(r.m, r.k)));
    auto check = evaluate_mode(corpus, Mode::staccato(r.m, r.k), synth.queries, synth.truth);
    CHECK(check.mean_recall == doctest::Approx(r.recall));
  }
  // Of the modes this run built, only the chosen one stays.
  auto expected = before;
  if (r.feasible) expected.insert(Mode::staccato(r.m, r.k));
  CHECK(corpus.manifest().modes == expected);
}

TEST_CASE("perfect recall on a tiny budget is infeasible") {
  TempDir dir("infeasible");
  SynthOptions o;
  o.lines = 20;
  o.plant_rate = 0.4;
  auto synth = generate_corpus(o);
  auto corpus = write_synthetic(dir.path(), synth);
  TuneOptions t;
  t.recall_min = 1.0;
  t.size_fraction = 0.002;
  auto r = tune(corpus, synth.queries, synth.truth, t);
  CHECK_FALSE(r.feasible);
  CHECK(format_tune_report(r).find("infeasible") != std::string::npos);
}

TEST_CASE("tuning needs truth") {
  TempDir dir("notruth");
  auto corpus = Corpus::ingest(dir.path(), {{"x", "sfa v1\nstart 0\nfinal 1\narc 0 1 \"a\" 1\n"}});
  CHECK_THROWS_AS(tune(corpus, {{"q", "a"}}, Truth{}, TuneOptions{}), MissingArtifact);
}
