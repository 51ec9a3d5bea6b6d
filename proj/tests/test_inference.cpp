#include <cmath>
#include <random>

#include "doctest.h"
#include "staccato/approx.hpp"
#include "staccato/inference.hpp"
#include "support/fixtures.hpp"
#include "support/random_sfa.hpp"

using namespace staccato;
using staccato::testing::load_fixture;

TEST_CASE("top_k on the Ford fixture") {
  auto r = top_k(load_fixture("ford.sfa"), 1);
  REQUIRE(r.entries.size() == 1);
  CHECK(r.entries[0].text == "F0 rd");
  CHECK(r.entries[0].prob == doctest::Approx(0.20736));
  CHECK(r.entries[0].path.size() == 5);
}

TEST_CASE("top_k never returns more strings than exist") {
  Sfa sfa = parse_sfa("sfa v1\nstart 0\nfinal 1\narc 0 1 \"a\" 1\n");
  auto r = top_k(sfa, 5);
  REQUIRE(r.entries.size() == 1);
  CHECK(r.entries[0].prob == 1.0);
  CHECK(r.mass() == 1.0);
}

TEST_CASE("top_k matches the enumeration prefix on random SFAs") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 100; ++i) {
    Sfa sfa = staccato::testing::random_sfa(rng);
    auto all = enumerate_all(sfa, 100000);
    for (std::size_t k : {1, 3, 5}) {
      auto r = top_k(sfa, k);
      REQUIRE(r.entries.size() == std::min(k, all.size()));
      for (std::size_t j = 0; j < r.entries.size(); ++j) {
        CHECK(r.entries[j].text == all[j].text);
        CHECK(std::abs(r.entries[j].prob - all[j].prob) < 1e-9);
        CHECK(r.entries[j].path == all[j].arcs);
      }
    }
  }
}

TEST_CASE("witness probabilities equal the path product") {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 30; ++i) {
    Sfa sfa = staccato::testing::random_sfa(rng);
    for (const auto& e : top_k(sfa, 4).entries) {
      double p = 1.0;
      std::string text;
      for (const auto& a : e.path) {
        p *= sfa.edge(a.edge).labels[a.label].prob;
        text += sfa.edge(a.edge).labels[a.label].text;
      }
      CHECK(text == e.text);
      CHECK(std::abs(p - e.prob) <= 1e-12 * e.prob);
    }
  }
}

TEST_CASE("masses") {
  Sfa branchy = load_fixture("aef_abcd.sfa");
  CHECK(total_mass(branchy) == doctest::Approx(1.0).epsilon(1e-12));
  auto fwd = forward_mass(branchy);
  auto bwd = backward_mass(branchy);
  CHECK(fwd[branchy.final_node()] == doctest::Approx(1.0));
  CHECK(bwd[branchy.start()] == doctest::Approx(1.0));
  NodeId four = *branchy.find_node(4);
  CHECK(fwd[four] == doctest::Approx(0.4));
  CHECK(bwd[four] == doctest::Approx(1.0));

  std::vector<bool> only_b(branchy.edge_count(), true);
  only_b[*branchy.find_edge(*branchy.find_node(1), four)] = false;
  CHECK(mass_between(branchy, branchy.start(), branchy.final_node(), only_b) == doctest::Approx(0.6));
  auto r = top_k_between(branchy, branchy.start(), branchy.final_node(), only_b, 3);
  REQUIRE(r.entries.size() == 1);
  CHECK(r.entries[0].text == "abcd");
}

TEST_CASE("total mass of an approximation equals the kept strings") {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 50; ++i) {
    Sfa sfa = staccato::testing::random_sfa(rng);
    Sfa kept = per_transition_chunking(sfa, 1).graph;
    double sum = 0.0;
    for (const auto& p : enumerate_all(kept, 100000)) sum += p.prob;
    CHECK(std::abs(total_mass(kept) - sum) < 1e-9);
    CHECK(total_mass(per_transition_chunking(sfa, 2).graph) >= total_mass(kept) - 1e-12);
  }
}

TEST_CASE("kl_of_retention") {
  CHECK(kl_of_retention(1.0) == 0.0);
  CHECK(kl_of_retention(0.5) == doctest::Approx(std::log(2.0)));
  CHECK(kl_of_retention(0.3) > kl_of_retention(0.6));
  CHECK_THROWS_AS(kl_of_retention(0.0), std::domain_error);
  CHECK_THROWS_AS(kl_of_retention(1.5), std::domain_error);
}
