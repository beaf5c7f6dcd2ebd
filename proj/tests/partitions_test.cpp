#include "opcalc/partitions.hpp"

#include <catch_amalgamated.hpp>

#include <functional>
#include <set>

using namespace opcalc;

TEST_CASE("partition counts follow the Bell numbers", "[partitions]") {
  std::vector<std::size_t> bell = {1, 1, 2, 5, 15, 52, 203};
  for (int n = 0; n <= 6; ++n) CHECK(all_partitions(n).size() == bell[n]);
}

TEST_CASE("enumeration is in restricted-growth lex order without repeats", "[partitions]") {
  for (int n = 1; n <= 5; ++n) {
    auto parts = all_partitions(n);
    std::set<std::vector<int>> seen;
    std::vector<int> prev;
    for (const auto& p : parts) {
      auto rg = p.rg_string();
      CHECK(seen.insert(rg).second);
      if (!prev.empty()) CHECK(prev < rg);
      prev = rg;
      // rg strings are valid: rg[0] = 0 and each value <= 1 + running max
      CHECK(rg[0] == 0);
      int mx = 0;
      for (std::size_t i = 1; i < rg.size(); ++i) {
        CHECK(rg[i] <= mx + 1);
        mx = std::max(mx, rg[i]);
      }
      CHECK(SetPartition::from_rg(rg) == p);
    }
  }
}

TEST_CASE("canonical form sorts blocks by minimum", "[partitions]") {
  SetPartition p(5, {{4, 2}, {0, 3}, {1}});
  CHECK(p.num_blocks() == 3);
  CHECK(p.block(0) == std::vector<int>{0, 3});
  CHECK(p.block(1) == std::vector<int>{1});
  CHECK(p.block(2) == std::vector<int>{2, 4});
  CHECK(p.str() == "03|1|24");
  CHECK(p.block_index_of(4) == 2);
  CHECK(p.rg_string() == std::vector<int>{0, 1, 2, 0, 2});

  CHECK_THROWS_AS(SetPartition(3, {{0, 1}}), std::invalid_argument);
  CHECK_THROWS_AS(SetPartition(3, {{0, 1}, {1, 2}}), std::invalid_argument);
  CHECK_THROWS_AS(SetPartition(2, {{0, 1}, {}}), std::invalid_argument);
}

TEST_CASE("refinement order", "[partitions]") {
  SetPartition fine(4, {{0}, {1}, {2, 3}});
  SetPartition coarse(4, {{0, 1}, {2, 3}});
  CHECK(fine.refines(coarse));
  CHECK(fine.strictly_refines(coarse));
  CHECK_FALSE(coarse.refines(fine));
  CHECK(coarse.refines(coarse));
  CHECK_FALSE(coarse.strictly_refines(coarse));
  CHECK(SetPartition::discrete(4).refines(fine));
  CHECK(fine.refines(SetPartition::indiscrete(4)));

  // strict refinements of the indiscrete partition: everything else
  CHECK(strict_refinements(SetPartition::indiscrete(4)).size() == 14);
  CHECK(strict_refinements(SetPartition::discrete(4)).empty());

  // block_nesting groups finer blocks under coarser ones
  auto nest = block_nesting(coarse, fine);
  REQUIRE(nest.size() == 2);
  CHECK(nest[0] == std::vector<int>{0, 1});
  CHECK(nest[1] == std::vector<int>{2});
  CHECK_THROWS_AS(block_nesting(fine, coarse), std::invalid_argument);
}

TEST_CASE("maximal chain counts in the partition lattice", "[partitions]") {
  // number of maximal chains from indiscrete to discrete in Pi_n
  // equals n! (n-1)! / 2^(n-1)
  auto count_max_chains = [](int n) {
    long long total = 0;
    // depth-first: each step merges exactly one pair of blocks downward,
    // i.e. strict refinement splitting one block into two
    auto covers = [](const SetPartition& mu) {
      std::vector<SetPartition> out;
      for (const auto& lam : strict_refinements(mu))
        if (lam.num_blocks() == mu.num_blocks() + 1) out.push_back(lam);
      return out;
    };
    std::function<void(const SetPartition&)> walk = [&](const SetPartition& at) {
      if (at == SetPartition::discrete(at.n())) { ++total; return; }
      for (const auto& nxt : covers(at)) walk(nxt);
    };
    walk(SetPartition::indiscrete(n));
    return total;
  };
  CHECK(count_max_chains(2) == 1);
  CHECK(count_max_chains(3) == 3);
  CHECK(count_max_chains(4) == 18);
  CHECK(count_max_chains(5) == 180);
}

TEST_CASE("permutation actions on partitions", "[partitions]") {
  // sigma = (0 1 2) cycle on {0,1,2,3}: 0->1, 1->2, 2->0
  Permutation sigma({1, 2, 0, 3});
  SetPartition lam(4, {{0, 1}, {2, 3}});
  auto act = induced_action(lam, sigma);
  CHECK(act.image == SetPartition(4, {{1, 2}, {0, 3}}));
  // block {0,1} -> {1,2} which is canonical block 1; block {2,3} -> {0,3}, block 0
  CHECK(act.block_dest == std::vector<int>{1, 0});
  // within {0,1}: 0->1, 1->2, order preserved
  CHECK(act.within[0].is_identity());
  // within {2,3}: 2->0, 3->3 keeps the order, so positions are fixed
  CHECK(act.within[1].is_identity());

  // an order-reversing block image
  Permutation rev({3, 2, 1, 0});
  auto act2 = induced_action(SetPartition(4, {{0, 1, 2, 3}}), rev);
  CHECK(act2.image == SetPartition::indiscrete(4));
  CHECK(act2.within[0] == Permutation({3, 2, 1, 0}));

  // action respects composition: (sigma * tau) acts as sigma after tau
  Permutation tau({0, 2, 3, 1});
  for (const auto& p : all_partitions(4)) {
    auto a1 = induced_action(p, sigma * tau);
    auto a2 = induced_action(induced_action(p, tau).image, sigma);
    CHECK(a1.image == a2.image);
  }
}
