#include <algorithm>
#include <random>
#include <set>

#include "doctest.h"

#include "cdrl/net_model.hpp"
#include "support/fixtures.hpp"

using namespace cdrl;
using cdrl::testing::make_link;

namespace {

bool has_error(const std::vector<std::string>& errors, const std::string& needle) {
  return std::any_of(errors.begin(), errors.end(), [&](const std::string& e) { return e.find(needle) != std::string::npos; });
}

// Every ordered choice of intermediate nodes, checked link by link.
std::set<std::vector<NodeId>> brute_force_paths(const NetworkGraph& g, NodeId s, NodeId d, std::size_t max_hops) {
  std::set<std::vector<NodeId>> out;
  std::vector<NodeId> others;
  for (NodeId v = 0; v < g.node_count(); ++v) {
    if (v != s && v != d) others.push_back(v);
  }
  const std::size_t n = others.size();
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    std::vector<NodeId> mid;
    for (std::size_t k = 0; k < n; ++k) {
      if (mask & (1u << k)) mid.push_back(others[k]);
    }
    std::sort(mid.begin(), mid.end());
    do {
      std::vector<NodeId> seq{s};
      seq.insert(seq.end(), mid.begin(), mid.end());
      seq.push_back(d);
      if (seq.size() - 1 > max_hops) continue;
      bool ok = true;
      for (std::size_t k = 0; k + 1 < seq.size() && ok; ++k) ok = g.find_link(seq[k], seq[k + 1]).has_value();
      if (ok) out.insert(seq);
    } while (std::next_permutation(mid.begin(), mid.end()));
  }
  return out;
}

}  // namespace

TEST_CASE("validate_graph") {
  CHECK(validate_graph(NetworkGraph({}, {})).empty());
  CHECK(has_error(validate_graph(NetworkGraph({"a"}, {make_link(0, 0)})), "self-loop"));
  CHECK(has_error(validate_graph(NetworkGraph({"a"}, {make_link(0, 1)})), "unknown node"));
  CHECK(has_error(validate_graph(NetworkGraph({"a", "b"}, {make_link(0, 1, 0)})), "block capacity"));
  CHECK(!validate_graph(NetworkGraph({"a", "b"}, {make_link(0, 1), make_link(0, 1)})).empty());
  CHECK(!validate_graph(NetworkGraph({"a", "b"}, {make_link(0, 1, 1, -1)})).empty());
  CHECK(!validate_graph(NetworkGraph({"a", "b"}, {make_link(0, 1, 1, 1, -0.5)})).empty());
}

TEST_CASE("edge topology paths") {
  const Network net = cdrl::testing::edge_network();
  const auto& g = net.graph();
  const auto paths = enumerate_paths(g, net.commodities()[0]);
  REQUIRE(paths.size() == 2);
  CHECK(paths[0].nodes == std::vector<NodeId>{0, 2, 4});
  CHECK(paths[1].nodes == std::vector<NodeId>{0, 3, 4});

  Commodity short_lived = net.commodities()[0];
  short_lived.initial_lifetime = 1;
  CHECK(enumerate_paths(g, short_lived).empty());
}

TEST_CASE("enumerate_paths matches brute force on random graphs") {
  std::mt19937_64 rng(7);
  std::bernoulli_distribution coin(0.45);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Link> links;
    for (NodeId i = 0; i < 5; ++i) {
      for (NodeId j = 0; j < 5; ++j) {
        if (i != j && coin(rng)) links.push_back(make_link(i, j));
      }
    }
    NetworkGraph g({"n0", "n1", "n2", "n3", "n4"}, links);
    const int life = std::uniform_int_distribution<int>(1, 6)(rng);
    const Commodity c{"c", 0, 4, life, 0.5, 1.0};
    const auto got = enumerate_paths(g, c);
    std::set<std::vector<NodeId>> seen;
    for (std::size_t k = 0; k < got.size(); ++k) {
      seen.insert(got[k].nodes);
      if (k > 0) CHECK(got[k - 1].nodes < got[k].nodes);
      CHECK(got[k].links.size() + 1 == got[k].nodes.size());
      for (std::size_t h = 0; h < got[k].links.size(); ++h) {
        const Link& l = g.links()[got[k].links[h]];
        CHECK(l.from == got[k].nodes[h]);
        CHECK(l.to == got[k].nodes[h + 1]);
      }
    }
    CHECK(seen.size() == got.size());
    CHECK(seen == brute_force_paths(g, 0, 4, static_cast<std::size_t>(life - 1)));
  }
}

TEST_CASE("paths_through_link") {
  const Network net = cdrl::testing::edge_network();
  const auto& paths = net.paths();
  const std::vector<Path> first{paths[0]};
  CHECK(paths_through_link(first, 2, 4).size() == 1);
  CHECK(paths_through_link(first, 3, 4).empty());

  std::mt19937_64 rng(3);
  for (NodeId i = 0; i < net.node_count(); ++i) {
    for (NodeId j = 0; j < net.node_count(); ++j) {
      const auto got = paths_through_link(paths, i, j);
      std::vector<std::size_t> naive;
      for (const Path& p : paths) {
        for (std::size_t k = 0; k + 1 < p.nodes.size(); ++k) {
          if (p.nodes[k] == i && p.nodes[k + 1] == j) naive.push_back(p.id);
        }
      }
      REQUIRE(got.size() == naive.size());
      for (std::size_t k = 0; k < got.size(); ++k) CHECK(got[k].id == naive[k]);
    }
  }
}

TEST_CASE("network indexes") {
  const Network net = cdrl::testing::edge_network();
  CHECK(net.path_count() == 4);
  CHECK(net.commodity_paths(1) == std::vector<std::size_t>{2, 3});
  CHECK(net.paths()[3].local_id == 1);
  CHECK(net.max_lifetime() == 6);
  CHECK(net.max_cost() == doctest::Approx(6.0));
  CHECK(net.paths_held_at(4).empty());
  CHECK(net.paths_held_at(2) == std::vector<std::size_t>{0, 2});
  const auto e1_core = *net.graph().find_link(2, 4);
  CHECK(net.paths_on_link(e1_core) == std::vector<std::size_t>{0, 2});
}

TEST_CASE("network rejects unreachable commodities") {
  NetworkGraph g({"a", "b", "c"}, {make_link(0, 1)});
  CHECK_THROWS_AS(Network(g, {Commodity{"x", 0, 2, 3, 0.5, 1.0}}), InvalidNetwork);
  CHECK_THROWS_AS(Network(g, {Commodity{"x", 0, 0, 3, 0.5, 1.0}}), InvalidNetwork);
  CHECK_THROWS_AS(Network(g, {Commodity{"x", 0, 1, 3, 1.5, 1.0}}), InvalidNetwork);
}
