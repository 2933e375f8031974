#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "qedn/error.hpp"
#include "qedn/path_search.hpp"
#include "support.hpp"

using namespace qedn;

namespace {

Graph direct_pair() {
  Graph g;
  DeviceSpec s;
  s.name = "S";
  s.model = DeviceModel::Source;
  s.ports = 2;
  g.add_node(s);
  DeviceSpec u;
  u.model = DeviceModel::User;
  u.name = "U";
  g.add_node(u);
  u.name = "V";
  g.add_node(u);
  g.add_edge({0, 1}, {1, 1}, 3.0);
  return g;
}

// Unvisited entries with finite loss are candidates for gpl.
SearchState blank_state(std::size_t nodes, std::size_t ports) {
  SearchState st;
  st.loss.assign(nodes, std::vector<LossDb>(ports + 1, LossDb::unreachable()));
  st.visited.assign(nodes, std::vector<bool>(ports + 1, false));
  return st;
}

std::size_t port_total(const Graph& g) {
  std::size_t n = 0;
  for (const Node& node : g.nodes()) n += static_cast<std::size_t>(node.port_count());
  return n;
}

}  // namespace

TEST(Initial, FirstHopFromFixtureEdges) {
  const Graph g = testkit::load_fixture("case4");
  const SearchState st = initial(g, g.source_id());
  const int f1 = testkit::id_of(g, "F1");
  const LossMatrix c = g.edge_loss_matrix(g.source_id(), f1);
  ASSERT_TRUE(c(0, 0).finite());
  EXPECT_EQ(st.loss[f1][1], c(0, 0));
  EXPECT_EQ(st.path[f1][1].flat(), (std::vector<int>{0, 1, f1, 1}));
  EXPECT_TRUE(st.visited[g.source_id()][1]);
  EXPECT_EQ(st.available[f1][1], g.grid().all());
}

TEST(Gpl, PicksMinimumUnvisited) {
  SearchState st = blank_state(3, 1);
  st.loss[0][1] = LossDb(3);
  st.loss[1][1] = LossDb(5);
  st.loss[2][1] = LossDb(2);
  st.visited[2][1] = true;
  EXPECT_EQ(gpl(st), (PortRef{0, 1}));
}

TEST(Gpl, ExhaustedWhenNothingFinite) {
  SearchState st = blank_state(2, 2);
  st.loss[1][1] = LossDb(1);
  st.visited[1][1] = true;
  EXPECT_FALSE(gpl(st).has_value());
}

TEST(Gpl, TiesGoToLowerNodeThenPort) {
  SearchState st = blank_state(3, 3);
  st.loss[2][1] = LossDb(3);
  st.loss[1][3] = LossDb(3);
  st.loss[1][2] = LossDb(3);
  EXPECT_EQ(gpl(st), (PortRef{1, 2}));
}

TEST(PathSearch, CaseFourAlice) {
  const Graph g = testkit::load_fixture("case4");
  const PathRecord rec = path_search(g, g.source_id(), testkit::id_of(g, "Alice"));
  EXPECT_EQ(rec.path.flat(), (std::vector<int>{0, 1, 1, 1, 1, 2, 5, 1}));
  EXPECT_NEAR(rec.loss.value(), 14.9, 1e-9);
  EXPECT_EQ(rec.available, g.grid().all());
  EXPECT_TRUE(rec.occupied.empty());
}

TEST(PathSearch, DirectWiredUser) {
  const Graph g = direct_pair();
  const PathRecord rec = path_search(g, 0, 1);
  EXPECT_EQ(rec.loss, LossDb(3.0));
  EXPECT_EQ(rec.available, g.grid().all());
  EXPECT_EQ(rec.path.flat(), (std::vector<int>{0, 1, 1, 1}));
}

TEST(PathSearch, Errors) {
  const Graph g = direct_pair();
  try {
    path_search(g, 0, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NoPath);
  }
  try {
    path_search(g, 0, 9);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotFound);
  }
}

TEST(PathSearch, MatchesBruteForceOnPristineGraphs) {
  std::mt19937 rng(1234);
  int reachable = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const Graph g = testkit::random_graph(rng);
    for (int t = 1; t < static_cast<int>(g.nodes().size()); ++t) {
      const double want = testkit::brute_force_loss(g, t);
      try {
        const PathRecord rec = path_search(g, g.source_id(), t);
        ASSERT_EQ(rec.loss.value(), want) << "trial " << trial << " target " << t;
        ++reachable;
      } catch (const Error& e) {
        ASSERT_EQ(e.kind(), ErrorKind::NoPath);
        ASSERT_TRUE(std::isinf(want)) << "trial " << trial << " target " << t;
      }
    }
  }
  EXPECT_GT(reachable, 200);
}

TEST(PathSearch, ResultsAreValidAndSelfConsistent) {
  std::mt19937 rng(77);
  for (int trial = 0; trial < 300; ++trial) {
    Graph g = testkit::random_graph(rng);
    testkit::random_locks(g, rng, 3);
    for (int t = 1; t < static_cast<int>(g.nodes().size()); ++t) {
      PathRecord rec;
      SearchStats stats;
      try {
        rec = path_search(g, g.source_id(), t, &stats);
      } catch (const Error&) {
        continue;
      }
      ASSERT_LE(stats.gpl_calls, port_total(g) + 1);
      ASSERT_NO_THROW(g.validate_path(rec.path));
      ASSERT_EQ(rec.path.back().node, t);
      for (Channel c : rec.available) ASSERT_FALSE(rec.occupied.count(c));
      for (Channel c : g.grid().channels) {
        const bool eff = recompute_loss(g, rec.path, c, LockView::Effective).finite();
        const bool raw = recompute_loss(g, rec.path, c, LockView::Raw).finite();
        ASSERT_EQ(rec.available.count(c) == 1, eff) << "CH" << c.index;
        ASSERT_EQ(rec.occupied.count(c) == 1, raw && !eff) << "CH" << c.index;
      }
      // Templates give one loss per row, so every open channel costs l.
      for (Channel c : rec.available) ASSERT_EQ(recompute_loss(g, rec.path, c), rec.loss);
    }
  }
}

TEST(PathSearch, LockMonotonicity) {
  std::mt19937 rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    Graph g = testkit::random_graph(rng);
    const int n = static_cast<int>(g.nodes().size());
    std::vector<double> before(n, INFINITY);
    for (int t = 1; t < n; ++t) before[t] = testkit::brute_force_loss(g, t);
    for (int step = 0; step < 3; ++step) {
      testkit::random_locks(g, rng, 1);
      for (int t = 1; t < n; ++t) {
        double now = INFINITY;
        try {
          now = path_search(g, g.source_id(), t).loss.value();
        } catch (const Error&) {
        }
        ASSERT_GE(now, before[t]);
        before[t] = now;
      }
    }
  }
}

TEST(RecomputeLoss, TrivialCases) {
  const Graph g = testkit::load_fixture("case4");
  EXPECT_EQ(recompute_loss(g, PathEncoding{}, Channel{30}), LossDb(0.0));
  const Graph five = testkit::load_fixture("case5");
  const PathRecord rec = path_search(five, five.source_id(), testkit::id_of(five, "Alice"));
  for (Channel c : five.grid().channels) {
    if (!rec.available.count(c)) {
      EXPECT_FALSE(recompute_loss(five, rec.path, c).finite()) << c.index;
    }
  }
  EXPECT_FALSE(rec.available.empty());
}

TEST(TraversalRowMin, WdmTakesCheapestSlot) {
  const Graph g = testkit::load_fixture("case4");
  EXPECT_EQ(traversal_row_min(g, Traversal{1, 1, 2}), LossDb(4.0));
  EXPECT_FALSE(traversal_row_min(g, Traversal{1, 2, 3}).finite());
}
