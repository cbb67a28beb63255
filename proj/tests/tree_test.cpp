#include "booltree/tree.hpp"

#include <gtest/gtest.h>

#include <random>

#include "test_util.hpp"

using namespace booltree;

namespace {

// Depth-1 tree that separates the 10-row example table perfectly:
// count of f1,f2,f3 at most 1 → class 0, else class 1.
BooleanTree example_tree() {
  BooleanTree tree(1, 5, 2);
  tree.rules[1] = SplitRule{{0, 1, 2}, 1};
  tree.leaf_labels[2] = 0;
  tree.leaf_labels[3] = 1;
  return tree;
}

// Depth-2 tree with rules "f1+f2 <= 0?" at the root and "f4+f5 <= 1?" at
// the right child; the left subtree is a single effective leaf.
BooleanTree two_rule_tree() {
  BooleanTree tree(2, 5, 2);
  tree.rules[1] = SplitRule{{0, 1}, 0};
  tree.rules[3] = SplitRule{{3, 4}, 1};
  tree.leaf_labels[4] = 0;
  tree.leaf_labels[6] = 0;
  tree.leaf_labels[7] = 1;
  return tree;
}

BooleanTree random_tree(std::mt19937_64& rng, int depth, std::size_t n_features,
                        int n_classes) {
  BooleanTree tree(depth, n_features, n_classes);
  for (int t = 1; t < tree.topology.leaf_begin(); ++t) {
    if (t > 1 && !tree.active(TreeTopology::parent(t))) continue;  // keep nesting
    if (rng() % 3 == 0) continue;  // leave some nodes inactive
    std::vector<int> feats;
    for (std::size_t f = 0; f < n_features; ++f)
      if (rng() % n_features < 2) feats.push_back(int(f));
    if (feats.empty()) feats.push_back(int(rng() % n_features));
    tree.rules[t] = SplitRule{feats, int(rng() % feats.size())};
  }
  for (int t = tree.topology.leaf_begin(); t < tree.topology.leaf_end(); ++t)
    tree.leaf_labels[t] = int(rng() % n_classes);
  return tree;
}

std::vector<std::uint8_t> random_instance(std::mt19937_64& rng, std::size_t n_features) {
  std::vector<std::uint8_t> x(n_features);
  for (auto& v : x) v = rng() % 2;
  return x;
}

}  // namespace

TEST(Topology, DepthTwoLayout) {
  TreeTopology topo(2);
  EXPECT_EQ(topo.total_nodes(), 7);
  EXPECT_EQ(topo.leaf_begin(), 4);
  EXPECT_EQ(topo.leaf_end(), 8);
  EXPECT_TRUE(topo.is_branch(1));
  EXPECT_TRUE(topo.is_branch(3));
  EXPECT_FALSE(topo.is_branch(4));
  EXPECT_TRUE(topo.is_leaf(7));
  EXPECT_EQ(TreeTopology::parent(6), 3);
  EXPECT_EQ(TreeTopology::level(1), 1);
  EXPECT_EQ(TreeTopology::level(3), 2);
  EXPECT_EQ(TreeTopology::level(6), 3);
}

TEST(Topology, AncestorSetsMatchHandComputedValues) {
  TreeTopology topo(2);
  EXPECT_EQ(topo.ancestors(6), (std::vector<int>{1, 3}));
  EXPECT_EQ(topo.left_ancestors(6), (std::vector<int>{3}));
  EXPECT_EQ(topo.right_ancestors(6), (std::vector<int>{1}));
  EXPECT_EQ(topo.ancestors(4), (std::vector<int>{1, 2}));
  EXPECT_EQ(topo.left_ancestors(4), (std::vector<int>{1, 2}));
  EXPECT_TRUE(topo.right_ancestors(4).empty());
}

TEST(Topology, PotentialParentsMatchHandComputedValues) {
  TreeTopology topo(2);
  EXPECT_EQ(topo.potential_parents(4), (std::vector<int>{1, 2}));
  EXPECT_EQ(topo.potential_parents(5), (std::vector<int>{2}));
  EXPECT_EQ(topo.potential_parents(6), (std::vector<int>{1, 3}));
  EXPECT_EQ(topo.potential_parents(7), (std::vector<int>{3}));
  EXPECT_THROW(topo.potential_parents(2), UsageError);
}

TEST(Topology, AncestorsAreDisjointUnionOfLeftAndRight) {
  TreeTopology topo(4);
  for (int t = 2; t < topo.leaf_end(); ++t) {
    auto all = topo.ancestors(t);
    auto left = topo.left_ancestors(t);
    auto right = topo.right_ancestors(t);
    EXPECT_EQ(all.size(), left.size() + right.size());
    std::vector<int> merged(left);
    merged.insert(merged.end(), right.begin(), right.end());
    std::sort(merged.begin(), merged.end());
    std::vector<int> sorted_all(all);
    std::sort(sorted_all.begin(), sorted_all.end());
    EXPECT_EQ(merged, sorted_all);
  }
}

TEST(Topology, PotentialParentBoundIsDepth) {
  // Every leaf's potential-parent set is nonempty and at most D long; the
  // leftmost leaf collects a full root-to-leaf chain.
  for (int d = 1; d <= 4; ++d) {
    TreeTopology topo(d);
    for (int t = topo.leaf_begin(); t < topo.leaf_end(); ++t) {
      auto pp = topo.potential_parents(t);
      EXPECT_GE(pp.size(), 1u);
      EXPECT_LE(pp.size(), std::size_t(d));
    }
    EXPECT_EQ(int(topo.potential_parents(topo.leaf_begin()).size()), d);
  }
}

TEST(Route, ExampleTableRoutesToItsClasses) {
  BooleanTree tree = example_tree();
  BinaryDataset data = testutil::example_dataset();
  for (std::size_t i = 0; i < data.n; ++i) {
    std::span<const std::uint8_t> row{data.x.data() + i * data.n_features, data.n_features};
    EXPECT_EQ(tree.predict(row), data.y[i]) << "row " << i;
  }
  // First row has no true feature among f1..f3 → left leaf (node 2).
  std::span<const std::uint8_t> e1{data.x.data(), data.n_features};
  EXPECT_EQ(tree.route(e1), 2);
  // Row 8 has all of f1..f3 true → right leaf.
  std::span<const std::uint8_t> e8{data.x.data() + 7 * data.n_features, data.n_features};
  EXPECT_EQ(tree.route(e8), 3);
}

TEST(Route, TwoRuleTreeGoesRightRight) {
  BooleanTree tree = two_rule_tree();
  // f1=1 violates "f1+f2 <= 0", then f4=f5=1 violates "f4+f5 <= 1".
  std::vector<std::uint8_t> x = {1, 0, 0, 1, 1};
  EXPECT_EQ(tree.route(x), 7);
  EXPECT_EQ(tree.predict(x), 1);
  // f1=f2=0 goes left at the root; node 2 is inactive so the walk falls
  // through to the leftmost leaf.
  std::vector<std::uint8_t> zero = {0, 0, 0, 0, 0};
  EXPECT_EQ(tree.route(zero), 4);
  EXPECT_EQ(tree.predict(zero), 0);
}

TEST(Route, FullyInactiveTreeReachesLeftmostLeaf) {
  BooleanTree tree(3, 4, 2);
  tree.leaf_labels[tree.topology.leaf_begin()] = 1;
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    auto x = random_instance(rng, 4);
    EXPECT_EQ(tree.route(x), tree.topology.leaf_begin());
    EXPECT_EQ(tree.predict(x), 1);
  }
}

TEST(Route, DimensionMismatchThrows) {
  BooleanTree tree = example_tree();
  std::vector<std::uint8_t> x = {1, 0, 1};
  EXPECT_THROW(tree.route(x), DataError);
}

TEST(Route, UnlabeledLeafThrowsOnPredict) {
  BooleanTree tree(1, 3, 2);
  tree.leaf_labels[3] = 1;  // leaf 2 left unlabeled, root inactive → reached
  std::vector<std::uint8_t> x = {0, 0, 0};
  EXPECT_EQ(tree.route(x), 2);
  EXPECT_THROW(tree.predict(x), DataError);
}

TEST(Route, EveryInstanceReachesExactlyOneReachableLeaf) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    BooleanTree tree = random_tree(rng, 1 + int(rng() % 3), 6, 2);
    for (int k = 0; k < 10; ++k) {
      auto x = random_instance(rng, 6);
      int leaf = tree.route(x);
      EXPECT_TRUE(tree.topology.is_leaf(leaf));
      EXPECT_TRUE(tree.reachable(leaf));
    }
  }
}

TEST(Reachable, RightTurnsNeedActiveAncestors) {
  BooleanTree tree = two_rule_tree();
  EXPECT_TRUE(tree.reachable(4));
  EXPECT_FALSE(tree.reachable(5));  // right child of inactive node 2
  EXPECT_TRUE(tree.reachable(6));
  EXPECT_TRUE(tree.reachable(7));

  BooleanTree empty(2, 5, 2);
  EXPECT_TRUE(empty.reachable(4));  // all-left path never needs a rule
  EXPECT_FALSE(empty.reachable(5));
  EXPECT_FALSE(empty.reachable(6));
  EXPECT_FALSE(empty.reachable(7));
}

TEST(UnivariateDepth, TwoRuleTreeNeedsDepthFour) {
  EXPECT_EQ(equivalent_univariate_depth(two_rule_tree()), 4);
}

TEST(UnivariateDepth, UnivariateTreeKeepsItsDepth) {
  BooleanTree tree(3, 4, 2);
  tree.rules[1] = SplitRule{{0}, 0};
  tree.rules[2] = SplitRule{{1}, 0};
  tree.rules[3] = SplitRule{{2}, 0};
  tree.rules[4] = SplitRule{{3}, 0};
  tree.rules[5] = SplitRule{{0}, 0};
  tree.rules[6] = SplitRule{{1}, 0};
  tree.rules[7] = SplitRule{{2}, 0};
  for (int t = 8; t < 16; ++t) tree.leaf_labels[t] = t % 2;
  EXPECT_EQ(equivalent_univariate_depth(tree), 3);
}

TEST(UnivariateDepth, SingleThreeFeatureRootCostsFour) {
  BooleanTree tree(2, 5, 2);
  tree.rules[1] = SplitRule{{0, 2, 4}, 1};
  tree.leaf_labels[4] = 0;
  tree.leaf_labels[6] = 1;
  tree.leaf_labels[7] = 1;
  EXPECT_EQ(equivalent_univariate_depth(tree), 4);  // 2^(3-1), level 2 empty
}

TEST(UnivariateDepth, NoActiveSplitThrows) {
  BooleanTree tree(2, 5, 2);
  for (int t = 4; t < 8; ++t) tree.leaf_labels[t] = 0;
  EXPECT_THROW(equivalent_univariate_depth(tree), DataError);
}

TEST(Canonicalize, SortsFeatures) {
  BooleanTree tree(1, 5, 2);
  tree.rules[1] = SplitRule{{3, 1, 2}, 1};  // deliberately unsorted
  tree.leaf_labels[2] = 0;
  tree.leaf_labels[3] = 1;
  BooleanTree canon = canonicalize(tree);
  EXPECT_EQ(canon.rules[1]->features, (std::vector<int>{1, 2, 3}));
}

TEST(Canonicalize, ClearsSubtreesUnderInactiveNodes) {
  BooleanTree tree(2, 5, 2);
  tree.rules[2] = SplitRule{{0}, 0};  // orphan rules under an inactive root
  tree.rules[3] = SplitRule{{1}, 0};
  for (int t = 4; t < 8; ++t) tree.leaf_labels[t] = 1;
  BooleanTree canon = canonicalize(tree);
  EXPECT_FALSE(canon.rules[2].has_value());
  EXPECT_FALSE(canon.rules[3].has_value());
  EXPECT_EQ(canon.leaf_labels[4], 1);   // leftmost leaf stays reachable
  EXPECT_EQ(canon.leaf_labels[5], -1);  // the rest are unreachable
  EXPECT_EQ(canon.leaf_labels[6], -1);
  EXPECT_EQ(canon.leaf_labels[7], -1);
  EXPECT_NO_THROW(canon.validate());
}

TEST(Canonicalize, IdempotentAndPredictionInvariant) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 40; ++trial) {
    BooleanTree tree = random_tree(rng, 1 + int(rng() % 3), 5, 3);
    BooleanTree once = canonicalize(tree);
    BooleanTree twice = canonicalize(once);
    EXPECT_EQ(once, twice);
    for (int k = 0; k < 8; ++k) {
      auto x = random_instance(rng, 5);
      EXPECT_EQ(tree.predict(x), once.predict(x));
    }
  }
}

TEST(Validate, CatchesBrokenInvariants) {
  BooleanTree tree = example_tree();
  EXPECT_NO_THROW(tree.validate());

  BooleanTree bad = example_tree();
  bad.rules[1]->threshold = 3;  // must be ≤ |S|-1 = 2
  EXPECT_THROW(bad.validate(), DataError);

  bad = example_tree();
  bad.rules[1]->features = {0, 0, 1};
  EXPECT_THROW(bad.validate(), DataError);

  bad = example_tree();
  bad.rules[1]->features = {0, 9};
  EXPECT_THROW(bad.validate(), DataError);

  bad = example_tree();
  bad.leaf_labels[3] = 5;
  EXPECT_THROW(bad.validate(), DataError);

  bad = example_tree();
  bad.leaf_labels[2] = -1;  // reachable leaf without a label
  EXPECT_THROW(bad.validate(), DataError);

  BooleanTree orphan(2, 5, 2);
  orphan.rules[2] = SplitRule{{0}, 0};  // active under inactive root
  EXPECT_THROW(orphan.validate(), DataError);
}

TEST(HyperParamsCheck, RejectsBadValues) {
  HyperParams p;
  EXPECT_NO_THROW(p.validate());
  p.depth = 0;
  EXPECT_THROW(p.validate(), UsageError);
  p = HyperParams{};
  p.max_rule_features = 0;
  EXPECT_THROW(p.validate(), UsageError);
  p = HyperParams{};
  p.alpha = Rational(-1, 2);
  EXPECT_THROW(p.validate(), UsageError);
  p = HyperParams{};
  p.cost_fp = Rational(0);
  EXPECT_THROW(p.validate(), UsageError);
}

TEST(ModelIo, RoundTripExampleTree) {
  auto dir = testutil::temp_dir();
  std::string path = (dir / "model.txt").string();
  BooleanTree tree = example_tree();
  save_tree(tree, path);
  BooleanTree loaded = load_tree(path);
  EXPECT_EQ(loaded, tree);

  // Saved text is human-readable and stable.
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_EQ(ss.str(),
            "booltree-model 1\n"
            "depth 1\n"
            "features 5\n"
            "classes 2\n"
            "node 1 rule f1+f2+f3 <= 1\n"
            "node 2 label 0\n"
            "node 3 label 1\n");
}

TEST(ModelIo, RoundTripRandomCanonicalTrees) {
  std::mt19937_64 rng(77);
  auto dir = testutil::temp_dir();
  std::string path = (dir / "model.txt").string();
  for (int trial = 0; trial < 30; ++trial) {
    BooleanTree tree = canonicalize(random_tree(rng, 1 + int(rng() % 3), 7, 3));
    save_tree(tree, path);
    EXPECT_EQ(load_tree(path), tree);
  }
}

TEST(ModelIo, RejectsBadFiles) {
  auto dir = testutil::temp_dir();
  std::string path = (dir / "model.txt").string();

  testutil::write_file(path, "");
  EXPECT_THROW(load_tree(path), FormatError);

  // Threshold beyond |S|-1 names the offending node.
  testutil::write_file(path,
                       "booltree-model 1\ndepth 1\nfeatures 5\nclasses 2\n"
                       "node 1 rule f1+f2 <= 2\nnode 2 label 0\nnode 3 label 1\n");
  try {
    load_tree(path);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("node 1"), std::string::npos);
  }

  testutil::write_file(path,
                       "booltree-model 1\ndepth 1\nfeatures 5\nclasses 2\n"
                       "node 1 rule f9 <= 0\nnode 2 label 0\nnode 3 label 1\n");
  EXPECT_THROW(load_tree(path), FormatError);

  testutil::write_file(path,
                       "booltree-model 1\ndepth 1\nfeatures 5\nclasses 2\n"
                       "node 5 label 0\n");
  EXPECT_THROW(load_tree(path), FormatError);

  testutil::write_file(path,
                       "booltree-model 1\ndepth 1\nfeatures 5\nclasses 2\n"
                       "node 2 label 9\n");
  EXPECT_THROW(load_tree(path), FormatError);

  // Missing label on the (reachable) left leaf.
  testutil::write_file(path,
                       "booltree-model 1\ndepth 1\nfeatures 5\nclasses 2\n"
                       "node 3 label 1\n");
  EXPECT_THROW(load_tree(path), FormatError);
}
