#include "booltree/mip.hpp"

#include <gtest/gtest.h>

#include <random>

#include "test_util.hpp"

using namespace booltree;

namespace {

HyperParams depth1_params(Rational alpha = Rational(0)) {
  HyperParams hp;
  hp.depth = 1;
  hp.max_rule_features = 3;
  hp.min_leaf_support = 1;
  hp.alpha = alpha;
  return hp;
}

// The known-optimal split of the 10-row example table, written variable by
// variable. Rows 1,2,3,5 (1-based) have at most one of f1..f3 set and are
// class 0; the rest exceed the threshold and are class 1.
Assignment example_optimal_assignment(const ModelSpec& m) {
  Assignment a;
  for (const auto& v : m.variables) a[v.name] = Rational(0);
  a["d_1"] = Rational(1);
  a["b_1"] = Rational(1);
  a["a_1_f1"] = a["a_1_f2"] = a["a_1_f3"] = Rational(1);
  a["l_2"] = a["l_3"] = Rational(1);
  a["c_2_0"] = Rational(1);
  a["c_3_1"] = Rational(1);
  for (int i : {1, 2, 3, 5}) a["z_" + std::to_string(i) + "_2"] = Rational(1);
  for (int i : {4, 6, 7, 8, 9, 10}) a["z_" + std::to_string(i) + "_3"] = Rational(1);
  a["M_0_2"] = Rational(4);
  a["M_1_3"] = Rational(6);
  a["N_2"] = Rational(4);
  a["N_3"] = Rational(6);
  // e_2 = e_3 = 0 already.
  return a;
}

BinaryDataset random_binary_dataset(std::mt19937_64& rng, std::size_t n, std::size_t m) {
  BinaryDataset d;
  d.n = n;
  d.n_features = m;
  d.n_classes = 2;
  d.x.resize(n * m);
  for (auto& v : d.x) v = rng() % 2;
  d.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) d.y[i] = i < n / 2 ? 0 : 1;  // both classes present
  for (std::size_t f = 0; f < m; ++f) d.feature_names.push_back("f" + std::to_string(f + 1));
  d.label_names = {"0", "1"};
  d.recount();
  return d;
}

BooleanTree random_valid_tree(std::mt19937_64& rng, int depth, std::size_t n_features,
                              int max_features) {
  BooleanTree tree(depth, n_features, 2);
  for (int t = 1; t < tree.topology.leaf_begin(); ++t) {
    if (t > 1 && !tree.active(TreeTopology::parent(t))) continue;
    if (rng() % 4 == 0) continue;
    std::vector<std::size_t> order(n_features);
    for (std::size_t f = 0; f < n_features; ++f) order[f] = f;
    std::shuffle(order.begin(), order.end(), rng);
    const std::size_t size = 1 + rng() % std::min<std::size_t>(max_features, n_features);
    std::vector<int> feats(order.begin(), order.begin() + size);
    std::sort(feats.begin(), feats.end());
    tree.rules[t] = SplitRule{feats, int(rng() % feats.size())};
  }
  for (int t = tree.topology.leaf_begin(); t < tree.topology.leaf_end(); ++t)
    tree.leaf_labels[t] = int(rng() % 2);
  return canonicalize(tree);
}

// The whole-accuracy encoding bounds e_t by N_t - M_kt for every class, so a
// leaf labeled against its majority has no feasible error value. Relabel each
// nonempty reachable leaf with its (lowest-index) majority class.
BooleanTree majority_relabel(BooleanTree tree, const BinaryDataset& data) {
  std::map<int, std::vector<long long>> counts;
  for (std::size_t i = 0; i < data.n; ++i) {
    const int leaf = tree.route({data.x.data() + i * data.n_features, data.n_features});
    auto& c = counts[leaf];
    c.resize(data.n_classes, 0);
    ++c[data.y[i]];
  }
  for (const auto& [leaf, c] : counts)
    tree.leaf_labels[leaf] =
        int(std::max_element(c.begin(), c.end()) - c.begin());
  return tree;
}

// Name-keyed model comparison for LP round-trips (variable order may differ).
void expect_models_equivalent(const ModelSpec& built, const ModelSpec& read) {
  EXPECT_EQ(built.maximize, read.maximize);
  EXPECT_DOUBLE_EQ(to_double(built.obj_constant), to_double(read.obj_constant));

  auto term_map = [](const ModelSpec& m,
                     const std::vector<std::pair<std::size_t, Rational>>& terms) {
    std::map<std::string, double> out;
    for (const auto& [v, coef] : terms) out[m.variables[v].name] += to_double(coef);
    return out;
  };
  EXPECT_EQ(term_map(built, built.obj_terms), term_map(read, read.obj_terms));

  ASSERT_EQ(built.variables.size(), read.variables.size());
  for (const auto& v : built.variables) {
    const auto& r = read.variables[read.index(v.name)];
    EXPECT_EQ(int(v.type), int(r.type)) << v.name;
    EXPECT_DOUBLE_EQ(to_double(v.lb), to_double(r.lb)) << v.name;
    EXPECT_DOUBLE_EQ(to_double(v.ub), to_double(r.ub)) << v.name;
  }

  ASSERT_EQ(built.constraints.size(), read.constraints.size());
  std::map<std::string, const LinCon*> by_name;
  for (const auto& c : read.constraints) by_name[c.name] = &c;
  for (const auto& c : built.constraints) {
    ASSERT_TRUE(by_name.count(c.name)) << c.name;
    const LinCon& r = *by_name[c.name];
    EXPECT_EQ(int(c.sense), int(r.sense)) << c.name;
    EXPECT_DOUBLE_EQ(to_double(c.rhs), to_double(r.rhs)) << c.name;
    EXPECT_EQ(term_map(built, c.terms), term_map(read, r.terms)) << c.name;
  }

  ASSERT_EQ(built.quad.has_value(), read.quad.has_value());
  if (built.quad) {
    EXPECT_EQ(built.quad->name, read.quad->name);
    EXPECT_EQ(int(built.quad->sense), int(read.quad->sense));
    EXPECT_DOUBLE_EQ(to_double(built.quad->rhs), to_double(read.quad->rhs));
    EXPECT_EQ(term_map(built, built.quad->lin), term_map(read, read.quad->lin));
    auto quad_map = [](const ModelSpec& m, const std::vector<QuadTerm>& terms) {
      std::map<std::pair<std::string, std::string>, double> out;
      for (const auto& q : terms)
        out[{m.variables[q.v1].name, m.variables[q.v2].name}] += to_double(q.coef);
      return out;
    };
    EXPECT_EQ(quad_map(built, built.quad->quad), quad_map(read, read.quad->quad));
  }
}

Rational direct_tree_objective(const BooleanTree& tree, const BinaryDataset& data,
                               const HyperParams& hp, ObjectiveKind obj) {
  ConfusionMatrix cm = confusion(data.y, tree.predict_all(data), data.n_classes);
  const Rational complexity = hp.alpha * Rational(tree.total_rule_features());
  switch (obj) {
    case ObjectiveKind::Accuracy:
      return Rational(cm.total() - cm.correct(), data.n) + complexity;
    case ObjectiveKind::CostSensitive:
      return mec(cm, hp.cost_fp, hp.cost_fn) / Rational(data.n) + complexity;
    case ObjectiveKind::BalancedAccuracy:
      return balanced_accuracy(cm, data.positives(), data.negatives()) - complexity;
    case ObjectiveKind::F1:
      return f1(cm, data.positives()) - complexity;
  }
  throw UsageError("unknown objective");
}

}  // namespace

TEST(BuildModel, VariableCountsAtDepthOne) {
  BinaryDataset data = testutil::example_dataset();
  ModelSpec m = build_model(data, depth1_params(), ObjectiveKind::Accuracy);
  int z_vars = 0, a_vars = 0;
  for (const auto& v : m.variables) {
    if (v.name.rfind("z_", 0) == 0) ++z_vars;
    if (v.name.rfind("a_", 0) == 0) ++a_vars;
  }
  EXPECT_EQ(z_vars, 20);  // 10 instances x 2 leaves
  EXPECT_EQ(a_vars, 5);   // 1 branch node x 5 features
}

TEST(BuildModel, ErrorVariableFamiliesPerObjective) {
  BinaryDataset data = testutil::example_dataset();
  auto count_e = [](const ModelSpec& m, bool per_class) {
    int c = 0;
    for (const auto& v : m.variables) {
      if (v.name.rfind("e_", 0) != 0) continue;
      const bool has_k = std::count(v.name.begin(), v.name.end(), '_') == 2;
      if (has_k == per_class) ++c;
    }
    return c;
  };
  ModelSpec acc = build_model(data, depth1_params(), ObjectiveKind::Accuracy);
  EXPECT_EQ(count_e(acc, false), 2);
  EXPECT_EQ(count_e(acc, true), 0);  // no per-class error variables

  ModelSpec cost = build_model(data, depth1_params(), ObjectiveKind::CostSensitive);
  EXPECT_EQ(count_e(cost, false), 0);
  EXPECT_EQ(count_e(cost, true), 4);  // 2 per leaf

  ModelSpec f1m = build_model(data, depth1_params(), ObjectiveKind::F1);
  EXPECT_TRUE(f1m.quad.has_value());
  EXPECT_FALSE(acc.quad.has_value());
}

TEST(BuildModel, Preconditions) {
  BinaryDataset data = testutil::example_dataset();
  HyperParams hp = depth1_params();
  hp.max_rule_features = 6;  // more than the 5 features
  EXPECT_THROW(build_model(data, hp, ObjectiveKind::Accuracy), UsageError);

  BinaryDataset three = data;
  three.n_classes = 3;
  three.y[0] = 2;
  three.recount();
  EXPECT_NO_THROW(build_model(three, depth1_params(), ObjectiveKind::Accuracy));
  EXPECT_THROW(build_model(three, depth1_params(), ObjectiveKind::F1), UsageError);
  EXPECT_THROW(build_model(three, depth1_params(), ObjectiveKind::BalancedAccuracy), UsageError);
}

TEST(CheckAssignment, ExampleOptimumIsFeasibleWithObjectiveThreeAlpha) {
  BinaryDataset data = testutil::example_dataset();
  const Rational alpha(1, 4);
  ModelSpec m = build_model(data, depth1_params(alpha), ObjectiveKind::Accuracy);
  Assignment a = example_optimal_assignment(m);
  CheckReport report = check_assignment(m, a);
  EXPECT_TRUE(report.feasible) << (report.violations.empty() ? "" : report.violations[0]);
  EXPECT_EQ(report.objective, Rational(0) + alpha * Rational(3));

  ModelSpec m0 = build_model(data, depth1_params(), ObjectiveKind::Accuracy);
  EXPECT_EQ(check_assignment(m0, example_optimal_assignment(m0)).objective, Rational(0));
}

TEST(CheckAssignment, RaisedThresholdBreaksRouting) {
  BinaryDataset data = testutil::example_dataset();
  ModelSpec m = build_model(data, depth1_params(), ObjectiveKind::Accuracy);
  Assignment a = example_optimal_assignment(m);
  a["b_1"] = Rational(2);  // instances with rule count 2 can no longer go right
  CheckReport report = check_assignment(m, a);
  EXPECT_FALSE(report.feasible);
  bool names_routing = false;
  for (const auto& v : report.violations)
    names_routing = names_routing || v.rfind("route_right_", 0) == 0;
  EXPECT_TRUE(names_routing);
}

TEST(CheckAssignment, AllZeroViolatesEveryAssignment) {
  BinaryDataset data = testutil::example_dataset();
  ModelSpec m = build_model(data, depth1_params(), ObjectiveKind::Accuracy);
  Assignment a;
  for (const auto& v : m.variables) a[v.name] = Rational(0);
  CheckReport report = check_assignment(m, a);
  EXPECT_FALSE(report.feasible);
  EXPECT_EQ(report.violations.size(), 10u);
  for (const auto& v : report.violations) EXPECT_EQ(v.rfind("assign_one_", 0), 0u) << v;
}

TEST(CheckAssignment, MissingVariableThrows) {
  BinaryDataset data = testutil::example_dataset();
  ModelSpec m = build_model(data, depth1_params(), ObjectiveKind::Accuracy);
  Assignment a = example_optimal_assignment(m);
  a.erase("N_2");
  EXPECT_THROW(check_assignment(m, a), UsageError);
}

TEST(CheckAssignment, BoundAndIntegralityViolationsReported) {
  BinaryDataset data = testutil::example_dataset();
  ModelSpec m = build_model(data, depth1_params(), ObjectiveKind::Accuracy);
  Assignment a = example_optimal_assignment(m);
  a["d_1"] = Rational(1, 2);
  CheckReport report = check_assignment(m, a);
  EXPECT_FALSE(report.feasible);
  bool integral = false;
  for (const auto& v : report.violations) integral = integral || v == "integral:d_1";
  EXPECT_TRUE(integral);

  a = example_optimal_assignment(m);
  a["b_1"] = Rational(7);  // above its bound of F_max-1 = 2
  report = check_assignment(m, a);
  bool bound = false;
  for (const auto& v : report.violations) bound = bound || v == "bound:b_1";
  EXPECT_TRUE(bound);
}

TEST(EmitLp, ByteIdenticalAcrossBuilds) {
  BinaryDataset data = testutil::example_dataset();
  const std::string once =
      emit_lp_string(build_model(data, depth1_params(Rational(1, 100)), ObjectiveKind::Accuracy));
  const std::string twice =
      emit_lp_string(build_model(data, depth1_params(Rational(1, 100)), ObjectiveKind::Accuracy));
  EXPECT_EQ(once, twice);
  EXPECT_NE(once.find("Minimize"), std::string::npos);
  EXPECT_NE(once.find("feat_cap_1:"), std::string::npos);
  EXPECT_NE(once.find("Binaries"), std::string::npos);
}

TEST(EmitLp, RoundTripsThroughOwnReader) {
  BinaryDataset data = testutil::example_dataset();
  auto dir = testutil::temp_dir();
  for (ObjectiveKind obj : {ObjectiveKind::Accuracy, ObjectiveKind::CostSensitive,
                            ObjectiveKind::BalancedAccuracy, ObjectiveKind::F1}) {
    HyperParams hp = depth1_params(Rational(3, 100));
    hp.depth = 2;
    hp.cost_fp = Rational(5);
    hp.cost_fn = Rational(1, 2);
    ModelSpec built = build_model(data, hp, obj);
    std::string path = (dir / (objective_name(obj) + ".lp")).string();
    emit_lp(built, path);
    ModelSpec read = read_lp(path);
    expect_models_equivalent(built, read);
  }
}

TEST(EmitLp, F1ModelHasExactlyOneQuadraticConstraint) {
  BinaryDataset data = testutil::example_dataset();
  ModelSpec m = build_model(data, depth1_params(), ObjectiveKind::F1);
  auto dir = testutil::temp_dir();
  std::string path = (dir / "f1.lp").string();
  emit_lp(m, path);
  std::ifstream in(path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  EXPECT_EQ(std::count(text.begin(), text.end(), '['), 1);
  EXPECT_EQ(std::count(text.begin(), text.end(), ']'), 1);
  EXPECT_NE(text.find("F_1"), std::string::npos);
  EXPECT_NE(text.find("Maximize"), std::string::npos);
}

TEST(ParseSolution, OptimalValuesPassCheck) {
  BinaryDataset data = testutil::example_dataset();
  ModelSpec m = build_model(data, depth1_params(), ObjectiveKind::Accuracy);
  Assignment a = example_optimal_assignment(m);
  auto dir = testutil::temp_dir();
  std::string path = (dir / "sol.txt").string();
  write_solution(m, a, path);
  Assignment parsed = parse_solution(m, path);
  CheckReport report = check_assignment(m, parsed);
  EXPECT_TRUE(report.feasible);
  EXPECT_EQ(report.objective, Rational(0));
}

TEST(ParseSolution, EmptyFileIsAllZero) {
  BinaryDataset data = testutil::example_dataset();
  ModelSpec m = build_model(data, depth1_params(), ObjectiveKind::Accuracy);
  auto dir = testutil::temp_dir();
  std::string path = (dir / "empty.txt").string();
  testutil::write_file(path, "# nothing but a comment\n");
  Assignment a = parse_solution(m, path);
  for (const auto& [name, value] : a) EXPECT_EQ(value, Rational(0)) << name;
}

TEST(ParseSolution, RejectsUnknownVariableAndGarbage) {
  BinaryDataset data = testutil::example_dataset();
  ModelSpec m = build_model(data, depth1_params(), ObjectiveKind::Accuracy);
  auto dir = testutil::temp_dir();
  std::string path = (dir / "bad.txt").string();
  testutil::write_file(path, "a_1_f9 1\n");
  EXPECT_THROW(parse_solution(m, path), FormatError);
  testutil::write_file(path, "d_1 not_a_number\n");
  EXPECT_THROW(parse_solution(m, path), FormatError);
  testutil::write_file(path, "d_1 0.4\n");  // binary far from integral
  EXPECT_THROW(parse_solution(m, path), FormatError);
  testutil::write_file(path, "b_1 9\n");  // above its bound
  EXPECT_THROW(parse_solution(m, path), FormatError);
}

TEST(ExtractTree, OptimalAssignmentYieldsTheKnownTree) {
  BinaryDataset data = testutil::example_dataset();
  ModelSpec m = build_model(data, depth1_params(), ObjectiveKind::Accuracy);
  BooleanTree tree = extract_tree(m, example_optimal_assignment(m));
  ASSERT_TRUE(tree.rules[1].has_value());
  EXPECT_EQ(tree.rules[1]->features, (std::vector<int>{0, 1, 2}));
  EXPECT_EQ(tree.rules[1]->threshold, 1);
  EXPECT_EQ(tree.leaf_labels[2], 0);
  EXPECT_EQ(tree.leaf_labels[3], 1);
}

TEST(ExtractTree, PhantomRootDecodesToConstantTree) {
  BinaryDataset data = testutil::example_dataset();
  HyperParams hp = depth1_params();
  hp.min_leaf_support = 0;  // the no-split tree needs support 0
  ModelSpec m = build_model(data, hp, ObjectiveKind::Accuracy);
  Assignment a;
  for (const auto& v : m.variables) a[v.name] = Rational(0);
  a["d_1"] = Rational(1);  // active split selecting no features
  a["l_2"] = a["l_3"] = Rational(1);
  a["c_2_1"] = Rational(1);  // majority class of the example table
  a["c_3_0"] = Rational(1);
  for (int i = 1; i <= 10; ++i) a["z_" + std::to_string(i) + "_2"] = Rational(1);
  a["M_0_2"] = Rational(4);
  a["M_1_2"] = Rational(6);
  a["N_2"] = Rational(10);
  a["e_2"] = Rational(4);
  ASSERT_TRUE(check_assignment(m, a).feasible);
  BooleanTree tree = extract_tree(m, a);
  EXPECT_EQ(tree.count_active(), 0);
  EXPECT_EQ(tree.leaf_labels[2], 1);
  EXPECT_EQ(tree.leaf_labels[3], -1);  // unreachable side cleared
}

TEST(ExtractTree, InfeasibleAssignmentThrows) {
  BinaryDataset data = testutil::example_dataset();
  ModelSpec m = build_model(data, depth1_params(), ObjectiveKind::Accuracy);
  Assignment a;
  for (const auto& v : m.variables) a[v.name] = Rational(0);
  EXPECT_THROW(extract_tree(m, a), DataError);
}

TEST(EncodeTree, RoutingAgreesWithAssignment) {
  BinaryDataset data = testutil::example_dataset();
  HyperParams hp = depth1_params();
  BooleanTree tree(1, 5, 2);
  tree.rules[1] = SplitRule{{0, 1, 2}, 1};
  tree.leaf_labels[2] = 0;
  tree.leaf_labels[3] = 1;
  Assignment a = encode_tree(tree, data, hp, ObjectiveKind::Accuracy);
  for (std::size_t i = 0; i < data.n; ++i) {
    const int leaf = tree.route({data.x.data() + i * data.n_features, data.n_features});
    for (int t = 2; t <= 3; ++t)
      EXPECT_EQ(a[var_z(i, t)], Rational(t == leaf ? 1 : 0)) << "i=" << i << " t=" << t;
  }
  ModelSpec m = build_model(data, hp, ObjectiveKind::Accuracy);
  EXPECT_TRUE(check_assignment(m, a).feasible);
}

TEST(EncodeTree, NoSplitTreeNeedsZeroMinSupport) {
  BinaryDataset data = testutil::example_dataset();
  BooleanTree constant(1, 5, 2);
  constant.leaf_labels[2] = 1;

  HyperParams strict = depth1_params();  // min support 1
  ModelSpec m1 = build_model(data, strict, ObjectiveKind::Accuracy);
  CheckReport r1 = check_assignment(m1, encode_tree(constant, data, strict, ObjectiveKind::Accuracy));
  EXPECT_FALSE(r1.feasible);  // the empty right leaf cannot meet the support
  bool support = false;
  for (const auto& v : r1.violations) support = support || v.rfind("leaf_support_", 0) == 0;
  EXPECT_TRUE(support);

  HyperParams relaxed = depth1_params();
  relaxed.min_leaf_support = 0;
  ModelSpec m0 = build_model(data, relaxed, ObjectiveKind::Accuracy);
  CheckReport r0 =
      check_assignment(m0, encode_tree(constant, data, relaxed, ObjectiveKind::Accuracy));
  EXPECT_TRUE(r0.feasible);
  EXPECT_EQ(r0.objective, Rational(4, 10));  // the four negatives are mislabeled
}

TEST(EncodeTree, ExtractEncodeRoundTripAllObjectives) {
  std::mt19937_64 rng(4242);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n = 8 + rng() % 20;
    const std::size_t feats = 3 + rng() % 4;
    BinaryDataset data = random_binary_dataset(rng, n, feats);
    HyperParams hp;
    hp.depth = 1 + int(rng() % 2);
    hp.max_rule_features = 2 + int(rng() % 2);
    hp.min_leaf_support = 0;
    hp.alpha = Rational(int(rng() % 3), 50);
    hp.cost_fp = Rational(2);
    hp.cost_fn = Rational(1, 3);
    BooleanTree free_labels =
        random_valid_tree(rng, hp.depth, feats, hp.max_rule_features);
    BooleanTree majority = majority_relabel(free_labels, data);

    for (ObjectiveKind obj : {ObjectiveKind::Accuracy, ObjectiveKind::CostSensitive,
                              ObjectiveKind::BalancedAccuracy, ObjectiveKind::F1}) {
      const BooleanTree& tree = obj == ObjectiveKind::Accuracy ? majority : free_labels;
      ModelSpec m = build_model(data, hp, obj);
      Assignment a = encode_tree(tree, data, hp, obj);
      CheckReport report = check_assignment(m, a);
      ASSERT_TRUE(report.feasible)
          << objective_name(obj) << " trial " << trial << ": " << report.violations.front();
      EXPECT_EQ(report.objective, direct_tree_objective(tree, data, hp, obj))
          << objective_name(obj) << " trial " << trial;
      BooleanTree back = extract_tree(m, a);
      EXPECT_EQ(back, tree) << objective_name(obj) << " trial " << trial;
    }
  }
}

TEST(EncodeTree, BalancedErrorsSplitIntoFnAndFp) {
  std::mt19937_64 rng(515);
  for (int trial = 0; trial < 20; ++trial) {
    BinaryDataset data = random_binary_dataset(rng, 12 + rng() % 12, 4);
    HyperParams hp;
    hp.depth = 2;
    hp.max_rule_features = 3;
    hp.min_leaf_support = 0;
    BooleanTree tree = random_valid_tree(rng, 2, 4, 3);
    Assignment a = encode_tree(tree, data, hp, ObjectiveKind::BalancedAccuracy);

    ConfusionMatrix cm = confusion(data.y, tree.predict_all(data), 2);
    Rational fn_sum(0), fp_sum(0);
    for (int t = 4; t < 8; ++t) {
      fn_sum += a[var_e(t, 0)];
      fp_sum += a[var_e(t, 1)];
    }
    EXPECT_EQ(fn_sum, Rational(cm.fn())) << "trial " << trial;
    EXPECT_EQ(fp_sum, Rational(cm.fp())) << "trial " << trial;
  }
}

TEST(EncodeTree, OverLimitRuleRejected) {
  BinaryDataset data = testutil::example_dataset();
  HyperParams hp = depth1_params();
  hp.max_rule_features = 2;
  BooleanTree tree(1, 5, 2);
  tree.rules[1] = SplitRule{{0, 1, 2}, 1};  // three features, cap is two
  tree.leaf_labels[2] = 0;
  tree.leaf_labels[3] = 1;
  EXPECT_THROW(encode_tree(tree, data, hp, ObjectiveKind::Accuracy), UsageError);
}
