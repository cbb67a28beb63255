#include "booltree/binarize.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "test_util.hpp"

using namespace booltree;

namespace {

// ---------------------------------------------------------------------------
// Reference discretizer, written from scratch against the published recipe
// (recursive entropy minimization with the MDL stopping rule). It works on
// index lists instead of pre-grouped values so it shares no code paths with
// the library implementation.
// ---------------------------------------------------------------------------

double ref_entropy(const std::vector<std::size_t>& idx, const std::vector<int>& y) {
  std::map<int, std::size_t> freq;
  for (std::size_t i : idx) ++freq[y[i]];
  double h = 0.0;
  for (auto& [cls, cnt] : freq) {
    double p = double(cnt) / double(idx.size());
    h -= p * std::log2(p);
  }
  return h;
}

std::size_t ref_class_count(const std::vector<std::size_t>& idx, const std::vector<int>& y) {
  std::set<int> s;
  for (std::size_t i : idx) s.insert(y[i]);
  return s.size();
}

void ref_mdlp(const std::vector<double>& x, const std::vector<int>& y,
              std::vector<std::size_t> idx, std::vector<double>& cuts) {
  if (idx.size() < 2) return;
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });

  // Candidate thresholds: midpoints between adjacent distinct values whose
  // label multiset differs.
  std::vector<double> candidates;
  {
    std::vector<std::pair<double, std::map<int, std::size_t>>> blocks;
    for (std::size_t i : idx) {
      if (blocks.empty() || blocks.back().first != x[i])
        blocks.push_back({x[i], {}});
      ++blocks.back().second[y[i]];
    }
    for (std::size_t b = 1; b < blocks.size(); ++b)
      if (blocks[b - 1].second != blocks[b].second)
        candidates.push_back((blocks[b - 1].first + blocks[b].first) / 2.0);
  }
  if (candidates.empty()) return;

  double best_gain = -1.0, best_t = 0.0;
  std::vector<std::size_t> best_left, best_right;
  for (double t : candidates) {
    std::vector<std::size_t> left, right;
    for (std::size_t i : idx) (x[i] < t ? left : right).push_back(i);
    double gain = ref_entropy(idx, y) -
                  double(left.size()) / idx.size() * ref_entropy(left, y) -
                  double(right.size()) / idx.size() * ref_entropy(right, y);
    if (gain > best_gain) {  // strict: first (smallest) threshold wins ties
      best_gain = gain;
      best_t = t;
      best_left = left;
      best_right = right;
    }
  }

  double n = double(idx.size());
  double k = double(ref_class_count(idx, y));
  double k1 = double(ref_class_count(best_left, y));
  double k2 = double(ref_class_count(best_right, y));
  double delta = std::log2(std::pow(3.0, k) - 2.0) -
                 (k * ref_entropy(idx, y) - k1 * ref_entropy(best_left, y) -
                  k2 * ref_entropy(best_right, y));
  if (best_gain <= std::log2(n - 1.0) / n + delta / n) return;

  cuts.push_back(best_t);
  ref_mdlp(x, y, best_left, cuts);
  ref_mdlp(x, y, best_right, cuts);
}

std::vector<double> ref_cuts(const std::vector<double>& x, const std::vector<int>& y) {
  std::vector<std::size_t> idx(x.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::vector<double> cuts;
  ref_mdlp(x, y, idx, cuts);
  std::sort(cuts.begin(), cuts.end());
  return cuts;
}

RawDataset small_raw() {
  // One numeric, one already-binary numeric, one categorical column.
  RawDataset raw;
  raw.label_column = "y";
  raw.n_rows = 8;
  RawColumn num{"temp", ColumnKind::Numeric, {1, 2, 3, 4, 10, 11, 12, 13}, {}};
  RawColumn bin{"flag", ColumnKind::Numeric, {0, 1, 0, 1, 0, 1, 0, 1}, {}};
  RawColumn cat{"color", ColumnKind::Categorical, {}, {"r", "g", "r", "b", "g", "r", "b", "g"}};
  raw.columns = {num, bin, cat};
  raw.labels = {0, 0, 0, 0, 1, 1, 1, 1};
  raw.label_names = {"0", "1"};
  return raw;
}

}  // namespace

TEST(MdlpCuts, SimpleSeparableAcceptsMidpoint) {
  std::vector<double> x = {1, 2, 3, 4};
  std::vector<int> y = {0, 0, 1, 1};
  auto cuts = mdlp_cuts(x, y);
  ASSERT_EQ(cuts.size(), 1u);
  EXPECT_DOUBLE_EQ(cuts[0], 2.5);
}

TEST(MdlpCuts, PureColumnYieldsNoCuts) {
  std::vector<double> x = {1, 2, 3, 4, 5};
  std::vector<int> y = {1, 1, 1, 1, 1};
  EXPECT_TRUE(mdlp_cuts(x, y).empty());
}

TEST(MdlpCuts, AlternatingLabelsRejectedBySmallSample) {
  std::vector<double> x = {1, 2, 3, 4, 5, 6};
  std::vector<int> y = {0, 1, 0, 1, 0, 1};
  EXPECT_TRUE(mdlp_cuts(x, y).empty());
}

TEST(MdlpCuts, BalancedPerfectSeparationAlwaysAccepted) {
  for (std::size_t half : {5u, 20u, 100u}) {
    std::vector<double> x;
    std::vector<int> y;
    for (std::size_t i = 0; i < half; ++i) { x.push_back(i); y.push_back(0); }
    for (std::size_t i = 0; i < half; ++i) { x.push_back(100 + i); y.push_back(1); }
    auto cuts = mdlp_cuts(x, y);
    ASSERT_EQ(cuts.size(), 1u) << "half=" << half;
    EXPECT_DOUBLE_EQ(cuts[0], (double(half - 1) + 100.0) / 2.0);
  }
}

TEST(MdlpCuts, TiedGainPicksSmallestThreshold) {
  // Symmetric three-block pattern: cutting before or after the middle block
  // gives the same gain; the smaller threshold must win the first round.
  std::vector<double> x = {1, 1, 2, 2, 3, 3};
  std::vector<int> y = {0, 0, 1, 1, 0, 0};
  auto cuts = mdlp_cuts(x, y);
  if (!cuts.empty()) {
    EXPECT_DOUBLE_EQ(cuts.front(), 1.5);
  }
  EXPECT_EQ(cuts, ref_cuts(x, y));
}

TEST(MdlpCuts, EqualValuesNeverSplit) {
  // All rows share one value: no candidate boundary exists even though
  // labels disagree.
  std::vector<double> x = {7, 7, 7, 7};
  std::vector<int> y = {0, 1, 0, 1};
  EXPECT_TRUE(mdlp_cuts(x, y).empty());
}

TEST(MdlpCuts, MatchesReferenceOnRandomData) {
  std::mt19937_64 rng(20240817);
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t n = 2 + rng() % 120;
    int n_classes = 2 + int(rng() % 3);
    int n_values = 1 + int(rng() % 12);  // heavy ties on purpose
    std::vector<double> x(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = double(rng() % n_values) * 0.5;
      y[i] = int(rng() % n_classes);
    }
    auto got = mdlp_cuts(x, y);
    auto want = ref_cuts(x, y);
    ASSERT_EQ(got.size(), want.size()) << "trial " << trial;
    for (std::size_t c = 0; c < got.size(); ++c)
      EXPECT_NEAR(got[c], want[c], 1e-12) << "trial " << trial;
  }
}

TEST(MdlpCuts, MonotoneTransformKeepsRowPartition) {
  // Cut *values* move under a strictly increasing transform, but the induced
  // partition of rows must not.
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    std::size_t n = 10 + rng() % 80;
    std::vector<double> x(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = double(rng() % 20);
      y[i] = int(rng() % 2);
    }
    std::vector<double> tx(n);
    for (std::size_t i = 0; i < n; ++i) tx[i] = std::exp(x[i] / 4.0);

    auto cuts_a = mdlp_cuts(x, y);
    auto cuts_b = mdlp_cuts(tx, y);
    ASSERT_EQ(cuts_a.size(), cuts_b.size()) << "trial " << trial;
    auto interval = [](const std::vector<double>& cuts, double v) {
      std::size_t iv = 0;
      while (iv < cuts.size() && v >= cuts[iv]) ++iv;
      return iv;
    };
    for (std::size_t i = 0; i < n; ++i)
      EXPECT_EQ(interval(cuts_a, x[i]), interval(cuts_b, tx[i])) << "trial " << trial;
  }
}

TEST(OneHot, FirstAppearanceOrder) {
  std::vector<std::string> v = {"a", "b", "a"};
  auto cols = one_hot(v);
  ASSERT_EQ(cols.size(), 2u);
  EXPECT_EQ(cols[0].first, "a");
  EXPECT_EQ(cols[1].first, "b");
  EXPECT_EQ(cols[0].second, (std::vector<std::uint8_t>{1, 0, 1}));
  EXPECT_EQ(cols[1].second, (std::vector<std::uint8_t>{0, 1, 0}));
}

TEST(OneHot, EachRowExactlyOneHot) {
  std::vector<std::string> v = {"x", "y", "z", "y", "x", "x"};
  auto cols = one_hot(v);
  for (std::size_t i = 0; i < v.size(); ++i) {
    int sum = 0;
    for (auto& [name, bits] : cols) sum += bits[i];
    EXPECT_EQ(sum, 1);
  }
}

TEST(FitBinarizer, MixedColumnsProduceExpectedLayout) {
  RawDataset raw = small_raw();
  auto [bin, map] = binarize_dataset(raw);
  ASSERT_EQ(map.features.size(), 3u);

  // temp: one accepted cut at 7 → two interval columns.
  EXPECT_EQ(map.features[0].kind, EncodingKind::Intervals);
  ASSERT_EQ(map.features[0].cuts.size(), 1u);
  EXPECT_DOUBLE_EQ(map.features[0].cuts[0], 7.0);
  EXPECT_EQ(map.features[0].emitted, (std::vector<std::string>{"temp<7", "temp>=7"}));

  // flag: observed values all 0/1 → passthrough.
  EXPECT_EQ(map.features[1].kind, EncodingKind::Passthrough);
  EXPECT_EQ(map.features[1].emitted, (std::vector<std::string>{"flag"}));

  // color: three categories in first-appearance order.
  EXPECT_EQ(map.features[2].kind, EncodingKind::OneHot);
  EXPECT_EQ(map.features[2].emitted,
            (std::vector<std::string>{"color=r", "color=g", "color=b"}));

  ASSERT_EQ(bin.n_features, 6u);
  ASSERT_EQ(bin.n, 8u);
  // Row 0: temp=1 (<7), flag=0, color=r.
  EXPECT_EQ(bin.at(0, 0), 1);
  EXPECT_EQ(bin.at(0, 1), 0);
  EXPECT_EQ(bin.at(0, 2), 0);
  EXPECT_EQ(bin.at(0, 3), 1);
  // Row 7: temp=13 (>=7), flag=1, color=g.
  EXPECT_EQ(bin.at(7, 0), 0);
  EXPECT_EQ(bin.at(7, 1), 1);
  EXPECT_EQ(bin.at(7, 2), 1);
  EXPECT_EQ(bin.at(7, 4), 1);
}

TEST(FitBinarizer, IntervalColumnsPartitionEachRow) {
  std::mt19937_64 rng(99);
  RawDataset raw;
  raw.label_column = "y";
  raw.n_rows = 60;
  RawColumn col{"v", ColumnKind::Numeric, {}, {}};
  for (std::size_t i = 0; i < raw.n_rows; ++i) {
    col.numeric.push_back(double(rng() % 30));
    raw.labels.push_back(col.numeric.back() < 10 ? 0 : (rng() % 2 ? 1 : 0));
  }
  raw.columns = {col};
  raw.label_names = {"0", "1"};

  BinarizationMap map = fit_binarizer(raw);
  if (map.features[0].kind != EncodingKind::Intervals) GTEST_SKIP();
  BinaryDataset bin = apply_binarizer(map, raw);
  for (std::size_t i = 0; i < bin.n; ++i) {
    int sum = 0;
    for (std::size_t f = 0; f < bin.n_features; ++f) sum += bin.at(i, f);
    EXPECT_EQ(sum, 1);  // exactly one interval indicator per row
  }
}

TEST(FitBinarizer, UninformativeNumericDropped) {
  RawDataset raw = small_raw();
  // Replace temp with label-independent noise, tiny sample → no cut accepted.
  raw.columns[0].numeric = {1, 2, 1, 2, 1, 2, 1, 2};
  BinarizationMap map = fit_binarizer(raw);
  EXPECT_EQ(map.features[0].kind, EncodingKind::Dropped);
  EXPECT_EQ(map.features[0].emitted.size(), 0u);
  EXPECT_EQ(map.output_width(), 4u);  // flag + 3 colors survive
}

TEST(FitBinarizer, SingleCategoryDropped) {
  RawDataset raw = small_raw();
  raw.columns[2].categorical = std::vector<std::string>(8, "same");
  BinarizationMap map = fit_binarizer(raw);
  EXPECT_EQ(map.features[2].kind, EncodingKind::Dropped);
}

TEST(FitBinarizer, AllDroppedIsAnError) {
  RawDataset raw;
  raw.label_column = "y";
  raw.n_rows = 4;
  raw.columns = {RawColumn{"c", ColumnKind::Categorical, {}, {"k", "k", "k", "k"}}};
  raw.labels = {0, 1, 0, 1};
  raw.label_names = {"0", "1"};
  EXPECT_THROW(fit_binarizer(raw), DataError);
}

TEST(FitBinarizer, FitOnTrainRowsOnly) {
  RawDataset raw = small_raw();
  // Fit on the first half only: temp values 1..4 are pure class 0 there,
  // so temp must be dropped; color sees only r,g,b? (rows 0-3: r,g,r,b).
  std::vector<std::size_t> train = {0, 1, 2, 3};
  BinarizationMap map = fit_binarizer(raw, train);
  EXPECT_EQ(map.features[0].kind, EncodingKind::Dropped);
  EXPECT_EQ(map.features[2].categories,
            (std::vector<std::string>{"r", "g", "b"}));
  // Applying to held-out rows uses the train-time layout.
  BinaryDataset held = apply_binarizer(map, raw, std::vector<std::size_t>{4, 5, 6, 7});
  EXPECT_EQ(held.n, 4u);
  EXPECT_EQ(held.n_features, map.output_width());
}

TEST(FitBinarizer, UnseenCategoryGetsAllZeros) {
  RawDataset raw = small_raw();
  std::vector<std::size_t> train = {0, 1, 3};  // sees r, g, b
  BinarizationMap map = fit_binarizer(raw, train);

  RawDataset fresh = small_raw();
  fresh.columns[2].categorical[5] = "purple";
  BinaryDataset bin = apply_binarizer(map, fresh, std::vector<std::size_t>{5});
  // color block is the trailing 3 columns; all must be zero.
  std::size_t base = bin.n_features - 3;
  for (std::size_t f = base; f < bin.n_features; ++f) EXPECT_EQ(bin.at(0, f), 0);
}

TEST(BinarizationMapIo, SaveLoadApplyBitIdentical) {
  RawDataset raw = small_raw();
  // Nudge a cut-producing value so the threshold isn't a round number.
  raw.columns[0].numeric = {1.125, 2.3, 3.7, 4.9, 10.0001, 11.25, 12.5, 13.75};
  auto [bin, map] = binarize_dataset(raw);

  auto dir = testutil::temp_dir();
  std::string path = (dir / "map.tsv").string();
  map.save(path);
  BinarizationMap loaded = BinarizationMap::load(path);

  ASSERT_EQ(loaded.features.size(), map.features.size());
  for (std::size_t c = 0; c < map.features.size(); ++c) {
    EXPECT_EQ(loaded.features[c].kind, map.features[c].kind);
    EXPECT_EQ(loaded.features[c].emitted, map.features[c].emitted);
    ASSERT_EQ(loaded.features[c].cuts.size(), map.features[c].cuts.size());
    for (std::size_t k = 0; k < map.features[c].cuts.size(); ++k)
      EXPECT_EQ(loaded.features[c].cuts[k], map.features[c].cuts[k]);  // exact
  }
  BinaryDataset rebin = apply_binarizer(loaded, raw);
  EXPECT_EQ(rebin.x, bin.x);
  EXPECT_EQ(rebin.y, bin.y);
  EXPECT_EQ(rebin.feature_names, bin.feature_names);

  // A second save round-trips byte-for-byte.
  std::string path2 = (dir / "map2.tsv").string();
  loaded.save(path2);
  std::ifstream a(path), b(path2);
  std::stringstream sa, sb;
  sa << a.rdbuf();
  sb << b.rdbuf();
  EXPECT_EQ(sa.str(), sb.str());
}

TEST(BinarizationMapIo, RejectsGarbage) {
  auto dir = testutil::temp_dir();
  std::string path = (dir / "bad.tsv").string();
  testutil::write_file(path, "binarization-map 1\ncol\tmystery\n");
  EXPECT_THROW(BinarizationMap::load(path), FormatError);
  testutil::write_file(path, "wrong header\n");
  EXPECT_THROW(BinarizationMap::load(path), FormatError);
}

TEST(BinarizeExample, AlreadyBinaryCsvPassesThrough) {
  RawDataset raw = load_csv(testutil::example_csv_path(), "label");
  auto [bin, map] = binarize_dataset(raw);
  EXPECT_EQ(bin.n_features, 5u);  // all five columns pass through untouched
  for (const auto& enc : map.features)
    EXPECT_EQ(enc.kind, EncodingKind::Passthrough);
  BinaryDataset direct = to_binary(raw);
  EXPECT_EQ(bin.x, direct.x);
  EXPECT_EQ(bin.y, direct.y);
}
