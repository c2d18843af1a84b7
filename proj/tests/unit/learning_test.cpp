#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "annoserve/ingest.hpp"
#include "annoserve/learning/active_learner.hpp"
#include "annoserve/learning/classifier.hpp"
#include "annoserve/learning/features.hpp"
#include "annoserve/learning/kernels.hpp"
#include "annoserve/learning/reorder.hpp"
#include "annoserve/random.hpp"
#include "lr_toy.hpp"
#include "support.hpp"

using namespace annoserve;
using namespace annoserve::learning;

namespace {

struct Problem {
  LinearModel model;
  std::vector<SparseRow> rows;
  std::vector<std::size_t> labels;
};

Problem random_problem(std::uint64_t seed, std::size_t n, std::size_t dims, std::size_t classes) {
  Rng rng(seed);
  Problem p{LinearModel(classes, dims), {}, {}};
  for (auto& w : p.model.weights) w = uniform_unit(rng) - 0.5;
  for (auto& b : p.model.bias) b = uniform_unit(rng) - 0.5;
  for (std::size_t i = 0; i < n; ++i) {
    SparseRow row;
    for (std::uint32_t j = 0; j < dims; ++j) {
      if (uniform_unit(rng) < 0.3) {
        row.indices.push_back(j);
        row.values.push_back(1.0 + static_cast<double>(uniform_index(rng, 3)));
      }
    }
    p.rows.push_back(std::move(row));
    p.labels.push_back(uniform_index(rng, classes));
  }
  return p;
}

}  // namespace

TEST(Features, UnigramsAndBigrams) {
  const auto v = featurize("The cat sat");
  EXPECT_EQ(v.counts, (std::map<std::string, int>{{"the", 1}, {"cat", 1}, {"sat", 1}, {"the_cat", 1}, {"cat_sat", 1}}));
  const auto a = featurize("a a a");
  EXPECT_EQ(a.counts.at("a"), 3);
  EXPECT_EQ(a.counts.at("a_a"), 2);
  EXPECT_TRUE(featurize("!!!").empty());
}

TEST(Features, VocabularyIsLexicographic) {
  const auto vocab = Vocabulary::build({featurize("b a"), featurize("c")});
  EXPECT_EQ(vocab.terms(), (std::vector<std::string>{"a", "b", "b_a", "c"}));
  const auto row = vocab.encode(featurize("c c zzz"));
  EXPECT_EQ(row.indices, (std::vector<std::uint32_t>{3}));
  EXPECT_EQ(row.values, (std::vector<double>{2.0}));
}

TEST(Kernels, ZeroModelIsUniform) {
  LinearModel m(4, 3);
  std::vector<SparseRow> rows{{{0, 2}, {1.0, 5.0}}};
  std::vector<double> out(4);
  kernels::predict_proba(m, rows, out);
  for (double p : out) EXPECT_DOUBLE_EQ(p, 0.25);
}

TEST(Kernels, ParallelMatchesSerial) {
  const auto p = random_problem(5, 300, 40, 3);
  std::vector<double> a(300 * 3), b(300 * 3);
  kernels::predict_proba(p.model, p.rows, a);
  serial::predict_proba(p.model, p.rows, b);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
  for (std::size_t i = 0; i < 300; ++i) {
    EXPECT_NEAR(a[3 * i] + a[3 * i + 1] + a[3 * i + 2], 1.0, 1e-9);
  }
  const auto ga = kernels::loss_and_gradient(p.model, p.rows, p.labels, 1.0);
  const auto gb = serial::loss_and_gradient(p.model, p.rows, p.labels, 1.0);
  EXPECT_NEAR(ga.loss, gb.loss, 1e-9 * std::abs(gb.loss));
  for (std::size_t i = 0; i < ga.grad_weights.size(); ++i) EXPECT_NEAR(ga.grad_weights[i], gb.grad_weights[i], 1e-9);
  for (std::size_t i = 0; i < ga.grad_bias.size(); ++i) EXPECT_NEAR(ga.grad_bias[i], gb.grad_bias[i], 1e-9);
}

TEST(Kernels, GradientMatchesFiniteDifferences) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    EXPECT_LE(annoserve::testing::gradient_check_error(seed), 1e-4) << "seed " << seed;
  }
}

TEST(Kernels, SoftmaxIsStable) {
  std::vector<double> z{1000.0, 1000.0, -1000.0};
  softmax(z);
  EXPECT_DOUBLE_EQ(z[0], 0.5);
  EXPECT_EQ(z[2], 0.0);
}

TEST(Classifier, SeparableToySetFitsExactly) {
  std::vector<Example> ex{{featurize("good great"), "pos"},
                          {featurize("great fine"), "pos"},
                          {featurize("bad awful"), "neg"},
                          {featurize("awful poor"), "neg"}};
  const auto lr = LogisticRegression::train(ex);
  ASSERT_TRUE(lr);
  for (const auto& e : ex) {
    const auto p = lr->predict_proba(e.features);
    const auto it = std::find(lr->class_labels().begin(), lr->class_labels().end(), e.label);
    EXPECT_GT(p[static_cast<std::size_t>(it - lr->class_labels().begin())], 0.5);
  }
  EXPECT_FALSE(LogisticRegression::train({{featurize("x"), "a"}, {featurize("y"), "a"}}));
}

TEST(Classifier, WarmStartReachesSameOptimum) {
  std::vector<Example> ex{{featurize("good great"), "pos"}, {featurize("bad awful"), "neg"},
                          {featurize("great fine day"), "pos"}, {featurize("poor day"), "neg"}};
  const auto first = LogisticRegression::train({ex.begin(), ex.begin() + 2});
  ASSERT_TRUE(first);
  const auto cold = LogisticRegression::train(ex);
  const auto warm = LogisticRegression::train(ex, {}, &*first);
  ASSERT_TRUE(cold && warm);
  for (const auto& e : ex) {
    const auto a = cold->predict_proba(e.features), b = warm->predict_proba(e.features);
    EXPECT_NEAR(a[0], b[0], 1e-6);
  }
}

TEST(Classifier, MatchesReferenceImplementation) {
  EXPECT_LE(annoserve::testing::lr_oracle_max_error(), 0.02);
}

TEST(Classifier, SnapshotRoundTrip) {
  const auto lr = annoserve::testing::train_toy_model();
  const auto back = LogisticRegression::from_snapshot(lr.snapshot());
  EXPECT_EQ(back.class_labels(), lr.class_labels());
  const auto x = featurize("great staff but a dirty room");
  const auto a = lr.predict_proba(x), b = back.predict_proba(x);
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(a[k], b[k], 1e-12);
  EXPECT_THROW(LogisticRegression::from_snapshot("nonsense"), std::runtime_error);
}

TEST(Classifier, ConfidenceMeasures) {
  const std::vector<double> p{0.7, 0.2, 0.1};
  EXPECT_DOUBLE_EQ(confidence_of(p, ConfidenceMeasure::least_confidence), 0.7);
  EXPECT_NEAR(confidence_of(p, ConfidenceMeasure::margin), 0.5, 1e-12);
  const std::vector<double> u{0.5, 0.5};
  EXPECT_NEAR(confidence_of(u, ConfidenceMeasure::entropy), 0.0, 1e-12);
  EXPECT_DOUBLE_EQ(binary_confidence(0.2, ConfidenceMeasure::least_confidence), 0.8);
}

TEST(Classifier, OneVsRest) {
  std::vector<std::pair<FeatureVector, std::vector<std::string>>> ex{
      {featurize("fired and evicted"), {"fired", "evicted"}},
      {featurize("fired today"), {"fired"}},
      {featurize("evicted today"), {"evicted"}},
      {featurize("nothing happened"), {}}};
  const auto ovr = OneVsRestClassifier::train(ex, {"evicted", "fired", "promoted"});
  ASSERT_TRUE(ovr);
  const auto p = ovr->predict_proba(featurize("fired"));
  ASSERT_EQ(p.size(), 3u);
  EXPECT_GT(p[1], 0.5);
  EXPECT_DOUBLE_EQ(p[2], 0.0);  // never seen: constant member
  const auto conf = ovr->confidence_batch({featurize("fired"), featurize("evicted fired")},
                                          ConfidenceMeasure::least_confidence);
  for (double c : conf) {
    EXPECT_GE(c, 0.5);
    EXPECT_LE(c, 1.0);
  }
}

TEST(Reorder, RatioZeroAscending) {
  Rng rng(4);
  std::vector<std::string> ids;
  std::vector<double> conf;
  for (int i = 0; i < 40; ++i) {
    ids.push_back(std::to_string(i));
    conf.push_back(uniform_unit(rng));
  }
  const auto plan = plan_queue(ids, conf, 0.0, 1);
  EXPECT_EQ(plan.random_slots(), 0u);
  for (std::size_t i = 1; i < plan.confidence.size(); ++i) EXPECT_LE(plan.confidence[i - 1], plan.confidence[i]);
}

TEST(Reorder, RatioOneIsSeededPermutation) {
  std::vector<std::string> ids{"a", "b", "c", "d", "e"};
  std::vector<double> conf{0.1, 0.2, 0.3, 0.4, 0.5};
  const auto plan = plan_queue(ids, conf, 1.0, 9);
  EXPECT_EQ(plan.random_slots(), 5u);
  EXPECT_EQ(plan.ids, plan_queue(ids, conf, 1.0, 9).ids);
  auto sorted = plan.ids;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_EQ(sorted, ids);
}

TEST(Reorder, RandomSlotCounts) {
  for (std::size_t n : {1u, 10u, 100u}) {
    std::vector<std::string> ids(n);
    std::vector<double> conf(n, 0.5);
    for (std::size_t i = 0; i < n; ++i) ids[i] = std::to_string(i);
    for (double ratio : {0.0, 0.1, 0.2, 0.25, 0.5, 1.0}) {
      EXPECT_EQ(plan_queue(ids, conf, ratio, n).random_slots(), round_count(ratio, n)) << n << " " << ratio;
    }
  }
}

TEST(ActiveLearner, RetrainCadence) {
  annoserve::testing::TempDir dir;
  const auto c = annoserve::testing::simple_task(dir.path(), 30,
                                                 "active_learning: {target_scheme: label, retrain_every: 10, "
                                                 "min_labels_to_start: 5}\n");
  InstanceStore store(load_instances(c));
  ActiveLearner al(c, store, false, dir / "model.txt");
  std::size_t sink_calls = 0;
  al.set_sink([&](const PlanUpdate& p) {
    ++sink_calls;
    EXPECT_EQ(p.confidence.size(), 30u);
  });
  for (int i = 0; i < 9; ++i) al.record("u", "doc" + std::to_string(i), i % 2 ? "a" : "b", true);
  EXPECT_EQ(al.rounds(), 0u);
  al.record("u", "doc0", "a", false);  // edit, not counted
  EXPECT_EQ(al.rounds(), 0u);
  al.record("u", "doc9", "a", true);
  EXPECT_EQ(al.rounds(), 1u);
  EXPECT_EQ(sink_calls, 1u);
  EXPECT_TRUE(std::filesystem::exists(dir / "model.txt"));
  EXPECT_EQ(al.label_count(), 10u);
}

TEST(ActiveLearner, SingleClassSkipsTraining) {
  annoserve::testing::TempDir dir;
  const auto c = annoserve::testing::simple_task(dir.path(), 10,
                                                 "active_learning: {target_scheme: label, retrain_every: 2, "
                                                 "min_labels_to_start: 2}\n");
  InstanceStore store(load_instances(c));
  ActiveLearner al(c, store, false, dir / "model.txt");
  for (int i = 0; i < 4; ++i) al.record("u", "doc" + std::to_string(i), "a", true);
  EXPECT_EQ(al.latest(), nullptr);
}
