#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "rwt/annotation/aggregate.hpp"
#include "rwt/annotation/split.hpp"
#include "rwt/annotation/stats.hpp"
#include "support.hpp"

using namespace rwt;
using namespace rwt::annotation;

namespace {

std::vector<VoteRecord> votes_for(const std::string& id, std::vector<TextClass> labels,
                                  double time = 10.0) {
  std::vector<VoteRecord> out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out.push_back({"w" + std::to_string(i), id, labels[i], time + static_cast<double>(i), 0});
  }
  return out;
}

ManifestRecord bare(const std::string& id, std::size_t cat = 0) {
  ManifestRecord r;
  r.image_id = id;
  r.image_path = id + ".png";
  r.category = product_categories()[cat % product_categories().size()];
  return r;
}

ManifestRecord labelled(const std::string& id, TextClass c) {
  ManifestRecord r = bare(id);
  r.aggregated = AggregatedLabel{id, c, 5, 5, false, LabelSource::kVote};
  r.binary_class = binarize_label(c);
  return r;
}

// Strict-plurality oracle by explicit counting.
std::optional<TextClass> plurality(const std::vector<VoteRecord>& votes) {
  std::map<TextClass, int> counts;
  for (const auto& v : votes) ++counts[v.label];
  int best = -1, n_best = 0;
  std::optional<TextClass> winner;
  for (const auto& [c, n] : counts) {
    if (n > best) {
      best = n;
      n_best = 1;
      winner = c;
    } else if (n == best) {
      ++n_best;
    }
  }
  return n_best == 1 ? winner : std::nullopt;
}

}  // namespace

TEST_CASE("time filter") {
  AggregationConfig cfg;
  SUBCASE("times 1..100 at p=5 drop the five fastest") {
    std::vector<VoteRecord> votes;
    for (int t = 1; t <= 100; ++t) votes.push_back({"w", "img", TextClass::kNone, double(t), 0});
    const auto kept = filter_votes_by_time(votes, cfg);
    CHECK(kept.size() == 95);
    for (const auto& v : kept) CHECK(v.vote_time_s >= 6.0);
  }
  SUBCASE("equal times keep everything") {
    std::vector<VoteRecord> votes(40, {"w", "img", TextClass::kNone, 7.0, 0});
    CHECK(filter_votes_by_time(votes, cfg).size() == 40);
  }
  SUBCASE("p = 0 is the identity") {
    cfg.time_percentile_cut = 0;
    std::mt19937_64 rng(1);
    std::vector<VoteRecord> votes;
    for (int i = 0; i < 50; ++i) {
      votes.push_back({"w", "img", TextClass::kNone, 1.0 + double(rng() % 100), 0});
    }
    CHECK(filter_votes_by_time(votes, cfg) == votes);
  }
  SUBCASE("removed set is exactly the strictly-below-percentile set, order-independent") {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 100; ++trial) {
      const int n = 1 + static_cast<int>(rng() % 120);
      std::vector<VoteRecord> votes;
      for (int i = 0; i < n; ++i) {
        votes.push_back({"w" + std::to_string(i), "img", TextClass::kNone,
                         1.0 + double(rng() % 30), 0});
      }
      std::vector<double> sorted;
      for (const auto& v : votes) sorted.push_back(v.vote_time_s);
      std::sort(sorted.begin(), sorted.end());
      const double cut = sorted[std::min<std::size_t>(n * 5 / 100, n - 1)];
      std::multiset<std::string> expected;
      for (const auto& v : votes) {
        if (v.vote_time_s >= cut) expected.insert(v.worker_id);
      }
      const auto kept = filter_votes_by_time(votes, cfg);
      std::multiset<std::string> got;
      for (const auto& v : kept) got.insert(v.worker_id);
      CHECK(got == expected);

      auto shuffled = votes;
      std::shuffle(shuffled.begin(), shuffled.end(), rng);
      std::multiset<std::string> got2;
      for (const auto& v : filter_votes_by_time(shuffled, cfg)) got2.insert(v.worker_id);
      CHECK(got2 == expected);
    }
  }
  SUBCASE("percentiles are per batch") {
    std::vector<VoteRecord> votes;
    for (int t = 1; t <= 20; ++t) votes.push_back({"w", "a", TextClass::kNone, double(t), 0});
    for (int t = 1; t <= 20; ++t) votes.push_back({"w", "b", TextClass::kNone, 100.0 + t, 1});
    CHECK(filter_votes_by_time(votes, cfg).size() == 38);
  }
}

TEST_CASE("majority vote fixtures") {
  AggregationConfig cfg;
  using enum TextClass;
  const auto unanimous = aggregate_votes(votes_for("a", {kOverlaying, kOverlaying, kOverlaying,
                                                         kOverlaying, kOverlaying}),
                                         cfg);
  CHECK(unanimous.label == kOverlaying);
  CHECK(unanimous.votes_for_winner == 5);
  CHECK(unanimous.total_votes == 5);
  CHECK_FALSE(unanimous.ambiguous);

  const auto tie = aggregate_votes(votes_for("b", {kOverlaying, kOverlaying, kBoth, kNone, kNone}),
                                   cfg);
  CHECK(tie.ambiguous);
  CHECK_FALSE(tie.resolved());

  const auto three = aggregate_votes(
      votes_for("c", {kOrganic, kOrganic, kOrganic, kNone, kNone}), cfg);
  CHECK(three.label == kOrganic);
  CHECK(three.votes_for_winner == 3);
  CHECK_FALSE(three.ambiguous);

  const auto plural = aggregate_votes(
      votes_for("d", {kOrganic, kOrganic, kBoth, kNone, kOverlaying}), cfg);
  CHECK(plural.label == kOrganic);

  CHECK_THROWS_AS(aggregate_votes(votes_for("e", {kNone, kNone}), cfg), InsufficientVotesError);
}

TEST_CASE("aggregation matches the plurality oracle and is permutation invariant") {
  AggregationConfig cfg;
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<TextClass> labels;
    const int n = 3 + static_cast<int>(rng() % 5);
    for (int i = 0; i < n; ++i) labels.push_back(kAllTextClasses[rng() % 4]);
    auto votes = votes_for("x", labels);
    const auto a = aggregate_votes(votes, cfg);
    CHECK(a.label == plurality(votes));
    CHECK(a.ambiguous == !plurality(votes).has_value());
    for (int p = 0; p < 5; ++p) {
      std::shuffle(votes.begin(), votes.end(), rng);
      CHECK(aggregate_votes(votes, cfg) == a);
    }
    const bool any_positive_vote =
        std::any_of(votes.begin(), votes.end(), [](const VoteRecord& v) {
          return v.label == TextClass::kOverlaying || v.label == TextClass::kBoth;
        });
    if (a.label && !any_positive_vote) CHECK(binarize_label(*a.label) == BinaryClass::kNegative);
  }
}

TEST_CASE("binarization maps Overlaying and Both to positive") {
  CHECK(binarize_label(TextClass::kOverlaying) == BinaryClass::kPositive);
  CHECK(binarize_label(TextClass::kBoth) == BinaryClass::kPositive);
  CHECK(binarize_label(TextClass::kOrganic) == BinaryClass::kNegative);
  CHECK(binarize_label(TextClass::kNone) == BinaryClass::kNegative);
  CHECK_THROWS_AS(binarize_label(std::optional<TextClass>{}), Error);
}

TEST_CASE("manifest aggregation flags ambiguity and re-annotation") {
  using enum TextClass;
  DatasetManifest m;
  m.append(bare("clear"));
  m.append(bare("tied"));
  m.append(bare("sparse"));
  m.append(bare("unvoted"));
  std::vector<VoteRecord> votes;
  for (auto v : votes_for("clear", {kBoth, kBoth, kBoth, kNone, kOrganic}, 20)) votes.push_back(v);
  for (auto v : votes_for("tied", {kOverlaying, kOverlaying, kBoth, kNone, kNone}, 20))
    votes.push_back(v);
  for (auto v : votes_for("sparse", {kNone, kNone}, 20)) votes.push_back(v);
  AggregationConfig cfg;
  cfg.time_percentile_cut = 0;
  const auto out = aggregate_manifest(m, votes, cfg);
  CHECK(out.find("clear")->binary_class == BinaryClass::kPositive);
  CHECK(out.find("clear")->review_state == ReviewState::kPending);
  CHECK(out.find("tied")->aggregated->ambiguous);
  CHECK_FALSE(out.find("tied")->binary_class.has_value());
  CHECK(out.find("sparse")->review_state == ReviewState::kNeedsReannotation);
  CHECK(out.find("unvoted")->review_state == ReviewState::kNeedsReannotation);
  for (const auto& r : out) CHECK_NOTHROW(validate_record(r));
}

TEST_CASE("split fixtures") {
  AggregationConfig cfg;
  SUBCASE("4836 records at 0.75 give 3627 / 1209") {
    DatasetManifest m;
    for (int i = 0; i < 4836; ++i) {
      m.append(labelled("r" + std::to_string(i), i % 3 ? TextClass::kOrganic : TextClass::kBoth));
    }
    const auto out = split_dataset(m, cfg);
    const auto train = std::count_if(out.begin(), out.end(),
                                     [](const ManifestRecord& r) { return r.split == Split::kTrain; });
    CHECK(train == 3627);
    CHECK(static_cast<long>(out.size()) - train == 1209);
  }
  SUBCASE("2 + 2 at 0.5 puts one of each class in each split") {
    DatasetManifest m;
    m.append(labelled("p1", TextClass::kOverlaying));
    m.append(labelled("p2", TextClass::kBoth));
    m.append(labelled("n1", TextClass::kNone));
    m.append(labelled("n2", TextClass::kOrganic));
    cfg.split_ratio = 0.5;
    const auto out = split_dataset(m, cfg);
    int pos_train = 0, neg_train = 0;
    for (const auto& r : out) {
      if (r.split == Split::kTrain) {
        (*r.binary_class == BinaryClass::kPositive ? pos_train : neg_train)++;
      }
    }
    CHECK(pos_train == 1);
    CHECK(neg_train == 1);
  }
  SUBCASE("same seed, same assignment; unresolved records are rejected") {
    DatasetManifest m;
    for (int i = 0; i < 50; ++i) {
      m.append(labelled("r" + std::to_string(i), kAllTextClasses[i % 4]));
    }
    cfg.split_seed = 11;
    CHECK(split_dataset(m, cfg) == split_dataset(m, cfg));
    m.append(bare("unresolved"));
    CHECK_THROWS_AS(split_dataset(m, cfg), Error);
  }
}

TEST_CASE("dataset statistics") {
  SUBCASE("single record") {
    DatasetManifest m;
    m.append(bare("one", 3));
    const auto votes = votes_for("one", {TextClass::kNone, TextClass::kNone, TextClass::kNone,
                                         TextClass::kNone, TextClass::kNone});
    const auto s = dataset_stats(m, votes);
    CHECK(s.total == 1);
    CHECK(s.category_counts.size() == 25);
    CHECK(s.category_counts[3].second == 1);
    CHECK(s.agreement.unanimous == 1);
    CHECK(s.agreement.fraction(s.agreement.unanimous) == 1.0);
  }
  SUBCASE("known counts and conservation under concatenation") {
    std::mt19937_64 rng(5);
    DatasetManifest a, b;
    std::map<std::string, std::size_t> cats;
    std::map<int, std::size_t> regions;
    for (int i = 0; i < 300; ++i) {
      auto r = bare("r" + std::to_string(i), rng() % 25);
      r.n_text_regions = 1 + static_cast<int>(rng() % 9);
      ++cats[r.category];
      ++regions[r.n_text_regions];
      (i < 120 ? a : b).append(r);
    }
    DatasetManifest all;
    for (const auto& r : a) all.append(r);
    for (const auto& r : b) all.append(r);
    const auto sa = dataset_stats(a, {}), sb = dataset_stats(b, {}), s = dataset_stats(all, {});
    for (const auto& [c, n] : s.category_counts) CHECK(n == cats[c]);
    CHECK(s.text_regions_histogram == regions);
    CHECK(s.total == sa.total + sb.total);
    for (std::size_t i = 0; i < 25; ++i) {
      CHECK(s.category_counts[i].second ==
            sa.category_counts[i].second + sb.category_counts[i].second);
    }
  }
  SUBCASE("agreement report layout") {
    // 4901 images: 2950 unanimous, 1676 with 3-4 votes, 210 plurality, 65 ambiguous.
    DatasetManifest m;
    int i = 0;
    auto add = [&](int count, int winner, bool ambiguous) {
      for (int k = 0; k < count; ++k, ++i) {
        auto r = bare("r" + std::to_string(i));
        AggregatedLabel agg{r.image_id, std::nullopt, winner, 5, ambiguous, LabelSource::kVote};
        if (!ambiguous) {
          agg.label = TextClass::kNone;
          r.binary_class = BinaryClass::kNegative;
        }
        r.aggregated = agg;
        m.append(r);
      }
    };
    add(2950, 5, false);
    add(1676, 3 + (i % 2), false);
    add(210, 2, false);
    add(65, 2, true);
    const auto s = dataset_stats(m, {});
    CHECK(s.agreement.ambiguous == 65);
    const std::string report = format_agreement_report(s);
    CHECK(report.find("unanimous: 2950 (60.2%)") != std::string::npos);
    CHECK(report.find("(3-4 of 5): 1676 (34.2%)") != std::string::npos);
    CHECK(report.find("ambiguous: 65 (1.3%)") != std::string::npos);
  }
  SUBCASE("stats files") {
    test::TempDir dir("stats");
    DatasetManifest m;
    m.append(bare("x"));
    write_stats(dataset_stats(m, {}), dir.path());
    for (const char* f : {"categories.csv", "text_regions.csv", "agreement.csv", "stats.json",
                          "categories.svg", "text_regions_loglog.svg"}) {
      CHECK(std::filesystem::exists(dir / f));
    }
  }
}
