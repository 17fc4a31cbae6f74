#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "rwt/datamodel/image_io.hpp"
#include "rwt/datamodel/manifest.hpp"
#include "rwt/datamodel/tensor_io.hpp"
#include "rwt/datamodel/votes.hpp"
#include "support.hpp"

using namespace rwt;

namespace {

ManifestRecord random_record(std::mt19937_64& rng, int i) {
  ManifestRecord r;
  r.image_id = "img_" + std::to_string(i);
  r.image_path = "images/" + r.image_id + ".png";
  const auto& cats = product_categories();
  r.category = cats[rng() % cats.size()];
  r.n_text_regions = static_cast<int>(rng() % 40);
  r.version = static_cast<int>(rng() % 4);
  if (rng() % 2) r.gate_score = std::uniform_real_distribution<double>(0, 1)(rng);
  if (rng() % 2) r.score_map_path = "maps/" + r.image_id + ".rwt";
  r.review_state = static_cast<ReviewState>(rng() % 3);
  if (rng() % 3) {
    AggregatedLabel a;
    a.image_id = r.image_id;
    a.total_votes = 5;
    if (rng() % 4 == 0) {
      a.ambiguous = true;
      a.votes_for_winner = 2;
    } else {
      a.label = kAllTextClasses[rng() % 4];
      a.votes_for_winner = 3 + static_cast<int>(rng() % 3);
      a.source = rng() % 2 ? LabelSource::kVote : LabelSource::kManualReview;
      const bool pos = *a.label == TextClass::kOverlaying || *a.label == TextClass::kBoth;
      r.binary_class = pos ? BinaryClass::kPositive : BinaryClass::kNegative;
      if (rng() % 2) r.split = rng() % 2 ? Split::kTrain : Split::kVal;
    }
    r.aggregated = a;
  }
  return r;
}

}  // namespace

TEST_CASE("text classes parse case-insensitively and accept the Scene alias") {
  CHECK(parse_text_class("overlaying") == TextClass::kOverlaying);
  CHECK(parse_text_class("ORGANIC") == TextClass::kOrganic);
  CHECK(parse_text_class("Scene") == TextClass::kOrganic);
  CHECK(parse_text_class("both") == TextClass::kBoth);
  CHECK(parse_text_class("None") == TextClass::kNone);
  CHECK_THROWS_AS(parse_text_class("logo"), Error);
  for (auto c : kAllTextClasses) CHECK(parse_text_class(to_string(c)) == c);
}

TEST_CASE("image tensors enforce the pipeline contract") {
  CHECK_NOTHROW(ImageTensor(32, 32).check_pipeline_ready());
  CHECK_THROWS_AS(ImageTensor(30, 32).check_pipeline_ready(), Error);
  CHECK_THROWS_AS(ImageTensor(33, 32).check_pipeline_ready(), Error);
  ImageTensor bad(32, 32);
  bad.at(3, 4, 1) = 1.5f;
  CHECK_THROWS_AS(bad.check_pipeline_ready(), Error);

  ImageTensor odd(33, 35, 0.5f);
  const auto even = pad_to_even(odd);
  CHECK(even.height() == 34);
  CHECK(even.width() == 36);
  CHECK(even.at(32, 34, 2) == 0.5f);
  CHECK(even.at(33, 10, 0) == 0.0f);
  CHECK(even.at(10, 35, 0) == 0.0f);
}

TEST_CASE("score maps are half the source resolution") {
  const auto m = ScoreMap::for_image(224, 160);
  CHECK(m.height() == 112);
  CHECK(m.width() == 80);
  CHECK_THROWS_AS(ScoreMap::for_image(223, 160), Error);
}

TEST_CASE("manifest reading") {
  test::TempDir dir("manifest");
  SUBCASE("empty file gives an empty manifest") {
    std::ofstream(dir / "m.jsonl").close();
    CHECK(read_manifest(dir / "m.jsonl").size() == 0);
  }
  SUBCASE("two valid lines") {
    std::mt19937_64 rng(1);
    DatasetManifest m;
    m.append(random_record(rng, 1));
    m.append(random_record(rng, 2));
    write_manifest(dir / "m.jsonl", m);
    const auto back = read_manifest(dir / "m.jsonl");
    REQUIRE(back.size() == 2);
    CHECK(back[0].image_id != back[1].image_id);
  }
  SUBCASE("duplicate id on line 3 is reported with its line") {
    std::mt19937_64 rng(2);
    const auto a = random_record(rng, 1), b = random_record(rng, 2);
    std::ofstream(dir / "m.jsonl") << serialize_record(a) << '\n'
                                   << serialize_record(b) << '\n'
                                   << serialize_record(a) << '\n';
    try {
      read_manifest(dir / "m.jsonl");
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
  }
  SUBCASE("append rejects duplicates") {
    std::mt19937_64 rng(3);
    DatasetManifest m;
    const auto r = random_record(rng, 7);
    m.append(r);
    CHECK_THROWS_AS(m.append(r), Error);
  }
}

TEST_CASE("manifest serialization round-trips random records") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 50; ++trial) {
    DatasetManifest m;
    const int n = static_cast<int>(rng() % 20);
    for (int i = 0; i < n; ++i) m.append(random_record(rng, i));
    const std::string text = serialize_manifest(m);
    const auto back = parse_manifest(text);
    CHECK(back == m);
    CHECK(serialize_manifest(back) == text);
  }
}

TEST_CASE("binary class must agree with the aggregated label") {
  std::mt19937_64 rng(5);
  ManifestRecord r = random_record(rng, 1);
  r.aggregated = AggregatedLabel{r.image_id, TextClass::kBoth, 5, 5, false, LabelSource::kVote};
  r.binary_class = BinaryClass::kNegative;
  CHECK_THROWS_AS(validate_record(r), Error);
  r.binary_class = BinaryClass::kPositive;
  CHECK_NOTHROW(validate_record(r));
  r.binary_class.reset();
  CHECK_THROWS_AS(validate_record(r), Error);
}

TEST_CASE("tensor files") {
  test::TempDir dir("tensor");
  SUBCASE("zero map round-trips") {
    ScoreMap m(2, 2);
    write_tensor(dir / "z.rwt", m);
    CHECK(read_score_map(dir / "z.rwt") == m);
  }
  SUBCASE("random 5x7x2 map round-trips bit-exactly") {
    std::mt19937_64 rng(9);
    const auto m = test::random_map(5, 7, rng);
    write_tensor(dir / "r.rwt", m);
    const auto back = read_score_map(dir / "r.rwt");
    CHECK(back == m);
    const auto raw = read_tensor(dir / "r.rwt");
    CHECK(raw.shape == std::vector<std::int64_t>{5, 7, 2});
    CHECK(raw.data[0] == m.region(0, 0));
    CHECK(raw.data[1] == m.affinity(0, 0));
  }
  SUBCASE("truncated payload is rejected") {
    std::mt19937_64 rng(10);
    write_tensor(dir / "t.rwt", test::random_map(4, 4, rng));
    const auto size = std::filesystem::file_size(dir / "t.rwt");
    std::filesystem::resize_file(dir / "t.rwt", size - 4);
    CHECK_THROWS_WITH_AS(read_tensor(dir / "t.rwt"), "payload length mismatch", Error);
  }
  SUBCASE("header layout") {
    std::ostringstream out;
    write_raw(out, RawTensor{{1, 2}, {1.0f, 2.0f}});
    const std::string s = out.str();
    CHECK(s.substr(0, s.find('\n')) == R"({"dtype":"f32","shape":[1,2]})");
    CHECK(s.size() == s.find('\n') + 1 + 8);
  }
  SUBCASE("images round-trip") {
    std::mt19937_64 rng(11);
    const auto img = test::random_image(6, 4, rng);
    write_tensor(dir / "i.rwt", img);
    CHECK(read_image_tensor(dir / "i.rwt") == img);
  }
}

TEST_CASE("PNG files keep 8-bit values") {
  test::TempDir dir("png");
  ImageTensor img(4, 6);
  for (std::size_t i = 0; i < img.values().size(); ++i) {
    img.values()[i] = static_cast<float>(i % 256) / 255.0f;
  }
  save_image(dir / "a.png", img);
  const auto back = load_image(dir / "a.png");
  REQUIRE(back.height() == 4);
  REQUIRE(back.width() == 6);
  for (std::size_t i = 0; i < img.values().size(); ++i) {
    CHECK(back.values()[i] == doctest::Approx(img.values()[i]).epsilon(1e-6));
  }
}

TEST_CASE("votes CSV round-trips and validates") {
  test::TempDir dir("votes");
  std::vector<VoteRecord> votes = {{"w1", "a", TextClass::kOverlaying, 7.5, 0},
                                   {"w2", "a", TextClass::kOrganic, 12.25, 0},
                                   {"w1", "b", TextClass::kNone, 3.0, 1}};
  write_votes(dir / "v.csv", votes);
  CHECK(read_votes(dir / "v.csv") == votes);
  const auto grouped = group_by_image(votes);
  CHECK(grouped.at("a").size() == 2);
  CHECK(grouped.at("b").size() == 1);
  CHECK_THROWS_AS(parse_votes("worker_id,image_id,label,vote_time_s,batch\nw,a,None,0,0\n"),
                  Error);
  CHECK_THROWS_AS(parse_votes("bad header\n"), Error);
}
