// Copyright 2026 The roiqa Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "roiqa/annotation.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>

#include "roiqa/records.hpp"
#include "test_util.hpp"

namespace roiqa {
namespace {

RatingRecord rating(const std::string& roi, const std::string& who, int q, int imp,
                    std::array<int, 6> d = {5, 5, 5, 5, 5, 5}) {
  RatingRecord r;
  r.roi_id = roi;
  r.annotator_id = who;
  r.distortions = d;
  r.quality = q;
  r.importance = imp;
  r.timestamp = "2026-01-01T00:00:00.000Z";
  return r;
}

std::vector<RatingRecord> seven(const std::string& roi, std::array<int, 7> noise,
                                std::array<int, 7> quality = {2, 2, 2, 2, 2, 2, 2}) {
  std::vector<RatingRecord> out;
  for (int i = 0; i < 7; ++i) {
    auto r = rating(roi, "a" + std::to_string(i), quality[static_cast<std::size_t>(i)], 1);
    r.distortions[index_of(DistortionType::Noise)] = noise[static_cast<std::size_t>(i)];
    out.push_back(r);
  }
  return out;
}

TEST(Aggregate, MajorityBoundaryFourOfSevenAbsent) {
  const auto a = aggregate_roi(seven("r", {5, 5, 5, 5, 1, 2, 3}));
  const auto& n = a.distortions[index_of(DistortionType::Noise)];
  EXPECT_EQ(n.nonexistent_votes, 4u);
  EXPECT_FALSE(n.present);
  EXPECT_FALSE(n.mean_severity.has_value());
  EXPECT_FALSE(n.severity_level.has_value());
  EXPECT_TRUE(a.finalized);
}

TEST(Aggregate, MajorityBoundaryThreeOfSevenPresentExcludingFives) {
  const auto a = aggregate_roi(seven("r", {5, 5, 5, 0, 1, 2, 3}));
  const auto& n = a.distortions[index_of(DistortionType::Noise)];
  EXPECT_EQ(n.nonexistent_votes, 3u);
  EXPECT_TRUE(n.present);
  EXPECT_DOUBLE_EQ(*n.mean_severity, 1.5);
  EXPECT_EQ(*n.severity_level, 1u);
  // Untouched types are unanimously absent.
  EXPECT_FALSE(a.distortions[index_of(DistortionType::Blur)].present);
}

TEST(Aggregate, EvenSplitIsPresent) {
  std::vector<RatingRecord> four;
  for (int i = 0; i < 4; ++i) {
    auto r = rating("r", "a" + std::to_string(i), 3, 3);
    r.distortions[0] = i < 2 ? 5 : 4;
    four.push_back(r);
  }
  const auto a = aggregate_roi(four);
  EXPECT_TRUE(a.distortions[0].present);
  EXPECT_DOUBLE_EQ(*a.distortions[0].mean_severity, 4.0);
  EXPECT_FALSE(a.finalized);
  EXPECT_THROW(finalize_roi(four), Error);
}

TEST(Aggregate, MeansAndLevels) {
  const auto a = aggregate_roi(seven("r", {5, 5, 5, 5, 5, 5, 5}, {4, 4, 4, 3, 3, 4, 4}));
  EXPECT_DOUBLE_EQ(a.quality_mean, 26.0 / 7.0);
  EXPECT_EQ(a.quality_level, 4u);
  EXPECT_DOUBLE_EQ(a.importance_mean, 1.0);
  EXPECT_EQ(a.importance_level, 1u);
  const auto j = aggregated_to_json(a);
  EXPECT_NE(j.find("\"finalized\""), std::string::npos);
}

TEST(Aggregate, EighthRatingEntersMean) {
  auto rs = seven("r", {0, 0, 0, 0, 0, 0, 0}, {0, 0, 0, 0, 0, 0, 0});
  rs.push_back(rating("r", "a7", 4, 1, {5, 4, 5, 5, 5, 5}));
  const auto a = aggregate_roi(rs);
  EXPECT_EQ(a.rater_count, 8u);
  EXPECT_DOUBLE_EQ(a.quality_mean, 0.5);
  EXPECT_DOUBLE_EQ(*a.distortions[1].mean_severity, 0.5);
  EXPECT_TRUE(a.finalized);
}

TEST(Aggregate, PermutationInvariant) {
  Rng rng(101);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<RatingRecord> rs;
    const std::size_t n = 1 + rng.index(10);
    for (std::size_t i = 0; i < n; ++i) {
      std::array<int, 6> d{};
      for (int& v : d) v = static_cast<int>(rng.index(6));
      rs.push_back(rating("r", "a" + std::to_string(i), static_cast<int>(rng.index(5)),
                          static_cast<int>(rng.index(5)), d));
    }
    const auto a = aggregate_roi(rs);
    rng.shuffle(rs.begin(), rs.end());
    ASSERT_EQ(aggregate_roi(rs), a);
  }
}

TEST(Aggregate, Errors) {
  EXPECT_THROW(aggregate_roi(std::vector<RatingRecord>{}), Error);
  EXPECT_THROW(aggregate_roi(std::vector{rating("r", "a", 1, 1), rating("s", "b", 1, 1)}), Error);
  EXPECT_THROW(aggregate_roi(std::vector{rating("r", "a", 1, 1), rating("r", "a", 2, 1)}), Error);
  EXPECT_THROW(to_label_record(aggregate_roi(std::vector{rating("r", "a", 1, 1)}), "id", "m", MaskLevel::Component),
               Error);
}

TEST(Rating, ValidationAndStrictParse) {
  auto r = rating("img#m0", "alice", 3, 2, {5, 0, 4, 5, 5, 1});
  EXPECT_EQ(parse_rating(rating_to_json(r)), r);
  r.quality = 5;
  EXPECT_THROW(r.validate(), ValidationError);
  r.quality = 3;
  r.distortions[2] = 6;
  EXPECT_THROW(r.validate(), ValidationError);
  const std::string ok =
      R"({"roi_id":"x","annotator_id":"a","quality":1,"importance":2,)"
      R"("distortions":{"exposure":5,"noise":5,"blur":5,"contrast":5,"colorfulness":5,"compression":5}})";
  EXPECT_NO_THROW(parse_rating(ok));
  EXPECT_TRUE(parse_rating(ok).timestamp.empty());
  auto bad = [&](std::string from, std::string to) {
    std::string s = ok;
    s.replace(s.find(from), from.size(), to);
    return s;
  };
  EXPECT_THROW(parse_rating(bad("\"quality\":1", "\"quality\":1.5")), ValidationError);
  EXPECT_THROW(parse_rating(bad("\"quality\":1", "\"quality\":\"1\"")), ValidationError);
  EXPECT_THROW(parse_rating(bad("\"quality\":1,", "")), ValidationError);
  EXPECT_THROW(parse_rating(bad("\"compression\":5", "\"jpeg\":5")), ValidationError);
  EXPECT_THROW(parse_rating(bad(",\"compression\":5", "")), ValidationError);
  EXPECT_THROW(parse_rating(bad("\"importance\":2", "\"importance\":2,\"extra\":1")), ValidationError);
  EXPECT_THROW(parse_rating(bad("\"annotator_id\":\"a\"", "\"annotator_id\":\"\"")), ValidationError);
  EXPECT_THROW(parse_rating("not json"), ValidationError);
  EXPECT_THROW(parse_rating("[]"), ValidationError);
}

struct StoreFixture {
  testing::TempDir dir{"store"};
  std::vector<RoiInfo> rois;
  std::vector<std::string> annotators;

  StoreFixture() {
    for (int i = 0; i < 3; ++i) {
      RoiInfo info;
      info.roi_id = "img#m" + std::to_string(i);
      info.image_id = "abc";
      info.mask_path = "masks/abc_m" + std::to_string(i) + ".json";
      rois.push_back(info);
    }
    for (int i = 0; i < 9; ++i) annotators.push_back("a" + std::to_string(i));
  }
  AnnotationStore open() const { return AnnotationStore(rois, annotators, dir / "ratings.jsonl"); }
};

TEST(Store, NextTaskPrefersMostRatedOpenRoi) {
  StoreFixture f;
  auto s = f.open();
  EXPECT_EQ(*s.next_task("a0"), "img#m0");
  for (int i = 0; i < 2; ++i) s.submit(rating("img#m1", "a" + std::to_string(i), 2, 2));
  for (int i = 2; i < 8; ++i) s.submit(rating("img#m2", "a" + std::to_string(i), 2, 2));
  // img#m2 has 6 ratings, img#m1 has 2.
  EXPECT_EQ(*s.next_task("a0"), "img#m2");
  // a2 already rated img#m2.
  EXPECT_EQ(*s.next_task("a2"), "img#m1");
  s.submit(rating("img#m2", "a8", 2, 2));
  EXPECT_EQ(*s.next_task("a0"), "img#m0");
  EXPECT_EQ(*s.next_task("a8"), "img#m1");
  EXPECT_THROW(s.next_task("mallory"), NotFoundError);
}

TEST(Store, NextTaskExhausts) {
  StoreFixture f;
  f.rois.resize(1);
  auto s = f.open();
  s.submit(rating("img#m0", "a0", 1, 1));
  EXPECT_FALSE(s.next_task("a0").has_value());
  EXPECT_TRUE(s.next_task("a1").has_value());
}

TEST(Store, ReplacementAndFinalization) {
  StoreFixture f;
  auto s = f.open();
  auto ack = s.submit(rating("img#m0", "a0", 1, 1));
  EXPECT_EQ(ack.rater_count, 1u);
  EXPECT_FALSE(ack.replaced);
  ack = s.submit(rating("img#m0", "a0", 3, 1));
  EXPECT_EQ(ack.rater_count, 1u);
  EXPECT_TRUE(ack.replaced);
  EXPECT_DOUBLE_EQ(s.aggregate("img#m0").quality_mean, 3.0);
  for (int i = 1; i < 7; ++i) ack = s.submit(rating("img#m0", "a" + std::to_string(i), 3, 1));
  EXPECT_TRUE(ack.finalized);
  EXPECT_EQ(ack.rater_count, 7u);
  EXPECT_THROW(s.submit(rating("img#m0", "a7", 3, 1)), ConflictError);
  EXPECT_THROW(s.submit(rating("img#m0", "a0", 0, 1)), ConflictError);
  EXPECT_THROW(s.submit(rating("nope", "a0", 0, 1)), NotFoundError);
  EXPECT_THROW(s.submit(rating("img#m1", "mallory", 0, 1)), NotFoundError);
  EXPECT_THROW(s.submit(rating("img#m1", "a0", 9, 1)), ValidationError);
  EXPECT_THROW(s.aggregate("nope"), NotFoundError);
  const auto p = s.progress();
  ASSERT_EQ(p.size(), 3u);
  EXPECT_TRUE(p[0].finalized);
  EXPECT_EQ(p[1].rater_count, 0u);
  EXPECT_EQ(s.aggregate("img#m1").rater_count, 0u);
}

TEST(Store, ExportOnlyFinalized) {
  StoreFixture f;
  auto s = f.open();
  for (int i = 0; i < 7; ++i) s.submit(rating("img#m1", "a" + std::to_string(i), 4, 2, {5, 1, 5, 5, 5, 5}));
  s.submit(rating("img#m0", "a0", 1, 1));
  const auto labels = s.export_labels();
  ASSERT_EQ(labels.size(), 1u);
  const RoiLabelRecord& r = labels[0];
  EXPECT_EQ(r.roi_id, "img#m1");
  EXPECT_EQ(r.mask, "masks/abc_m1.json");
  EXPECT_EQ(r.source, LabelSource::HumanAggregated);
  EXPECT_EQ(r.quality_score, (Score{4.0, ScoreScale::Human}));
  EXPECT_TRUE(r.distortions[1].present);
  EXPECT_EQ(*r.distortions[1].severity, 1.0);
  EXPECT_FALSE(r.distortions[0].present);
}

TEST(Store, LogReplayRestoresState) {
  StoreFixture f;
  std::vector<RatingRecord> before;
  {
    auto s = f.open();
    Rng rng(102);
    for (int k = 0; k < 40; ++k) {
      auto r = rating("img#m" + std::to_string(rng.index(3)), "a" + std::to_string(rng.index(9)),
                      static_cast<int>(rng.index(5)), static_cast<int>(rng.index(5)));
      r.timestamp.clear();
      try {
        s.submit(r);
      } catch (const ConflictError&) {
      }
    }
    before = s.ratings();
    for (const auto& r : before) EXPECT_FALSE(r.timestamp.empty());
  }
  auto replayed = f.open();
  EXPECT_EQ(replayed.ratings(), before);
  EXPECT_EQ(replayed.export_labels(), f.open().export_labels());
}

TEST(Store, CorruptLogNamesLine) {
  StoreFixture f;
  {
    std::ofstream out(f.dir / "ratings.jsonl");
    out << "{\"event\":\"rating\",\"rating\":" << rating_to_json(rating("img#m0", "a0", 1, 1)) << "}\n";
    out << "{\"event\":\"rating\",\"rating\":{\"roi_id\":\"img#m0\"}}\n";
  }
  try {
    f.open();
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(Store, DuplicateRoisRejected) {
  StoreFixture f;
  f.rois.push_back(f.rois[0]);
  EXPECT_THROW(f.open(), Error);
}

TEST(Annotators, ReadSkipsCommentsAndBlanks) {
  testing::TempDir dir("ann");
  {
    std::ofstream out(dir / "a.txt");
    out << "# panel\nalice\n\n  bob  # lead\n";
  }
  EXPECT_EQ(read_annotators(dir / "a.txt"), (std::vector<std::string>{"alice", "bob"}));
  {
    std::ofstream out(dir / "b.txt");
    out << "# nobody\n";
  }
  EXPECT_THROW(read_annotators(dir / "b.txt"), Error);
}

}  // namespace
}  // namespace roiqa
