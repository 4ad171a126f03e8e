// Copyright 2026 The OpenFSP Authors.
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

#include "openfsp/dap_tagger.hpp"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

namespace openfsp {
namespace {

TEST(TagSet, SeventeenAgnosticTags) {
  const std::vector<std::string> tags = agnostic_tag_set();
  EXPECT_EQ(tags.size(), 17u);
  EXPECT_EQ(tags[0], "O");
  EXPECT_EQ(tags[1], "B-SL:DELIVERABLE");
  EXPECT_EQ(tags[2], "I-SL:DELIVERABLE");
}

TEST(Featurize, DigitAndBoundaryFeatures) {
  const std::vector<std::string> tokens = {"wake", "me", "at", "6", "am"};
  const auto feats_digit = featurize(tokens, 3, "O");
  EXPECT_NE(std::find(feats_digit.begin(), feats_digit.end(), "isdigit=true"), feats_digit.end());
  EXPECT_NE(std::find(feats_digit.begin(), feats_digit.end(), "prev=at"), feats_digit.end());
  EXPECT_NE(std::find(feats_digit.begin(), feats_digit.end(), "next=am"), feats_digit.end());

  const auto feats_first = featurize(tokens, 0, "<s>");
  EXPECT_NE(std::find(feats_first.begin(), feats_first.end(), "prev=<s>"), feats_first.end());
  EXPECT_NE(std::find(feats_first.begin(), feats_first.end(), "isdigit=false"), feats_first.end());

  const auto feats_last = featurize(tokens, 4, "I-SL:SCOPE_TEMPORAL");
  EXPECT_NE(std::find(feats_last.begin(), feats_last.end(), "next=</s>"), feats_last.end());
  EXPECT_NE(std::find(feats_last.begin(), feats_last.end(), "ptag=I-SL:SCOPE_TEMPORAL"),
            feats_last.end());

  EXPECT_EQ(featurize(tokens, 3, "O"), featurize(tokens, 3, "O"));
}

TEST(BioRepair, OrphanInsideBecomesBegin) {
  EXPECT_EQ(bio_repair({"O", "I-SL:NUMS", "O"}),
            (std::vector<std::string>{"O", "B-SL:NUMS", "O"}));
  EXPECT_EQ(bio_repair({"I-SL:NUMS", "I-SL:NUMS"}),
            (std::vector<std::string>{"B-SL:NUMS", "I-SL:NUMS"}));
  // Type switch without a B also repairs.
  EXPECT_EQ(bio_repair({"B-SL:NUMS", "I-SL:SCOPE_LOC"}),
            (std::vector<std::string>{"B-SL:NUMS", "B-SL:SCOPE_LOC"}));
  // Valid sequences pass through.
  const std::vector<std::string> valid = {"O", "B-SL:NUMS", "I-SL:NUMS", "O"};
  EXPECT_EQ(bio_repair(valid), valid);
}

// Number of maximal same-type labeled runs, treating any B as a run start.
size_t count_runs(const std::vector<std::string>& tags) {
  size_t runs = 0;
  for (size_t i = 0; i < tags.size(); ++i) {
    if (tags[i] == "O") continue;
    const std::string type = tags[i].substr(2);
    const bool starts = tags[i].starts_with("B-") || i == 0 || tags[i - 1] == "O" ||
                        tags[i - 1].substr(2) != type;
    if (starts) ++runs;
  }
  return runs;
}

TEST(BioRepair, PreservesRunCountOnRandomSequences) {
  const std::vector<std::string> tags = agnostic_tag_set();
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<std::string> seq;
    const size_t len = 1 + rng() % 12;
    for (size_t i = 0; i < len; ++i) seq.push_back(tags[rng() % tags.size()]);
    const auto repaired = bio_repair(seq);
    EXPECT_EQ(count_runs(repaired), count_runs(seq)) << "trial " << trial;
    // After repair every I continues a same-type tag.
    for (size_t i = 0; i < repaired.size(); ++i) {
      if (!repaired[i].starts_with("I-")) continue;
      ASSERT_GT(i, 0u);
      EXPECT_EQ(repaired[i - 1].substr(2), repaired[i].substr(2));
    }
  }
}

TEST(SpansFromTags, DecodesRuns) {
  const Frame f =
      spans_from_tags({"O", "B-SL:SCOPE_TEMPORAL", "I-SL:SCOPE_TEMPORAL", "O"});
  ASSERT_EQ(f.slots.size(), 1u);
  EXPECT_EQ(f.slots[0], (Span{1, 3, "SL:SCOPE_TEMPORAL"}));
  EXPECT_EQ(f.intent, (Span{0, 4, std::string(kIntentSentinel)}));

  EXPECT_TRUE(spans_from_tags({"O", "O", "O"}).slots.empty());

  const Frame repaired = spans_from_tags(bio_repair({"O", "I-SL:NUMS", "O"}));
  ASSERT_EQ(repaired.slots.size(), 1u);
  EXPECT_EQ(repaired.slots[0], (Span{1, 2, "SL:NUMS"}));
}

TEST(BioTagsFor, InverseOfSpansFromTags) {
  Frame f;
  f.intent = {0, 6, std::string(kIntentSentinel)};
  f.domain = "agnostic";
  f.slots = {{1, 3, "SL:SCOPE_TEMPORAL"}, {4, 5, "SL:NUMS"}};
  const auto tags = bio_tags_for(f, 6);
  EXPECT_EQ(tags, (std::vector<std::string>{"O", "B-SL:SCOPE_TEMPORAL", "I-SL:SCOPE_TEMPORAL",
                                            "O", "B-SL:NUMS", "O"}));
  const Frame back = spans_from_tags(tags);
  EXPECT_EQ(back.slots, f.slots);
}

// Small unambiguous corpus: temporal spans are "at <digit> am", deliverable
// spans follow "the".
std::vector<Record> synthetic_training_records() {
  const std::vector<std::string> devices = {"fan",   "heater", "light", "radio", "pump",
                                            "organ", "mixer",  "oven",  "drill", "saw"};
  std::vector<Record> records;
  for (int i = 0; i < 50; ++i) {
    const std::string device = devices[i % devices.size()];
    const std::string hour = std::to_string(1 + i % 12);
    std::ostringstream line;
    line << "[IN:X please start the [SL:DELIVERABLE " << device << " ] [SL:SCOPE_TEMPORAL at "
         << hour << " am ] ]";
    Record rec = parse_top_record(line.str());  // bracketing uses agnostic labels directly
    rec.domain = "toy";
    records.push_back(std::move(rec));
  }
  return records;
}

TEST(TrainTagger, LearnsSyntheticCorpus) {
  std::vector<Record> records = synthetic_training_records();
  std::vector<const Record*> ptrs;
  for (const Record& r : records) ptrs.push_back(&r);
  const TaggerModel model = train_tagger(ptrs, 5, 1);

  size_t correct = 0, total = 0;
  for (const Record& rec : records) {
    const auto gold = bio_tags_for(rec.frame, rec.utterance.size());
    const auto pred = decode_tags(rec.utterance.tokens, model);
    for (size_t i = 0; i < gold.size(); ++i) {
      correct += gold[i] == pred[i];
      ++total;
    }
  }
  EXPECT_GE(static_cast<double>(correct) / total, 0.95);
}

TEST(TrainTagger, DeterministicGivenSeed) {
  std::vector<Record> records = synthetic_training_records();
  std::vector<const Record*> ptrs;
  for (const Record& r : records) ptrs.push_back(&r);
  const TaggerModel a = train_tagger(ptrs, 3, 42);
  const TaggerModel b = train_tagger(ptrs, 3, 42);
  std::ostringstream sa, sb;
  a.save(sa);
  b.save(sb);
  EXPECT_EQ(sa.str(), sb.str());
}

TEST(TrainTagger, RejectsBadInput) {
  EXPECT_THROW(train_tagger({}, 5, 1), EmptyTrainingSet);
  std::vector<Record> records = synthetic_training_records();
  std::vector<const Record*> ptrs = {&records[0]};
  EXPECT_THROW(train_tagger(ptrs, 0, 1), EmptyTrainingSet);
}

TEST(Tag, OutputSpansAlwaysValidOnFuzzedInput) {
  std::vector<Record> records = synthetic_training_records();
  std::vector<const Record*> ptrs;
  for (const Record& r : records) ptrs.push_back(&r);
  const TaggerModel model = train_tagger(ptrs, 2, 1);

  std::mt19937_64 rng(5);
  const std::vector<std::string> vocab = {"start", "the", "fan", "at", "7", "am",
                                          "zzz",   "42",  "!",  "Mixed", "case"};
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::string> tokens;
    const size_t len = 1 + rng() % 10;
    for (size_t i = 0; i < len; ++i) tokens.push_back(vocab[rng() % vocab.size()]);
    const Frame frame = tag(Utterance::from_tokens(tokens), model);
    EXPECT_NO_THROW(validate_frame(frame, tokens.size()));
    EXPECT_EQ(frame.intent.label, kIntentSentinel);
  }
}

TEST(GoldenParse, EqualsProjectedGold) {
  const OntologyMap map = load_builtin_map();
  Record rec = parse_top_record("[IN:CREATE_ALARM wake me [SL:DATE_TIME at 6 am ] ]");
  rec.domain = "alarm";
  const Frame golden = golden_parse(rec, map);
  EXPECT_EQ(golden, project_agnostic(rec, map).frame);
  ASSERT_EQ(golden.slots.size(), 1u);
  EXPECT_EQ(golden.slots[0], (Span{2, 5, "SL:SCOPE_TEMPORAL"}));

  Record slotless = parse_top_record("[IN:GET_WEATHER what is the weather ]");
  EXPECT_TRUE(golden_parse(slotless, map).slots.empty());
}

TEST(TaggerPersistence, SaveLoadRoundTrip) {
  std::vector<Record> records = synthetic_training_records();
  std::vector<const Record*> ptrs;
  for (const Record& r : records) ptrs.push_back(&r);
  const TaggerModel model = train_tagger(ptrs, 3, 7);

  std::ostringstream out;
  model.save(out);
  std::istringstream in(out.str());
  const TaggerModel loaded = TaggerModel::load(in);

  EXPECT_EQ(loaded.tags, model.tags);
  EXPECT_EQ(loaded.epochs, model.epochs);
  EXPECT_EQ(loaded.seed, model.seed);
  std::ostringstream again;
  loaded.save(again);
  EXPECT_EQ(again.str(), out.str());

  for (const Record& rec : records) {
    EXPECT_EQ(decode_tags(rec.utterance.tokens, loaded),
              decode_tags(rec.utterance.tokens, model));
  }
}

}  // namespace
}  // namespace openfsp
