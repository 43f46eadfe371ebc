#include <algorithm>

#include "doctest.h"
#include "salience/centering.hpp"
#include "salience/errors.hpp"
#include "support/centering_reference.hpp"
#include "support/doc_builder.hpp"

using namespace salience;
using centering::Transition;

TEST_SUITE("centering") {

TEST_CASE("the worked two-sentence example ranks and classifies exactly") {
  const Document doc = testing::susan_betsy_document();
  const auto states = centering::analyze_document(doc);
  REQUIRE(states.size() == 2);

  // Sentence 1: subject > indirect object > object, no pronouns.
  REQUIRE(states[0].cf_list.size() == 3);
  CHECK(states[0].cf_list[0].entity_id == "susan");
  CHECK(states[0].cf_list[1].entity_id == "betsy");
  CHECK(states[0].cf_list[2].entity_id == "hamster");
  CHECK(!states[0].cb.has_value());
  CHECK(states[0].transition == Transition::Zero);

  // Sentence 2: the pronoun She = Susan is Cb and tops the Cf list.
  REQUIRE(states[1].cb.has_value());
  CHECK(*states[1].cb == "susan");
  CHECK(states[1].cf_list[0].entity_id == "susan");
  CHECK(states[1].cf_list[1].entity_id == "betsy");
  CHECK(states[1].cf_list[2].entity_id == "hamster");
  CHECK(states[1].transition == Transition::Continuation);
}

TEST_CASE("single-mention sentence gets rank 1, percentile 1.0") {
  testing::DocBuilder b("single", "news", "train");
  b.sentence({{"Rain", "NOUN", 2, "nsubj"}, {"fell", "VERB", 0, "root"}});
  b.mention("m1", "rain", 1, 1, 1, "substance");
  b.one_edu_per_sentence();
  b.summary("s1", {"rain"});
  const auto states = centering::analyze_document(b.build());
  REQUIRE(states[0].cf_list.size() == 1);
  CHECK(states[0].cf_list[0].rank == 1);
  CHECK(states[0].cf_list[0].rank_percentile == doctest::Approx(1.0));
}

TEST_CASE("ties on all factors break by linear order") {
  testing::DocBuilder b("ties", "news", "train");
  b.sentence({{"saw", "VERB", 0, "root"},
              {"ann", "NOUN", 1, "obj"},
              {"bob", "NOUN", 1, "obj"}});
  b.mention("m1", "ann", 2, 2, 2, "person", false, true, "new");
  b.mention("m2", "bob", 3, 3, 3, "person", false, true, "new");
  b.one_edu_per_sentence();
  b.summary("s1", {"ann"});
  const auto states = centering::analyze_document(b.build());
  CHECK(states[0].cf_list[0].entity_id == "ann");
  CHECK(states[0].cf_list[1].entity_id == "bob");
}

TEST_CASE("cb is the highest-ranked previous entity realized now") {
  SUBCASE("first sentence has none") {
    const auto states =
        centering::analyze_document(testing::susan_betsy_document());
    CHECK(!states[0].cb.has_value());
  }
  SUBCASE("no overlap means none") {
    testing::DocBuilder b("no_overlap", "news", "train");
    b.sentence({{"ann", "NOUN", 0, "root"}});
    b.sentence({{"bob", "NOUN", 0, "root"}});
    b.mention("m1", "ann", 1, 1, 1);
    b.mention("m2", "bob", 2, 2, 2);
    b.one_edu_per_sentence();
    b.summary("s1", {"ann"});
    const auto states = centering::analyze_document(b.build());
    CHECK(!states[1].cb.has_value());
    CHECK(states[1].transition == Transition::Zero);
  }
}

TEST_CASE("transition classification covers all seven cases") {
  using State = centering::CenteringState;
  auto state = [](int index, std::vector<std::string> cf,
                  std::optional<std::string> cb) {
    State s;
    s.sentence_index = index;
    for (std::size_t i = 0; i < cf.size(); ++i) {
      s.cf_list.push_back({cf[i], static_cast<int>(i) + 1,
                           (i + 1.0) / cf.size()});
    }
    s.cb = std::move(cb);
    return s;
  };

  const State none_prev = state(3, {"x"}, std::nullopt);
  const State cb_prev = state(3, {"x", "y"}, "x");
  const State initial_prev = state(0, {"x", "y"}, std::nullopt);

  // same Cb, top vs not
  CHECK(centering::classify_transition(&cb_prev, state(4, {"x", "y"}, "x")) ==
        Transition::Continuation);
  CHECK(centering::classify_transition(&cb_prev, state(4, {"y", "x"}, "x")) ==
        Transition::Retention);
  // changed Cb, top vs not
  CHECK(centering::classify_transition(&cb_prev, state(4, {"y", "x"}, "y")) ==
        Transition::SmoothShift);
  CHECK(centering::classify_transition(&cb_prev, state(4, {"z", "y"}, "y")) ==
        Transition::RoughShift);
  // Cb lapses and returns mid-document
  CHECK(centering::classify_transition(&none_prev, state(4, {"x"}, "x")) ==
        Transition::Establishment);
  CHECK(centering::classify_transition(&cb_prev, state(4, {"z"}, std::nullopt)) ==
        Transition::Null);
  CHECK(centering::classify_transition(&none_prev,
                                       state(4, {"z"}, std::nullopt)) ==
        Transition::Zero);
  // document-initial predecessor without a Cb counts as same-Cb
  CHECK(centering::classify_transition(&initial_prev, state(1, {"x"}, "x")) ==
        Transition::Continuation);
  CHECK(centering::classify_transition(&initial_prev,
                                       state(1, {"y", "x"}, "x")) ==
        Transition::Retention);
  CHECK(centering::classify_transition(nullptr, state(0, {"x"}, std::nullopt)) ==
        Transition::Zero);
}

TEST_CASE("every (prev, curr) structural case maps to exactly one type") {
  // Exhaustive 2x2x2 structure: prev kind x curr-cb x cb-top.
  using State = centering::CenteringState;
  std::vector<const State*> prevs;
  State initial;
  initial.sentence_index = 0;
  initial.cf_list = {{"a", 1, 1.0}};
  State mid_no_cb;
  mid_no_cb.sentence_index = 2;
  mid_no_cb.cf_list = {{"a", 1, 1.0}};
  State mid_cb = mid_no_cb;
  mid_cb.cb = "a";
  prevs = {nullptr, &initial, &mid_no_cb, &mid_cb};
  for (const State* prev : prevs) {
    for (bool has_cb : {false, true}) {
      for (bool top : {false, true}) {
        if (prev == nullptr && has_cb) continue;  // unreachable by contract
        State curr;
        curr.sentence_index = prev ? prev->sentence_index + 1 : 0;
        if (has_cb) {
          curr.cb = "a";
          curr.cf_list = top ? std::vector<centering::CfEntry>{{"a", 1, 0.5},
                                                               {"b", 2, 1.0}}
                             : std::vector<centering::CfEntry>{{"b", 1, 0.5},
                                                               {"a", 2, 1.0}};
        } else {
          curr.cf_list = {{"b", 1, 1.0}};
        }
        const auto t = centering::classify_transition(prev, curr);
        CHECK(centering::transition_rank(t) >= 1);
        CHECK(centering::transition_rank(t) <= 7);
      }
    }
  }
}

TEST_CASE("cf ranking ignores the input order of mentions") {
  auto rng = RandomStream(31);
  for (int trial = 0; trial < 30; ++trial) {
    Document doc = testing::random_document(rng);
    const auto baseline = centering::analyze_document(doc);
    Document shuffled = doc;
    rng.shuffle(shuffled.mentions);
    shuffled.rebuild_index();
    const auto states = centering::analyze_document(shuffled);
    REQUIRE(states.size() == baseline.size());
    for (std::size_t s = 0; s < states.size(); ++s) {
      CHECK(states[s].cf_list == baseline[s].cf_list);
      CHECK(states[s].cb == baseline[s].cb);
      CHECK(states[s].transition == baseline[s].transition);
    }
  }
}

TEST_CASE("entity aggregates") {
  SUBCASE("singleton in a zero-transition sentence") {
    testing::DocBuilder b("agg", "news", "train");
    b.sentence({{"Rain", "NOUN", 2, "nsubj"}, {"fell", "VERB", 0, "root"}});
    b.mention("m1", "rain", 1, 1, 1, "substance");
    b.one_edu_per_sentence();
    b.summary("s1", {"rain"});
    const Document doc = b.build();
    const auto states = centering::analyze_document(doc);
    const auto f = centering::entity_centering_features(states, doc,
                                                        doc.cluster("rain"));
    CHECK(f.mean_cf_percentile == doctest::Approx(1.0));
    CHECK(f.cb_proportion == doctest::Approx(0.0));
    CHECK(f.mean_transition == doctest::Approx(7.0));
    CHECK(f.min_transition == 7);
  }

  SUBCASE("cb in one of two mentions gives proportion one half") {
    const Document doc = testing::susan_betsy_document();
    const auto states = centering::analyze_document(doc);
    const auto f = centering::entity_centering_features(states, doc,
                                                        doc.cluster("susan"));
    CHECK(f.cb_proportion == doctest::Approx(0.5));
    CHECK(f.min_transition == 1);  // the Continuation sentence
  }

  SUBCASE("empty cluster raises") {
    const Document doc = testing::susan_betsy_document();
    EntityCluster empty{"ghost", {}, -1};
    const auto states = centering::analyze_document(doc);
    CHECK_THROWS_AS(
        centering::entity_centering_features(states, doc, empty), DataError);
  }
}

TEST_CASE("random documents equal the brute-force reference") {
  auto rng = RandomStream(42);
  for (int trial = 0; trial < 100; ++trial) {
    const Document doc = testing::random_document(rng, 6, 4);
    const auto states = centering::analyze_document(doc);
    const auto ref = testing::reference_centering(doc);
    REQUIRE(states.size() == ref.size());
    for (std::size_t s = 0; s < states.size(); ++s) {
      REQUIRE(states[s].cf_list.size() == ref[s].cf.size());
      for (std::size_t i = 0; i < ref[s].cf.size(); ++i) {
        CHECK(states[s].cf_list[i].entity_id == ref[s].cf[i]);
      }
      CHECK((states[s].cb ? *states[s].cb : "") == ref[s].cb);
      CHECK(centering::transition_rank(states[s].transition) ==
            ref[s].transition);
    }
  }
}

TEST_CASE("entity aggregates equal a straight-line recomputation") {
  auto rng = RandomStream(43);
  for (int trial = 0; trial < 25; ++trial) {
    const Document doc = testing::random_document(rng, 6, 4);
    const auto states = centering::analyze_document(doc);
    for (const auto& cluster : doc.clusters) {
      const auto f =
          centering::entity_centering_features(states, doc, cluster);
      // from-first-principles loop over this entity's mentions
      double sum_pct = 0, sum_tr = 0, cb_hits = 0;
      int min_tr = 8;
      for (const auto& mid : cluster.mention_ids) {
        const auto& m = doc.mention(mid);
        const auto& state = states[doc.sentence_of_token(m.start).index];
        for (const auto& e : state.cf_list) {
          if (e.entity_id == cluster.entity_id) sum_pct += e.rank_percentile;
        }
        if (state.cb && *state.cb == cluster.entity_id) cb_hits += 1;
        const int rank = centering::transition_rank(state.transition);
        sum_tr += rank;
        min_tr = std::min(min_tr, rank);
      }
      const double n = cluster.mention_ids.size();
      CHECK(f.mean_cf_percentile == doctest::Approx(sum_pct / n));
      CHECK(f.cb_proportion == doctest::Approx(cb_hits / n));
      CHECK(f.mean_transition == doctest::Approx(sum_tr / n));
      CHECK(f.min_transition == min_tr);
    }
  }
}

}  // TEST_SUITE
