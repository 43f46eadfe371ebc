#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "salience/types.hpp"

namespace salience::centering {

// The 7 inter-sentence coherence types, ranked from most to least coherent.
enum class Transition : int {
  Continuation = 1,
  Retention = 2,
  SmoothShift = 3,
  RoughShift = 4,
  Establishment = 5,
  Null = 6,
  Zero = 7,
};

const char* transition_name(Transition t);
int transition_rank(Transition t);

struct CfEntry {
  std::string entity_id;
  int rank = 0;                 // 1-based
  double rank_percentile = 0;   // rank / distinct entities, in (0, 1]

  bool operator==(const CfEntry&) const = default;
};

struct CenteringState {
  int sentence_index = 0;
  std::vector<CfEntry> cf_list;        // ordered, rank 1 first
  std::optional<std::string> cb;       // nullopt = no backward-looking center
  Transition transition = Transition::Zero;
};

// Cf ranking factors, applied lexicographically in the configured order;
// ties are always broken last by linear order (earliest start token).
enum class CfFactor {
  PreviousCbPronoun,  // pronoun realizing the previous sentence's Cb
  Pronoun,            // head word is PRON
  Function,           // subj > obj > other
  Givenness,          // given > accessible > new
};

struct CfConfig {
  std::array<CfFactor, 4> order = {CfFactor::PreviousCbPronoun,
                                   CfFactor::Pronoun, CfFactor::Function,
                                   CfFactor::Givenness};
};

// subj = {nsubj, nsubj:pass, csubj}, obj = {obj, iobj}, everything else
// ranks third.
int function_class(const std::string& deprel);

bool is_pronoun_mention(const Document& doc, const Mention& m);

// Ranks the distinct entities of one sentence. Multiple mentions of the
// same entity are represented by their highest-ranked realization.
std::vector<CfEntry> rank_cf(const Document& doc,
                             std::span<const Mention* const> sentence_mentions,
                             const CenteringState* prev,
                             const CfConfig& cfg = {});

// Cb = highest-ranked entity of the previous sentence's Cf that is realized
// in the current sentence; nullopt without a previous sentence or overlap.
std::optional<std::string> identify_cb(std::span<const CfEntry> curr_cf,
                                       const CenteringState* prev);

// Exhaustive 7-way classification. A Cb-less document-initial predecessor
// counts as "same Cb" (the classic convention, which makes the two-sentence
// Continuation textbook case come out as such); a Cb lapse later in the
// document yields Establishment when a new Cb appears.
Transition classify_transition(const CenteringState* prev,
                               const CenteringState& curr);

// Full per-sentence analysis of a document, chaining states in order.
std::vector<CenteringState> analyze_document(const Document& doc,
                                             const CfConfig& cfg = {});

struct EntityCenteringFeatures {
  double mean_cf_percentile = 0;  // in (0, 1]
  double cb_proportion = 0;       // share of mentions that are their
                                  // sentence's Cb, in [0, 1]
  double mean_transition = 0;     // in [1, 7]
  int min_transition = 0;         // in [1, 7]
};

// Aggregates over all mentions of the cluster (a sentence with two mentions
// of the entity contributes twice to the means). Throws DataError on an
// empty cluster.
EntityCenteringFeatures entity_centering_features(
    std::span<const CenteringState> states, const Document& doc,
    const EntityCluster& cluster);

// Per-sentence trace rows: doc_id, sentence_index, cb, transition, then
// one "entity:rank" cell per Cf entry.
std::string centering_trace_csv(const Document& doc,
                                std::span<const CenteringState> states);

}  // namespace salience::centering
