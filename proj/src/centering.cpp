#include "salience/centering.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <tuple>

#include "salience/csv.hpp"
#include "salience/errors.hpp"

namespace salience::centering {

const char* transition_name(Transition t) {
  switch (t) {
    case Transition::Continuation: return "continuation";
    case Transition::Retention: return "retention";
    case Transition::SmoothShift: return "smooth_shift";
    case Transition::RoughShift: return "rough_shift";
    case Transition::Establishment: return "establishment";
    case Transition::Null: return "null";
    case Transition::Zero: return "zero";
  }
  return "?";
}

int transition_rank(Transition t) { return static_cast<int>(t); }

int function_class(const std::string& deprel) {
  if (deprel == "nsubj" || deprel == "nsubj:pass" || deprel == "csubj")
    return 0;
  if (deprel == "obj" || deprel == "iobj") return 1;
  return 2;
}

bool is_pronoun_mention(const Document& doc, const Mention& m) {
  return doc.token(m.head).upos == "PRON";
}

namespace {

int givenness_class(const std::string& info_status) {
  if (info_status == "given") return 0;
  if (info_status == "accessible") return 1;
  return 2;
}

// Smaller key = higher prominence. Factors in configured order, then the
// start token as the final tie-break.
using SortKey = std::array<int, 5>;

SortKey mention_key(const Document& doc, const Mention& m,
                    const CenteringState* prev, const CfConfig& cfg) {
  const bool pron = is_pronoun_mention(doc, m);
  const bool prev_cb_pron =
      pron && prev && prev->cb && *prev->cb == m.entity_id;
  SortKey key{};
  for (std::size_t i = 0; i < cfg.order.size(); ++i) {
    switch (cfg.order[i]) {
      case CfFactor::PreviousCbPronoun: key[i] = prev_cb_pron ? 0 : 1; break;
      case CfFactor::Pronoun: key[i] = pron ? 0 : 1; break;
      case CfFactor::Function:
        key[i] = function_class(doc.token(m.head).deprel);
        break;
      case CfFactor::Givenness: key[i] = givenness_class(m.info_status); break;
    }
  }
  key[4] = m.start;
  return key;
}

}  // namespace

std::vector<CfEntry> rank_cf(const Document& doc,
                             std::span<const Mention* const> sentence_mentions,
                             const CenteringState* prev, const CfConfig& cfg) {
  // Best (lexicographically smallest) realization represents each entity.
  std::map<std::string, SortKey> best;
  for (const Mention* m : sentence_mentions) {
    SortKey key = mention_key(doc, *m, prev, cfg);
    auto [it, inserted] = best.emplace(m->entity_id, key);
    if (!inserted && key < it->second) it->second = key;
  }
  std::vector<std::pair<SortKey, std::string>> ordered;
  ordered.reserve(best.size());
  for (const auto& [entity, key] : best) ordered.push_back({key, entity});
  std::sort(ordered.begin(), ordered.end());

  std::vector<CfEntry> out;
  const double k = static_cast<double>(ordered.size());
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    out.push_back({ordered[i].second, static_cast<int>(i) + 1,
                   (static_cast<double>(i) + 1.0) / k});
  }
  return out;
}

std::optional<std::string> identify_cb(std::span<const CfEntry> curr_cf,
                                       const CenteringState* prev) {
  if (!prev) return std::nullopt;
  for (const auto& prev_entry : prev->cf_list) {
    for (const auto& cur : curr_cf) {
      if (cur.entity_id == prev_entry.entity_id) return prev_entry.entity_id;
    }
  }
  return std::nullopt;
}

Transition classify_transition(const CenteringState* prev,
                               const CenteringState& curr) {
  const bool prev_has_cb = prev && prev->cb.has_value();
  if (!curr.cb) {
    return prev_has_cb ? Transition::Null : Transition::Zero;
  }
  const bool top =
      !curr.cf_list.empty() && curr.cf_list.front().entity_id == *curr.cb;
  if (prev_has_cb) {
    if (*prev->cb == *curr.cb)
      return top ? Transition::Continuation : Transition::Retention;
    return top ? Transition::SmoothShift : Transition::RoughShift;
  }
  // Predecessor exists but carried no Cb. A document-initial predecessor
  // has no centering history at all, so "same Cb" holds vacuously there;
  // a later lapse makes the new Cb an Establishment.
  if (prev && prev->sentence_index == 0) {
    return top ? Transition::Continuation : Transition::Retention;
  }
  return Transition::Establishment;
}

std::vector<CenteringState> analyze_document(const Document& doc,
                                             const CfConfig& cfg) {
  std::vector<CenteringState> states;
  states.reserve(doc.sentences.size());
  const CenteringState* prev = nullptr;
  for (const auto& sent : doc.sentences) {
    auto mentions = doc.mentions_in_sentence(sent.index);
    CenteringState state;
    state.sentence_index = sent.index;
    state.cf_list = rank_cf(doc, mentions, prev, cfg);
    state.cb = identify_cb(state.cf_list, prev);
    state.transition = classify_transition(prev, state);
    states.push_back(std::move(state));
    prev = &states.back();
  }
  return states;
}

EntityCenteringFeatures entity_centering_features(
    std::span<const CenteringState> states, const Document& doc,
    const EntityCluster& cluster) {
  if (cluster.mention_ids.empty()) {
    throw DataError("cluster \"" + cluster.entity_id + "\" has no mentions");
  }
  double sum_pct = 0;
  double sum_trans = 0;
  int cb_count = 0;
  int min_trans = std::numeric_limits<int>::max();
  for (const auto& mid : cluster.mention_ids) {
    const Mention& m = doc.mention(mid);
    const int si = doc.sentence_of_token(m.start).index;
    const CenteringState& state = states[si];
    const auto entry =
        std::find_if(state.cf_list.begin(), state.cf_list.end(),
                     [&](const CfEntry& e) {
                       return e.entity_id == cluster.entity_id;
                     });
    if (entry == state.cf_list.end()) {
      throw DataError("centering state for sentence " + std::to_string(si) +
                      " does not rank entity \"" + cluster.entity_id + "\"");
    }
    sum_pct += entry->rank_percentile;
    if (state.cb && *state.cb == cluster.entity_id) ++cb_count;
    const int rank = transition_rank(state.transition);
    sum_trans += rank;
    min_trans = std::min(min_trans, rank);
  }
  const double n = static_cast<double>(cluster.mention_ids.size());
  return {sum_pct / n, cb_count / n, sum_trans / n, min_trans};
}

std::string centering_trace_csv(const Document& doc,
                                std::span<const CenteringState> states) {
  CsvWriter w;
  for (const auto& s : states) {
    w.cell(doc.doc_id);
    w.cell(s.sentence_index);
    w.cell(s.cb ? *s.cb : std::string("-"));
    w.cell(transition_name(s.transition));
    for (const auto& e : s.cf_list) {
      w.cell(e.entity_id + ":" + std::to_string(e.rank));
    }
    w.endrow();
  }
  return w.str();
}

}  // namespace salience::centering
