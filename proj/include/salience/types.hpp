#pragma once

#include <array>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace salience {

// The ten entity types annotated in the corpus.
inline constexpr std::array<const char*, 10> kEntityTypes = {
    "person", "animal", "plant",        "object", "place",
    "organization", "event", "time", "substance", "abstract"};

inline constexpr std::array<const char*, 3> kInfoStatuses = {"given",
                                                             "accessible",
                                                             "new"};

inline constexpr std::array<const char*, 4> kPartitions = {"train", "dev",
                                                           "test", "ood"};

// Coarse relation label carried by root EDUs that head no relation.
inline constexpr const char* kNoRelation = "none";

struct Token {
  int id = 0;  // document-global, 1-based
  std::string form;
  std::string upos;
  int head = 0;  // document-global token id, 0 = syntactic root
  std::string deprel;

  bool operator==(const Token&) const = default;
};

struct Sentence {
  int index = 0;        // 0-based
  int first_token = 0;  // inclusive token-id span
  int last_token = 0;

  int length() const { return last_token - first_token + 1; }
  bool operator==(const Sentence&) const = default;
};

struct Mention {
  std::string mention_id;
  std::string entity_id;
  int start = 0;  // inclusive token ids
  int end = 0;
  int head = 0;  // token id inside [start, end]
  std::string entity_type;
  bool definite = false;
  bool singular = false;
  std::string info_status;  // given | accessible | new

  bool operator==(const Mention&) const = default;
};

struct EntityCluster {
  std::string entity_id;
  std::vector<std::string> mention_ids;  // document order
  int salience = -1;                     // derived; -1 until assigned

  int size() const { return static_cast<int>(mention_ids.size()); }
  bool operator==(const EntityCluster&) const = default;
};

struct Edu {
  int id = 0;
  int start = 0;  // inclusive token-id span
  int end = 0;
  std::string relation_coarse;
  std::string relation_fine;
  std::optional<int> parent;  // nullopt = most central unit (a root)
  bool explicit_dm = false;

  bool operator==(const Edu&) const = default;
};

struct SummaryAlignment {
  std::string summary_id;
  std::vector<std::string> entities;  // entity ids mentioned by the summary

  bool mentions(const std::string& entity_id) const;
  bool operator==(const SummaryAlignment&) const = default;
};

// Coarse relation inventory. Loaded from configuration; defaults to the
// labels attested in the analysis plus a catch-all "other".
struct RelationInventory {
  std::vector<std::string> labels;

  static RelationInventory defaults();
  bool contains(const std::string& label) const;
  // joint-list -> joint etc.: collapses a subtype to its top-level label
  // when the prefix before '-' is in the inventory; otherwise returns the
  // input unchanged.
  std::string collapse(const std::string& label) const;
};

// A fully cross-linked multilayer document. Immutable after construction;
// safe to share across threads.
struct Document {
  std::string doc_id;
  std::string genre;
  std::string partition;  // train | dev | test | ood
  std::vector<Token> tokens;
  std::vector<Sentence> sentences;
  std::vector<Mention> mentions;
  std::vector<EntityCluster> clusters;
  std::vector<Edu> edus;
  std::vector<SummaryAlignment> summaries;

  bool operator==(const Document&) const = default;

  int token_count() const { return static_cast<int>(tokens.size()); }

  // Lookups below expect ids that exist; parse_document guarantees this
  // for documents it returns.
  const Token& token(int id) const;
  bool has_token(int id) const;
  const Sentence& sentence_of_token(int token_id) const;
  // -1 when the token is not covered by any sentence span (invalid data).
  int sentence_index_of_token(int token_id) const;
  const Mention& mention(const std::string& mention_id) const;
  const EntityCluster& cluster(const std::string& entity_id) const;
  const Edu* edu_of_token(int token_id) const;  // nullptr if uncovered

  // Mentions of one sentence, in document order.
  std::vector<const Mention*> mentions_in_sentence(int sentence_index) const;

  void rebuild_index();

 private:
  std::unordered_map<int, std::size_t> token_by_id_;
  std::unordered_map<std::string, std::size_t> mention_by_id_;
  std::unordered_map<std::string, std::size_t> cluster_by_id_;
  std::vector<int> sentence_of_token_;  // token id -> sentence index
  std::vector<int> edu_of_token_;       // token id -> edu index or -1
};

}  // namespace salience
