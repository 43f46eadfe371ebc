#include "salience/corpus.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "json.hpp"
#include "salience/errors.hpp"

namespace salience {

bool SummaryAlignment::mentions(const std::string& entity_id) const {
  return std::find(entities.begin(), entities.end(), entity_id) !=
         entities.end();
}

RelationInventory RelationInventory::defaults() {
  return RelationInventory{{"joint", "elaboration", "explanation",
                            "adversative", "evaluation", "attribution",
                            "organization", "context", "topic", "purpose",
                            "other"}};
}

bool RelationInventory::contains(const std::string& label) const {
  return std::find(labels.begin(), labels.end(), label) != labels.end();
}

std::string RelationInventory::collapse(const std::string& label) const {
  if (contains(label)) return label;
  const auto dash = label.find('-');
  if (dash != std::string::npos) {
    std::string prefix = label.substr(0, dash);
    if (contains(prefix)) return prefix;
  }
  return label;
}

const Token& Document::token(int id) const {
  return tokens[token_by_id_.at(id)];
}

bool Document::has_token(int id) const { return token_by_id_.count(id) > 0; }

const Sentence& Document::sentence_of_token(int token_id) const {
  return sentences[sentence_of_token_[token_by_id_.at(token_id)]];
}

int Document::sentence_index_of_token(int token_id) const {
  auto it = token_by_id_.find(token_id);
  if (it == token_by_id_.end()) return -1;
  return sentence_of_token_[it->second];
}

const Mention& Document::mention(const std::string& mention_id) const {
  return mentions[mention_by_id_.at(mention_id)];
}

const EntityCluster& Document::cluster(const std::string& entity_id) const {
  return clusters[cluster_by_id_.at(entity_id)];
}

const Edu* Document::edu_of_token(int token_id) const {
  const int idx = edu_of_token_[token_by_id_.at(token_id)];
  return idx < 0 ? nullptr : &edus[idx];
}

std::vector<const Mention*> Document::mentions_in_sentence(
    int sentence_index) const {
  std::vector<const Mention*> out;
  for (const auto& m : mentions) {
    if (has_token(m.start) &&
        sentence_of_token(m.start).index == sentence_index) {
      out.push_back(&m);
    }
  }
  return out;
}

void Document::rebuild_index() {
  token_by_id_.clear();
  mention_by_id_.clear();
  cluster_by_id_.clear();
  sentence_of_token_.assign(tokens.size(), -1);
  edu_of_token_.assign(tokens.size(), -1);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    token_by_id_.emplace(tokens[i].id, i);
  }
  for (std::size_t i = 0; i < mentions.size(); ++i) {
    mention_by_id_.emplace(mentions[i].mention_id, i);
  }
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    cluster_by_id_.emplace(clusters[i].entity_id, i);
  }
  for (const auto& s : sentences) {
    for (int id = s.first_token; id <= s.last_token; ++id) {
      auto it = token_by_id_.find(id);
      if (it != token_by_id_.end()) sentence_of_token_[it->second] = s.index;
    }
  }
  for (std::size_t e = 0; e < edus.size(); ++e) {
    for (int id = edus[e].start; id <= edus[e].end; ++id) {
      auto it = token_by_id_.find(id);
      if (it != token_by_id_.end())
        edu_of_token_[it->second] = static_cast<int>(e);
    }
  }
}

}  // namespace salience

namespace salience::corpus {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ParseError(where + ": " + what);
}

void require_keys(const json& obj, const std::string& where,
                  const std::set<std::string>& allowed) {
  if (!obj.is_object()) fail(where, "expected a JSON object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) fail(where, "unknown key \"" + key + "\"");
  }
  for (const auto& key : allowed) {
    if (!obj.contains(key)) fail(where, "missing key \"" + key + "\"");
  }
}

std::string get_string(const json& obj, const std::string& where,
                       const std::string& key) {
  const auto& v = obj.at(key);
  if (!v.is_string()) fail(where, "field \"" + key + "\" must be a string");
  return v.get<std::string>();
}

int get_int(const json& obj, const std::string& where, const std::string& key) {
  const auto& v = obj.at(key);
  if (!v.is_number_integer())
    fail(where, "field \"" + key + "\" must be an integer");
  return v.get<int>();
}

bool get_bool(const json& obj, const std::string& where,
              const std::string& key) {
  const auto& v = obj.at(key);
  if (!v.is_boolean()) fail(where, "field \"" + key + "\" must be a boolean");
  return v.get<bool>();
}

}  // namespace

Document parse_document(const std::string& json_text,
                        const ParseOptions& opts) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("syntax error: ") + e.what());
  }

  require_keys(root, "document",
               {"doc_id", "genre", "partition", "sentences", "mentions",
                "entities", "edus", "summaries"});

  Document doc;
  doc.doc_id = get_string(root, "document", "doc_id");
  doc.genre = get_string(root, "document", "genre");
  doc.partition = get_string(root, "document", "partition");

  const auto& sentences = root.at("sentences");
  if (!sentences.is_array()) fail(doc.doc_id, "\"sentences\" must be an array");
  std::unordered_set<int> token_ids;
  int sent_index = 0;
  for (const auto& sent : sentences) {
    if (!sent.is_array() || sent.empty())
      fail(doc.doc_id, "each sentence must be a non-empty token array");
    Sentence s;
    s.index = sent_index++;
    for (const auto& tok : sent) {
      const std::string where =
          doc.doc_id + " sentence " + std::to_string(s.index);
      require_keys(tok, where, {"id", "form", "upos", "head", "deprel"});
      Token t;
      t.id = get_int(tok, where, "id");
      t.form = get_string(tok, where, "form");
      t.upos = get_string(tok, where, "upos");
      t.head = get_int(tok, where, "head");
      t.deprel = get_string(tok, where, "deprel");
      if (t.id <= 0) fail(where, "token id must be positive");
      if (!token_ids.insert(t.id).second)
        fail(where, "duplicate token id " + std::to_string(t.id));
      doc.tokens.push_back(std::move(t));
    }
    s.first_token = sent.front().at("id").get<int>();
    s.last_token = sent.back().at("id").get<int>();
    doc.sentences.push_back(s);
  }
  if (doc.tokens.empty()) fail(doc.doc_id, "document has no tokens");
  for (const auto& t : doc.tokens) {
    if (t.head != 0 && !token_ids.count(t.head))
      fail(doc.doc_id, "dangling reference: token " + std::to_string(t.id) +
                           " head " + std::to_string(t.head));
  }

  const auto& mentions = root.at("mentions");
  if (!mentions.is_array()) fail(doc.doc_id, "\"mentions\" must be an array");
  std::unordered_set<std::string> mention_ids;
  for (const auto& m : mentions) {
    const std::string where = doc.doc_id + " mention";
    require_keys(m, where,
                 {"mention_id", "entity_id", "start", "end", "head",
                  "entity_type", "definite", "singular", "info_status"});
    Mention mm;
    mm.mention_id = get_string(m, where, "mention_id");
    mm.entity_id = get_string(m, where, "entity_id");
    mm.start = get_int(m, where, "start");
    mm.end = get_int(m, where, "end");
    mm.head = get_int(m, where, "head");
    mm.entity_type = get_string(m, where, "entity_type");
    mm.definite = get_bool(m, where, "definite");
    mm.singular = get_bool(m, where, "singular");
    mm.info_status = get_string(m, where, "info_status");
    if (!mention_ids.insert(mm.mention_id).second)
      fail(where, "duplicate mention id \"" + mm.mention_id + "\"");
    for (int id : {mm.start, mm.end, mm.head}) {
      if (!token_ids.count(id))
        fail(where + " \"" + mm.mention_id + "\"",
             "dangling reference: token " + std::to_string(id));
    }
    doc.mentions.push_back(std::move(mm));
  }

  const auto& entities = root.at("entities");
  if (!entities.is_array()) fail(doc.doc_id, "\"entities\" must be an array");
  std::unordered_set<std::string> entity_ids;
  for (const auto& c : entities) {
    const std::string where = doc.doc_id + " entity";
    require_keys(c, where, {"entity_id", "mentions"});
    EntityCluster cluster;
    cluster.entity_id = get_string(c, where, "entity_id");
    if (!entity_ids.insert(cluster.entity_id).second)
      fail(where, "duplicate entity id \"" + cluster.entity_id + "\"");
    const auto& mlist = c.at("mentions");
    if (!mlist.is_array())
      fail(where, "field \"mentions\" must be an array of mention ids");
    for (const auto& mid : mlist) {
      if (!mid.is_string()) fail(where, "mention ids must be strings");
      const std::string id = mid.get<std::string>();
      if (!mention_ids.count(id))
        fail(where + " \"" + cluster.entity_id + "\"",
             "dangling reference: mention \"" + id + "\"");
      cluster.mention_ids.push_back(id);
    }
    doc.clusters.push_back(std::move(cluster));
  }
  for (const auto& m : doc.mentions) {
    if (!entity_ids.count(m.entity_id))
      fail(doc.doc_id + " mention \"" + m.mention_id + "\"",
           "dangling reference: entity \"" + m.entity_id + "\"");
  }

  const auto& edus = root.at("edus");
  if (!edus.is_array()) fail(doc.doc_id, "\"edus\" must be an array");
  std::unordered_set<int> edu_ids;
  for (const auto& e : edus) {
    const std::string where = doc.doc_id + " edu";
    require_keys(e, where, {"id", "start", "end", "relation_coarse",
                            "relation_fine", "parent", "explicit_dm"});
    Edu edu;
    edu.id = get_int(e, where, "id");
    edu.start = get_int(e, where, "start");
    edu.end = get_int(e, where, "end");
    edu.relation_fine = get_string(e, where, "relation_fine");
    edu.relation_coarse =
        opts.relations.collapse(get_string(e, where, "relation_coarse"));
    edu.explicit_dm = get_bool(e, where, "explicit_dm");
    const auto& parent = e.at("parent");
    if (parent.is_null()) {
      edu.parent = std::nullopt;
    } else if (parent.is_number_integer()) {
      edu.parent = parent.get<int>();
    } else {
      fail(where, "field \"parent\" must be an integer or null");
    }
    if (edu.id <= 0) fail(where, "edu id must be positive");
    if (!edu_ids.insert(edu.id).second)
      fail(where, "duplicate edu id " + std::to_string(edu.id));
    doc.edus.push_back(std::move(edu));
  }
  for (const auto& e : doc.edus) {
    if (e.parent && !edu_ids.count(*e.parent))
      fail(doc.doc_id + " edu " + std::to_string(e.id),
           "dangling reference: parent edu " + std::to_string(*e.parent));
  }

  const auto& summaries = root.at("summaries");
  if (!summaries.is_array()) fail(doc.doc_id, "\"summaries\" must be an array");
  std::unordered_set<std::string> summary_ids;
  for (const auto& s : summaries) {
    const std::string where = doc.doc_id + " summary";
    require_keys(s, where, {"summary_id", "entities"});
    SummaryAlignment sa;
    sa.summary_id = get_string(s, where, "summary_id");
    if (!summary_ids.insert(sa.summary_id).second)
      fail(where, "duplicate summary id \"" + sa.summary_id + "\"");
    const auto& ents = s.at("entities");
    if (!ents.is_array())
      fail(where, "field \"entities\" must be an array of entity ids");
    std::unordered_set<std::string> seen;
    for (const auto& eid : ents) {
      if (!eid.is_string()) fail(where, "entity ids must be strings");
      const std::string id = eid.get<std::string>();
      if (!entity_ids.count(id))
        fail(where + " \"" + sa.summary_id + "\"",
             "dangling reference: entity \"" + id + "\"");
      if (seen.insert(id).second) sa.entities.push_back(id);
    }
    doc.summaries.push_back(std::move(sa));
  }

  doc.rebuild_index();
  return doc;
}

Document parse_document_file(const std::string& path,
                             const ParseOptions& opts) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_document(buf.str(), opts);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

std::string serialize_document(const Document& doc) {
  json root;
  root["doc_id"] = doc.doc_id;
  root["genre"] = doc.genre;
  root["partition"] = doc.partition;
  auto sentences = json::array();
  for (const auto& s : doc.sentences) {
    auto sent = json::array();
    for (const auto& t : doc.tokens) {
      if (t.id < s.first_token || t.id > s.last_token) continue;
      sent.push_back({{"id", t.id},
                      {"form", t.form},
                      {"upos", t.upos},
                      {"head", t.head},
                      {"deprel", t.deprel}});
    }
    sentences.push_back(std::move(sent));
  }
  root["sentences"] = std::move(sentences);
  auto mentions = json::array();
  for (const auto& m : doc.mentions) {
    mentions.push_back({{"mention_id", m.mention_id},
                        {"entity_id", m.entity_id},
                        {"start", m.start},
                        {"end", m.end},
                        {"head", m.head},
                        {"entity_type", m.entity_type},
                        {"definite", m.definite},
                        {"singular", m.singular},
                        {"info_status", m.info_status}});
  }
  root["mentions"] = std::move(mentions);
  auto entities = json::array();
  for (const auto& c : doc.clusters) {
    entities.push_back(
        {{"entity_id", c.entity_id}, {"mentions", c.mention_ids}});
  }
  root["entities"] = std::move(entities);
  auto edus = json::array();
  for (const auto& e : doc.edus) {
    json parent;
    if (e.parent) parent = *e.parent;
    edus.push_back({{"id", e.id},
                    {"start", e.start},
                    {"end", e.end},
                    {"relation_coarse", e.relation_coarse},
                    {"relation_fine", e.relation_fine},
                    {"parent", parent},
                    {"explicit_dm", e.explicit_dm}});
  }
  root["edus"] = std::move(edus);
  auto summaries = json::array();
  for (const auto& s : doc.summaries) {
    summaries.push_back(
        {{"summary_id", s.summary_id}, {"entities", s.entities}});
  }
  root["summaries"] = std::move(summaries);
  return root.dump(2) + "\n";
}

namespace {

void check_span_partition(const std::string& kind, const Document& doc,
                          const std::vector<std::pair<std::string, std::pair<int, int>>>& spans,
                          std::vector<Violation>& out) {
  // Spans must cover token ids [min, max] in order, no gaps, no overlap.
  if (spans.empty()) {
    out.push_back({kind + "_partition", doc.doc_id, "no spans present"});
    return;
  }
  long total = 0;
  for (std::size_t i = 0; i < spans.size(); ++i) {
    const auto& [id, span] = spans[i];
    if (span.second < span.first) {
      out.push_back({kind + "_partition", id, "empty or reversed span"});
      return;
    }
    total += span.second - span.first + 1;
    if (i + 1 < spans.size()) {
      const auto& [next_id, next] = spans[i + 1];
      if (next.first != span.second + 1) {
        out.push_back({kind + "_partition", id + "," + next_id,
                       next.first <= span.second ? "spans overlap"
                                                 : "gap between spans"});
      }
    }
  }
  if (spans.front().second.first != doc.tokens.front().id ||
      spans.back().second.second != doc.tokens.back().id ||
      total != doc.token_count()) {
    out.push_back({kind + "_partition", doc.doc_id,
                   "span lengths do not sum to token count"});
  }
}

}  // namespace

std::vector<Violation> validate_document(const Document& doc,
                                         const ParseOptions& opts) {
  std::vector<Violation> out;
  if (doc.tokens.empty()) {
    out.push_back({"token_count", doc.doc_id, "document has no tokens"});
    return out;
  }

  if (std::find(kPartitions.begin(), kPartitions.end(), doc.partition) ==
      kPartitions.end()) {
    out.push_back({"partition_value", doc.doc_id,
                   "unknown partition \"" + doc.partition + "\""});
  }

  // Sentence spans partition the tokens in order.
  {
    std::vector<std::pair<std::string, std::pair<int, int>>> spans;
    for (const auto& s : doc.sentences) {
      spans.push_back({"sentence " + std::to_string(s.index),
                       {s.first_token, s.last_token}});
    }
    check_span_partition("sentence", doc, spans, out);
  }

  // Token heads stay inside their own sentence.
  for (const auto& t : doc.tokens) {
    if (t.head == 0) continue;
    const int si = doc.sentence_index_of_token(t.id);
    if (si < 0) continue;  // already reported by the partition check
    const auto& s = doc.sentences[si];
    if (t.head < s.first_token || t.head > s.last_token) {
      out.push_back({"head_in_sentence", std::to_string(t.id),
                     "head " + std::to_string(t.head) +
                         " outside sentence " + std::to_string(s.index)});
    }
  }

  for (const auto& m : doc.mentions) {
    if (m.head < m.start || m.head > m.end) {
      out.push_back({"mention_head_in_span", m.mention_id,
                     "head_token outside token_span"});
    }
    const int s0 = doc.sentence_index_of_token(m.start);
    const int s1 = doc.sentence_index_of_token(m.end);
    if (s0 != s1 || s0 < 0 || m.end < m.start) {
      out.push_back({"mention_span_in_sentence", m.mention_id,
                     "span crosses sentence boundary"});
    }
    if (std::find(kEntityTypes.begin(), kEntityTypes.end(), m.entity_type) ==
        kEntityTypes.end()) {
      out.push_back({"entity_type_value", m.mention_id,
                     "unknown entity type \"" + m.entity_type + "\""});
    }
    if (std::find(kInfoStatuses.begin(), kInfoStatuses.end(),
                  m.info_status) == kInfoStatuses.end()) {
      out.push_back({"info_status_value", m.mention_id,
                     "unknown info status \"" + m.info_status + "\""});
    }
  }

  // Clusters: non-empty, document order, every mention belongs to exactly
  // one cluster and agrees on its entity id.
  std::unordered_map<std::string, std::string> owner;
  for (const auto& c : doc.clusters) {
    if (c.mention_ids.empty()) {
      out.push_back({"cluster_nonempty", c.entity_id, "cluster has no mentions"});
      continue;
    }
    int prev_start = -1;
    for (const auto& mid : c.mention_ids) {
      const auto& m = doc.mention(mid);
      if (m.entity_id != c.entity_id) {
        out.push_back({"cluster_membership", mid,
                       "mention entity \"" + m.entity_id +
                           "\" disagrees with cluster \"" + c.entity_id +
                           "\""});
      }
      if (m.start < prev_start) {
        out.push_back({"cluster_order", c.entity_id,
                       "mentions not sorted by span start"});
      }
      prev_start = std::max(prev_start, m.start);
      auto [it, inserted] = owner.emplace(mid, c.entity_id);
      if (!inserted) {
        out.push_back({"cluster_membership", mid,
                       "mention listed in clusters \"" + it->second +
                           "\" and \"" + c.entity_id + "\""});
      }
    }
    if (c.salience >= 0 &&
        c.salience > static_cast<int>(doc.summaries.size())) {
      out.push_back({"salience_bound", c.entity_id,
                     "salience exceeds number of summaries"});
    }
  }
  for (const auto& m : doc.mentions) {
    if (!owner.count(m.mention_id)) {
      out.push_back({"cluster_membership", m.mention_id,
                     "mention not listed in any cluster"});
    }
  }

  // EDU spans partition the document; parents form a forest.
  {
    std::vector<const Edu*> sorted;
    for (const auto& e : doc.edus) sorted.push_back(&e);
    std::sort(sorted.begin(), sorted.end(),
              [](const Edu* a, const Edu* b) { return a->start < b->start; });
    std::vector<std::pair<std::string, std::pair<int, int>>> spans;
    for (const Edu* e : sorted) {
      spans.push_back({"edu " + std::to_string(e->id), {e->start, e->end}});
    }
    check_span_partition("edu", doc, spans, out);
  }
  {
    std::unordered_map<int, const Edu*> by_id;
    for (const auto& e : doc.edus) by_id.emplace(e.id, &e);
    bool any_root = false;
    for (const auto& e : doc.edus) {
      if (!e.parent) {
        any_root = true;
        continue;
      }
      // Walk to a root; a repeat visit means a cycle.
      std::unordered_set<int> seen{e.id};
      const Edu* cur = &e;
      while (cur->parent) {
        cur = by_id.at(*cur->parent);
        if (!seen.insert(cur->id).second) {
          out.push_back({"edu_forest", std::to_string(e.id),
                         "cycle in parent edges"});
          break;
        }
      }
    }
    if (!doc.edus.empty() && !any_root) {
      out.push_back({"edu_forest", doc.doc_id, "no root edu"});
    }
    for (const auto& e : doc.edus) {
      if (e.relation_coarse == kNoRelation && e.explicit_dm) {
        out.push_back({"explicit_dm_requires_relation", std::to_string(e.id),
                       "explicit_dm set on a unit with no relation"});
      }
      if (e.relation_coarse != kNoRelation &&
          !opts.relations.contains(e.relation_coarse)) {
        out.push_back({"relation_inventory", std::to_string(e.id),
                       "relation \"" + e.relation_coarse +
                           "\" not in inventory"});
      }
    }
  }

  return out;
}

Document assign_salience(Document doc) {
  for (auto& c : doc.clusters) {
    int count = 0;
    for (const auto& s : doc.summaries) {
      if (s.mentions(c.entity_id)) ++count;
    }
    c.salience = count;
  }
  return doc;
}

std::vector<Document> load_corpus(const std::string& dir,
                                  std::vector<Violation>* violations,
                                  const ParseOptions& opts) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw DataError(dir + ": not a directory");
  std::vector<std::string> paths;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".json") paths.push_back(entry.path());
  }
  std::sort(paths.begin(), paths.end());
  std::vector<Document> docs;
  for (const auto& path : paths) {
    Document doc = parse_document_file(path, opts);
    if (violations) {
      auto v = validate_document(doc, opts);
      violations->insert(violations->end(), v.begin(), v.end());
    }
    docs.push_back(assign_salience(std::move(doc)));
  }
  return docs;
}

}  // namespace salience::corpus
