#pragma once

#include <string>
#include <vector>

#include "salience/types.hpp"

namespace salience::corpus {

// One invariant failure found by validate_document. Violations are data,
// not errors: a document can carry any number of them.
struct Violation {
  std::string rule;     // short rule name, e.g. "edu_spans_partition"
  std::string subject;  // offending id(s)
  std::string detail;

  bool operator==(const Violation&) const = default;
};

struct ParseOptions {
  RelationInventory relations = RelationInventory::defaults();
};

// Parses one document in the JSON interchange format. Throws ParseError on
// syntax errors (with position), unknown keys, duplicate ids, and dangling
// references. Derived fields (salience) are left unset.
Document parse_document(const std::string& json_text,
                        const ParseOptions& opts = {});

// Reads and parses a file; file name is prefixed to error messages.
Document parse_document_file(const std::string& path,
                             const ParseOptions& opts = {});

// Serializes back to the interchange format (round-trips through
// parse_document structurally).
std::string serialize_document(const Document& doc);

// Checks every type invariant; returns an empty list iff the document is
// valid. Each violation names the rule and the offending id.
std::vector<Violation> validate_document(const Document& doc,
                                         const ParseOptions& opts = {});

// Sets cluster salience = number of summaries whose alignment mentions the
// entity. Returns a copy with salience populated.
Document assign_salience(Document doc);

// Loads, validates and salience-assigns every *.json document in a
// directory, sorted by file name. Validation violations are appended to
// `violations` (tagged with doc ids); documents with violations are still
// returned.
std::vector<Document> load_corpus(const std::string& dir,
                                  std::vector<Violation>* violations,
                                  const ParseOptions& opts = {});

}  // namespace salience::corpus
