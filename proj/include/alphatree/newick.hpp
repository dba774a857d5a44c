#pragma once

// Newick ingestion and serialization, plus the corpus preprocessing pipeline:
// binary filter, split at the root, small-tree discard.
//
// Accepted grammar (whitespace allowed between tokens):
//
//   statement := subtree [':' number] ';'
//   subtree   := '(' subtree (',' subtree)* ')' [name] [':' number]
//              | name [':' number]
//   name      := unquoted | quoted
//   unquoted  := one or more characters other than ( ) [ ] ' : ; , and whitespace;
//                '_' reads as a space
//   quoted    := "'" ... "'" with '' standing for a literal quote
//
// Bracketed comments [...] are skipped. Branch lengths and internal node names
// are accepted and discarded. Leaves may be unnamed; named taxa must be unique.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "alphatree/tree.hpp"

namespace alphatree {

class NewickError : public std::runtime_error {
 public:
  NewickError(const std::string& message, std::size_t offset);
  std::size_t offset() const { return offset_; }
  const std::string& detail() const { return detail_; }

 private:
  std::string detail_;
  std::size_t offset_;
};

struct ParsedTree {
  /// Set iff every internal node has exactly two children. Leaf labels are
  /// 1..n in reading order.
  std::optional<Tree> tree;
  /// taxa[label - 1] is the name of leaf `label` (empty for unnamed leaves).
  std::vector<std::string> taxa;
  std::size_t leaf_count = 0;
  bool multifurcating = false;  // some internal node has more than two children
  bool has_unary = false;       // some internal node has a single child
  std::string source;
  std::optional<std::string> method_tag;
};

ParsedTree parse_newick(std::string_view text);

struct NewickParseOutcome {
  std::optional<ParsedTree> tree;
  std::optional<NewickError> error;
  std::size_t index = 0;  // statement index within the text
};

/// Parses every ';'-terminated statement in `text`. A malformed statement is
/// reported without stopping the others.
std::vector<NewickParseOutcome> parse_newick_all(std::string_view text, const std::string& source);

bool is_binary(const ParsedTree& t);

/// Canonical Newick without branch lengths. Children are ordered by shape
/// first and by taxon names second, so the output depends only on the thin
/// cladogram and its names.
std::string serialize_newick(const ParsedTree& t);

/// Wraps a labeled tree with generated taxon names (T1, T2, ... by label), or
/// names from `taxa` when given.
ParsedTree make_parsed_tree(const Tree& t, std::vector<std::string> taxa = {});

/// Splits a binary tree at its root into two trees, each relabeled 1..k in
/// reading order. Subtrees with `discard_at_most` leaves or fewer are dropped.
std::vector<ParsedTree> split_at_root(const ParsedTree& t, std::size_t discard_at_most = 3);

struct CorpusOptions {
  std::size_t min_leaves = 10;
  bool apply_root_split = true;
  /// Sidecar CSV with header `filename,method`. When unset, a file named
  /// methods.csv next to the trees is used if present.
  std::optional<std::filesystem::path> metadata;
};

struct CorpusIssue {
  std::string source;
  std::string message;
  std::optional<std::size_t> offset;
};

struct CorpusReport {
  std::size_t total_read = 0;           // source trees parsed successfully
  std::size_t discarded_nonbinary = 0;  // source trees
  std::size_t discarded_small = 0;      // source trees contributing no analysis tree
  std::size_t retained = 0;             // source trees contributing >= 1 analysis tree
  std::vector<ParsedTree> trees;        // analysis trees
  std::vector<CorpusIssue> errors;      // unreadable files and parse failures
};

/// Loads a Newick file or every tree file (.nwk .newick .tre .tree .trees
/// .txt) in a directory, in path order. Throws std::filesystem::filesystem_error
/// when `path` does not exist.
CorpusReport load_corpus(const std::filesystem::path& path, const CorpusOptions& options = {});

/// Applies the pipeline to trees already in memory.
CorpusReport build_corpus(std::vector<ParsedTree> sources, const CorpusOptions& options = {});

std::string corpus_report_json(const CorpusReport& report, bool include_trees = true);

}  // namespace alphatree
