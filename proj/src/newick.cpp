#include "alphatree/newick.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

namespace alphatree {

NewickError::NewickError(const std::string& message, std::size_t offset)
    : std::runtime_error(message + " at offset " + std::to_string(offset)),
      detail_(message),
      offset_(offset) {}

namespace {

struct RawNode {
  std::vector<RawNode> children;
  std::string name;
  std::size_t offset = 0;
};

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  RawNode statement() {
    RawNode root = subtree();
    skip_space();
    if (at_end()) throw NewickError("missing ';'", pos_);
    if (peek() == ')') throw NewickError("unbalanced parentheses: unexpected ')'", pos_);
    if (peek() != ';') throw NewickError(std::string("unexpected character '") + peek() + "'", pos_);
    ++pos_;
    skip_space();
    if (!at_end()) throw NewickError("trailing characters after ';'", pos_);
    return root;
  }

 private:
  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }

  void skip_space() {
    while (!at_end()) {
      const char c = peek();
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else if (c == '[') {
        const std::size_t start = pos_;
        const std::size_t close = text_.find(']', pos_);
        if (close == std::string_view::npos) throw NewickError("unterminated comment", start);
        pos_ = close + 1;
      } else {
        break;
      }
    }
  }

  static bool is_delimiter(char c) {
    return c == '(' || c == ')' || c == '[' || c == ']' || c == '\'' || c == ':' || c == ';' ||
           c == ',' || std::isspace(static_cast<unsigned char>(c));
  }

  std::string name() {
    skip_space();
    if (at_end()) return {};
    if (peek() == '\'') {
      const std::size_t start = pos_++;
      std::string out;
      while (true) {
        if (at_end()) throw NewickError("unterminated quoted name", start);
        const char c = text_[pos_++];
        if (c == '\'') {
          if (!at_end() && peek() == '\'') {
            out += '\'';
            ++pos_;
          } else {
            break;
          }
        } else {
          out += c;
        }
      }
      return out;
    }
    std::string out;
    while (!at_end() && !is_delimiter(peek())) {
      out += peek() == '_' ? ' ' : peek();
      ++pos_;
    }
    return out;
  }

  void branch_length() {
    skip_space();
    if (at_end() || peek() != ':') return;
    ++pos_;
    skip_space();
    const std::size_t start = pos_;
    while (!at_end() && !is_delimiter(peek())) ++pos_;
    double value = 0;
    const auto token = text_.substr(start, pos_ - start);
    const auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (token.empty() || ec != std::errc() || end != token.data() + token.size()) {
      throw NewickError("invalid branch length", start);
    }
  }

  RawNode subtree() {
    skip_space();
    RawNode node;
    node.offset = pos_;
    if (!at_end() && peek() == '(') {
      const std::size_t open = pos_++;
      skip_space();
      if (!at_end() && peek() == ')') throw NewickError("empty subtree '()'", open);
      while (true) {
        node.children.push_back(subtree());
        skip_space();
        if (at_end()) throw NewickError("unbalanced parentheses: missing ')'", pos_);
        if (peek() == ',') {
          ++pos_;
          continue;
        }
        if (peek() == ')') {
          ++pos_;
          break;
        }
        throw NewickError("unbalanced parentheses: expected ',' or ')'", pos_);
      }
      name();  // internal node label, discarded
    } else {
      node.offset = pos_;
      node.name = name();
    }
    branch_length();
    return node;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

struct Builder {
  ParsedTree parsed;
  std::set<std::string> seen;

  // Returns the binary Tree for `node` when no non-binary vertex was found.
  std::optional<Tree> build(const RawNode& node) {
    if (node.children.empty()) {
      if (!node.name.empty() && !seen.insert(node.name).second) {
        throw NewickError("duplicate taxon name '" + node.name + "'", node.offset);
      }
      parsed.taxa.push_back(node.name);
      return Tree::leaf(static_cast<Label>(parsed.taxa.size()));
    }
    if (node.children.size() > 2) parsed.multifurcating = true;
    if (node.children.size() == 1) parsed.has_unary = true;
    std::vector<std::optional<Tree>> kids;
    for (const auto& child : node.children) kids.push_back(build(child));
    if (node.children.size() != 2 || !kids[0] || !kids[1]) return std::nullopt;
    return Tree::join(*kids[0], *kids[1]);
  }
};

std::string quote_name(const std::string& name) {
  const bool needs_quotes =
      std::any_of(name.begin(), name.end(), [](char c) {
        return c == '(' || c == ')' || c == '[' || c == ']' || c == '\'' || c == ':' || c == ';' ||
               c == ',' || c == '_' || (std::isspace(static_cast<unsigned char>(c)) && c != ' ');
      });
  if (!needs_quotes) {
    std::string out = name;
    std::replace(out.begin(), out.end(), ' ', '_');
    return out;
  }
  std::string out = "'";
  for (char c : name) {
    if (c == '\'') out += '\'';
    out += c;
  }
  out += '\'';
  return out;
}

void emit(const Tree& t, const std::vector<std::string>& names, std::string& out) {
  if (t.is_leaf()) {
    out += quote_name(names[*t.label() - 1]);
    return;
  }
  out += '(';
  emit(t.left(), names, out);
  out += ',';
  emit(t.right(), names, out);
  out += ')';
}

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::map<std::string, std::string> read_metadata(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::filesystem::filesystem_error("cannot read metadata", path, std::make_error_code(std::errc::io_error));
  std::map<std::string, std::string> methods;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (header) {
      header = false;
      if (trim(line.substr(0, comma)) == "filename") continue;
    }
    if (comma == std::string::npos) continue;
    methods[trim(line.substr(0, comma))] = trim(line.substr(comma + 1));
  }
  return methods;
}

bool is_tree_file(const std::filesystem::path& p) {
  static const std::set<std::string> extensions{".nwk", ".newick", ".tre", ".tree", ".trees", ".txt"};
  return extensions.count(p.extension().string()) > 0;
}

}  // namespace

ParsedTree parse_newick(std::string_view text) {
  Parser parser(text);
  const RawNode root = parser.statement();
  Builder builder;
  std::optional<Tree> tree = builder.build(root);
  ParsedTree parsed = std::move(builder.parsed);
  parsed.leaf_count = parsed.taxa.size();
  parsed.tree = std::move(tree);
  return parsed;
}

std::vector<NewickParseOutcome> parse_newick_all(std::string_view text, const std::string& source) {
  std::vector<NewickParseOutcome> out;
  std::size_t start = 0;
  std::size_t pos = 0;
  bool in_quote = false;
  bool in_comment = false;
  auto flush = [&](std::size_t end) {
    std::string_view statement = text.substr(start, end - start);
    const bool blank = std::all_of(statement.begin(), statement.end(),
                                   [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
    start = end;
    if (blank) return;
    NewickParseOutcome outcome;
    outcome.index = out.size();
    try {
      ParsedTree t = parse_newick(statement);
      t.source = source + "#" + std::to_string(outcome.index);
      outcome.tree = std::move(t);
    } catch (const NewickError& e) {
      outcome.error = e;
    }
    out.push_back(std::move(outcome));
  };
  for (; pos < text.size(); ++pos) {
    const char c = text[pos];
    if (in_quote) {
      if (c == '\'') in_quote = false;
    } else if (in_comment) {
      if (c == ']') in_comment = false;
    } else if (c == '\'') {
      in_quote = true;
    } else if (c == '[') {
      in_comment = true;
    } else if (c == ';') {
      flush(pos + 1);
    }
  }
  flush(text.size());
  return out;
}

bool is_binary(const ParsedTree& t) {
  return t.tree.has_value();
}

ParsedTree make_parsed_tree(const Tree& t, std::vector<std::string> taxa) {
  if (t.empty()) throw TreeError("cannot wrap an empty tree");
  ParsedTree parsed;
  parsed.tree = is_cladogram(t) ? t : relabel_preorder(t);
  parsed.leaf_count = t.leaf_count();
  if (taxa.empty()) {
    for (std::size_t i = 1; i <= parsed.leaf_count; ++i) taxa.push_back("T" + std::to_string(i));
  }
  if (taxa.size() != parsed.leaf_count) throw std::invalid_argument("taxa size does not match leaf count");
  parsed.taxa = std::move(taxa);
  return parsed;
}

std::string serialize_newick(const ParsedTree& t) {
  if (!t.tree) throw std::invalid_argument("serialize_newick requires a binary tree");
  if (t.tree->empty()) throw std::invalid_argument("serialize_newick of an empty tree");
  // Relabel leaves by name rank so that the canonical label tie-break follows names.
  const std::size_t n = t.taxa.size();
  std::vector<Label> order(n);
  std::iota(order.begin(), order.end(), Label{1});
  std::stable_sort(order.begin(), order.end(),
                   [&](Label a, Label b) { return t.taxa[a - 1] < t.taxa[b - 1]; });
  std::vector<Label> rank_of(n);
  std::vector<std::string> names_by_rank(n);
  for (std::size_t r = 0; r < n; ++r) {
    rank_of[order[r] - 1] = static_cast<Label>(r + 1);
    names_by_rank[r] = t.taxa[order[r] - 1];
  }
  const Tree ranked = canonical_form(permute_labels(*t.tree, rank_of));
  std::string out;
  emit(ranked, names_by_rank, out);
  out += ';';
  return out;
}

namespace {

ParsedTree extract(const ParsedTree& parent, const Tree& part, const std::string& suffix) {
  std::vector<std::string> taxa;
  for (Label l : part.labels()) taxa.push_back(parent.taxa[l - 1]);
  ParsedTree out;
  out.tree = relabel_preorder(part);
  out.taxa = std::move(taxa);
  out.leaf_count = part.leaf_count();
  out.source = parent.source + suffix;
  out.method_tag = parent.method_tag;
  return out;
}

}  // namespace

std::vector<ParsedTree> split_at_root(const ParsedTree& t, std::size_t discard_at_most) {
  if (!t.tree) throw std::invalid_argument("split_at_root requires a binary tree");
  std::vector<ParsedTree> out;
  if (!t.tree->is_internal()) return out;
  const Tree parts[2] = {t.tree->left(), t.tree->right()};
  const char* suffixes[2] = {"/root-left", "/root-right"};
  for (int i = 0; i < 2; ++i) {
    if (parts[i].leaf_count() > discard_at_most) out.push_back(extract(t, parts[i], suffixes[i]));
  }
  return out;
}

CorpusReport build_corpus(std::vector<ParsedTree> sources, const CorpusOptions& options) {
  CorpusReport report;
  for (auto& source : sources) {
    ++report.total_read;
    if (!is_binary(source)) {
      ++report.discarded_nonbinary;
      continue;
    }
    std::vector<ParsedTree> parts;
    if (options.apply_root_split) {
      parts = split_at_root(source);
    } else {
      parts.push_back(std::move(source));
    }
    std::size_t kept = 0;
    for (auto& p : parts) {
      if (p.leaf_count >= options.min_leaves) {
        report.trees.push_back(std::move(p));
        ++kept;
      }
    }
    if (kept == 0) {
      ++report.discarded_small;
    } else {
      ++report.retained;
    }
  }
  return report;
}

CorpusReport load_corpus(const std::filesystem::path& path, const CorpusOptions& options) {
  namespace fs = std::filesystem;
  if (!fs::exists(path)) {
    throw fs::filesystem_error("corpus path does not exist", path,
                               std::make_error_code(std::errc::no_such_file_or_directory));
  }
  std::vector<fs::path> files;
  fs::path metadata_path;
  if (fs::is_directory(path)) {
    for (const auto& entry : fs::directory_iterator(path)) {
      if (entry.is_regular_file() && is_tree_file(entry.path())) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    metadata_path = path / "methods.csv";
  } else {
    files.push_back(path);
    metadata_path = path.parent_path() / "methods.csv";
  }
  std::map<std::string, std::string> methods;
  if (options.metadata) {
    methods = read_metadata(*options.metadata);
  } else if (fs::exists(metadata_path)) {
    methods = read_metadata(metadata_path);
  }

  std::vector<ParsedTree> sources;
  std::vector<CorpusIssue> errors;
  for (const auto& file : files) {
    std::ifstream in(file, std::ios::binary);
    if (!in) {
      errors.push_back({file.string(), "unreadable file", std::nullopt});
      continue;
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    if (in.bad()) {
      errors.push_back({file.string(), "read error", std::nullopt});
      continue;
    }
    const std::string text = buffer.str();
    std::optional<std::string> method;
    if (auto it = methods.find(file.filename().string()); it != methods.end()) method = it->second;
    for (auto& outcome : parse_newick_all(text, file.string())) {
      if (outcome.error) {
        errors.push_back({file.string() + "#" + std::to_string(outcome.index), outcome.error->detail(),
                          outcome.error->offset()});
        continue;
      }
      outcome.tree->method_tag = method;
      sources.push_back(std::move(*outcome.tree));
    }
  }
  CorpusReport report = build_corpus(std::move(sources), options);
  report.errors = std::move(errors);
  return report;
}

std::string corpus_report_json(const CorpusReport& report, bool include_trees) {
  nlohmann::json j;
  j["total_read"] = report.total_read;
  j["discarded_nonbinary"] = report.discarded_nonbinary;
  j["discarded_small"] = report.discarded_small;
  j["retained"] = report.retained;
  j["analysis_trees"] = report.trees.size();
  j["errors"] = nlohmann::json::array();
  for (const auto& e : report.errors) {
    nlohmann::json err{{"source", e.source}, {"message", e.message}};
    err["offset"] = e.offset ? nlohmann::json(*e.offset) : nlohmann::json(nullptr);
    j["errors"].push_back(err);
  }
  if (include_trees) {
    j["trees"] = nlohmann::json::array();
    for (const auto& t : report.trees) {
      j["trees"].push_back({{"source", t.source},
                            {"n_leaves", t.leaf_count},
                            {"method", t.method_tag ? nlohmann::json(*t.method_tag) : nlohmann::json(nullptr)},
                            {"newick", serialize_newick(t)}});
    }
  }
  return j.dump(2);
}

}  // namespace alphatree
