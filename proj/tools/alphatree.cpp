// alphatree: sampling, probabilities, statistics, enumeration tables, corpus
// fitting, Monte-Carlo p-values and self-verification from the command line.
//
// Exit codes: 0 success, 1 verification failure, 2 usage or input error, 3 I/O error.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "alphatree/alpha_model.hpp"
#include "alphatree/enumeration.hpp"
#include "alphatree/inference.hpp"
#include "alphatree/newick.hpp"
#include "alphatree/parallel.hpp"
#include "alphatree/stats.hpp"
#include "alphatree/verify.hpp"

using namespace alphatree;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kVerifyFailed = 1, kUsage = 2, kIo = 3 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Global {
  std::uint64_t seed = 1;
  std::string format;  // empty: command default
  std::string output = "-";
  unsigned threads = 0;
};

std::string format_or(const Global& g, const std::string& fallback, std::initializer_list<const char*> allowed) {
  const std::string f = g.format.empty() ? fallback : g.format;
  for (const char* a : allowed)
    if (f == a) return f;
  throw UsageError("--format " + f + " is not supported by this command");
}

unsigned thread_count(const Global& g) { return g.threads == 0 ? default_thread_count() : g.threads; }

void emit(const Global& g, const std::string& text) {
  if (g.output == "-") {
    std::cout << text;
    std::cout.flush();
    if (!std::cout) throw IoError("cannot write to standard output");
    return;
  }
  std::ofstream out(g.output, std::ios::binary);
  if (!out) throw IoError("cannot open output file '" + g.output + "'");
  out << text;
  if (!out) throw IoError("cannot write output file '" + g.output + "'");
}

// Numbers in JSON are written as the shortest decimal that round-trips.
std::string dump(const json& j) { return j.dump(2) + "\n"; }

json number(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;  // JSON has no infinities; log-probability of an impossible shape
}

AlphaParam to_alpha(double a) {
  if (!(a >= 0.0 && a <= 1.0)) throw UsageError("--alpha must lie in [0, 1]");
  return AlphaParam(a);
}

// A tree argument is "-" (standard input), literal Newick text, or a file path.
std::string read_tree_text(const std::string& arg, std::string& source) {
  if (arg == "-") {
    source = "stdin";
    std::string text((std::istreambuf_iterator<char>(std::cin)), std::istreambuf_iterator<char>());
    if (std::cin.bad()) throw IoError("cannot read standard input");
    return text;
  }
  if (arg.find_first_of("(;") != std::string::npos) {
    source = "arg";
    return arg;
  }
  source = arg;
  std::ifstream in(arg, std::ios::binary);
  if (!in) throw IoError("cannot read '" + arg + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::vector<ParsedTree> read_trees(const std::string& arg, bool require_binary) {
  std::string source;
  const std::string text = read_tree_text(arg, source);
  std::vector<ParsedTree> trees;
  for (auto& outcome : parse_newick_all(text, source)) {
    if (outcome.error) {
      throw UsageError(source + "#" + std::to_string(outcome.index) + ": " + outcome.error->what());
    }
    if (require_binary && !is_binary(*outcome.tree)) {
      throw UsageError(outcome.tree->source + ": tree is not binary");
    }
    trees.push_back(std::move(*outcome.tree));
  }
  if (trees.empty()) throw UsageError("no tree found in " + source);
  return trees;
}

json one_or_many(std::vector<json> items) {
  if (items.size() == 1) return std::move(items[0]);
  return json(std::move(items));
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string full(double v) {
  if (!std::isfinite(v)) return v < 0 ? "-inf" : (v > 0 ? "inf" : "nan");
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// sample ---------------------------------------------------------------------

struct SampleArgs {
  std::size_t n = 0;
  double alpha = 0;
  std::size_t count = 1;
};

int cmd_sample(const Global& g, const SampleArgs& a) {
  if (a.n == 0) throw UsageError("--n must be at least 1");
  const AlphaParam alpha = to_alpha(a.alpha);
  const std::string format = format_or(g, "newick", {"newick", "json", "csv"});
  std::vector<std::string> trees(a.count);
  parallel_for(a.count, thread_count(g), [&](std::size_t i) {
    Rng rng = make_stream(g.seed, i);
    trees[i] = serialize_newick(make_parsed_tree(sample_cladogram(a.n, alpha, rng)));
  });
  std::ostringstream os;
  if (format == "newick") {
    os << "[alphatree sample seed=" << g.seed << " n=" << a.n << " alpha=" << full(a.alpha) << "]\n";
    for (const auto& t : trees) os << t << '\n';
  } else if (format == "csv") {
    os << "seed,index,n_leaves,alpha,newick\n";
    for (std::size_t i = 0; i < trees.size(); ++i)
      os << g.seed << ',' << i << ',' << a.n << ',' << full(a.alpha) << ',' << csv_field(trees[i]) << '\n';
  } else {
    emit(g, dump({{"seed", g.seed}, {"n_leaves", a.n}, {"alpha", a.alpha}, {"trees", trees}}));
    return kOk;
  }
  emit(g, os.str());
  return kOk;
}

// prob -----------------------------------------------------------------------

struct ProbArgs {
  std::string tree;
  double alpha = 0;
  bool cladogram = false;
};

int cmd_prob(const Global& g, const ProbArgs& a) {
  const AlphaParam alpha = to_alpha(a.alpha);
  const std::string format = format_or(g, "json", {"json", "csv"});
  std::vector<json> rows;
  std::ostringstream csv;
  csv << "tree_id,n_leaves,alpha,mode,log_probability,probability\n";
  for (const auto& p : read_trees(a.tree, true)) {
    const double lp = a.cladogram ? cladogram_log_prob(*p.tree, alpha) : shape_log_prob(*p.tree, alpha);
    const std::string mode = a.cladogram ? "cladogram" : "shape";
    rows.push_back({{"tree_id", p.source},
                    {"n_leaves", p.leaf_count},
                    {"alpha", a.alpha},
                    {"mode", mode},
                    {"log_probability", number(lp)},
                    {"probability", std::exp(lp)}});
    csv << csv_field(p.source) << ',' << p.leaf_count << ',' << full(a.alpha) << ',' << mode << ',' << full(lp)
        << ',' << full(std::exp(lp)) << '\n';
  }
  emit(g, format == "json" ? dump(one_or_many(std::move(rows))) : csv.str());
  return kOk;
}

// stats ----------------------------------------------------------------------

int cmd_stats(const Global& g, const std::string& tree) {
  const std::string format = format_or(g, "json", {"json", "csv"});
  std::vector<json> rows;
  std::ostringstream csv;
  csv << "tree_id,n_leaves,sackin,colless,cherries,max_depth,v_min_sum,T,K,L\n";
  for (const auto& p : read_trees(tree, true)) {
    if (p.leaf_count < 2) throw UsageError(p.source + ": statistics need at least 2 leaves");
    const StatRecord s = compute_stats(*p.tree);
    const TKL k = tkl(*p.tree);
    rows.push_back({{"tree_id", p.source},
                    {"n_leaves", s.n_leaves},
                    {"sackin", s.sackin},
                    {"colless", s.colless},
                    {"cherries", s.cherries},
                    {"max_depth", s.max_depth},
                    {"v_min_sum", s.v_min_sum},
                    {"T", k.T},
                    {"K", k.K},
                    {"L", k.L}});
    csv << csv_field(p.source) << ',' << s.n_leaves << ',' << s.sackin << ',' << s.colless << ',' << s.cherries
        << ',' << s.max_depth << ',' << s.v_min_sum << ',' << k.T << ',' << k.K << ',' << k.L << '\n';
  }
  emit(g, format == "json" ? dump(one_or_many(std::move(rows))) : csv.str());
  return kOk;
}

// enumerate ------------------------------------------------------------------

int cmd_enumerate(const Global& g, std::size_t n, const std::string& alpha_text) {
  RationalAlpha alpha(0, 1);
  try {
    alpha = RationalAlpha::parse(alpha_text);
  } catch (const std::exception& e) {
    throw UsageError(std::string("--alpha: ") + e.what());
  }
  if (n < 1 || n > kMaxDistributionLeaves)
    throw UsageError("--n must lie in [1, " + std::to_string(kMaxDistributionLeaves) + "]");
  const std::string format = format_or(g, "csv", {"csv", "json"});
  const ShapeTable table = shape_distribution(n, alpha);
  if (format == "csv") {
    emit(g, shape_table_csv(table));
    return kOk;
  }
  json rows = json::array();
  for (const auto& e : table.entries) {
    ParsedTree p = make_parsed_tree(e.shape, std::vector<std::string>(n));
    rows.push_back({{"newick", serialize_newick(p)},
                    {"probability", e.probability.get_str()},
                    {"probability_float", e.probability.get_d()},
                    {"cladogram_count", e.cladogram_count}});
  }
  emit(g, dump({{"n_leaves", n}, {"alpha", alpha.to_string()}, {"total", table.total_probability().get_str()}, {"shapes", rows}}));
  return kOk;
}

// fit ------------------------------------------------------------------------

struct FitArgs {
  std::string corpus;
  std::size_t grid = kDefaultGridPoints;
  bool no_refine = false;
  std::size_t min_leaves = 10;
  bool no_root_split = false;
  std::string metadata;
  bool pvalues = false;
  std::size_t sims = 1000;
  std::string summary_output;
  std::string qq_output;
  bool include_trees = false;
};

int cmd_fit(const Global& g, const FitArgs& a) {
  if (a.grid < 2) throw UsageError("--grid must be at least 2");
  const std::string format = format_or(g, "csv", {"csv", "json"});
  CorpusOptions copts;
  copts.min_leaves = a.min_leaves;
  copts.apply_root_split = !a.no_root_split;
  if (!a.metadata.empty()) copts.metadata = a.metadata;

  CorpusReport corpus;
  if (a.corpus == "-") {
    std::string source;
    const std::string text = read_tree_text("-", source);
    std::vector<ParsedTree> sources;
    for (auto& o : parse_newick_all(text, source)) {
      if (o.error) {
        corpus.errors.push_back({source + "#" + std::to_string(o.index), o.error->detail(), o.error->offset()});
      } else {
        sources.push_back(std::move(*o.tree));
      }
    }
    auto errors = std::move(corpus.errors);
    corpus = build_corpus(std::move(sources), copts);
    corpus.errors = std::move(errors);
  } else {
    try {
      corpus = load_corpus(a.corpus, copts);
    } catch (const std::filesystem::filesystem_error& e) {
      throw IoError(e.what());
    }
  }

  CorpusFitOptions fopts;
  fopts.grid_points = a.grid;
  fopts.refine = !a.no_refine;
  fopts.threads = thread_count(g);
  const CorpusFit fit = corpus_fit(corpus, fopts);

  std::vector<PValueReport> reports;
  if (a.pvalues) {
    if (a.sims < kMinRecommendedSimulations)
      std::cerr << "warning: --sims " << a.sims << " is below " << kMinRecommendedSimulations << "\n";
    for (std::size_t i = 0; i < fit.fits.size(); ++i) {
      const Tree& t = *corpus.trees[i].tree;
      reports.push_back(mc_pvalue(t, AlphaParam(fit.fits[i].fit.alpha_hat), all_statistics(), a.sims,
                                  splitmix64(g.seed + i), thread_count(g)));
    }
  }
  if (!a.summary_output.empty()) {
    Global s = g;
    s.output = a.summary_output;
    emit(s, summary_csv(fit.summary));
  }
  if (!a.qq_output.empty()) {
    if (!a.pvalues) throw UsageError("--qq requires --pvalues");
    Global s = g;
    s.output = a.qq_output;
    emit(s, qq_csv(qq_export(reports)));
  }
  if (format == "csv") {
    emit(g, corpus_fit_csv(fit, corpus.errors, reports));
    return kOk;
  }
  json j = json::parse(corpus_report_json(corpus, a.include_trees));
  j["seed"] = g.seed;
  j["grid"] = {{"points", a.grid}, {"includes_endpoints", true}, {"refine", !a.no_refine}};
  j["fits"] = json::array();
  for (std::size_t i = 0; i < fit.fits.size(); ++i) {
    const auto& f = fit.fits[i];
    json row{{"tree_id", f.tree_id},
             {"method", f.method ? json(*f.method) : json(nullptr)},
             {"n_leaves", f.fit.n_leaves},
             {"alpha_hat", f.fit.alpha_hat},
             {"loglik", number(f.fit.log_likelihood)},
             {"refined", f.fit.refined}};
    if (a.pvalues) {
      for (const auto& [s, test] : reports[i].tests) row["p_" + statistic_name(s)] = test.p_value;
    }
    j["fits"].push_back(row);
  }
  j["summary"] = json::array();
  for (const auto& r : fit.summary) {
    j["summary"].push_back({{"group", r.group}, {"count", r.count}, {"min", r.min}, {"q1", r.q1},
                            {"median", r.median}, {"mean", r.mean}, {"q3", r.q3}, {"max", r.max}});
  }
  if (a.pvalues) j["sims"] = a.sims;
  emit(g, dump(j));
  return kOk;
}

// pvalue ---------------------------------------------------------------------

struct PValueArgs {
  std::string tree;
  std::optional<double> alpha;
  std::size_t sims = 1000;
  std::vector<std::string> statistics;
};

int cmd_pvalue(const Global& g, const PValueArgs& a) {
  const std::string format = format_or(g, "json", {"json", "csv"});
  if (a.sims == 0) throw UsageError("--sims must be at least 1");
  std::vector<Statistic> stats;
  for (const auto& name : a.statistics) {
    const auto s = parse_statistic(name);
    if (!s) throw UsageError("unknown statistic '" + name + "'");
    stats.push_back(*s);
  }
  if (stats.empty()) stats = all_statistics();
  const std::optional<AlphaParam> given = a.alpha ? std::optional<AlphaParam>(to_alpha(*a.alpha)) : std::nullopt;

  const auto trees = read_trees(a.tree, true);
  std::vector<json> rows;
  std::ostringstream csv;
  csv << "tree_id,n_leaves,alpha_hat,loglik,alpha_tested,seed,n_sim";
  for (Statistic s : all_statistics()) csv << ",p_" << statistic_name(s);
  csv << '\n';
  bool warned = false;
  for (std::size_t i = 0; i < trees.size(); ++i) {
    const auto& p = trees[i];
    if (p.leaf_count < 4) throw UsageError(p.source + ": p-values need at least 4 leaves");
    const FitResult fit = mle_alpha(*p.tree);
    const AlphaParam alpha = given ? *given : AlphaParam(fit.alpha_hat);
    const std::uint64_t seed = trees.size() == 1 ? g.seed : splitmix64(g.seed + i);
    const PValueReport report = mc_pvalue(*p.tree, alpha, stats, a.sims, seed, thread_count(g));
    if (!warned)
      for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
    warned = true;
    json j = json::parse(pvalue_report_json(report));
    j["tree_id"] = p.source;
    j["alpha_source"] = given ? "given" : "mle";
    j["alpha_hat"] = fit.alpha_hat;
    j["loglik"] = number(fit.log_likelihood);
    rows.push_back(std::move(j));
    csv << csv_field(p.source) << ',' << p.leaf_count << ',' << full(fit.alpha_hat) << ','
        << full(fit.log_likelihood) << ',' << full(alpha.value()) << ',' << seed << ',' << a.sims;
    for (Statistic s : all_statistics()) {
      csv << ',';
      if (auto it = report.tests.find(s); it != report.tests.end()) csv << full(it->second.p_value);
    }
    csv << '\n';
  }
  emit(g, format == "json" ? dump(one_or_many(std::move(rows))) : csv.str());
  return kOk;
}

// verify ---------------------------------------------------------------------

int cmd_verify(const Global& g, const std::string& level, double perturb) {
  const std::string format = format_or(g, "text", {"text", "json"});
  VerifyOptions o;
  o.seed = g.seed;
  o.q_perturbation = perturb;
  if (level == "deep") {
    o.level = VerifyLevel::deep;
  } else if (level != "standard") {
    throw UsageError("--level must be standard or deep");
  }
  const VerifyReport r = run_verification(o);
  if (format == "json") {
    json checks = json::array();
    for (const auto& c : r.checks) checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    emit(g, dump({{"level", level}, {"seed", g.seed}, {"passed", r.passed()}, {"checks", checks}}));
  } else {
    std::ostringstream os;
    for (const auto& c : r.checks) os << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
    os << (r.passed() ? "verification passed" : "verification FAILED") << '\n';
    emit(g, os.str());
  }
  return r.passed() ? kOk : kVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Alpha-model tree shapes: sampling, likelihoods, statistics and goodness of fit"};
  app.require_subcommand(1);
  app.fallthrough();  // global options may follow the subcommand
  Global g;
  app.add_option("--seed", g.seed, "Master random seed")->capture_default_str();
  app.add_option("--format", g.format, "Output format: newick, json, csv (text for verify)");
  app.add_option("-o,--output", g.output, "Output file, '-' for standard output")->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads (default: ALPHATREE_THREADS or hardware)");

  SampleArgs sample;
  auto* sample_cmd = app.add_subcommand("sample", "Sample cladograms from the alpha model");
  sample_cmd->add_option("--n", sample.n, "Number of leaves")->required();
  sample_cmd->add_option("--alpha", sample.alpha, "Model parameter in [0, 1]")->required();
  sample_cmd->add_option("--count", sample.count, "Number of trees")->capture_default_str();

  ProbArgs prob;
  auto* prob_cmd = app.add_subcommand("prob", "Probability of a tree shape or cladogram");
  prob_cmd->add_option("tree", prob.tree, "Newick text, file, or '-'")->required();
  prob_cmd->add_option("--alpha", prob.alpha, "Model parameter in [0, 1]")->required();
  prob_cmd->add_flag("--cladogram", prob.cladogram, "Probability of the labelled cladogram instead of its shape");

  std::string stats_tree;
  auto* stats_cmd = app.add_subcommand("stats", "Balance statistics of a tree");
  stats_cmd->add_option("tree", stats_tree, "Newick text, file, or '-'")->required();

  std::size_t enum_n = 0;
  std::string enum_alpha;
  auto* enum_cmd = app.add_subcommand("enumerate", "Exact shape distribution for small n");
  enum_cmd->add_option("--n", enum_n, "Number of leaves (<= 10)")->required();
  enum_cmd->add_option("--alpha", enum_alpha, "Rational alpha, e.g. 1/3")->required();

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Maximum-likelihood alpha for every tree of a corpus");
  fit_cmd->add_option("corpus", fit.corpus, "Directory or file of Newick trees, or '-'")->required();
  fit_cmd->add_option("--grid", fit.grid, "Grid points on [0, 1], endpoints included")->capture_default_str();
  fit_cmd->add_flag("--no-refine", fit.no_refine, "Skip golden-section refinement");
  fit_cmd->add_option("--min-leaves", fit.min_leaves, "Drop analysis trees with fewer leaves")->capture_default_str();
  fit_cmd->add_flag("--no-root-split", fit.no_root_split, "Do not split trees at the root");
  fit_cmd->add_option("--metadata", fit.metadata, "CSV with header filename,method");
  fit_cmd->add_flag("--pvalues", fit.pvalues, "Add Monte-Carlo p-values at each tree's MLE");
  fit_cmd->add_option("--sims", fit.sims, "Simulations per p-value")->capture_default_str();
  fit_cmd->add_option("--summary", fit.summary_output, "Write the summary table (CSV) to this file");
  fit_cmd->add_option("--qq", fit.qq_output, "Write p-value QQ data (CSV) to this file");
  fit_cmd->add_flag("--include-trees", fit.include_trees, "List analysis trees in JSON output");

  PValueArgs pv;
  auto* pv_cmd = app.add_subcommand("pvalue", "Monte-Carlo goodness-of-fit p-values");
  pv_cmd->add_option("tree", pv.tree, "Newick text, file, or '-'")->required();
  pv_cmd->add_option("--alpha", pv.alpha, "Alpha to test at (default: the tree's MLE)");
  pv_cmd->add_option("--sims", pv.sims, "Number of simulated trees")->capture_default_str();
  pv_cmd->add_option("--stat", pv.statistics, "colless, cherries, sackin, maxdepth, prob (default: all)");

  std::string level = "standard";
  double perturb = 0.0;
  auto* verify_cmd = app.add_subcommand("verify", "Run the built-in oracle checks");
  verify_cmd->add_option("--level", level, "standard or deep")->capture_default_str();
  verify_cmd->add_option("--perturb-q", perturb)->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*sample_cmd) return cmd_sample(g, sample);
    if (*prob_cmd) return cmd_prob(g, prob);
    if (*stats_cmd) return cmd_stats(g, stats_tree);
    if (*enum_cmd) return cmd_enumerate(g, enum_n, enum_alpha);
    if (*fit_cmd) return cmd_fit(g, fit);
    if (*pv_cmd) return cmd_pvalue(g, pv);
    if (*verify_cmd) return cmd_verify(g, level, perturb);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
