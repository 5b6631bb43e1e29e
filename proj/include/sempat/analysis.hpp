#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sempat/patterns.hpp"

namespace sempat {

struct UnrolledProgram {
  std::vector<Instruction> instructions;
  // One assumption per branch kept in the path.
  std::vector<BranchAssume> assumptions;
  // Branch decisions in path order, 'T' taken and 'F' fall-through; "-" for straight-line code.
  std::string path_id;
  bool truncated = false;
};

// One path per combination of branch outcomes. Branches stay in the path (they start speculation) with their
// targets rewritten to the end label. depth bounds the path length in instructions.
std::vector<UnrolledProgram> unroll(const Program& p, int depth);

struct MatchSite {
  size_t pattern = 0;
  std::vector<size_t> indices;
  Witness witness;
};

struct MatchResult {
  std::vector<MatchSite> sites;
  // Embeddings whose check ran out of budget.
  std::vector<std::vector<size_t>> unknown;
};

// Matching quantifies over low-equivalent initial-state pairs admitted by the path's assumptions.
// set_index_width < 0 takes the model's parameter.
MatchResult match_pattern(const ModelPtr& m, const NIProperty& p, const UnrolledProgram& path, const Pattern& pat,
                          const SearchBudget& b, bool first_only = false, int set_index_width = -1);

enum class PathVerdict { Safe, Unsafe, Unknown };
std::string path_verdict_name(PathVerdict v);

struct ReportLine {
  std::string path;
  std::string pattern;  // index, or "hyper"
  PathVerdict verdict = PathVerdict::Safe;
  std::vector<size_t> site;
  double time_ms = 0;
};

struct PathReport {
  UnrolledProgram path;
  PathVerdict verdict = PathVerdict::Safe;
  double time_ms = 0;
  std::vector<MatchSite> sites;
  std::optional<Witness> witness;
};

struct AnalysisReport {
  PathVerdict verdict = PathVerdict::Safe;
  std::vector<PathReport> paths;
  std::vector<ReportLine> lines;
  std::vector<std::string> warnings;
  double total_ms = 0;

  // Machine-readable records; with_time=false drops the timing field.
  std::string render_lines(bool with_time = true) const;
  std::string render_text(const PlatformModel& m) const;
};

AnalysisReport analyze(const ModelPtr& m, const NIProperty& p, const PatternSet& patterns, const Program& program,
                       int depth, const SearchBudget& b);
AnalysisReport analyze_hyper(const ModelPtr& m, const NIProperty& p, const Program& program, int depth,
                             const SearchBudget& b);

// Dependency-closed index sets of size <= k, one per seed instruction, deduplicated, in seed order.
std::vector<std::set<size_t>> extract_skeletons(const PlatformModel& m, const Trace& t, size_t k);

enum class OracleStatus { Complete, Counterexample, Inconclusive };

struct OracleResult {
  OracleStatus status = OracleStatus::Complete;
  std::optional<Witness> counterexample;
  size_t templates_checked = 0;
};

// Searches, for every template of length <= d over the model's opcodes, for a violating instruction sequence
// whose own template has no pattern matching it at the sequence's positions. Throws when d exceeds the
// generation depth recorded in the pattern set.
OracleResult kcompleteness_oracle(const ModelPtr& m, const NIProperty& p, const PatternSet& patterns, int d,
                                  const SearchBudget& b);

}  // namespace sempat
