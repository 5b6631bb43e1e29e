#pragma once

#include <string>
#include <vector>

#include "sempat/grammar.hpp"
#include "sempat/nicheck.hpp"

namespace sempat {

using Template = std::vector<Opcode>;

std::string render_template(const Template& t);
Template parse_template(std::string_view text);

struct Pattern {
  Template tmpl;
  Constraint constraint;
  auto operator<=>(const Pattern&) const = default;
};

struct Provenance {
  std::string model;
  std::string property;
  std::string grammar;
  int depth = 0;
  std::string engine;
  // Set when some template was skipped after an inconclusive engine answer.
  bool partial = false;
  bool operator==(const Provenance&) const = default;
};

struct PatternSet {
  std::vector<Pattern> patterns;
  Provenance provenance;
  bool operator==(const PatternSet&) const = default;
};

// Thrown when the engine cannot decide a query that completeness depends on.
class Inconclusive : public Error {
 public:
  using Error::Error;
};

enum class TemplateStatus { TaintRejected, SemanticRejected, Accepted, Inconclusive };
std::string template_status_name(TemplateStatus s);

struct TemplateRecord {
  Template tmpl;
  TemplateStatus status = TemplateStatus::TaintRejected;
  double time_ms = 0;
};

struct TemplateReport {
  // Every visited template, in visiting order.
  std::vector<TemplateRecord> records;
  // Accepted templates, shortest first then lexicographic.
  std::vector<Template> accepted;
  const TemplateRecord* find(const Template& t) const;
};

// Inconclusive answers are recorded, never thrown.
TemplateReport generate_templates(const ModelPtr& m, const NIProperty& p, int d, const SearchBudget& b);

struct SpecializeOptions {
  int max_branch = 3;
  // Drop a pattern when the remaining patterns of its template already cover all of its violations.
  bool prune_siblings = true;
};

struct SpecializeStats {
  uint64_t queries = 0;
  // Multi-counterfactual branch steps taken.
  int branch_events = 0;
  // Branch steps where at least two children admit a violation.
  int productive_branches = 0;
  int vacuous_branches = 0;
  int sibling_pruned = 0;
};

std::vector<Pattern> constraint_specialize(const ModelPtr& m, const NIProperty& p, const Template& t,
                                           const Grammar& g, const SearchBudget& b, const SpecializeOptions& o,
                                           SpecializeStats* stats = nullptr);

struct GenerateOptions {
  int depth = 3;
  SpecializeOptions specialize;
  bool allow_partial = false;
};

struct TemplateOutcome {
  Template tmpl;
  size_t patterns = 0;
  double time_ms = 0;
  SpecializeStats stats;
  bool inconclusive = false;
};

struct GenerationReport {
  TemplateReport templates;
  std::vector<TemplateOutcome> specialized;
  double total_ms = 0;
  int branch_events() const;
  int productive_branches() const;
};

PatternSet generate_patterns(const ModelPtr& m, const NIProperty& p, const Grammar& g, const GenerateOptions& o,
                             const SearchBudget& b, GenerationReport* report = nullptr);

std::string engine_fingerprint(const SearchBudget& b, const SpecializeOptions& o);

// Text format: header "sempat-patterns v1", "key: value" provenance lines, then one
// "template:" / "atoms:" stanza per pattern. Atoms are parsed against the grammar named in the provenance.
std::string serialize_patterns(const PatternSet& s);
PatternSet parse_patterns(std::string_view text);

// Positions of t as a subsequence of ops; each index vector is strictly increasing.
std::vector<std::vector<size_t>> embeddings(const Template& t, const std::vector<Opcode>& ops);

}  // namespace sempat
