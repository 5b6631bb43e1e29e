#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "sempat/grammar.hpp"
#include "sempat/models.hpp"
#include "sempat/nicheck.hpp"
#include "sempat/patterns.hpp"

namespace sempat {

// Run configuration: "key = value" lines, '#' comments. Later assignments (and --set flags) win.
struct RunConfig {
  std::string platform = "platcr";
  MachineConfig machine;
  int reuse_buf_size = 2;
  int lsqc_entries = 2;
  int set_index_width = 1;
  StoreInvalidation store_invalidation = StoreInvalidation::PerAddress;
  SpecFeature spec_feature = SpecFeature::None;
  int spec_window = 4;
  int pdep = 2;
  int synth_word_width = 2;

  Variant variant = Variant::NI;
  // v_sec is sugar for v_pub = V \ v_sec; giving both is an error.
  std::vector<std::string> v_sec;
  std::vector<std::string> v_pub;
  std::vector<std::string> v_obs;
  // init.<var> = free | invalid | <number>, or init = { var: value, ... }
  std::map<std::string, std::string> init;
  int secret_cells = 2;

  // "default", "diffindex" (uses set_index_width) or "diffindex:N".
  std::string grammar = "default";
  int depth = 3;
  int max_branch = 3;
  bool prune = true;
  bool allow_partial = false;

  EngineKind engine = EngineKind::Sat;
  uint64_t max_pairs = 0;
  long deadline_ms = 0;
  int jobs = 1;
  std::vector<int> regs;
  std::vector<uint32_t> imms;

  int unroll_depth = 64;
  std::string output;

  // bench
  std::string bench_experiment;
  std::vector<int> bench_values;
  std::vector<std::string> bench_programs;
  long bench_cell_timeout_ms = 600000;

  std::set<std::string> explicit_keys;
};

void apply_setting(RunConfig& c, const std::string& key, const std::string& value);
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);
// Cross-field checks; throws Error.
void validate_config(const RunConfig& c);

ModelPtr build_model(const RunConfig& c);
NIProperty build_property(const RunConfig& c, const PlatformModel& m);
Grammar build_grammar(const RunConfig& c);
// Canonical grammar id recorded in pattern provenance.
std::string grammar_id(const RunConfig& c);
SearchBudget build_budget(const RunConfig& c);
GenerateOptions build_generate_options(const RunConfig& c);

std::string read_file(const std::string& path);

}  // namespace sempat
