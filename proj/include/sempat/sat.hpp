#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <vector>

namespace sempat::sat {

// Literal = 2 * var + sign (sign=1 means negated).
using SLit = int;
inline SLit mk(int var, bool negated = false) { return 2 * var + (negated ? 1 : 0); }
inline SLit sneg(SLit l) { return l ^ 1; }
inline int var_of(SLit l) { return l >> 1; }

enum class Result { Sat, Unsat, Unknown };

using Clock = std::chrono::steady_clock;

struct Deadline {
  std::optional<Clock::time_point> at;
  bool expired() const { return at && Clock::now() >= *at; }
  static Deadline after_ms(long ms) {
    Deadline d;
    if (ms > 0) d.at = Clock::now() + std::chrono::milliseconds(ms);
    return d;
  }
};

// CDCL solver with two watched literals, first-UIP learning, VSIDS and Luby restarts.
// Supports incremental clause addition between calls and solving under assumptions.
class Solver {
 public:
  int new_var();
  int num_vars() const { return static_cast<int>(assigns_.size()); }
  // Returns false once the clause database is unsatisfiable at level 0.
  bool add_clause(std::vector<SLit> lits);
  Result solve(const std::vector<SLit>& assumptions, const Deadline& dl = {});
  bool model_value(int var) const { return var < static_cast<int>(model_.size()) && model_[var]; }
  bool okay() const { return ok_; }

  uint64_t conflicts() const { return stat_conflicts_; }
  uint64_t decisions() const { return stat_decisions_; }

 private:
  static constexpr int8_t kUndef = 2;
  struct Clause {
    std::vector<SLit> lits;
    double act = 0;
    bool learnt = false;
    bool deleted = false;
  };
  struct Watch {
    int cref;
    SLit blocker;
  };

  int8_t value(SLit l) const {
    int8_t a = assigns_[var_of(l)];
    return a == kUndef ? kUndef : static_cast<int8_t>(a ^ (l & 1));
  }
  int level() const { return static_cast<int>(trail_lim_.size()); }
  void enqueue(SLit l, int reason);
  int propagate();
  void analyze(int confl, std::vector<SLit>& out, int& bt_level);
  bool lit_redundant(SLit l, uint32_t abstract_levels);
  void cancel_until(int lvl);
  SLit pick_branch();
  void attach(int cref);
  void bump_var(int v);
  void bump_clause(Clause& c);
  void reduce_db();
  void heap_insert(int v);
  void heap_up(int i);
  void heap_down(int i);
  int heap_pop();
  bool heap_contains(int v) const { return v < static_cast<int>(heap_pos_.size()) && heap_pos_[v] >= 0; }
  static double luby(double y, int x);

  bool ok_ = true;
  std::vector<Clause> clauses_;
  std::vector<int> learnts_;
  std::vector<std::vector<Watch>> watches_;
  std::vector<int8_t> assigns_;
  std::vector<int8_t> polarity_;
  std::vector<int> levels_;
  std::vector<int> reasons_;
  std::vector<double> activity_;
  std::vector<SLit> trail_;
  std::vector<int> trail_lim_;
  size_t qhead_ = 0;
  std::vector<int> heap_;
  std::vector<int> heap_pos_;
  std::vector<char> seen_;
  std::vector<SLit> analyze_stack_;
  std::vector<SLit> analyze_toclear_;
  std::vector<bool> model_;
  double var_inc_ = 1.0;
  double cla_inc_ = 1.0;
  double max_learnts_ = 0;
  uint64_t stat_conflicts_ = 0;
  uint64_t stat_decisions_ = 0;
};

}  // namespace sempat::sat
