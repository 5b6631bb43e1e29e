#include "sempat/sat.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace sempat::sat {

int Solver::new_var() {
  int v = num_vars();
  assigns_.push_back(kUndef);
  polarity_.push_back(1);
  levels_.push_back(0);
  reasons_.push_back(-1);
  activity_.push_back(0.0);
  seen_.push_back(0);
  watches_.emplace_back();
  watches_.emplace_back();
  heap_pos_.push_back(-1);
  heap_insert(v);
  return v;
}

void Solver::attach(int cref) {
  const auto& c = clauses_[cref];
  watches_[sneg(c.lits[0])].push_back({cref, c.lits[1]});
  watches_[sneg(c.lits[1])].push_back({cref, c.lits[0]});
}

bool Solver::add_clause(std::vector<SLit> lits) {
  if (!ok_) return false;
  assert(level() == 0);
  std::sort(lits.begin(), lits.end());
  std::vector<SLit> out;
  SLit prev = -1;
  for (SLit l : lits) {
    if (value(l) == 1 || l == sneg(prev)) return true;  // satisfied or tautology
    if (value(l) != 0 && l != prev) out.push_back(l);
    prev = l;
  }
  if (out.empty()) return ok_ = false;
  if (out.size() == 1) {
    enqueue(out[0], -1);
    if (propagate() >= 0) ok_ = false;
    return ok_;
  }
  clauses_.push_back({std::move(out), 0.0, false, false});
  attach(static_cast<int>(clauses_.size()) - 1);
  return true;
}

void Solver::enqueue(SLit l, int reason) {
  int v = var_of(l);
  assigns_[v] = static_cast<int8_t>((l & 1) ^ 1);
  levels_[v] = level();
  reasons_[v] = reason;
  trail_.push_back(l);
}

int Solver::propagate() {
  int confl = -1;
  while (qhead_ < trail_.size()) {
    SLit p = trail_[qhead_++];
    auto& ws = watches_[p];
    size_t i = 0, j = 0;
    SLit false_lit = sneg(p);
    while (i < ws.size()) {
      Watch w = ws[i];
      if (value(w.blocker) == 1) {
        ws[j++] = ws[i++];
        continue;
      }
      Clause& c = clauses_[w.cref];
      if (c.deleted) {
        ++i;
        continue;
      }
      if (c.lits[0] == false_lit) std::swap(c.lits[0], c.lits[1]);
      ++i;
      SLit first = c.lits[0];
      if (first != w.blocker && value(first) == 1) {
        ws[j++] = {w.cref, first};
        continue;
      }
      bool found = false;
      for (size_t k = 2; k < c.lits.size(); ++k) {
        if (value(c.lits[k]) != 0) {
          std::swap(c.lits[1], c.lits[k]);
          watches_[sneg(c.lits[1])].push_back({w.cref, first});
          found = true;
          break;
        }
      }
      if (found) continue;
      ws[j++] = {w.cref, first};
      if (value(first) == 0) {
        confl = w.cref;
        qhead_ = trail_.size();
        while (i < ws.size()) ws[j++] = ws[i++];
      } else {
        enqueue(first, w.cref);
      }
    }
    ws.resize(j);
    if (confl >= 0) break;
  }
  return confl;
}

void Solver::bump_var(int v) {
  if ((activity_[v] += var_inc_) > 1e100) {
    for (auto& a : activity_) a *= 1e-100;
    var_inc_ *= 1e-100;
  }
  if (heap_contains(v)) heap_up(heap_pos_[v]);
}

void Solver::bump_clause(Clause& c) {
  if ((c.act += cla_inc_) > 1e20) {
    for (int cr : learnts_) clauses_[cr].act *= 1e-20;
    cla_inc_ *= 1e-20;
  }
}

bool Solver::lit_redundant(SLit p, uint32_t abstract_levels) {
  analyze_stack_.clear();
  analyze_stack_.push_back(p);
  size_t top = analyze_toclear_.size();
  while (!analyze_stack_.empty()) {
    SLit q = analyze_stack_.back();
    analyze_stack_.pop_back();
    const Clause& c = clauses_[reasons_[var_of(q)]];
    for (size_t i = 1; i < c.lits.size(); ++i) {
      SLit l = c.lits[i];
      int v = var_of(l);
      if (!seen_[v] && levels_[v] > 0) {
        if (reasons_[v] >= 0 && (abstract_levels & (1u << (levels_[v] & 31)))) {
          seen_[v] = 1;
          analyze_stack_.push_back(l);
          analyze_toclear_.push_back(l);
        } else {
          for (size_t j = top; j < analyze_toclear_.size(); ++j) seen_[var_of(analyze_toclear_[j])] = 0;
          analyze_toclear_.resize(top);
          return false;
        }
      }
    }
  }
  return true;
}

void Solver::analyze(int confl, std::vector<SLit>& out, int& bt_level) {
  int path_c = 0;
  SLit p = -1;
  out.clear();
  out.push_back(-1);
  int index = static_cast<int>(trail_.size()) - 1;
  do {
    Clause& c = clauses_[confl];
    if (c.learnt) bump_clause(c);
    // The reason clause keeps its implied literal at position 0.
    if (p != -1 && c.lits[0] != p) {
      auto it = std::find(c.lits.begin(), c.lits.end(), p);
      std::iter_swap(c.lits.begin(), it);
    }
    for (size_t j = (p == -1) ? 0 : 1; j < c.lits.size(); ++j) {
      SLit q = c.lits[j];
      int v = var_of(q);
      if (!seen_[v] && levels_[v] > 0) {
        bump_var(v);
        seen_[v] = 1;
        if (levels_[v] >= level()) ++path_c;
        else out.push_back(q);
      }
    }
    while (!seen_[var_of(trail_[index--])]) {
    }
    p = trail_[index + 1];
    confl = reasons_[var_of(p)];
    seen_[var_of(p)] = 0;
    --path_c;
  } while (path_c > 0);
  out[0] = sneg(p);

  analyze_toclear_ = out;
  uint32_t abstract_levels = 0;
  for (size_t i = 1; i < out.size(); ++i) abstract_levels |= 1u << (levels_[var_of(out[i])] & 31);
  size_t j = 1;
  for (size_t i = 1; i < out.size(); ++i)
    if (reasons_[var_of(out[i])] < 0 || !lit_redundant(out[i], abstract_levels)) out[j++] = out[i];
  out.resize(j);

  if (out.size() == 1) {
    bt_level = 0;
  } else {
    size_t max_i = 1;
    for (size_t i = 2; i < out.size(); ++i)
      if (levels_[var_of(out[i])] > levels_[var_of(out[max_i])]) max_i = i;
    std::swap(out[1], out[max_i]);
    bt_level = levels_[var_of(out[1])];
  }
  for (SLit l : analyze_toclear_) seen_[var_of(l)] = 0;
}

void Solver::cancel_until(int lvl) {
  if (level() <= lvl) return;
  for (int c = static_cast<int>(trail_.size()) - 1; c >= trail_lim_[lvl]; --c) {
    int v = var_of(trail_[c]);
    assigns_[v] = kUndef;
    polarity_[v] = static_cast<int8_t>(trail_[c] & 1);
    if (!heap_contains(v)) heap_insert(v);
  }
  trail_.resize(trail_lim_[lvl]);
  trail_lim_.resize(lvl);
  qhead_ = trail_.size();
}

SLit Solver::pick_branch() {
  while (!heap_.empty()) {
    int v = heap_pop();
    if (assigns_[v] == kUndef) return mk(v, polarity_[v] != 0);
  }
  return -1;
}

void Solver::reduce_db() {
  std::sort(learnts_.begin(), learnts_.end(),
            [&](int a, int b) { return clauses_[a].act < clauses_[b].act; });
  std::vector<int> keep;
  size_t half = learnts_.size() / 2;
  for (size_t i = 0; i < learnts_.size(); ++i) {
    Clause& c = clauses_[learnts_[i]];
    int v0 = var_of(c.lits[0]);
    bool locked = reasons_[v0] == learnts_[i] && value(c.lits[0]) == 1;
    if (i < half && !locked && c.lits.size() > 2) {
      c.deleted = true;
      c.lits.clear();
      c.lits.shrink_to_fit();
    } else {
      keep.push_back(learnts_[i]);
    }
  }
  learnts_ = std::move(keep);
  for (auto& ws : watches_)
    ws.erase(std::remove_if(ws.begin(), ws.end(), [&](const Watch& w) { return clauses_[w.cref].deleted; }),
             ws.end());
}

double Solver::luby(double y, int x) {
  int size = 1, seq = 0;
  while (size < x + 1) {
    ++seq;
    size = 2 * size + 1;
  }
  while (size - 1 != x) {
    size = (size - 1) >> 1;
    --seq;
    x = x % size;
  }
  return std::pow(y, seq);
}

Result Solver::solve(const std::vector<SLit>& assumptions, const Deadline& dl) {
  model_.clear();
  if (!ok_) return Result::Unsat;
  for (SLit a : assumptions)
    while (var_of(a) >= num_vars()) new_var();
  if (max_learnts_ == 0) max_learnts_ = std::max<double>(clauses_.size() / 3.0, 2000.0);
  std::vector<SLit> learnt;
  int restarts = 0;
  uint64_t budget_checks = 0;
  while (true) {
    uint64_t limit = static_cast<uint64_t>(luby(2.0, restarts++) * 100);
    uint64_t local_conflicts = 0;
    while (true) {
      int confl = propagate();
      if (confl >= 0) {
        ++stat_conflicts_;
        ++local_conflicts;
        if (level() == 0) {
          ok_ = false;
          return Result::Unsat;
        }
        int bt = 0;
        analyze(confl, learnt, bt);
        cancel_until(bt);
        if (learnt.size() == 1) {
          enqueue(learnt[0], -1);
        } else {
          clauses_.push_back({learnt, 0.0, true, false});
          int cr = static_cast<int>(clauses_.size()) - 1;
          learnts_.push_back(cr);
          attach(cr);
          bump_clause(clauses_[cr]);
          enqueue(learnt[0], cr);
        }
        var_inc_ /= 0.95;
        cla_inc_ /= 0.999;
        if ((++budget_checks & 255) == 0 && dl.expired()) {
          cancel_until(0);
          return Result::Unknown;
        }
        continue;
      }
      if (local_conflicts >= limit) {
        cancel_until(0);
        break;
      }
      if (static_cast<double>(learnts_.size()) - static_cast<double>(trail_.size()) >= max_learnts_) {
        reduce_db();
        max_learnts_ *= 1.1;
      }
      SLit next = -1;
      while (level() < static_cast<int>(assumptions.size())) {
        SLit a = assumptions[level()];
        if (value(a) == 1) {
          trail_lim_.push_back(static_cast<int>(trail_.size()));
        } else if (value(a) == 0) {
          cancel_until(0);
          return Result::Unsat;
        } else {
          next = a;
          break;
        }
      }
      if (next == -1) {
        ++stat_decisions_;
        if ((stat_decisions_ & 1023) == 0 && dl.expired()) {
          cancel_until(0);
          return Result::Unknown;
        }
        next = pick_branch();
        if (next == -1) {
          model_.assign(num_vars(), false);
          for (int v = 0; v < num_vars(); ++v) model_[v] = assigns_[v] == 1;
          cancel_until(0);
          return Result::Sat;
        }
      }
      trail_lim_.push_back(static_cast<int>(trail_.size()));
      enqueue(next, -1);
    }
  }
}

void Solver::heap_insert(int v) {
  heap_pos_[v] = static_cast<int>(heap_.size());
  heap_.push_back(v);
  heap_up(heap_pos_[v]);
}

void Solver::heap_up(int i) {
  int v = heap_[i];
  while (i > 0) {
    int parent = (i - 1) >> 1;
    if (activity_[heap_[parent]] >= activity_[v]) break;
    heap_[i] = heap_[parent];
    heap_pos_[heap_[i]] = i;
    i = parent;
  }
  heap_[i] = v;
  heap_pos_[v] = i;
}

void Solver::heap_down(int i) {
  int v = heap_[i];
  int n = static_cast<int>(heap_.size());
  while (true) {
    int c = 2 * i + 1;
    if (c >= n) break;
    if (c + 1 < n && activity_[heap_[c + 1]] > activity_[heap_[c]]) ++c;
    if (activity_[heap_[c]] <= activity_[v]) break;
    heap_[i] = heap_[c];
    heap_pos_[heap_[i]] = i;
    i = c;
  }
  heap_[i] = v;
  heap_pos_[v] = i;
}

int Solver::heap_pop() {
  int v = heap_[0];
  heap_pos_[v] = -1;
  int last = heap_.back();
  heap_.pop_back();
  if (!heap_.empty()) {
    heap_[0] = last;
    heap_pos_[last] = 0;
    heap_down(0);
  }
  return v;
}

}  // namespace sempat::sat
