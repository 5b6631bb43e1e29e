#include <gtest/gtest.h>

#include <random>

#include "sempat/cnf.hpp"
#include "sempat/domain.hpp"

using namespace sempat;

namespace {

bool brute_sat(int n, const std::vector<std::vector<sat::SLit>>& cls) {
  for (uint32_t m = 0; m < (1u << n); ++m) {
    bool all = true;
    for (const auto& c : cls) {
      bool any = false;
      for (auto l : c) any |= (((m >> sat::var_of(l)) & 1u) != 0) != ((l & 1) != 0);
      if (!any) {
        all = false;
        break;
      }
    }
    if (all) return true;
  }
  return false;
}

}  // namespace

TEST(Sat, RandomCnfAgreesWithBruteForce) {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 400; ++trial) {
    int n = 3 + rng() % 10;
    int m = n * 3 + rng() % (n * 2);
    std::vector<std::vector<sat::SLit>> cls;
    sat::Solver s;
    for (int i = 0; i < n; ++i) s.new_var();
    for (int i = 0; i < m; ++i) {
      std::vector<sat::SLit> c;
      for (int k = 0; k < 3; ++k) c.push_back(sat::mk(rng() % n, rng() & 1));
      cls.push_back(c);
      s.add_clause(c);
    }
    bool expect = brute_sat(n, cls);
    auto r = s.solve({});
    ASSERT_EQ(r == sat::Result::Sat, expect) << "trial " << trial;
    if (expect) {
      for (const auto& c : cls) {
        bool any = false;
        for (auto l : c) any |= s.model_value(sat::var_of(l)) != ((l & 1) != 0);
        ASSERT_TRUE(any);
      }
    }
  }
}

TEST(Sat, Assumptions) {
  sat::Solver s;
  int a = s.new_var(), b = s.new_var();
  s.add_clause({sat::mk(a), sat::mk(b)});
  EXPECT_EQ(s.solve({sat::mk(a, true)}), sat::Result::Sat);
  EXPECT_TRUE(s.model_value(b));
  EXPECT_EQ(s.solve({sat::mk(a, true), sat::mk(b, true)}), sat::Result::Unsat);
  EXPECT_EQ(s.solve({}), sat::Result::Sat);
}

TEST(Sat, PigeonholeUnsat) {
  // 5 pigeons, 4 holes
  sat::Solver s;
  int P = 5, H = 4;
  auto v = [&](int p, int h) { return p * H + h; };
  for (int i = 0; i < P * H; ++i) s.new_var();
  for (int p = 0; p < P; ++p) {
    std::vector<sat::SLit> c;
    for (int h = 0; h < H; ++h) c.push_back(sat::mk(v(p, h)));
    s.add_clause(c);
  }
  for (int h = 0; h < H; ++h)
    for (int p = 0; p < P; ++p)
      for (int q = p + 1; q < P; ++q) s.add_clause({sat::mk(v(p, h), true), sat::mk(v(q, h), true)});
  EXPECT_EQ(s.solve({}), sat::Result::Unsat);
}

// Symbolic word operations agree with the concrete domain on every input pair at width 4.
TEST(Sat, BitVectorOpsMatchConcrete) {
  sym::Aig g;
  Sym sd{g};
  Conc cd;
  auto a = sym::bv_input(g, 4), b = sym::bv_input(g, 4);
  auto add = sd.add(a, b), sub = sd.sub(a, b), mul = sd.mul(a, b), x = sd.bxor(a, b);
  auto eq = sd.eq(a, b), lt = sd.ult(a, b), nz = sd.nonzero(a);
  auto sl = sd.slice(a, 2, 3);
  for (uint32_t va = 0; va < 16; ++va)
    for (uint32_t vb = 0; vb < 16; ++vb) {
      std::vector<bool> in(8);
      for (int i = 0; i < 4; ++i) {
        in[i] = (va >> i) & 1;
        in[4 + i] = (vb >> i) & 1;
      }
      auto val = [&](const sym::Bits& bits) {
        uint32_t r = 0;
        for (size_t i = 0; i < bits.size(); ++i)
          if (g.eval(bits[i], in)) r |= 1u << i;
        return r;
      };
      CWord ca = cd.wconst(va, 4), cb = cd.wconst(vb, 4);
      ASSERT_EQ(val(add), cd.add(ca, cb).v);
      ASSERT_EQ(val(sub), cd.sub(ca, cb).v);
      ASSERT_EQ(val(mul), cd.mul(ca, cb).v);
      ASSERT_EQ(val(x), cd.bxor(ca, cb).v);
      ASSERT_EQ(val(sl), cd.slice(ca, 2, 3).v);
      ASSERT_EQ(g.eval(eq, in), cd.eq(ca, cb));
      ASSERT_EQ(g.eval(lt, in), cd.ult(ca, cb));
      ASSERT_EQ(g.eval(nz, in), cd.nonzero(ca));
    }
}

TEST(Sat, BridgeSolvesMultiplication) {
  // find a, b with a*b == 6 (mod 16) and a < b, a > 1
  sym::Aig g;
  Sym d{g};
  auto a = sym::bv_input(g, 4), b = sym::bv_input(g, 4);
  auto goal = g.land(d.eqc(d.mul(a, b), 6), g.land(d.ult(a, b), d.ult(d.wconst(1, 4), a)));
  sat::Solver s;
  CnfBridge br(g, s);
  ASSERT_EQ(s.solve({br.lit(goal)}), sat::Result::Sat);
  uint32_t va = br.value(a), vb = br.value(b);
  EXPECT_EQ((va * vb) & 15u, 6u);
  EXPECT_LT(va, vb);
  EXPECT_GT(va, 1u);
  auto never = g.land(d.eqc(d.mul(a, b), 7), d.lnot(d.nonzero(a)));
  EXPECT_EQ(s.solve({br.lit(never)}), sat::Result::Unsat);
}

TEST(Sat, IncrementalAssumptionsAgreeWithBruteForce) {
  std::mt19937 rng(19);
  for (int trial = 0; trial < 60; ++trial) {
    int n = 8 + rng() % 6;
    sat::Solver s;
    for (int i = 0; i < n; ++i) s.new_var();
    std::vector<std::vector<sat::SLit>> cls;
    for (int round = 0; round < 8; ++round) {
      for (int i = 0; i < n / 2 + 1; ++i) {
        std::vector<sat::SLit> c;
        for (int k = 0; k < 3; ++k) c.push_back(sat::mk(rng() % n, rng() & 1));
        cls.push_back(c);
        s.add_clause(c);
      }
      for (int q = 0; q < 4; ++q) {
        std::vector<sat::SLit> as;
        auto with = cls;
        for (int k = 0; k < 2; ++k) {
          as.push_back(sat::mk(rng() % n, rng() & 1));
          with.push_back({as.back()});
        }
        ASSERT_EQ(s.solve(as) == sat::Result::Sat, brute_sat(n, with)) << trial << " " << round;
      }
    }
  }
}
