#include <gtest/gtest.h>

#include "sempat/config.hpp"

using namespace sempat;

TEST(Config, ParsesKeysAndComments) {
  auto c = parse_config(
      "# comment\n"
      "platform = platss   # trailing\n"
      "word_width = 5\n"
      "lsqc_entries = 3\n"
      "store_invalidation = per_set_index\n"
      "set_index_width = 2\n"
      "v_sec = [mem[8..15], regfile[1]]\n"
      "v_obs = lscount\n"
      "variant = ni\n"
      "init = { lsqc: invalid, lptr: 0 }\n"
      "secret_cells = all\n"
      "grammar = diffindex\n"
      "engine = enum\n"
      "max_pairs = 0x100\n"
      "regs = 0, 1\n");
  EXPECT_EQ(c.platform, "platss");
  EXPECT_EQ(c.machine.word_width, 5);
  EXPECT_EQ(c.lsqc_entries, 3);
  EXPECT_EQ(c.store_invalidation, StoreInvalidation::PerSetIndex);
  EXPECT_EQ(c.v_sec, (std::vector<std::string>{"mem[8..15]", "regfile[1]"}));
  EXPECT_EQ(c.init.at("lsqc"), "invalid");
  EXPECT_EQ(c.init.at("lptr"), "0");
  EXPECT_EQ(c.secret_cells, -1);
  EXPECT_EQ(grammar_id(c), "diffindex:2");
  EXPECT_EQ(c.engine, EngineKind::Enum);
  EXPECT_EQ(c.max_pairs, 256u);
  EXPECT_EQ(c.regs, (std::vector<int>{0, 1}));
  EXPECT_NO_THROW(validate_config(c));
}

TEST(Config, LaterSettingsWin) {
  auto c = parse_config("depth = 2\ndepth = 4\n");
  EXPECT_EQ(c.depth, 4);
  apply_setting(c, "depth", "5");
  EXPECT_EQ(c.depth, 5);
}

TEST(Config, Errors) {
  EXPECT_THROW(parse_config("platform = x86\n"), ParseError);
  EXPECT_THROW(parse_config("nonsense\n"), ParseError);
  EXPECT_THROW(parse_config("bogus_key = 1\n"), ParseError);
  EXPECT_THROW(parse_config("depth = three\n"), ParseError);
  try {
    parse_config("depth = 3\n\nprune = maybe\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3);
  }
}

TEST(Config, CrossFieldValidation) {
  EXPECT_THROW(validate_config(parse_config("platform = platsynth\nset_index_width = 2\n")), Error);
  EXPECT_THROW(validate_config(parse_config("platform = platcr\nset_index_width = 1\n")), Error);
  EXPECT_NO_THROW(validate_config(parse_config("platform = platcr\ngrammar = diffindex\nset_index_width = 1\n")));
  EXPECT_THROW(validate_config(parse_config("platform = platcr\nlsqc_entries = 2\n")), Error);
  EXPECT_THROW(validate_config(parse_config("platform = platcr\nvariant = sni\n")), Error);
  EXPECT_THROW(validate_config(parse_config("v_pub = regfile\nv_sec = mem\n")), Error);
  EXPECT_THROW(validate_config(parse_config("max_branch = 4\n")), Error);
}

TEST(Config, BuildsModelAndProperty) {
  auto c = parse_config("platform = platcr\nreuse_buf_size = 3\ninit = { reuse_buf: free }\n");
  auto m = build_model(c);
  EXPECT_EQ(m->params().at("reuse_buf_size"), "3");
  auto p = build_property(c, *m);
  EXPECT_EQ(p.v_obs, parse_refs(m->layout(), "mulcount"));
  EXPECT_EQ(p.init.vars.at(m->layout().find("reuse_buf")).kind, InitConstraint::Free);
  auto q = build_property(parse_config("v_sec = mem\n"), *m);
  EXPECT_EQ(p.v_pub, q.v_pub);
}

TEST(Config, VPubIsComplementOfVSec) {
  auto m = build_model(parse_config("platform = platcr\n"));
  auto a = build_property(parse_config("v_sec = mem\n"), *m);
  auto b = build_property(parse_config("v_pub = [regfile, reuse_buf, rb_ptr, mulcount]\n"), *m);
  EXPECT_EQ(a.v_pub, b.v_pub);
}

TEST(Config, SynthDefaults) {
  auto c = parse_config("platform = platsynth\npdep = 3\n");
  auto m = build_model(c);
  auto p = build_property(c, *m);
  EXPECT_EQ(p.v_obs, parse_refs(m->layout(), "buf_3"));
  EXPECT_EQ(describe_property(*m, p), describe_property(*m, make_property(*m, {"buf_0"}, {"buf_3"})));
}
