#include <gtest/gtest.h>

#include "test_support.hpp"
#include "wgstl/wgstl.hpp"

namespace {

using namespace wgstl;

const Graph kGraph({"r", "a", "b"}, {{"r", "a"}, {"r", "b"}});

TEST(Synth, AlwaysFormulaPositivesClearMargin) {
  const auto f = parse_formula("(always [0 2] (pred p))");
  const std::vector<Predicate> p{{"p", {1.0}, 0.0}};
  SynthOptions opt;
  opt.n_pos = 30;
  opt.n_neg = 30;
  opt.seed = 3;
  const auto ds = synth_dataset(kGraph, f, p, "r", {"x"}, opt);
  ASSERT_EQ(ds.count_label(1), 30u);
  ASSERT_EQ(ds.count_label(-1), 30u);
  EXPECT_EQ(ds.horizon(), 2u);
  for (const auto& s : ds.samples) {
    double lo = INFINITY;
    for (std::size_t k = 0; k <= 2; ++k) lo = std::min(lo, s.trajectory.at(0, k, 0));
    if (s.label == 1) {
      EXPECT_GT(lo, opt.margin);
    }
    if (s.label == -1) {
      EXPECT_LT(lo, -opt.margin);
    }
  }
}

TEST(Synth, RelabelingAgreesWithMonitor) {
  Rng rng(4);
  fixtures::FormulaShape shape;
  shape.max_nodes = 6;
  shape.max_reach = 4;
  shape.predicates = 1;
  for (int trial = 0; trial < 30; ++trial) {
    const auto g = fixtures::random_graph(rng, 2, 5);
    const auto f = parse_formula(fixtures::random_formula_text(rng, shape));
    const auto p = fixtures::random_predicates(rng, f, 2);
    SynthOptions opt;
    opt.n_pos = 10;
    opt.n_neg = 10;
    opt.noise = 0.2;
    opt.margin = 0.1;
    opt.seed = trial;
    Dataset ds;
    try {
      ds = synth_dataset(g, f, p, "v0", {"x", "y"}, opt);
    } catch (const NumericError&) {
      continue;  // e.g. a tautology: one label is unreachable
    }
    for (const auto& s : ds.samples) {
      const double r = crisp_robustness(s.trajectory, g, 0, 0, f, p);
      EXPECT_EQ(r > 0 ? 1 : -1, s.label) << to_sexpr(f);
      EXPECT_EQ(boolean_sat(s.trajectory, g, 0, 0, f, p), s.label == 1);
    }
  }
}

TEST(Synth, SeededAndDeterministic) {
  const auto f = parse_formula("(eventually [0 1] (exists (pred p)))");
  const std::vector<Predicate> p{{"p", {1.0, -1.0}, 0.3}};
  SynthOptions opt;
  opt.n_pos = 5;
  opt.n_neg = 5;
  opt.noise = 0.1;
  opt.seed = 99;
  const auto a = synth_dataset(kGraph, f, p, "r", {"x", "y"}, opt);
  const auto b = synth_dataset(kGraph, f, p, "r", {"x", "y"}, opt);
  EXPECT_EQ(a.samples, b.samples);
  opt.seed = 100;
  EXPECT_NE(synth_dataset(kGraph, f, p, "r", {"x", "y"}, opt).samples, a.samples);
}

TEST(Synth, Errors) {
  const std::vector<Predicate> p{{"p", {1.0}, 0.0}};
  SynthOptions opt;
  opt.n_pos = 1;
  opt.n_neg = 1;
  EXPECT_THROW(synth_dataset(kGraph, parse_structure("(tempX [0 1] (forall (pred p)))"), p, "r", {"x"}, opt),
               ValidationError);
  EXPECT_THROW(synth_dataset(kGraph, parse_formula("(pred p)"), p, "zz", {"x"}, opt), ValidationError);
  EXPECT_THROW(synth_dataset(kGraph, parse_formula("(pred p)"), p, "r", {"x", "y"}, opt), ValidationError);
  opt.horizon = 0;
  EXPECT_THROW(synth_dataset(kGraph, parse_formula("(always [0 2] (pred p))"), p, "r", {"x"}, opt), ValidationError);
  opt.horizon.reset();
  opt.margin = 100.0;
  opt.attempts_per_sample = 50;
  EXPECT_THROW(synth_dataset(kGraph, parse_formula("(pred p)"), p, "r", {"x"}, opt), NumericError);
}

}  // namespace
