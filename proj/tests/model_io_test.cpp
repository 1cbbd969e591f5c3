#include <gtest/gtest.h>

#include <cmath>

#include "test_support.hpp"
#include "wgstl/wgstl.hpp"

namespace {

using namespace wgstl;

TrainedModel random_model(Rng& rng) {
  fixtures::FormulaShape shape;
  shape.flexible = true;
  shape.concrete = rng.uniform() < 0.5;
  const auto g = fixtures::random_graph(rng, 2, 6);
  TrainedModel m;
  m.structure = fixtures::random_structure(rng, shape);
  m.assignment = fixtures::random_assignment(rng, m.structure);
  m.root = "v" + std::to_string(rng.index(g.size()));
  const std::size_t dim = 1 + rng.index(3);
  for (std::size_t i = 0; i < dim; ++i) m.dim_names.push_back("d" + std::to_string(i));
  ParamInit init;
  init.seed = rng.index(1000);
  m.params = ParamStore::create(m.formula(), g, m.root, dim, init);
  // Awkward doubles: subnormals, long mantissas, negative zero.
  for (auto& x : m.params.raw()) {
    const double u = rng.uniform();
    x = u < 0.1 ? 4.9e-320 : u < 0.2 ? -0.0 : rng.normal() * std::pow(10.0, rng.uniform(-8, 8));
  }
  m.config.epochs = rng.index(1000);
  m.config.sigma = rng.uniform(0.01, 3);
  m.config.seed = rng.index(1u << 30) * 4096 + 7;
  for (std::size_t e = 0; e < rng.index(5); ++e) m.log.push_back({1 + static_cast<int>(rng.index(2)), e, rng.uniform(), 100 * rng.uniform(), rng.uniform()});
  return m;
}

TEST(ModelIo, RoundTripIsBitExact) {
  Rng rng(17);
  for (int i = 0; i < 100; ++i) {
    const auto m = random_model(rng);
    const auto text = model_to_text(m);
    const auto back = model_from_text(text);
    EXPECT_EQ(back, m);
    ASSERT_EQ(back.params.raw().size(), m.params.raw().size());
    for (std::size_t k = 0; k < m.params.raw().size(); ++k) {
      EXPECT_EQ(std::signbit(back.params.raw()[k]), std::signbit(m.params.raw()[k]));
    }
    EXPECT_EQ(model_to_text(back), text);
  }
}

TEST(ModelIo, StructureTextRoundTrips) {
  Rng rng(18);
  fixtures::FormulaShape shape;
  shape.flexible = true;
  for (int i = 0; i < 100; ++i) {
    const auto f = fixtures::random_structure(rng, shape);
    EXPECT_EQ(parse_structure(print_structure(f)), f);
  }
}

TEST(ModelIo, SaveAndLoadFile) {
  Rng rng(2);
  const auto m = random_model(rng);
  const auto path = std::filesystem::temp_directory_path() / "wgstl_model_io" / "sub" / "m.json";
  save_model(path, m);
  EXPECT_EQ(load_model(path), m);
  std::filesystem::remove_all(path.parent_path().parent_path());
  EXPECT_THROW(load_model(path), ValidationError);
}

std::string expect_error(const Json& j) {
  try {
    model_from_json(j);
  } catch (const ValidationError& e) {
    return e.what();
  }
  ADD_FAILURE() << "accepted a corrupt model";
  return {};
}

TEST(ModelIo, CorruptFilesNameTheField) {
  const auto good = read_json_file(WGSTL_DATA_DIR "/models/rain_albury.json");
  ASSERT_NO_THROW(model_from_json(good));

  auto j = good;
  j["parameters"][2]["raw"] = "oops";
  EXPECT_NE(expect_error(j).find("$.parameters[2].raw"), std::string::npos);
  j = good;
  j["parameters"][2]["raw"][0] = "oops";
  EXPECT_NE(expect_error(j).find("$.parameters[2].raw[0]"), std::string::npos);
  j = good;
  j.erase("root");
  EXPECT_NE(expect_error(j).find("root"), std::string::npos);
  j = good;
  j["format_version"] = 99;
  EXPECT_NE(expect_error(j).find("$.format_version"), std::string::npos);
  j = good;
  j["operator_assignment"]["n1"] = "sometimes";
  EXPECT_NE(expect_error(j).find("$.operator_assignment.n1"), std::string::npos);
  j = good;
  j["operator_assignment"]["n1"] = "exists";
  EXPECT_NE(expect_error(j).find("$.operator_assignment"), std::string::npos);
  j = good;
  j["parameters"][0]["raw"].push_back(1.0);
  EXPECT_NE(expect_error(j).find("$.parameters[0]"), std::string::npos);
  j = good;
  j["config"]["sigma"] = -1;
  EXPECT_NE(expect_error(j).find("$.config"), std::string::npos);
  j = good;
  j["structure_text"] = "(and (pred p)";
  EXPECT_NE(expect_error(j).find("$.structure_text"), std::string::npos);
  j = good;
  j["training_log"] = Json::array({Json{{"stage", 1}}});
  EXPECT_NE(expect_error(j).find("$.training_log[0]"), std::string::npos);
  EXPECT_THROW(model_from_text("{not json"), ValidationError);
}

TEST(Report, FixedFormatting) {
  EXPECT_EQ(format_fixed(0.68914), "0.6891");
  EXPECT_EQ(format_fixed(-0.00001), "0.0000");
  EXPECT_EQ(format_fixed(-1.5, 2), "-1.50");
  EXPECT_EQ(format_vector({0.1, 0.25}), "[0.1000, 0.2500]");
}

TEST(Report, RainModelPrintout) {
  const auto m = load_model(WGSTL_DATA_DIR "/models/rain_albury.json");
  const auto text = print_formula(m.structure, m.assignment, m.params);
  EXPECT_NE(text.find("w1=0.6891, w2=0.3109"), std::string::npos) << text;
  EXPECT_NE(text.find(render_predicate(m.params.predicates(m.formula())[0])), std::string::npos);
  EXPECT_NE(text.find("p := -0.0298*x1 + 0.0226*x2 + 0.0222*x3 - 0.0309*x4 <= 0.6593"), std::string::npos) << text;
  const auto first = text.substr(0, text.find('\n'));
  EXPECT_EQ(to_sexpr(parse_formula(first)), to_sexpr(m.formula()));
}

TEST(Report, CovidInspectShowsNeighborWeights) {
  const auto m = load_model(WGSTL_DATA_DIR "/models/covid_abruzzo.json");
  const auto text = inspect_text(m);
  EXPECT_NE(text.find("𝒲 = [0.0002, 0.0001, 0.9997]"), std::string::npos) << text;
  EXPECT_NE(text.find("Lazio"), std::string::npos);
  EXPECT_NE(text.find("x1=infected"), std::string::npos);
  EXPECT_NE(text.find("sum=1.000000"), std::string::npos);
}

TEST(Report, PrintedFormulaReparses) {
  Rng rng(21);
  fixtures::FormulaShape shape;
  shape.flexible = true;
  for (int i = 0; i < 100; ++i) {
    const auto m = random_model(rng);
    const auto text = print_formula(m.structure, m.assignment, m.params);
    EXPECT_EQ(to_sexpr(parse_formula(text.substr(0, text.find('\n')))), to_sexpr(m.formula()));
  }
}

}  // namespace
