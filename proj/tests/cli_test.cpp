#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "test_support.hpp"
#include "wgstl/wgstl.hpp"
#include "wgstl_cli.hpp"

namespace {

using namespace wgstl;
namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("wgstl_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  // Four-node graph, data labeled by "eventually x > 0 at some neighbor".
  void make_synthetic(std::size_t per_class = 30, std::uint64_t seed = 1) {
    write_text_file(path("graph.json"), R"({"nodes": ["r", "a", "b", "c"], "edges": [["r","a"],["r","b"],["r","c"],["a","b"]]})");
    write_text_file(path("preds.json"), R"({"p": {"a": [1.0], "c": 0.0}})");
    const auto r = run({"synth", "--graph", path("graph.json"), "--formula-text", "(eventually [0 3] (exists (pred p)))",
                        "--predicates", path("preds.json"), "--root", "r", "--dims", "x", "--n-pos",
                        std::to_string(per_class), "--n-neg", std::to_string(per_class), "--seed", std::to_string(seed),
                        "--noise", "0.1", "--out", path("data.json")});
    ASSERT_EQ(r.code, 0) << r.err;
  }

  fs::path dir_;
};

TEST_F(Cli, HelpAndUsageErrors) {
  EXPECT_EQ(run({"--help"}).code, 0);
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"train", "--structure-text", "(pred p)"}).code, 2);  // no --root
  EXPECT_EQ(run({"make-graph", "--coords", path("c.json"), "--radius-km", "-3"}).code, 2);
}

TEST_F(Cli, TrainEvalPredictInspect) {
  make_synthetic();
  auto r = run({"train", "--data", path("data.json"), "--structure-text", "(tempX [0 3] (graphX (pred p)))", "--root", "r",
                "--epochs", "150", "--split", "0.7", "--out", path("out")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("formula:"), std::string::npos);
  EXPECT_NE(r.out.find("train accuracy: "), std::string::npos);
  EXPECT_NE(r.out.find("test accuracy: "), std::string::npos);
  for (const char* f : {"model.json", "log.txt", "formula.txt", "report.json"}) EXPECT_TRUE(fs::exists(path("out/") + f)) << f;

  r = run({"eval", "--model", path("out/model.json"), "--data", path("data.json"), "--report", path("eval.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("samples: 60"), std::string::npos);
  EXPECT_NE(r.out.find("accuracy: 100.00%"), std::string::npos) << r.out;
  EXPECT_TRUE(fs::exists(path("eval.json")));

  r = run({"predict", "--model", path("out/model.json"), "--data", path("data.json"), "--csv", path("pred.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto csv = read_text_file(path("pred.csv"));
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 61);

  r = run({"inspect", "--model", path("out/model.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("eventually"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("exists"), std::string::npos) << r.out;
}

TEST_F(Cli, TrainingTwiceGivesIdenticalModels) {
  make_synthetic(20, 3);
  for (const char* out : {"a", "b"}) {
    const auto r = run({"train", "--data", path("data.json"), "--structure-text", "(tempX [0 3] (graphX (pred p)))",
                        "--root", "r", "--epochs", "30", "--seed", "5", "--out", path(out)});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  EXPECT_EQ(read_text_file(path("a/model.json")), read_text_file(path("b/model.json")));
}

TEST_F(Cli, ConfigFileIsOverriddenByFlags) {
  make_synthetic(10, 2);
  write_text_file(path("cfg.toml"), "[train]\nepochs = 3\nseed = 11\nbatch-size = 4\n");
  auto r = run({"--config", path("cfg.toml"), "train", "--data", path("data.json"), "--structure-text",
                "(always [0 3] (exists (pred p)))", "--root", "r", "--out", path("o1")});
  ASSERT_EQ(r.code, 0) << r.err;
  auto m = load_model(path("o1/model.json"));
  EXPECT_EQ(m.config.epochs, 3u);
  EXPECT_EQ(m.config.seed, 11u);
  EXPECT_EQ(m.config.batch_size, 4u);
  r = run({"--config", path("cfg.toml"), "train", "--data", path("data.json"), "--structure-text",
           "(always [0 3] (exists (pred p)))", "--root", "r", "--out", path("o2"), "--epochs", "4"});
  ASSERT_EQ(r.code, 0) << r.err;
  m = load_model(path("o2/model.json"));
  EXPECT_EQ(m.config.epochs, 4u);
  EXPECT_EQ(m.config.seed, 11u);
}

TEST_F(Cli, MissingRootIsAUsageError) {
  make_synthetic(5);
  const auto r = run({"train", "--data", path("data.json"), "--structure-text", "(tempX [0 3] (graphX (pred p)))",
                      "--root", "Nowhere", "--out", path("out")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("Nowhere"), std::string::npos) << r.err;
}

TEST_F(Cli, DimensionMismatchNamesBothCounts) {
  make_synthetic(5);
  auto r = run({"train", "--data", path("data.json"), "--structure-text", "(tempX [0 3] (graphX (pred p)))", "--root",
                "r", "--epochs", "2", "--out", path("out")});
  ASSERT_EQ(r.code, 0) << r.err;
  write_text_file(path("preds2.json"), R"({"p": {"a": [1.0, 0.5], "c": 0.0}})");
  r = run({"synth", "--graph", path("graph.json"), "--formula-text", "(eventually [0 3] (exists (pred p)))",
           "--predicates", path("preds2.json"), "--root", "r", "--dims", "x,y", "--n-pos", "3", "--n-neg", "3", "--out",
           path("data2.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  r = run({"eval", "--model", path("out/model.json"), "--data", path("data2.json")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find('1'), std::string::npos);
  EXPECT_NE(r.err.find('2'), std::string::npos);
  EXPECT_NE(r.err.find("dimension"), std::string::npos) << r.err;
}

TEST_F(Cli, EmptyDatasetIsRejected) {
  write_text_file(path("empty.json"), R"({"graph": {"nodes": ["r","a"], "edges": [["r","a"]]}, "dimensions": ["x"], "samples": []})");
  const auto r = run({"train", "--data", path("empty.json"), "--structure-text", "(always [0 0] (exists (pred p)))",
                      "--root", "r", "--out", path("out")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("empty"), std::string::npos) << r.err;
}

TEST_F(Cli, CorruptModelNamesTheField) {
  auto j = read_json_file(WGSTL_DATA_DIR "/models/covid_abruzzo.json");
  j["parameters"][1]["raw"] = Json::array({"x"});
  write_text_file(path("bad.json"), j.dump(2));
  const auto r = run({"inspect", "--model", path("bad.json")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("$.parameters[1].raw[0]"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("bad.json"), std::string::npos) << r.err;
  EXPECT_EQ(run({"inspect", "--model", path("missing.json")}).code, 2);
}

TEST_F(Cli, ReferenceModelsInspect) {
  const auto r = run({"inspect", "--model", WGSTL_DATA_DIR "/models/rain_albury.json"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("w1=0.6891, w2=0.3109"), std::string::npos) << r.out;
}

TEST_F(Cli, MakeGraph) {
  write_text_file(path("coords.csv"), "id,lat,lon\nA,0,0\nB,0,1\nC,0,5\n");
  auto r = run({"make-graph", "--coords", path("coords.csv"), "--radius-km", "300", "--out", path("g.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto gf = graph_from_json(read_json_file(path("g.json")), "$");
  EXPECT_EQ(gf.graph.size(), 3u);
  EXPECT_EQ(gf.graph.edge_count(), 1u);
  EXPECT_TRUE(gf.graph.adjacent(gf.graph.index("A"), gf.graph.index("B")));
  r = run({"make-graph", "--coords", path("coords.csv"), "--radius-km", "600"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("\"edges\""), std::string::npos);
}

TEST_F(Cli, MonitorExampleOneHoldsOnlyAtTheHub) {
  const std::string ex = WGSTL_DATA_DIR "/example1/";
  const auto r = run({"monitor", "--data", ex + "data.json", "--formula", ex + "exists.gstl", "--predicates",
                      ex + "predicates.json", "--all-nodes", "--csv", path("m.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto csv = read_text_file(path("m.csv"));
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "sample,node,k,robustness,satisfied,label");
  std::vector<std::string> holds;
  while (std::getline(in, line)) {
    const auto cells = detail::split_csv_line(line);
    ASSERT_EQ(cells.size(), 6u);
    if (cells[4] == "true" || cells[4] == "1") holds.push_back(cells[1]);
  }
  EXPECT_EQ(holds, std::vector<std::string>{"v4"}) << csv;
}

TEST_F(Cli, MonitorCrispAndSoftSignsAgreeAtSmallSigma) {
  Rng rng(12);
  const Graph g({"r", "a", "b", "c"}, {{"r", "a"}, {"r", "b"}, {"b", "c"}});
  Dataset ds;
  ds.graph = g;
  ds.dim_names = {"x", "y"};
  for (int i = 0; i < 200; ++i) ds.samples.push_back({fixtures::random_trajectory(rng, g, 3, 2), 1});
  write_dataset(path("d.json"), ds);
  write_text_file(path("p.json"), R"({"p": {"a": [1.0, -0.5], "c": 0.2}, "q": {"a": [0.3, 1.0], "c": -0.1}})");
  const std::string formula = "(or (always [0 2] (forall (pred p))) (eventually [1 3] (exists (pred q))))";
  auto crisp = run({"monitor", "--data", path("d.json"), "--formula-text", formula, "--predicates", path("p.json"),
                    "--root", "r", "--crisp", "--csv", path("crisp.csv")});
  auto soft = run({"monitor", "--data", path("d.json"), "--formula-text", formula, "--predicates", path("p.json"),
                   "--root", "r", "--soft", "--sigma", "0.01", "--csv", path("soft.csv")});
  ASSERT_EQ(crisp.code, 0) << crisp.err;
  ASSERT_EQ(soft.code, 0) << soft.err;
  std::istringstream a(read_text_file(path("crisp.csv"))), b(read_text_file(path("soft.csv")));
  std::string la, lb;
  std::size_t rows = 0, agree = 0;
  std::getline(a, la);
  std::getline(b, lb);
  while (std::getline(a, la) && std::getline(b, lb)) {
    const double ra = std::stod(detail::split_csv_line(la)[3]);
    const double rb = std::stod(detail::split_csv_line(lb)[3]);
    ++rows;
    agree += (ra > 0) == (rb > 0) || std::abs(ra) < 0.02;
  }
  EXPECT_EQ(rows, 200u);
  EXPECT_EQ(agree, rows);
}

TEST_F(Cli, SynthFromModelAndTabularImport) {
  make_synthetic(5);
  auto r = run({"train", "--data", path("data.json"), "--structure-text", "(tempX [0 3] (graphX (pred p)))", "--root",
                "r", "--epochs", "5", "--out", path("out")});
  ASSERT_EQ(r.code, 0) << r.err;
  r = run({"synth", "--graph", path("data.json"), "--model", path("out/model.json"), "--n-pos", "4", "--n-neg", "4",
           "--margin", "0.001", "--out", path("again.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_dataset(path("again.json")).size(), 8u);

  write_text_file(path("n_r.csv"), "time,x\n0,1\n1,2\n2,\n3,4\n");
  write_text_file(path("n_a.csv"), "time,x\n0,1\n1,1\n2,1\n3,1\n");
  write_text_file(path("manifest.json"), R"({"graph": {"nodes": ["r","a"], "edges": [["r","a"]]},
    "samples": [{"label": 1, "files": {"r": "n_r.csv", "a": "n_a.csv"}}, {"label": -1, "files": {"r": "n_a.csv", "a": "n_a.csv"}}]})");
  r = run({"monitor", "--tabular", path("manifest.json"), "--formula-text", "(always [0 1] (exists (pred p)))",
           "--predicates", path("preds.json"), "--root", "r"});
  EXPECT_EQ(r.code, 0) << r.err;
  r = run({"monitor", "--tabular", path("manifest.json"), "--impute-zeros", "--window", "2", "--formula-text",
           "(always [0 1] (exists (pred p)))", "--predicates", path("preds.json"), "--root", "r"});
  EXPECT_EQ(r.code, 0) << r.err;
}

}  // namespace
