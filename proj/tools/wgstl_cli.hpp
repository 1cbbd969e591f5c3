#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wgstl/wgstl.hpp"

namespace wgstl::cli {

namespace fs = std::filesystem;

enum ExitCode { kOk = 0, kRuntimeFailure = 1, kUsage = 2 };

// Where samples come from and how they are shaped before use.
struct DataOptions {
  std::string data;     // dataset JSON
  std::string tabular;  // CSV manifest
  bool impute_zeros = false;
  std::size_t window = 0;  // 0: no windowing
  std::size_t stride = 1;
  std::string label_next;  // "node:dim:threshold"

  void add(CLI::App* app) {
    auto* d = app->add_option("--data", data, "dataset JSON file");
    auto* t = app->add_option("--tabular", tabular, "manifest of per-node CSV files");
    d->excludes(t);
    app->add_flag("--impute-zeros", impute_zeros, "replace missing values by 0");
    app->add_option("--window", window, "cut trajectories into windows of this many steps");
    app->add_option("--stride", stride, "window stride")->check(CLI::PositiveNumber);
    app->add_option("--label-next", label_next,
                    "label windows by node:dim:threshold of the following step (dim is 1-based)");
  }

  Dataset load() const {
    if (data.empty() && tabular.empty()) throw ValidationError("give --data or --tabular");
    Dataset ds = !data.empty() ? read_dataset(data) : import_tabular(tabular);
    if (impute_zeros) ds = wgstl::impute_zeros(std::move(ds));
    if (window > 0) {
      LabelRule rule = ConstantFromSample{};
      if (!label_next.empty()) rule = parse_label_rule(label_next, ds);
      ds = wgstl::window(ds, window, stride, rule);
    } else if (!label_next.empty()) {
      throw ValidationError("--label-next needs --window");
    }
    return ds;
  }

  static NextStepDim parse_label_rule(const std::string& spec, const Dataset& ds) {
    const auto a = spec.find(':');
    const auto b = spec.rfind(':');
    if (a == std::string::npos || a == b) throw ValidationError("--label-next expects node:dim:threshold");
    NextStepDim rule;
    rule.node = spec.substr(0, a);
    try {
      const auto dim = std::stoul(spec.substr(a + 1, b - a - 1));
      if (dim == 0 || dim > ds.dim()) throw ValidationError("--label-next dimension out of range");
      rule.dim = dim - 1;
      rule.threshold = std::stod(spec.substr(b + 1));
    } catch (const std::logic_error&) {
      throw ValidationError("--label-next expects node:dim:threshold");
    }
    return rule;
  }
};

// A formula given inline or by file, plus optional predicate coefficients.
struct FormulaOptions {
  std::string file;
  std::string text;
  std::string predicates;  // JSON {name: {"a": [...], "c": x}}

  void add(CLI::App* app, const std::string& what) {
    auto* f = app->add_option("--" + what, file, what + " file (s-expression grammar)");
    auto* t = app->add_option("--" + what + "-text", text, what + " given inline");
    f->excludes(t);
  }

  bool given() const { return !file.empty() || !text.empty(); }

  std::string source() const {
    if (!file.empty()) return read_text_file(file);
    if (!text.empty()) return text;
    throw ValidationError("no formula given");
  }
};

inline std::vector<Predicate> read_predicates(const std::string& path) {
  const Json j = read_json_file(path);
  if (!j.is_object()) throw ValidationError(path + ": expected {name: {a: [...], c: number}}");
  std::vector<Predicate> out;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string p = "$." + it.key();
    Predicate pr;
    pr.name = it.key();
    pr.a = detail::number_list(detail::field(it.value(), "a", p), p + ".a");
    pr.c = detail::as_number(detail::field(it.value(), "c", p), p + ".c");
    out.push_back(std::move(pr));
  }
  return out;
}

inline void check_root(const Dataset& ds, const std::string& root) {
  if (ds.graph.find(root) == Graph::npos) throw ValidationError("root node '" + root + "' is not in the graph");
}

inline std::string percent(double x) { return format_fixed(x, 2) + "%"; }

inline std::string log_table(const TrainingLog& log) {
  std::ostringstream s;
  s << "stage  epoch        loss  accuracy   best_loss\n";
  for (const auto& r : log) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%5d  %5zu  %10.6g  %7.2f%%  %10.6g\n", r.stage, r.epoch, r.loss, r.accuracy,
                  r.best_loss);
    s << buf;
  }
  return s.str();
}

inline void add_train_config(CLI::App* app, TrainConfig& c) {
  app->add_option("--eta", c.eta, "loss temperature");
  app->add_option("--sigma", c.sigma, "aggregation smoothness");
  app->add_option("--lr", c.learning_rate, "Adam learning rate");
  app->add_option("--batch-size", c.batch_size, "mini-batch size");
  app->add_option("--epochs", c.epochs, "epochs per training step");
  app->add_option("--seed", c.seed, "random seed");
  app->add_option("--beta1", c.adam_beta1, "Adam beta1");
  app->add_option("--beta2", c.adam_beta2, "Adam beta2");
  app->add_option("--adam-eps", c.adam_eps, "Adam epsilon");
  app->add_option("--weight-init", c.weight_init, "initial raw importance weight");
  app->add_option("--coef-init-scale", c.coef_init_scale, "predicate coefficients start in [-s, s]");
}

struct TrainArgs {
  DataOptions data;
  std::string test_data;
  double split = 0.0;
  std::uint64_t split_seed = 0;
  FormulaOptions structure;
  std::string root;
  std::string out = "out";
  TrainConfig config;
  std::size_t jobs = 1;
};

inline int cmd_train(const TrainArgs& a, std::ostream& out) {
  Dataset ds = a.data.load();
  check_root(ds, a.root);
  const Formula structure = parse_structure(a.structure.source());
  Dataset test;
  bool have_test = false;
  if (a.split > 0.0) {
    auto parts = split(ds, a.split, a.split_seed);
    ds = std::move(parts.first);
    test = std::move(parts.second);
    have_test = !test.empty();
  }
  if (!a.test_data.empty()) {
    DataOptions t = a.data;
    t.data = a.test_data;
    t.tabular.clear();
    test = t.load();
    have_test = true;
  }
  TrainConfig cfg = a.config;
  cfg.jobs = a.jobs;
  const TrainedModel m = train(ds, structure, a.root, cfg);

  const double train_acc = evaluate(m, ds, a.jobs);
  std::optional<double> test_acc;
  if (have_test) test_acc = evaluate(m, test, a.jobs);

  const fs::path dir = a.out;
  const std::string formula = print_formula(m.structure, m.assignment, m.params);
  save_model(dir / "model.json", m);
  write_text_file(dir / "log.txt", log_table(m.log));
  write_text_file(dir / "formula.txt", formula);
  Json report{{"train_samples", ds.size()},
              {"train_accuracy", train_acc},
              {"test_samples", have_test ? test.size() : 0},
              {"test_accuracy", test_acc ? Json(*test_acc) : Json(nullptr)},
              {"formula", to_sexpr(m.formula())}};
  write_text_file(dir / "report.json", report.dump(2) + "\n");

  out << "formula:\n" << formula;
  out << "train accuracy: " << percent(train_acc) << "\n";
  if (test_acc) out << "test accuracy: " << percent(*test_acc) << "\n";
  out << "model written to " << (dir / "model.json").string() << "\n";
  return kOk;
}

struct EvalArgs {
  std::string model;
  DataOptions data;
  std::size_t jobs = 1;
  std::string report;
};

inline int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const TrainedModel m = load_model(a.model);
  const Dataset ds = a.data.load();
  if (ds.empty()) throw ValidationError("dataset is empty");
  check_root(ds, m.root);
  const double acc = evaluate(m, ds, a.jobs);
  out << "samples: " << ds.size() << "\n";
  out << "accuracy: " << percent(acc) << "\n";
  if (!a.report.empty()) write_text_file(a.report, Json{{"samples", ds.size()}, {"accuracy", acc}}.dump(2) + "\n");
  return kOk;
}

struct PredictArgs {
  std::string model;
  DataOptions data;
  std::size_t jobs = 1;
  std::string csv;
};

inline int cmd_predict(const PredictArgs& a, std::ostream& out) {
  const TrainedModel m = load_model(a.model);
  const Dataset ds = a.data.load();
  if (ds.empty()) throw ValidationError("dataset is empty");
  check_root(ds, m.root);
  check_compatible(m, ds);
  const Formula f = m.formula();
  const auto r = robustness_all(f, m.params, ds, ds.graph.index(m.root), m.config.sigma, a.jobs);
  std::ostringstream csv;
  csv << "sample,robustness,predicted,label\n";
  out << "sample  robustness  predicted  label\n";
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const int pred = r[i] >= 0.0 ? 1 : -1;
    char buf[128];
    std::snprintf(buf, sizeof buf, "%6zu  %10.6f  %9d  %5d\n", i, r[i], pred, ds.samples[i].label);
    out << buf;
    csv << i << ',' << Json(r[i]).dump() << ',' << pred << ',' << ds.samples[i].label << '\n';
  }
  if (!a.csv.empty()) write_text_file(a.csv, csv.str());
  return kOk;
}

struct MonitorArgs {
  std::string model;
  FormulaOptions formula;
  DataOptions data;
  std::string root;
  bool crisp = false;
  bool soft = false;
  double sigma = 1.0;
  bool all_nodes = false;
  bool all_steps = false;
  std::string csv;
};

// Per-sample robustness table. --all-nodes evaluates at every node and
// --all-steps at every step the formula fits in, which gives robustness curves.
inline int cmd_monitor(const MonitorArgs& a, std::ostream& out) {
  if (a.crisp && a.soft) throw ValidationError("--crisp and --soft are exclusive");
  const bool soft = a.soft;
  const Dataset ds = a.data.load();
  if (ds.empty()) throw ValidationError("dataset is empty");

  Formula f;
  std::vector<Predicate> preds;
  std::optional<TrainedModel> model;
  std::string root = a.root;
  if (!a.model.empty()) {
    if (a.formula.given()) throw ValidationError("give either --model or --formula, not both");
    model = load_model(a.model);
    f = model->formula();
    preds = model->params.predicates(f);
    if (root.empty()) root = model->root;
    check_compatible(*model, ds);
  } else {
    f = parse_formula(a.formula.source());
    if (!f.is_hardened()) throw ValidationError("monitoring needs concrete operators, not tempX/graphX");
    if (a.formula.predicates.empty()) throw ValidationError("--predicates is required with --formula");
    preds = resolve_predicates(f, read_predicates(a.formula.predicates));
  }
  if (root.empty() && !a.all_nodes) throw ValidationError("--root is required (or --all-nodes)");
  if (!root.empty()) check_root(ds, root);
  if (!(a.sigma > 0.0)) throw ValidationError("--sigma must be positive");
  const double sigma = model ? model->config.sigma : a.sigma;
  if (model && soft && a.all_nodes) throw ValidationError("a model's neighbor weights exist only for its root");

  std::vector<NodeIndex> nodes;
  if (a.all_nodes) {
    for (NodeIndex v = 0; v < ds.graph.size(); ++v) nodes.push_back(v);
  } else {
    nodes.push_back(ds.graph.index(root));
  }
  const std::size_t reach = f.required_horizon();
  if (reach > ds.horizon()) f.check_horizon(ds.horizon());
  const std::size_t last_k = a.all_steps ? ds.horizon() - reach : 0;

  // Parameter stores for soft monitoring: the model's, or equal weights.
  auto soft_params = [&](NodeIndex v) {
    if (model) return model->params;
    ParamStore ps = ParamStore::create(f, ds.graph, ds.graph.name(v), ds.dim());
    for (std::size_t i = 0; i < preds.size(); ++i) ps.set_predicate(i, preds[i]);
    return ps;
  };

  std::ostringstream csv;
  csv << "sample,node,k,robustness,satisfied,label\n";
  out << (soft ? "soft" : "crisp") << " robustness\n";
  out << "sample  node          k  robustness  satisfied  label\n";
  for (auto v : nodes) {
    std::optional<ParamStore> ps;
    if (soft) ps = soft_params(v);
    for (std::size_t i = 0; i < ds.size(); ++i) {
      const auto& t = ds.samples[i].trajectory;
      for (std::size_t k = 0; k <= last_k; ++k) {
        double r = 0.0;
        bool sat = false;
        if (soft) {
          if (k != 0) {
            auto shifted = t.slice(k, t.length() - k);
            r = smooth_robustness(f, *ps, shifted, ds.graph, v, sigma);
          } else {
            r = smooth_robustness(f, *ps, t, ds.graph, v, sigma);
          }
          sat = r > 0.0;
        } else {
          r = crisp_robustness(t, ds.graph, v, k, f, preds);
          sat = boolean_sat(t, ds.graph, v, k, f, preds);
        }
        char buf[160];
        std::snprintf(buf, sizeof buf, "%6zu  %-12s %2zu  %10.6f  %9s  %5d\n", i, ds.graph.name(v).c_str(), k, r,
                      sat ? "true" : "false", ds.samples[i].label);
        out << buf;
        csv << i << ',' << ds.graph.name(v) << ',' << k << ',' << Json(r).dump() << ',' << (sat ? 1 : 0) << ','
            << ds.samples[i].label << '\n';
      }
    }
  }
  if (!a.csv.empty()) write_text_file(a.csv, csv.str());
  return kOk;
}

struct SynthArgs {
  std::string graph;
  std::string model;
  FormulaOptions formula;
  std::string root;
  std::string dims;
  SynthOptions opt;
  std::size_t horizon = 0;
  std::string out;
};

inline std::vector<std::string> split_names(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s + ",") {
    if (ch == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  return out;
}

inline int cmd_synth(const SynthArgs& a, std::ostream& out) {
  Formula f;
  std::vector<Predicate> preds;
  std::string root = a.root;
  std::vector<std::string> dims = split_names(a.dims);
  GraphFile gf;
  if (!a.model.empty()) {
    if (a.formula.given()) throw ValidationError("give either --model or --formula, not both");
    const auto m = load_model(a.model);
    f = m.formula();
    preds = m.params.predicates(f);
    if (root.empty()) root = m.root;
    if (dims.empty()) dims = m.dim_names;
  } else {
    f = parse_formula(a.formula.source());
    if (a.formula.predicates.empty()) throw ValidationError("--predicates is required with --formula");
    preds = resolve_predicates(f, read_predicates(a.formula.predicates));
  }
  if (a.graph.empty()) throw ValidationError("--graph is required");
  const Json gj = read_json_file(a.graph);
  gf = graph_from_json(gj.contains("graph") ? gj["graph"] : gj, "graph");
  if (root.empty()) throw ValidationError("--root is required");
  if (gf.graph.find(root) == Graph::npos) throw ValidationError("root node '" + root + "' is not in the graph");
  if (dims.empty()) {
    const std::size_t d = preds.empty() ? 1 : preds.front().a.size();
    for (std::size_t j = 0; j < d; ++j) dims.push_back("x" + std::to_string(j + 1));
  }
  SynthOptions opt = a.opt;
  if (a.horizon > 0) opt.horizon = a.horizon;
  Dataset ds = synth_dataset(gf.graph, f, preds, root, dims, opt);
  ds.coords = gf.coords;
  if (a.out.empty()) throw ValidationError("--out is required");
  write_dataset(a.out, ds);
  out << "wrote " << ds.size() << " samples (" << ds.count_label(1) << " positive, " << ds.count_label(-1)
      << " negative, horizon " << ds.horizon() << ") to " << a.out << "\n";
  return kOk;
}

inline int cmd_inspect(const std::string& model, std::ostream& out) {
  out << inspect_text(load_model(model));
  return kOk;
}

struct MakeGraphArgs {
  std::string coords;
  double radius_km = 300.0;
  std::string out;
};

inline int cmd_make_graph(const MakeGraphArgs& a, std::ostream& out) {
  const auto coords = read_coords(a.coords);
  const Graph g = radius_graph(coords, a.radius_km);
  std::map<std::string, LatLon> cmap(coords.begin(), coords.end());
  const std::string text = graph_to_json(g, cmap).dump(2) + "\n";
  if (a.out.empty()) {
    out << text;
  } else {
    write_text_file(a.out, text);
    out << g.size() << " nodes, " << g.edge_count() << " edges within " << format_fixed(a.radius_km, 1)
        << " km written to " << a.out << "\n";
  }
  return kOk;
}

// Parses `args` (without the program name) and runs one subcommand.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Learn and monitor weighted graph-based temporal logic formulas", "wgstl"};
  app.set_config("--config", "", "TOML or INI file with option values; command-line flags take precedence");
  app.require_subcommand(1);

  TrainArgs train_args;
  auto* train = app.add_subcommand("train", "learn operators and parameters from labeled data");
  train_args.data.add(train);
  train->add_option("--test-data", train_args.test_data, "held-out dataset JSON");
  train->add_option("--split", train_args.split, "fraction of --data used for training; the rest is the test set")
      ->check(CLI::Range(0.0, 1.0));
  train->add_option("--split-seed", train_args.split_seed, "seed for --split");
  train_args.structure.add(train, "structure");
  train->add_option("--root", train_args.root, "node at which formulas are evaluated")->required();
  train->add_option("--out", train_args.out, "output directory");
  train->add_option("--jobs", train_args.jobs, "worker threads")->check(CLI::PositiveNumber);
  add_train_config(train, train_args.config);

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "accuracy of a model on labeled data");
  eval->add_option("--model", eval_args.model, "model file")->required();
  eval_args.data.add(eval);
  eval->add_option("--jobs", eval_args.jobs, "worker threads")->check(CLI::PositiveNumber);
  eval->add_option("--report", eval_args.report, "write a JSON report here");

  PredictArgs predict_args;
  auto* predict = app.add_subcommand("predict", "per-sample robustness and predicted label");
  predict->add_option("--model", predict_args.model, "model file")->required();
  predict_args.data.add(predict);
  predict->add_option("--jobs", predict_args.jobs, "worker threads")->check(CLI::PositiveNumber);
  predict->add_option("--csv", predict_args.csv, "write predictions as CSV");

  MonitorArgs monitor_args;
  auto* monitor = app.add_subcommand("monitor", "robustness and satisfaction of a formula on data");
  monitor->add_option("--model", monitor_args.model, "use a trained model's formula and parameters");
  monitor_args.formula.add(monitor, "formula");
  monitor->add_option("--predicates", monitor_args.formula.predicates, "predicate coefficients JSON");
  monitor_args.data.add(monitor);
  monitor->add_option("--root", monitor_args.root, "evaluation node");
  monitor->add_flag("--crisp", monitor_args.crisp, "min/max semantics (default)");
  monitor->add_flag("--soft", monitor_args.soft, "weighted smooth semantics");
  monitor->add_option("--sigma", monitor_args.sigma, "smoothness for --soft without a model");
  monitor->add_flag("--all-nodes", monitor_args.all_nodes, "evaluate at every node");
  monitor->add_flag("--all-steps", monitor_args.all_steps, "evaluate at every step the formula fits");
  monitor->add_option("--csv", monitor_args.csv, "write the table as CSV");

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "generate a labeled dataset from a formula");
  synth->add_option("--graph", synth_args.graph, "graph JSON (or a dataset whose graph to use)");
  synth->add_option("--model", synth_args.model, "use a trained model's formula");
  synth_args.formula.add(synth, "formula");
  synth->add_option("--predicates", synth_args.formula.predicates, "predicate coefficients JSON");
  synth->add_option("--root", synth_args.root, "evaluation node");
  synth->add_option("--dims", synth_args.dims, "comma-separated dimension names");
  synth->add_option("--n-pos", synth_args.opt.n_pos, "positive samples")->required();
  synth->add_option("--n-neg", synth_args.opt.n_neg, "negative samples")->required();
  synth->add_option("--noise", synth_args.opt.noise, "Gaussian jitter std-dev");
  synth->add_option("--margin", synth_args.opt.margin, "minimum |robustness| of emitted samples");
  synth->add_option("--horizon", synth_args.horizon, "horizon (default: what the formula needs)");
  synth->add_option("--seed", synth_args.opt.seed, "random seed");
  synth->add_option("--out", synth_args.out, "dataset JSON to write")->required();

  std::string inspect_model;
  auto* inspect = app.add_subcommand("inspect", "human-readable dump of a model");
  inspect->add_option("--model", inspect_model, "model file")->required();

  MakeGraphArgs graph_args;
  auto* make_graph = app.add_subcommand("make-graph", "connect nodes within a great-circle radius");
  make_graph->add_option("--coords", graph_args.coords, "coordinates: JSON {id: [lat, lon]} or CSV id,lat,lon")
      ->required();
  make_graph->add_option("--radius-km", graph_args.radius_km, "radius in km")->check(CLI::PositiveNumber);
  make_graph->add_option("--out", graph_args.out, "graph JSON to write (default: stdout)");

  std::vector<std::string> argv_storage{"wgstl"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& s : argv_storage) argv.push_back(s.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (*train) return cmd_train(train_args, out);
    if (*eval) return cmd_eval(eval_args, out);
    if (*predict) return cmd_predict(predict_args, out);
    if (*monitor) return cmd_monitor(monitor_args, out);
    if (*synth) return cmd_synth(synth_args, out);
    if (*inspect) return cmd_inspect(inspect_model, out);
    if (*make_graph) return cmd_make_graph(graph_args, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const NumericError& e) {
    err << "error: " << e.what() << "\n";
    return kRuntimeFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntimeFailure;
  }
  return kUsage;
}

}  // namespace wgstl::cli
