#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "wgstl/error.hpp"
#include "wgstl/io.hpp"
#include "wgstl/model.hpp"
#include "wgstl/parser.hpp"

namespace wgstl {

inline constexpr int kModelFormatVersion = 1;

namespace detail {

inline SlotKind slot_kind_from_name(const std::string& s, const std::string& path) {
  for (SlotKind k : {SlotKind::PredicateCoef, SlotKind::PredicateOffset, SlotKind::ChildWeights, SlotKind::TimeWeights,
                     SlotKind::NeighborWeights, SlotKind::OperatorSelect}) {
    if (s == slot_kind_name(k)) return k;
  }
  throw ValidationError(path + ": unknown parameter kind '" + s + "'");
}

inline std::size_t as_index(const Json& j, const std::string& path) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0)) {
    throw ValidationError(path + ": expected a non-negative integer");
  }
  return j.get<std::size_t>();
}

// Every slot must agree with the formula node or predicate it claims to own.
inline void check_slot(const ParamSlot& s, const Formula& f, std::size_t dim, const std::string& path) {
  auto bad = [&](const std::string& why) { throw ValidationError(path + ": " + why); };
  if (s.kind == SlotKind::PredicateCoef || s.kind == SlotKind::PredicateOffset) {
    if (s.owner >= f.predicates().size()) bad("owner is not a predicate of the structure");
    const std::size_t want = s.kind == SlotKind::PredicateCoef ? dim : 1;
    if (s.size != want) bad("expected " + std::to_string(want) + " values");
    return;
  }
  if (s.owner >= f.size()) bad("owner is not a node of the structure");
  const auto& n = f.node(s.owner);
  switch (s.kind) {
    case SlotKind::ChildWeights:
      if (!is_connective(n.op)) bad("owner is not an and/or node");
      if (s.size != n.children.size()) bad("expected one weight per child");
      break;
    case SlotKind::TimeWeights:
      if (!is_temporal(n.op)) bad("owner is not a temporal node");
      if (s.size != n.hi - n.lo + 1) bad("expected one weight per interval step");
      break;
    case SlotKind::NeighborWeights:
      if (!is_graph(n.op)) bad("owner is not a graph operator");
      if (!s.at) bad("neighbor weights need 'at'");
      if (s.labels.size() != s.size || s.size == 0) bad("expected one label per neighbor weight");
      break;
    case SlotKind::OperatorSelect:
      if (!is_flexible(n.op)) bad("owner is not a flexible operator");
      if (s.size != 1) bad("expected one value");
      break;
    default: break;
  }
}

}  // namespace detail

inline Json train_config_to_json(const TrainConfig& c) {
  // jobs is left out on purpose: it never changes results.
  return Json{{"eta", c.eta},
              {"sigma", c.sigma},
              {"learning_rate", c.learning_rate},
              {"batch_size", c.batch_size},
              {"epochs", c.epochs},
              {"seed", c.seed},
              {"adam_beta1", c.adam_beta1},
              {"adam_beta2", c.adam_beta2},
              {"adam_eps", c.adam_eps},
              {"weight_init", c.weight_init},
              {"coef_init_scale", c.coef_init_scale}};
}

inline TrainConfig train_config_from_json(const Json& j, const std::string& path) {
  using namespace detail;
  TrainConfig c;
  c.eta = as_number(field(j, "eta", path), path + ".eta");
  c.sigma = as_number(field(j, "sigma", path), path + ".sigma");
  c.learning_rate = as_number(field(j, "learning_rate", path), path + ".learning_rate");
  c.batch_size = as_index(field(j, "batch_size", path), path + ".batch_size");
  c.epochs = as_index(field(j, "epochs", path), path + ".epochs");
  const auto& seed = field(j, "seed", path);
  if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<long long>() >= 0)) {
    throw ValidationError(path + ".seed: expected a non-negative integer");
  }
  c.seed = seed.get<std::uint64_t>();
  c.adam_beta1 = as_number(field(j, "adam_beta1", path), path + ".adam_beta1");
  c.adam_beta2 = as_number(field(j, "adam_beta2", path), path + ".adam_beta2");
  c.adam_eps = as_number(field(j, "adam_eps", path), path + ".adam_eps");
  c.weight_init = as_number(field(j, "weight_init", path), path + ".weight_init");
  c.coef_init_scale = as_number(field(j, "coef_init_scale", path), path + ".coef_init_scale");
  try {
    c.validate();
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
  return c;
}

inline Json model_to_json(const TrainedModel& m) {
  Json j;
  j["format_version"] = kModelFormatVersion;
  j["structure_text"] = print_structure(m.structure);
  j["root"] = m.root;
  j["dimensions"] = m.dim_names;
  Json assign = Json::object();
  for (const auto& [id, op] : m.assignment) assign["n" + std::to_string(id)] = std::string(keyword(op));
  j["operator_assignment"] = assign;
  Json params = Json::array();
  for (const auto& s : m.params.slots()) {
    Json p;
    p["id"] = s.id;
    p["kind"] = slot_kind_name(s.kind);
    p["owner"] = s.owner;
    if (s.at) p["at"] = *s.at;
    if (!s.labels.empty()) p["labels"] = s.labels;
    auto raw = m.params.values(s);
    p["raw"] = std::vector<double>(raw.begin(), raw.end());
    if (is_weight_slot(s.kind)) p["normalized"] = m.params.normalized(s);
    params.push_back(std::move(p));
  }
  j["parameters"] = std::move(params);
  j["config"] = train_config_to_json(m.config);
  Json log = Json::array();
  for (const auto& r : m.log) {
    log.push_back(
        Json{{"stage", r.stage}, {"epoch", r.epoch}, {"loss", r.loss}, {"accuracy", r.accuracy}, {"best_loss", r.best_loss}});
  }
  j["training_log"] = std::move(log);
  return j;
}

inline TrainedModel model_from_json(const Json& j) {
  using namespace detail;
  if (!j.is_object()) throw ValidationError("$: model file must be a JSON object");
  const auto version = as_integer(field(j, "format_version", "$"), "$.format_version");
  if (version != kModelFormatVersion) {
    throw ValidationError("$.format_version: unsupported version " + std::to_string(version));
  }
  TrainedModel m;
  try {
    m.structure = parse_structure(as_string(field(j, "structure_text", "$"), "$.structure_text"));
  } catch (const ParseError& e) {
    throw ValidationError(std::string("$.structure_text: ") + e.what());
  }
  m.root = as_string(field(j, "root", "$"), "$.root");
  m.dim_names = string_list(field(j, "dimensions", "$"), "$.dimensions");
  if (m.dim_names.empty()) throw ValidationError("$.dimensions: need at least one dimension");

  const auto& assign = field(j, "operator_assignment", "$");
  if (!assign.is_object()) throw ValidationError("$.operator_assignment: expected an object");
  for (auto it = assign.begin(); it != assign.end(); ++it) {
    const std::string p = "$.operator_assignment." + it.key();
    const auto& key = it.key();
    if (key.size() < 2 || key[0] != 'n' || key.find_first_not_of("0123456789", 1) != std::string::npos) {
      throw ValidationError(p + ": key must look like n<node id>");
    }
    const auto op = op_from_keyword(as_string(it.value(), p));
    if (!op) throw ValidationError(p + ": unknown operator");
    m.assignment[std::stoul(key.substr(1))] = *op;
  }
  Formula hardened;
  try {
    hardened = m.structure.harden(m.assignment);
  } catch (const ValidationError& e) {
    throw ValidationError(std::string("$.operator_assignment: ") + e.what());
  }

  std::vector<ParamSlot> slots;
  std::vector<double> raw;
  const auto& params = as_array(field(j, "parameters", "$"), "$.parameters");
  for (std::size_t i = 0; i < params.size(); ++i) {
    const std::string p = "$.parameters[" + std::to_string(i) + "]";
    ParamSlot s;
    s.id = as_string(field(params[i], "id", p), p + ".id");
    s.kind = slot_kind_from_name(as_string(field(params[i], "kind", p), p + ".kind"), p + ".kind");
    s.owner = as_index(field(params[i], "owner", p), p + ".owner");
    if (auto it = params[i].find("at"); it != params[i].end()) s.at = as_string(*it, p + ".at");
    if (auto it = params[i].find("labels"); it != params[i].end()) s.labels = string_list(*it, p + ".labels");
    const auto values = number_list(field(params[i], "raw", p), p + ".raw");
    s.size = values.size();
    check_slot(s, hardened, m.dim_names.size(), p);
    raw.insert(raw.end(), values.begin(), values.end());
    slots.push_back(std::move(s));
  }
  try {
    m.params = ParamStore::from_slots(std::move(slots), std::move(raw));
  } catch (const ValidationError& e) {
    throw ValidationError(std::string("$.parameters: ") + e.what());
  }
  for (std::size_t i = 0; i < hardened.predicates().size(); ++i) {
    if (!m.params.predicate_coef(i) || !m.params.predicate_offset(i)) {
      throw ValidationError("$.parameters: missing parameters for predicate '" + hardened.predicates()[i].name + "'");
    }
  }
  for (std::size_t id = 0; id < hardened.size(); ++id) {
    const auto& n = hardened.node(id);
    if ((is_connective(n.op) && !m.params.child_weights(id)) || (is_temporal(n.op) && !m.params.time_weights(id))) {
      throw ValidationError("$.parameters: missing weights for node " + std::to_string(id));
    }
  }

  m.config = train_config_from_json(field(j, "config", "$"), "$.config");
  const auto& log = as_array(field(j, "training_log", "$"), "$.training_log");
  for (std::size_t i = 0; i < log.size(); ++i) {
    const std::string p = "$.training_log[" + std::to_string(i) + "]";
    EpochRecord r;
    r.stage = static_cast<int>(as_integer(field(log[i], "stage", p), p + ".stage"));
    r.epoch = as_index(field(log[i], "epoch", p), p + ".epoch");
    r.loss = as_number(field(log[i], "loss", p), p + ".loss");
    r.accuracy = as_number(field(log[i], "accuracy", p), p + ".accuracy");
    r.best_loss = as_number(field(log[i], "best_loss", p), p + ".best_loss");
    m.log.push_back(r);
  }
  return m;
}

inline std::string model_to_text(const TrainedModel& m) { return model_to_json(m).dump(2) + "\n"; }

inline TrainedModel model_from_text(const std::string& text) { return model_from_json(parse_json(text, "model")); }

inline void save_model(const std::filesystem::path& path, const TrainedModel& m) {
  write_text_file(path, model_to_text(m));
}

inline TrainedModel load_model(const std::filesystem::path& path) {
  try {
    return model_from_text(read_text_file(path));
  } catch (const ParseError&) {
    throw;
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

}  // namespace wgstl
