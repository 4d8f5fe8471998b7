#include "prefext/config.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <toml.hpp>

#include "prefext/error.hpp"

namespace prefext {

ModelConfig RunConfig::model() const {
  ModelConfig m = ModelConfig::standard(l, beta, loop_mode);
  if (initial_weights) m.initial_weights = *initial_weights;
  m.validate();
  return m;
}

void RunConfig::validate() const {
  (void)model();
  stopping.validate();
  if (threads < 1) throw ConfigError("threads", "must be >= 1");
}

LoopMode parse_loop_mode(const std::string& text) {
  if (text == "model0") return LoopMode::Model0;
  if (text == "model1") return LoopMode::Model1;
  throw ConfigError("loop_mode", "expected \"model0\" or \"model1\", got \"" + text + "\"");
}

std::string to_string(LoopMode mode) { return mode == LoopMode::Model0 ? "model0" : "model1"; }

std::vector<double> parse_number_list(const std::string& text, const std::string& key) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw ConfigError(key, "not a number: '" + item + "'");
    }
    while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
    if (used != item.size()) throw ConfigError(key, "not a number: '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError(key, "empty list");
  return out;
}

namespace {

std::uint64_t as_count(double v, const std::string& key, std::uint64_t min) {
  if (!(v >= static_cast<double>(min)) || v != std::floor(v) || v > 1.8e19) {
    throw ConfigError(key, "must be an integer >= " + std::to_string(min));
  }
  return static_cast<std::uint64_t>(v);
}

// Both document formats are funnelled through nlohmann::json.
void apply_document(RunConfig& cfg, const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("<root>", "expected a table of settings");
  for (const auto& [key, value] : doc.items()) {
    auto number = [&]() {
      if (!value.is_number()) throw ConfigError(key, "expected a number");
      return value.get<double>();
    };
    auto string = [&]() {
      if (!value.is_string()) throw ConfigError(key, "expected a string");
      return value.get<std::string>();
    };
    if (key == "l") {
      const auto v = as_count(number(), key, 1);
      if (v > 1'000'000) throw ConfigError(key, "must be <= 1000000");
      cfg.l = static_cast<std::uint32_t>(v);
    } else if (key == "beta") {
      cfg.beta = number();
    } else if (key == "loop_mode") {
      cfg.loop_mode = parse_loop_mode(string());
    } else if (key == "initial_weights") {
      if (!value.is_array() || value.empty()) throw ConfigError(key, "expected a non-empty array");
      std::vector<double> w;
      for (const auto& x : value) {
        if (!x.is_number()) throw ConfigError(key, "expected numbers");
        w.push_back(x.get<double>());
      }
      cfg.initial_weights = std::move(w);
    } else if (key == "alpha") {
      cfg.stopping.alpha = number();
    } else if (key == "stopping_kind") {
      const auto kind = string();
      if (kind != "floored_pareto") throw ConfigError(key, "only \"floored_pareto\" is available");
      cfg.stopping.kind = StoppingKind::FlooredPareto;
    } else if (key == "seed") {
      cfg.seed = as_count(number(), key, 0);
    } else if (key == "threads") {
      cfg.threads = static_cast<unsigned>(as_count(number(), key, 1));
    } else {
      throw ConfigError(key, "unknown key");
    }
  }
}

nlohmann::json toml_to_json(const toml::node& node) {
  if (const auto* t = node.as_table()) {
    nlohmann::json obj = nlohmann::json::object();
    for (const auto& [k, v] : *t) obj[std::string(k.str())] = toml_to_json(v);
    return obj;
  }
  if (const auto* a = node.as_array()) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& v : *a) arr.push_back(toml_to_json(v));
    return arr;
  }
  if (const auto* v = node.as_integer()) return v->get();
  if (const auto* v = node.as_floating_point()) return v->get();
  if (const auto* v = node.as_string()) return v->get();
  if (const auto* v = node.as_boolean()) return v->get();
  throw ConfigError("<value>", "unsupported TOML value type");
}

}  // namespace

void apply_toml(RunConfig& cfg, const std::string& text, const std::string& origin) {
  toml::table table;
  try {
    table = toml::parse(text, origin);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << e.description() << " at line " << e.source().begin.line;
    throw ConfigError(origin, msg.str());
  }
  apply_document(cfg, toml_to_json(table));
}

void apply_json(RunConfig& cfg, const std::string& text, const std::string& origin) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(origin, e.what());
  }
  apply_document(cfg, doc);
}

void apply_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot read '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const bool json = path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0;
  if (json) {
    apply_json(cfg, buf.str(), path);
  } else {
    apply_toml(cfg, buf.str(), path);
  }
}

std::string echo_json(const RunConfig& cfg) {
  const ModelConfig m = ModelConfig::standard(cfg.l, cfg.beta, cfg.loop_mode);
  nlohmann::json j;
  j["l"] = cfg.l;
  j["beta"] = cfg.beta;
  j["loop_mode"] = to_string(cfg.loop_mode);
  j["initial_weights"] = cfg.initial_weights ? *cfg.initial_weights : m.initial_weights;
  j["alpha"] = cfg.stopping.alpha;
  j["stopping_kind"] = "floored_pareto";
  j["seed"] = cfg.seed;
  j["threads"] = cfg.threads;
  return j.dump();
}

}  // namespace prefext
