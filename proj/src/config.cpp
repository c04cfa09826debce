#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "polya/error.hpp"
#include "polya/harness.hpp"

namespace polya {

using nlohmann::json;

namespace {

std::size_t line_of(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

json parse_json(const std::string& text) {
  // nlohmann keeps the last of repeated keys; the callback sees every key event first.
  std::vector<std::set<std::string>> open_objects;
  const json::parser_callback_t reject_duplicates = [&](int, json::parse_event_t event, json& parsed) {
    switch (event) {
      case json::parse_event_t::object_start:
        open_objects.emplace_back();
        break;
      case json::parse_event_t::key: {
        const auto key = parsed.get<std::string>();
        if (!open_objects.back().insert(key).second) {
          throw Error(ErrorCode::ParseError, "duplicate key '" + key + "'");
        }
        break;
      }
      case json::parse_event_t::object_end:
        open_objects.pop_back();
        break;
      default:
        break;
    }
    return true;
  };
  try {
    return json::parse(text, reject_duplicates);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line_of(text, e.byte)) + ": " + e.what());
  }
}

void require_known(const json& object, std::initializer_list<const char*> known, const std::string& where) {
  for (const auto& [key, value] : object.items()) {
    if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; })) {
      throw Error(ErrorCode::ParseError, "unknown key '" + key + "'" + where);
    }
  }
}

bool is_generator(const std::string& spec) {
  for (const char* prefix : {"complete:", "cycle:", "star:", "gnp:"}) {
    if (spec.rfind(prefix, 0) == 0) return true;
  }
  return false;
}

// Collects every violation before throwing, so one run reports them all.
class Violations {
 public:
  void add(std::string message) { messages_.push_back(std::move(message)); }

  void throw_if_any() const {
    if (messages_.empty()) return;
    std::string all;
    for (const auto& m : messages_) all += (all.empty() ? "" : "; ") + m;
    throw Error(ErrorCode::ValidationError, all);
  }

 private:
  std::vector<std::string> messages_;
};

template <typename T>
std::optional<T> read_integer(const json& value, const char* field, Violations& bad) {
  if (!value.is_number_integer()) {
    bad.add(std::string(field) + ": expected an integer");
    return std::nullopt;
  }
  if constexpr (std::is_unsigned_v<T>) {
    if (value.is_number_unsigned()) return value.get<T>();
    if (value.get<std::int64_t>() < 0) {
      bad.add(std::string(field) + ": must be non-negative");
      return std::nullopt;
    }
  }
  return value.get<T>();
}

std::optional<double> read_number(const json& value, const std::string& field, Violations& bad) {
  if (!value.is_number()) {
    bad.add(field + ": expected a number");
    return std::nullopt;
  }
  return value.get<double>();
}

std::vector<double> read_per_agent(const json& value, const char* field, std::size_t n, Violations& bad) {
  if (value.is_number()) return std::vector<double>(n, value.get<double>());
  if (value.is_array()) {
    if (value.size() != n) {
      bad.add(std::string(field) + ": expected " + std::to_string(n) + " values, got " + std::to_string(value.size()));
      return {};
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < n; ++i) {
      auto v = read_number(value[i], std::string(field) + "[" + std::to_string(i) + "]", bad);
      out.push_back(v.value_or(std::nan("")));
    }
    return out;
  }
  if (value.is_object() && value.contains("groups")) {
    require_known(value, {"groups"}, " in " + std::string(field));
    std::vector<double> out(n, std::nan(""));
    std::vector<int> seen(n, 0);
    if (!value["groups"].is_array()) {
      bad.add(std::string(field) + ".groups: expected a list");
      return {};
    }
    for (const auto& group : value["groups"]) {
      if (!group.is_object() || !group.contains("agents") || !group.contains("value")) {
        bad.add(std::string(field) + ".groups: each group needs 'agents' and 'value'");
        continue;
      }
      require_known(group, {"agents", "value"}, " in " + std::string(field) + ".groups");
      const auto v = read_number(group["value"], std::string(field) + ".groups.value", bad);
      if (!group["agents"].is_array()) {
        bad.add(std::string(field) + ".groups.agents: expected a list");
        continue;
      }
      for (const auto& a : group["agents"]) {
        if (!a.is_number_unsigned() || a.get<std::size_t>() >= n) {
          bad.add(std::string(field) + ".groups.agents: " + a.dump() + " is not an agent index");
          continue;
        }
        const auto i = a.get<std::size_t>();
        if (seen[i]++) bad.add(std::string(field) + ": agent " + std::to_string(i) + " assigned twice");
        if (v) out[i] = *v;
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (!seen[i]) bad.add(std::string(field) + ": agent " + std::to_string(i) + " has no group");
    }
    return out;
  }
  bad.add(std::string(field) + ": expected a number, a list, or {\"groups\": [...]}");
  return {};
}

void check_config(const ExperimentConfig& cfg, Violations& bad) {
  if (!cfg.network) {
    bad.add("graph: no network");
    return;
  }
  const auto n = cfg.network->size();
  if (cfg.gamma.size() != n) bad.add("gamma: expected " + std::to_string(n) + " values");
  for (std::size_t i = 0; i < cfg.gamma.size(); ++i) {
    const double g = cfg.gamma[i];
    if (!(g > 0.0) || !std::isfinite(g)) {
      bad.add("gamma[" + std::to_string(i) + "]: must be positive");
    } else if (std::abs(g - 1.0) < 1e-9) {
      bad.add("gamma[" + std::to_string(i) + "]: must differ from 1 (every agent holds a preference)");
    }
  }
  if (cfg.init_b1.size() != n) bad.add("init_b1: expected " + std::to_string(n) + " values");
  for (std::size_t i = 0; i < cfg.init_b1.size(); ++i) {
    if (!(cfg.init_b1[i] > 0.0 && cfg.init_b1[i] < 1.0)) {
      bad.add("init_b1[" + std::to_string(i) + "]: must lie in (0,1)");
    }
  }
  if (cfg.horizon < 2) bad.add("horizon: must be at least 2");
  if (cfg.checkpoints < 1) bad.add("checkpoints: must be at least 1");
  if (cfg.replications < 1) bad.add("replications: must be at least 1");
  if (cfg.threads < 1) bad.add("threads: must be at least 1");
  if (!(cfg.regime_tolerance >= 0.0)) bad.add("regime_tolerance: must be non-negative");
  const auto& d = cfg.diagnostics;
  if (!(d.martingale_ratio > 0.0) || d.martingale_ratio == 1.0) {
    bad.add("diagnostics.martingale_ratio: must be positive and different from 1");
  }
  if (!(d.coupling_radius > 0.0 && d.coupling_radius < 1.0)) bad.add("diagnostics.coupling_radius: must lie in (0,1)");
  if (d.rate_points < 10) bad.add("diagnostics.rate_points: at least 10 points are needed for a fit");
  if (d.rate_window) {
    const auto [lo, hi] = *d.rate_window;
    if (lo < 2 || hi > cfg.horizon || lo >= hi) bad.add("diagnostics.rate_window: must satisfy 2 <= lo < hi <= horizon");
  }
  if (cfg.output_dir.empty()) bad.add("output_dir: must not be empty");
}

}  // namespace

void validate(const ExperimentConfig& cfg) {
  Violations bad;
  check_config(cfg, bad);
  bad.throw_if_any();
}

ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  const json root = parse_json(text);
  if (!root.is_object()) throw Error(ErrorCode::ParseError, "config must be a JSON object");
  require_known(root,
                {"graph", "gamma", "init_b1", "horizon", "checkpoints", "replications", "base_seed", "estimators",
                 "diagnostics", "output_dir", "max_history_entries", "threads", "regime_tolerance"},
                "");
  for (const char* required : {"graph", "gamma", "horizon"}) {
    if (!root.contains(required)) throw Error(ErrorCode::ParseError, std::string("missing required key '") + required + "'");
  }

  ExperimentConfig cfg;
  Violations bad;

  if (!root["graph"].is_string()) {
    bad.add("graph: expected a generator spec or an edge-list path");
  } else {
    cfg.graph = root["graph"].get<std::string>();
    try {
      if (is_generator(cfg.graph)) {
        cfg.network = generate_network(cfg.graph);
      } else {
        const auto path = base_dir / cfg.graph;
        std::ifstream in(path);
        if (!in) throw Error(ErrorCode::ValidationError, "cannot open edge list " + path.string());
        const auto edges = parse_edge_list(in);
        cfg.network = build_network(edges);
      }
    } catch (const Error& e) {
      bad.add(std::string("graph: ") + e.what());
    }
  }
  bad.throw_if_any();  // nothing below can be checked without n
  const auto n = cfg.network->size();

  cfg.gamma = read_per_agent(root["gamma"], "gamma", n, bad);
  cfg.init_b1 = root.contains("init_b1") ? read_per_agent(root["init_b1"], "init_b1", n, bad)
                                         : std::vector<double>(n, 0.5);
  if (auto v = read_integer<std::int64_t>(root["horizon"], "horizon", bad)) cfg.horizon = *v;
  if (root.contains("checkpoints")) {
    if (auto v = read_integer<std::size_t>(root["checkpoints"], "checkpoints", bad)) cfg.checkpoints = *v;
  }
  if (root.contains("replications")) {
    if (auto v = read_integer<std::size_t>(root["replications"], "replications", bad)) cfg.replications = *v;
  }
  if (root.contains("base_seed")) {
    if (auto v = read_integer<std::uint64_t>(root["base_seed"], "base_seed", bad)) cfg.base_seed = *v;
  }
  if (root.contains("threads")) {
    if (auto v = read_integer<std::size_t>(root["threads"], "threads", bad)) cfg.threads = *v;
  }
  if (root.contains("max_history_entries")) {
    if (auto v = read_integer<std::uint64_t>(root["max_history_entries"], "max_history_entries", bad)) {
      cfg.max_history_entries = *v;
    }
  }
  if (root.contains("regime_tolerance")) {
    if (auto v = read_number(root["regime_tolerance"], "regime_tolerance", bad)) cfg.regime_tolerance = *v;
  }
  if (root.contains("output_dir")) {
    if (root["output_dir"].is_string()) {
      cfg.output_dir = root["output_dir"].get<std::string>();
    } else {
      bad.add("output_dir: expected a string");
    }
  }
  if (root.contains("estimators")) {
    const auto& list = root["estimators"];
    cfg.mle = cfg.belief = cfg.equilibrium = false;
    if (!list.is_array()) {
      bad.add("estimators: expected a list drawn from mle, belief, equilibrium");
    } else {
      for (const auto& e : list) {
        const auto name = e.is_string() ? e.get<std::string>() : e.dump();
        if (name == "mle") {
          cfg.mle = true;
        } else if (name == "belief") {
          cfg.belief = true;
        } else if (name == "equilibrium") {
          cfg.equilibrium = true;
        } else {
          bad.add("estimators: unknown estimator " + name);
        }
      }
    }
  }
  if (root.contains("diagnostics")) {
    const auto& d = root["diagnostics"];
    if (!d.is_object()) {
      bad.add("diagnostics: expected an object");
    } else {
      require_known(d,
                    {"martingale", "martingale_ratio", "coupling", "coupling_radius", "rate_fit", "rate_window",
                     "rate_points"},
                    " in diagnostics");
      auto flag = [&](const char* key, bool& out) {
        if (!d.contains(key)) return;
        if (d[key].is_boolean()) {
          out = d[key].get<bool>();
        } else {
          bad.add(std::string("diagnostics.") + key + ": expected true or false");
        }
      };
      auto& diag = cfg.diagnostics;
      flag("martingale", diag.martingale);
      flag("coupling", diag.coupling);
      flag("rate_fit", diag.rate_fit);
      if (d.contains("martingale_ratio")) {
        if (auto v = read_number(d["martingale_ratio"], "diagnostics.martingale_ratio", bad)) diag.martingale_ratio = *v;
      }
      if (d.contains("coupling_radius")) {
        if (auto v = read_number(d["coupling_radius"], "diagnostics.coupling_radius", bad)) diag.coupling_radius = *v;
      }
      if (d.contains("rate_points")) {
        if (auto v = read_integer<std::size_t>(d["rate_points"], "diagnostics.rate_points", bad)) diag.rate_points = *v;
      }
      if (d.contains("rate_window")) {
        const auto& w = d["rate_window"];
        if (w.is_array() && w.size() == 2 && w[0].is_number_integer() && w[1].is_number_integer()) {
          diag.rate_window = std::pair{w[0].get<std::int64_t>(), w[1].get<std::int64_t>()};
        } else {
          bad.add("diagnostics.rate_window: expected [t_lo, t_hi]");
        }
      }
    }
  }
  if (cfg.gamma.size() == n && cfg.init_b1.size() == n) check_config(cfg, bad);
  bad.throw_if_any();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot read config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path.parent_path());
}

std::string config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["graph"] = cfg.graph;
  j["gamma"] = cfg.gamma;
  j["init_b1"] = cfg.init_b1;
  j["horizon"] = cfg.horizon;
  j["checkpoints"] = cfg.checkpoints;
  j["replications"] = cfg.replications;
  j["base_seed"] = cfg.base_seed;
  json estimators = json::array();
  if (cfg.mle) estimators.push_back("mle");
  if (cfg.belief) estimators.push_back("belief");
  if (cfg.equilibrium) estimators.push_back("equilibrium");
  j["estimators"] = estimators;
  const auto& d = cfg.diagnostics;
  json diag;
  diag["martingale"] = d.martingale;
  diag["martingale_ratio"] = d.martingale_ratio;
  diag["coupling"] = d.coupling;
  diag["coupling_radius"] = d.coupling_radius;
  diag["rate_fit"] = d.rate_fit;
  diag["rate_points"] = d.rate_points;
  if (d.rate_window) diag["rate_window"] = {d.rate_window->first, d.rate_window->second};
  j["diagnostics"] = diag;
  j["output_dir"] = cfg.output_dir;
  j["max_history_entries"] = cfg.max_history_entries;
  j["threads"] = cfg.threads;
  j["regime_tolerance"] = cfg.regime_tolerance;
  return j.dump(2);
}

}  // namespace polya
