#include "lidfl/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace lidfl {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double to_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto res = std::from_chars(text.data(), end, v);
  if (res.ec != std::errc{} || res.ptr != end || !std::isfinite(v)) {
    throw ConfigError("key '" + key + "': expected a number, got '" + text + "'");
  }
  return v;
}

std::uint64_t to_u64(const std::string& key, const std::string& text) {
  std::uint64_t v = 0;
  const char* end = text.data() + text.size();
  auto res = std::from_chars(text.data(), end, v);
  if (res.ec != std::errc{} || res.ptr != end) {
    throw ConfigError("key '" + key + "': expected a non-negative integer, got '" + text + "'");
  }
  return v;
}

std::size_t to_size(const std::string& key, const std::string& text) {
  return static_cast<std::size_t>(to_u64(key, text));
}

bool to_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError("key '" + key + "': expected true or false, got '" + text + "'");
}

std::string bool_text(bool v) { return v ? "true" : "false"; }

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

/// Wraps an enum/value parser so its error names the key.
template <typename F>
auto keyed(const std::string& key, F&& f) {
  try {
    return f();
  } catch (const ConfigError& e) {
    throw ConfigError("key '" + key + "': " + e.what());
  }
}

struct KeyImpl {
  ConfigKey meta;
  std::function<void(RunConfig&, const ConfigEntry&)> set;
  std::function<std::string(const RunConfig&)> get;
};

using Setter = std::function<void(RunConfig&, const std::string&)>;

KeyImpl scalar(std::string name, std::string help, bool sweepable, Setter set,
               std::function<std::string(const RunConfig&)> get) {
  KeyImpl k;
  k.meta = ConfigKey{name, std::move(help), sweepable, false};
  k.set = [name, set = std::move(set)](RunConfig& c, const ConfigEntry& e) {
    if (e.is_list) {
      if (e.values.size() != 1) throw ConfigError("key '" + name + "' does not take a list");
    }
    set(c, e.values.front());
  };
  k.get = std::move(get);
  return k;
}

const std::vector<KeyImpl>& key_table() {
  static const std::vector<KeyImpl> table = [] {
    std::vector<KeyImpl> t;
    t.push_back(scalar(
        "method", "lidfl | lidfl_agg | baseline (default lidfl)", true,
        [](RunConfig& c, const std::string& v) { c.method = keyed("method", [&] { return parse_method(v); }); },
        [](const RunConfig& c) { return to_string(c.method); }));
    t.push_back(scalar(
        "m", "client count (default 35)", false,
        [](RunConfig& c, const std::string& v) { c.m = to_size("m", v); },
        [](const RunConfig& c) { return std::to_string(c.m); }));
    t.push_back(scalar(
        "gamma", "honest fraction k/m, gamma*m integral (default 0.4, i.e. 60% Byzantine)", true,
        [](RunConfig& c, const std::string& v) { c.gamma = to_double("gamma", v); },
        [](const RunConfig& c) { return format_double(c.gamma); }));
    t.push_back(scalar(
        "q", "model list size or 'auto' for floor(1/gamma) (default auto)", true,
        [](RunConfig& c, const std::string& v) {
          if (v == "auto") {
            c.q.reset();
          } else {
            c.q = to_size("q", v);
          }
        },
        [](const RunConfig& c) { return c.q ? std::to_string(*c.q) : std::string("auto"); }));
    t.push_back(scalar(
        "rounds", "global rounds T (default 1500)", false,
        [](RunConfig& c, const std::string& v) { c.rounds = to_size("rounds", v); },
        [](const RunConfig& c) { return std::to_string(c.rounds); }));
    t.push_back(scalar(
        "seed", "master seed (default 1)", true,
        [](RunConfig& c, const std::string& v) { c.seed = to_u64("seed", v); },
        [](const RunConfig& c) { return std::to_string(c.seed); }));
    t.push_back(scalar(
        "repeat", "runs per grid cell with consecutive seeds (default 1)", false,
        [](RunConfig& c, const std::string& v) { c.repeat = to_size("repeat", v); },
        [](const RunConfig& c) { return std::to_string(c.repeat); }));
    t.push_back(scalar(
        "eval.every", "test evaluation period in rounds (default 10)", false,
        [](RunConfig& c, const std::string& v) { c.eval_every = to_size("eval.every", v); },
        [](const RunConfig& c) { return std::to_string(c.eval_every); }));
    t.push_back(scalar(
        "exec.policy", "serial | parallel fan-out inside a run (default parallel)", false,
        [](RunConfig& c, const std::string& v) {
          if (v == "serial") {
            c.policy = ExecPolicy::serial;
          } else if (v == "parallel") {
            c.policy = ExecPolicy::parallel;
          } else {
            throw ConfigError("key 'exec.policy': expected serial or parallel, got '" + v + "'");
          }
        },
        [](const RunConfig& c) { return std::string(c.policy == ExecPolicy::serial ? "serial" : "parallel"); }));

    t.push_back(scalar(
        "model.kind", "softmax | mlp (default softmax)", false,
        [](RunConfig& c, const std::string& v) {
          c.model.kind = keyed("model.kind", [&] { return parse_model_kind(v); });
        },
        [](const RunConfig& c) { return to_string(c.model.kind); }));
    t.push_back(scalar(
        "model.hidden", "MLP hidden width (default 0; mlp needs >= 1)", false,
        [](RunConfig& c, const std::string& v) { c.model.hidden = to_size("model.hidden", v); },
        [](const RunConfig& c) { return std::to_string(c.model.hidden); }));
    t.push_back(scalar(
        "model.l2", "L2 coefficient lambda (default 0.01)", false,
        [](RunConfig& c, const std::string& v) { c.model.l2 = to_double("model.l2", v); },
        [](const RunConfig& c) { return format_double(c.model.l2); }));

    t.push_back(scalar(
        "data.generator", "gaussian-mixture | file (default gaussian-mixture)", false,
        [](RunConfig& c, const std::string& v) {
          c.data.generator = keyed("data.generator", [&] { return parse_generator_kind(v); });
        },
        [](const RunConfig& c) { return to_string(c.data.generator); }));
    t.push_back(scalar(
        "data.n", "sample count (default 4200)", false,
        [](RunConfig& c, const std::string& v) { c.data.n = to_size("data.n", v); },
        [](const RunConfig& c) { return std::to_string(c.data.n); }));
    t.push_back(scalar(
        "data.p", "feature dimension, also the model input width (default 10)", false,
        [](RunConfig& c, const std::string& v) {
          c.data.dim = to_size("data.p", v);
          c.model.input_dim = c.data.dim;
        },
        [](const RunConfig& c) { return std::to_string(c.data.dim); }));
    t.push_back(scalar(
        "data.classes", "class count, also the model output width (default 10)", false,
        [](RunConfig& c, const std::string& v) {
          c.data.classes = to_size("data.classes", v);
          c.model.classes = c.data.classes;
        },
        [](const RunConfig& c) { return std::to_string(c.data.classes); }));
    t.push_back(scalar(
        "data.separation", "radius of the class-mean sphere (default 3)", false,
        [](RunConfig& c, const std::string& v) { c.data.separation = to_double("data.separation", v); },
        [](const RunConfig& c) { return format_double(c.data.separation); }));
    t.push_back(scalar(
        "data.sigma", "per-feature noise std (default 1)", false,
        [](RunConfig& c, const std::string& v) { c.data.noise_sigma = to_double("data.sigma", v); },
        [](const RunConfig& c) { return format_double(c.data.noise_sigma); }));
    t.push_back(scalar(
        "data.path", "CSV path for the file generator (header starts with 'label')", false,
        [](RunConfig& c, const std::string& v) { c.data.path = v; },
        [](const RunConfig& c) { return quote(c.data.path); }));
    {
      KeyImpl k;
      k.meta = ConfigKey{"data.ratios", "train:validation:test split per client (default [4, 1, 1])", false, true};
      k.set = [](RunConfig& c, const ConfigEntry& e) {
        if (!e.is_list || e.values.size() != 3) throw ConfigError("key 'data.ratios': expected [train, val, test]");
        c.ratios.train = to_double("data.ratios", e.values[0]);
        c.ratios.validation = to_double("data.ratios", e.values[1]);
        c.ratios.test = to_double("data.ratios", e.values[2]);
      };
      k.get = [](const RunConfig& c) {
        return "[" + format_double(c.ratios.train) + ", " + format_double(c.ratios.validation) + ", " +
               format_double(c.ratios.test) + "]";
      };
      t.push_back(std::move(k));
    }
    t.push_back(scalar(
        "data.balance", "balanced | imbalanced client sizes (default balanced)", false,
        [](RunConfig& c, const std::string& v) {
          c.balance = keyed("data.balance", [&] { return parse_balance_mode(v); });
        },
        [](const RunConfig& c) { return to_string(c.balance); }));

    t.push_back(scalar(
        "train.tau", "local steps (default 25)", false,
        [](RunConfig& c, const std::string& v) { c.train.tau = to_size("train.tau", v); },
        [](const RunConfig& c) { return std::to_string(c.train.tau); }));
    t.push_back(scalar(
        "train.batch", "minibatch size (default 32)", false,
        [](RunConfig& c, const std::string& v) { c.train.batch = to_size("train.batch", v); },
        [](const RunConfig& c) { return std::to_string(c.train.batch); }));
    t.push_back(scalar(
        "train.lr", "learning rate (default 0.01)", false,
        [](RunConfig& c, const std::string& v) { c.train.lr = to_double("train.lr", v); },
        [](const RunConfig& c) { return format_double(c.train.lr); }));
    t.push_back(scalar(
        "train.momentum", "momentum coefficient (default 0.9)", false,
        [](RunConfig& c, const std::string& v) { c.train.momentum = to_double("train.momentum", v); },
        [](const RunConfig& c) { return format_double(c.train.momentum); }));
    t.push_back(scalar(
        "train.persist_momentum", "keep client momentum across selections (default false)", false,
        [](RunConfig& c, const std::string& v) { c.persist_momentum = to_bool("train.persist_momentum", v); },
        [](const RunConfig& c) { return bool_text(c.persist_momentum); }));

    t.push_back(scalar(
        "attack.kind", "none | epr | gauss | lf | lie | omn | sf (default none)", true,
        [](RunConfig& c, const std::string& v) {
          c.attack.kind = keyed("attack.kind", [&] { return parse_attack_kind(v); });
        },
        [](const RunConfig& c) { return to_string(c.attack.kind); }));
    t.push_back(scalar(
        "attack.z", "LIE width in standard deviations (default 1.5)", false,
        [](RunConfig& c, const std::string& v) { c.attack.z = to_double("attack.z", v); },
        [](const RunConfig& c) { return format_double(c.attack.z); }));
    t.push_back(scalar(
        "attack.omn_scale", "OMN target is -scale * honest mean (default 1)", false,
        [](RunConfig& c, const std::string& v) { c.attack.omn_scale = to_double("attack.omn_scale", v); },
        [](const RunConfig& c) { return format_double(c.attack.omn_scale); }));

    t.push_back(scalar(
        "vote.byz_strategy", "worst | random Byzantine votes (default worst)", true,
        [](RunConfig& c, const std::string& v) {
          c.vote = keyed("vote.byz_strategy", [&] { return parse_vote_strategy(v); });
        },
        [](const RunConfig& c) { return to_string(c.vote); }));

    t.push_back(scalar(
        "oracle.mode", "local-split | synthetic-noisy (default local-split)", false,
        [](RunConfig& c, const std::string& v) {
          c.oracle.mode = keyed("oracle.mode", [&] { return parse_oracle_mode(v); });
        },
        [](const RunConfig& c) { return to_string(c.oracle.mode); }));
    t.push_back(scalar(
        "oracle.eta", "synthetic oracle accuracy radius (default 0)", false,
        [](RunConfig& c, const std::string& v) { c.oracle.eta = to_double("oracle.eta", v); },
        [](const RunConfig& c) { return format_double(c.oracle.eta); }));
    t.push_back(scalar(
        "oracle.p", "synthetic oracle accuracy probability (default 1)", false,
        [](RunConfig& c, const std::string& v) { c.oracle.p = to_double("oracle.p", v); },
        [](const RunConfig& c) { return format_double(c.oracle.p); }));
    t.push_back(scalar(
        "oracle.H", "synthetic oracle noise radius when inaccurate (default 10)", false,
        [](RunConfig& c, const std::string& v) { c.oracle.H = to_double("oracle.H", v); },
        [](const RunConfig& c) { return format_double(c.oracle.H); }));

    t.push_back(scalar(
        "agg.kind", "fedavg | cwm | gm | norm | rknn | meb (default fedavg)", true,
        [](RunConfig& c, const std::string& v) {
          c.agg.kind = keyed("agg.kind", [&] { return parse_aggregator_kind(v); });
        },
        [](const RunConfig& c) { return to_string(c.agg.kind); }));
    t.push_back(scalar(
        "agg.gm_iters", "Weiszfeld iterations (default 1)", false,
        [](RunConfig& c, const std::string& v) { c.agg.gm_iters = to_size("agg.gm_iters", v); },
        [](const RunConfig& c) { return std::to_string(c.agg.gm_iters); }));
    t.push_back(scalar(
        "agg.norm_tau", "norm clipping threshold (default 0.215771)", false,
        [](RunConfig& c, const std::string& v) { c.agg.norm_tau = to_double("agg.norm_tau", v); },
        [](const RunConfig& c) { return format_double(c.agg.norm_tau); }));
    t.push_back(scalar(
        "agg.k", "rknn/meb group size; 0 means the honest count (default 0)", false,
        [](RunConfig& c, const std::string& v) { c.agg.k = to_size("agg.k", v); },
        [](const RunConfig& c) { return std::to_string(c.agg.k); }));
    t.push_back(scalar(
        "agg.include_center", "count a point among its own neighbours (default true)", false,
        [](RunConfig& c, const std::string& v) { c.agg.include_center = to_bool("agg.include_center", v); },
        [](const RunConfig& c) { return bool_text(c.agg.include_center); }));
    return t;
  }();
  return table;
}

const KeyImpl* find_key(std::string_view name) {
  for (const auto& k : key_table()) {
    if (k.meta.name == name) return &k;
  }
  return nullptr;
}

ConfigError located(const std::string& source, std::size_t line, const std::string& msg) {
  return ConfigError(source + ":" + std::to_string(line) + ": " + msg);
}

/// Reads one scalar token (bare or quoted) from `s` starting at `pos`.
std::string read_token(std::string_view s, std::size_t& pos, bool in_list, const std::string& source,
                       std::size_t line) {
  while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  if (pos < s.size() && s[pos] == '"') {
    std::string out;
    ++pos;
    while (pos < s.size() && s[pos] != '"') {
      if (s[pos] == '\\' && pos + 1 < s.size()) ++pos;
      out.push_back(s[pos++]);
    }
    if (pos >= s.size()) throw located(source, line, "unterminated string");
    ++pos;
    return out;
  }
  const std::size_t start = pos;
  while (pos < s.size() && s[pos] != '#' && !(in_list && (s[pos] == ',' || s[pos] == ']'))) {
    if (s[pos] == '"' || s[pos] == '[' || (!in_list && s[pos] == ']')) {
      throw located(source, line, std::string("unexpected '") + s[pos] + "'");
    }
    ++pos;
  }
  return trim(s.substr(start, pos - start));
}

/// Parses the right-hand side of a line into `entry`.
void parse_value(std::string_view rhs, ConfigEntry& entry, const std::string& source, std::size_t line) {
  std::size_t pos = 0;
  while (pos < rhs.size() && std::isspace(static_cast<unsigned char>(rhs[pos]))) ++pos;
  if (pos < rhs.size() && rhs[pos] == '[') {
    entry.is_list = true;
    ++pos;
    while (true) {
      while (pos < rhs.size() && std::isspace(static_cast<unsigned char>(rhs[pos]))) ++pos;
      if (pos >= rhs.size() || rhs[pos] == '#') throw located(source, line, "unterminated list");
      if (rhs[pos] == ']' && entry.values.empty()) {
        ++pos;
        break;
      }
      std::string item = read_token(rhs, pos, true, source, line);
      if (item.empty()) throw located(source, line, "empty list item");
      entry.values.push_back(std::move(item));
      while (pos < rhs.size() && std::isspace(static_cast<unsigned char>(rhs[pos]))) ++pos;
      if (pos >= rhs.size()) throw located(source, line, "unterminated list");
      if (rhs[pos] == ',') {
        ++pos;
        continue;
      }
      if (rhs[pos] == ']') {
        ++pos;
        break;
      }
      throw located(source, line, "expected ',' or ']' in list");
    }
  } else {
    const bool quoted = pos < rhs.size() && rhs[pos] == '"';
    std::string item = read_token(rhs, pos, false, source, line);
    if (item.empty() && !quoted) throw located(source, line, "missing value for '" + entry.key + "'");
    entry.values.push_back(std::move(item));
  }
  while (pos < rhs.size() && std::isspace(static_cast<unsigned char>(rhs[pos]))) ++pos;
  if (pos < rhs.size() && rhs[pos] != '#') throw located(source, line, "trailing characters after value");
}

void check_entry(const ConfigEntry& e, const std::string& source) {
  const KeyImpl* k = find_key(e.key);
  if (k == nullptr) throw located(source, e.line, "unknown key '" + e.key + "'");
  if (e.is_list && !k->meta.sweepable && !k->meta.list_valued && e.values.size() != 1) {
    throw located(source, e.line, "key '" + e.key + "' is not a sweep axis and takes a single value");
  }
  if (e.is_list && e.values.empty() && !k->meta.sweepable) {
    throw located(source, e.line, "key '" + e.key + "' needs a value");
  }
}

}  // namespace

const ConfigEntry* ExperimentFile::find(std::string_view key) const {
  for (const auto& e : entries) {
    if (e.key == key) return &e;
  }
  return nullptr;
}

void ExperimentFile::set(ConfigEntry entry) {
  for (auto& e : entries) {
    if (e.key == entry.key) {
      e = std::move(entry);
      return;
    }
  }
  entries.push_back(std::move(entry));
}

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> out;
    for (const auto& k : key_table()) out.push_back(k.meta);
    return out;
  }();
  return keys;
}

ExperimentFile parse_experiment_text(std::string_view text, std::string source) {
  ExperimentFile file;
  file.source = std::move(source);
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    ++line_no;
    start = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    const std::string stripped = trim(line);
    if (stripped.empty() || stripped.front() == '#') {
      if (end == text.size()) break;
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) throw located(file.source, line_no, "expected 'key = value'");
    ConfigEntry entry;
    entry.key = trim(line.substr(0, eq));
    entry.line = line_no;
    if (entry.key.empty()) throw located(file.source, line_no, "empty key");
    for (char c : entry.key) {
      if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.')) {
        throw located(file.source, line_no, "invalid character in key '" + entry.key + "'");
      }
    }
    parse_value(line.substr(eq + 1), entry, file.source, line_no);
    if (file.find(entry.key) != nullptr) throw located(file.source, line_no, "duplicate key '" + entry.key + "'");
    check_entry(entry, file.source);
    file.entries.push_back(std::move(entry));
    if (end == text.size()) break;
  }
  return file;
}

ExperimentFile read_experiment_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_experiment_text(ss.str(), path);
}

void apply_env_overrides(ExperimentFile& file, const EnvLookup& lookup) {
  for (const auto& k : key_table()) {
    std::string name = "LIDFL_";
    for (char c : k.meta.name) name.push_back(c == '.' ? '_' : static_cast<char>(std::toupper(c)));
    const auto value = lookup(name);
    if (!value) continue;
    ConfigEntry entry;
    entry.key = k.meta.name;
    parse_value(*value, entry, "env " + name, 1);
    check_entry(entry, "env " + name);
    file.set(std::move(entry));
  }
}

EnvLookup process_env() {
  return [](const std::string& name) -> std::optional<std::string> {
    const char* v = std::getenv(name.c_str());
    if (v == nullptr) return std::nullopt;
    return std::string(v);
  };
}

std::vector<RunConfig> expand(const ExperimentFile& file) {
  RunConfig base;
  std::vector<std::pair<const KeyImpl*, const ConfigEntry*>> axes;
  // Apply in table order so dependent keys (data.p -> model width) are stable.
  for (const auto& k : key_table()) {
    const ConfigEntry* e = file.find(k.meta.name);
    if (e == nullptr) continue;
    if (k.meta.sweepable && e->is_list) {
      if (!e->values.empty()) axes.emplace_back(&k, e);
      continue;
    }
    try {
      k.set(base, *e);
    } catch (const ConfigError& err) {
      throw located(file.source, e->line, err.what());
    }
  }

  std::vector<RunConfig> grid{base};
  for (const auto& [k, e] : axes) {
    std::vector<RunConfig> next;
    next.reserve(grid.size() * e->values.size());
    for (const auto& cell : grid) {
      for (const auto& v : e->values) {
        RunConfig c = cell;
        ConfigEntry single{e->key, {v}, false, e->line};
        try {
          k->set(c, single);
        } catch (const ConfigError& err) {
          throw located(file.source, e->line, err.what());
        }
        next.push_back(std::move(c));
      }
    }
    grid = std::move(next);
  }

  std::vector<RunConfig> out;
  for (const auto& cell : grid) {
    for (std::size_t r = 0; r < cell.repeat; ++r) {
      RunConfig c = cell;
      c.seed = cell.seed + r;
      c.repeat = 1;
      out.push_back(std::move(c));
    }
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    try {
      out[i].validate();
    } catch (const ConfigError& err) {
      throw ConfigError(file.source + ": grid cell " + std::to_string(i) + " (seed " + std::to_string(out[i].seed) +
                        "): " + err.what());
    }
  }
  return out;
}

std::vector<RunConfig> parse_config(const std::string& path) {
  ExperimentFile file = read_experiment_file(path);
  apply_env_overrides(file, process_env());
  return expand(file);
}

std::string emit_config(const RunConfig& cfg) {
  std::string out;
  for (const auto& k : key_table()) out += k.meta.name + " = " + k.get(cfg) + "\n";
  return out;
}

std::string run_id(const RunConfig& cfg) {
  std::string text;
  for (const auto& k : key_table()) {
    if (k.meta.name == "exec.policy") continue;
    text += k.meta.name + " = " + k.get(cfg) + "\n";
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(text)));
  return buf;
}

}  // namespace lidfl
