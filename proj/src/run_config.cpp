#include "grembed/run_config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace grembed {

namespace {

// Deliberate messages pass through untouched; anything else (stoul and
// friends) gets wrapped with the offending key below.
struct KeyError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw KeyError("expected boolean, got '" + v + "'");
}

} // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
  try {
    if (key == "graph") graph_path = value;
    else if (key == "schema") {
      if (value == "untyped") schema = EdgeSchema::untyped;
      else if (value == "typed") schema = EdgeSchema::typed;
      else throw KeyError("expected untyped|typed");
    } else if (key == "undirected") undirected = parse_bool(value);
    else if (key == "walks_per_vertex") walk.walks_per_vertex = std::stoul(value);
    else if (key == "walk_length") walk.walk_length = std::stoul(value);
    else if (key == "context_window") walk.context_window = std::stoul(value);
    else if (key == "lr") train.learning_rate = std::stod(value);
    else if (key == "batch_size") train.batch_size = std::stoul(value);
    else if (key == "n_steps") train.n_steps = std::stoul(value);
    else if (key == "negatives") train.negatives = std::stoul(value);
    else if (key == "metric") {
      if (value == "dot") train.metric = Metric::dot;
      else if (value == "cosine") train.metric = Metric::cosine;
      else throw KeyError("expected dot|cosine");
    } else if (key == "noise") {
      if (value == "uniform") noise = NoiseDist::uniform;
      else if (value == "unigram75") noise = NoiseDist::unigram75;
      else throw KeyError("expected uniform|unigram75");
    } else if (key == "max_attempts") max_attempts = std::stoul(value);
    else if (key == "dim") dim = std::stoul(value);
    else if (key == "dtype") {
      if (value == "f32") dtype = Dtype::f32;
      else if (value == "f64") dtype = Dtype::f64;
      else throw KeyError("expected f32|f64");
    } else if (key == "workers") workers = std::stoul(value);
    else if (key == "epochs") epochs = std::stoul(value);
    else if (key == "server_capacity") server_capacity = std::stoull(value);
    else if (key == "budget_bytes") budget_bytes = std::stoull(value);
    else if (key == "prefetch") prefetch = parse_bool(value);
    else if (key == "eval_ratio") eval_ratio = std::stod(value);
    else if (key == "eval_cadence") eval_cadence = std::stoull(value);
    else if (key == "eval_threshold") eval_threshold = std::stod(value);
    else if (key == "seed") seed = std::stoull(value);
    else if (key == "out") out_dir = value;
    else throw KeyError("unknown config key '" + key + "'");
  } catch (const KeyError&) {
    throw;
  } catch (const std::exception&) {
    throw std::invalid_argument("bad value for config key '" + key + "': '" + value + "'");
  }
}

std::string RunConfig::echo() const {
  std::ostringstream s;
  s << "graph=" << graph_path << '\n'
    << "schema=" << (schema == EdgeSchema::typed ? "typed" : "untyped") << '\n'
    << "undirected=" << (undirected ? "true" : "false") << '\n'
    << "walks_per_vertex=" << walk.walks_per_vertex << '\n'
    << "walk_length=" << walk.walk_length << '\n'
    << "context_window=" << walk.context_window << '\n'
    << "lr=" << train.learning_rate << '\n'
    << "batch_size=" << train.batch_size << '\n'
    << "n_steps=" << train.n_steps << '\n'
    << "negatives=" << train.negatives << '\n'
    << "metric=" << (train.metric == Metric::dot ? "dot" : "cosine") << '\n'
    << "noise=" << (noise == NoiseDist::uniform ? "uniform" : "unigram75") << '\n'
    << "max_attempts=" << max_attempts << '\n'
    << "dim=" << dim << '\n'
    << "dtype=" << (dtype == Dtype::f32 ? "f32" : "f64") << '\n'
    << "workers=" << workers << '\n'
    << "epochs=" << epochs << '\n'
    << "server_capacity=" << server_capacity << '\n'
    << "budget_bytes=" << budget_bytes << '\n'
    << "prefetch=" << (prefetch ? "true" : "false") << '\n'
    << "eval_ratio=" << eval_ratio << '\n'
    << "eval_cadence=" << eval_cadence << '\n'
    << "eval_threshold=" << eval_threshold << '\n'
    << "seed=" << seed << '\n'
    << "out=" << out_dir << '\n';
  return s.str();
}

void RunConfig::validate() const {
  if (graph_path.empty()) throw std::invalid_argument("config: graph path required");
  if (workers == 0) throw std::invalid_argument("config: workers must be >= 1");
  if (dim == 0) throw std::invalid_argument("config: dim must be >= 1");
  if (train.batch_size == 0) throw std::invalid_argument("config: batch_size must be >= 1");
  if (train.learning_rate <= 0) throw std::invalid_argument("config: lr must be positive");
  if (walk.walk_length < 2) throw std::invalid_argument("config: walk_length must be >= 2");
  if (walk.context_window < 2 || walk.context_window > walk.walk_length)
    throw std::invalid_argument("config: need 2 <= context_window <= walk_length");
  if (!(eval_ratio > 0.0 && eval_ratio < 1.0))
    throw std::invalid_argument("config: eval_ratio must be in (0, 1)");
  if (out_dir.empty()) throw std::invalid_argument("config: out dir required");
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  RunConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    auto eq = line.find('=', first);
    if (eq == std::string::npos)
      throw std::runtime_error("config " + path + " line " + std::to_string(line_no) +
                               ": expected key=value");
    auto end = line.find_last_not_of(" \t\r");
    cfg.set(line.substr(first, eq - first), line.substr(eq + 1, end - eq));
  }
  return cfg;
}

RunConfig make_config(const std::string& config_path,
                      const std::vector<std::string>& overrides) {
  RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
  for (const auto& kv : overrides) {
    auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("override '" + kv + "' is not key=value");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  return cfg;
}

} // namespace grembed
