#include "grembed/driver.hpp"

#include <poll.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "grembed/embedding.hpp"
#include "grembed/graph.hpp"
#include "grembed/partition.hpp"
#include "grembed/proc.hpp"
#include "grembed/ps_client.hpp"
#include "grembed/rng.hpp"
#include "grembed/shard_io.hpp"
#include "grembed/walk.hpp"

namespace grembed {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <typename F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw; // keep the innermost stage name
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

std::string one_line(std::string s) {
  for (auto& c : s)
    if (c == '\n') c = ' ';
  while (!s.empty() && s.back() == ' ') s.pop_back();
  return s;
}

std::string num(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
      .count();
}

// Servers publish their ephemeral port by renaming a complete temp file into
// place, so a successful read here is never partial.
std::uint16_t wait_for_port(const std::string& path, ChildProcess& child,
                            const std::string& who) {
  for (int i = 0; i < 200; ++i) {
    std::ifstream in(path);
    std::uint32_t port = 0;
    if (in >> port && port > 0 && port < 65536) return static_cast<std::uint16_t>(port);
    if (!child.running())
      throw std::runtime_error(who + " exited with code " + std::to_string(child.wait()) +
                               " before publishing its port");
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
  throw std::runtime_error(who + " did not publish a port within 10s");
}

struct WorkerState {
  ChildProcess proc;
  WorkerSummary summary;
  bool exited = false;
};

template <typename T>
std::vector<EmbeddingTable<T>> fetch_all(RoutedClient& client, std::uint8_t type_count,
                                         std::uint32_t dim) {
  std::vector<EmbeddingTable<T>> tables;
  for (std::uint8_t t = 0; t < type_count; ++t)
    tables.push_back(client.fetch_type<T>(t, dim));
  return tables;
}

template <typename T>
RunReport run_impl(const RunConfig& cfg) {
  auto t0 = std::chrono::steady_clock::now();
  RunReport rep;
  rep.workers = cfg.workers;
  rep.out_dir = cfg.out_dir;
  rep.config_echo = cfg.echo();

  fs::path out(cfg.out_dir);
  stage("prepare-out", [&] {
    fs::create_directories(out / "checkpoint");
    fs::create_directories(out / "ports");
  });

  Graph full = stage("load-graph", [&] {
    LoadOptions opt;
    opt.schema = cfg.schema;
    opt.undirected = cfg.undirected;
    opt.idmap_path = (out / "idmap.tsv").string();
    return load_edge_list(cfg.graph_path, opt);
  });
  rep.vertices = full.total_vertices();
  rep.edges = full.edge_count();

  EvalSplit split = stage("split-edges", [&] {
    auto s = split_edges(full, cfg.eval_ratio, mix_seed(cfg.seed, 0x73706c74));
    save_split((out / "split.tsv").string(), s);
    return s;
  });
  rep.train_edges = split.train_graph.edge_count();
  for (const auto& p : split.pairs) rep.held_positives += p.positive ? 1 : 0;

  WalkStats wstats;
  std::vector<TrainingRow> rows = stage("generate-pairs", [&] {
    WalkParams wp = cfg.walk;
    wp.seed = mix_seed(cfg.seed, 0x77616c6b);
    auto pairs = generate_pairs(split.train_graph, wp, &wstats);
    return stage("attach-negatives", [&] {
      NegativeParams np;
      np.k = cfg.train.negatives;
      np.dist = cfg.noise;
      np.max_attempts = cfg.max_attempts;
      np.seed = mix_seed(cfg.seed, 0x6e656773);
      return attach_negatives(split.train_graph, pairs, np);
    });
  });
  rep.walks = wstats.walks;
  rep.pairs = wstats.pairs;
  rep.training_rows = rows.size();

  std::vector<std::string> shard_paths = stage("shard-rows", [&] {
    auto shards = shard_rows(rows, cfg.workers);
    std::vector<std::string> paths;
    for (std::size_t i = 0; i < shards.size(); ++i) {
      auto p = (out / ("shard_" + std::to_string(i) + ".gwlk")).string();
      write_shard(p, shards[i], static_cast<std::uint16_t>(cfg.train.negatives),
                  cfg.schema == EdgeSchema::typed);
      paths.push_back(p);
    }
    return paths;
  });

  PartitionPlan plan = stage("plan-partitions", [&] {
    PlanRequest req;
    for (std::uint8_t t = 0; t < full.type_count(); ++t)
      req.counts.push_back(full.vertex_count(t));
    req.dim = cfg.dim;
    req.bytes_per_value = static_cast<std::uint32_t>(dtype_size(cfg.dtype));
    req.server_capacity = cfg.server_capacity;
    return plan_partitions(req);
  });
  rep.server_count = plan.server_count();

  std::vector<ChildProcess> servers;
  RouteTable routes = stage("spawn-servers", [&] {
    std::string exe = bin_dir() + "/grembed_pserver";
    std::vector<std::string> port_files;
    for (std::size_t i = 0; i < plan.assignments.size(); ++i) {
      const auto& a = plan.assignments[i];
      std::string pf = (out / "ports" / ("server_" + std::to_string(i) + ".port")).string();
      std::error_code ec;
      fs::remove(pf, ec);
      servers.push_back(ChildProcess::spawn(
          exe, {"--vtype", std::to_string(a.vtype),
                "--label", full.types()[a.vtype].label,
                "--row-begin", std::to_string(a.begin),
                "--row-end", std::to_string(a.end),
                "--dim", std::to_string(cfg.dim),
                "--dtype", cfg.dtype == Dtype::f32 ? "f32" : "f64",
                "--seed", std::to_string(mix_seed(cfg.seed, 0x7073, a.vtype)),
                "--port", "0",
                "--port-file", pf}));
      port_files.push_back(pf);
    }
    std::vector<RouteEntry> entries;
    for (std::size_t i = 0; i < servers.size(); ++i) {
      const auto& a = plan.assignments[i];
      std::uint16_t port =
          wait_for_port(port_files[i], servers[i], "server " + std::to_string(i));
      entries.push_back(
          {a.vtype, full.types()[a.vtype].label, a.begin, a.end, "127.0.0.1", port});
    }
    RouteTable rt(std::move(entries));
    rt.save((out / "routes.txt").string());
    return rt;
  });

  std::vector<WorkerState> workers;
  stage("spawn-workers", [&] {
    std::string exe = bin_dir() + "/grembed_worker";
    for (std::uint32_t i = 0; i < cfg.workers; ++i) {
      std::vector<std::string> args = {
          "--shard", shard_paths[i],
          "--routes", (out / "routes.txt").string(),
          "--dim", std::to_string(cfg.dim),
          "--lr", num(cfg.train.learning_rate),
          "--batch-size", std::to_string(cfg.train.batch_size),
          "--n-steps", std::to_string(cfg.train.n_steps),
          "--budget-bytes", std::to_string(cfg.budget_bytes),
          "--seed", std::to_string(mix_seed(cfg.seed, 0x776b, i)),
          "--metric", cfg.train.metric == Metric::dot ? "dot" : "cosine",
          "--dtype", cfg.dtype == Dtype::f32 ? "f32" : "f64",
          "--epochs", std::to_string(cfg.epochs),
          "--worker-id", std::to_string(i)};
      if (cfg.prefetch) args.push_back("--prefetch");
      WorkerState ws;
      ws.proc = ChildProcess::spawn(exe, args);
      ws.summary.worker_id = static_cast<int>(i);
      workers.push_back(std::move(ws));
    }
  });

  RoutedClient eval_client(routes);
  ConvergenceLog clog(
      (out / ("convergence_w" + std::to_string(cfg.workers) + ".csv")).string(),
      one_line(rep.config_echo));
  std::uint64_t global_steps = 0;
  std::optional<std::uint64_t> last_logged;

  auto evaluate_now = [&](std::uint64_t step_now) {
    auto tables = fetch_all<T>(eval_client, full.type_count(), cfg.dim);
    auto acc = link_accuracy<T>(tables, split.pairs, cfg.train.metric);
    acc.step = step_now;
    return std::pair(std::move(tables), acc);
  };

  auto consume = [&](WorkerState& w) {
    for (const auto& line : w.proc.read_lines()) {
      json j = json::parse(line);
      std::uint64_t steps = j.value("steps", std::uint64_t{0});
      w.summary.subsets += 1;
      w.summary.steps += steps;
      w.summary.last_mean_loss = j.value("mean_loss", 0.0);
      if (!j.value("error", std::string()).empty()) w.summary.aborted_subsets += 1;
      global_steps += steps;
    }
  };

  stage("train", [&] {
    std::uint64_t next_mark =
        cfg.eval_cadence == 0 ? std::numeric_limits<std::uint64_t>::max() : cfg.eval_cadence;
    std::size_t active = workers.size();
    while (active > 0) {
      std::vector<pollfd> fds;
      for (auto& w : workers)
        if (!w.exited) fds.push_back({w.proc.stdout_fd(), POLLIN, 0});
      ::poll(fds.data(), fds.size(), 50);
      for (auto& w : workers) {
        if (w.exited) continue;
        consume(w);
        if (!w.proc.running()) {
          consume(w); // pipe may still hold the final lines
          w.summary.exit_code = w.proc.wait();
          w.exited = true;
          --active;
        }
      }
      if (global_steps >= next_mark) {
        try {
          auto [tables, acc] = evaluate_now(global_steps);
          if (!last_logged || acc.step > *last_logged) {
            clog.add(acc, ms_since(t0));
            last_logged = acc.step;
          }
        } catch (const std::exception& e) {
          clog.gap(global_steps, e.what());
        }
        next_mark = (global_steps / cfg.eval_cadence + 1) * cfg.eval_cadence;
      }
    }
    for (const auto& w : workers)
      if (w.summary.exit_code != 0)
        throw std::runtime_error("worker " + std::to_string(w.summary.worker_id) +
                                 " exited with code " + std::to_string(w.summary.exit_code));
  });

  // The final row and the checkpoints come from one fetch, so re-scoring the
  // checkpoint reproduces the logged final accuracy exactly.
  stage("checkpoint", [&] {
    auto [tables, acc] = evaluate_now(global_steps);
    if (!last_logged || acc.step > *last_logged) clog.add(acc, ms_since(t0));
    rep.final_accuracy = acc;
    std::ofstream manifest(out / "checkpoint" / "types.tsv");
    for (std::uint8_t t = 0; t < full.type_count(); ++t) {
      const std::string& label = full.types()[t].label;
      save_checkpoint((out / "checkpoint" / (label + ".gemb")).string(), label, tables[t]);
      manifest << unsigned(t) << '\t' << label << '\t' << label << ".gemb" << '\n';
    }
    manifest.flush();
    if (!manifest) throw std::runtime_error("cannot write checkpoint manifest");
  });

  stage("shutdown", [&] {
    eval_client.shutdown_all();
    for (std::size_t i = 0; i < servers.size(); ++i) {
      int code = servers[i].wait();
      if (code != 0)
        throw std::runtime_error("server " + std::to_string(i) + " exited with code " +
                                 std::to_string(code));
    }
  });

  for (const auto& r : clog.rows())
    if (r.total_acc >= cfg.eval_threshold) {
      rep.steps_to_threshold = static_cast<std::int64_t>(r.step);
      break;
    }
  rep.global_steps = global_steps;
  for (auto& w : workers) rep.worker_summaries.push_back(w.summary);
  rep.wall_ms = ms_since(t0);

  stage("report", [&] {
    json j;
    j["interpretation"] = "global step = one completed batch summed over workers";
    json cfg_obj = json::object();
    std::istringstream ss(rep.config_echo);
    std::string line;
    while (std::getline(ss, line)) {
      auto eq = line.find('=');
      if (eq != std::string::npos) cfg_obj[line.substr(0, eq)] = line.substr(eq + 1);
    }
    j["config"] = cfg_obj;
    j["graph"] = {{"vertices", rep.vertices},
                  {"edges", rep.edges},
                  {"train_edges", rep.train_edges},
                  {"held_positives", rep.held_positives}};
    j["walks"] = {{"walks", rep.walks}, {"pairs", rep.pairs}, {"rows", rep.training_rows}};
    j["servers"] = rep.server_count;
    j["global_steps"] = rep.global_steps;
    j["workers"] = json::array();
    for (const auto& w : rep.worker_summaries)
      j["workers"].push_back({{"id", w.worker_id},
                              {"exit_code", w.exit_code},
                              {"subsets", w.subsets},
                              {"steps", w.steps},
                              {"aborted_subsets", w.aborted_subsets},
                              {"last_mean_loss", w.last_mean_loss}});
    j["final_accuracy"] = {{"pos_acc", rep.final_accuracy.pos_acc},
                           {"neg_acc", rep.final_accuracy.neg_acc},
                           {"total_acc", rep.final_accuracy.total_acc},
                           {"threshold", rep.final_accuracy.threshold},
                           {"step", rep.final_accuracy.step}};
    j["steps_to_threshold"] = rep.steps_to_threshold;
    j["eval_threshold"] = cfg.eval_threshold;
    j["wall_ms"] = rep.wall_ms;
    std::ofstream o(out / "report.json");
    o << j.dump(2) << '\n';
    o.flush();
    if (!o) throw std::runtime_error("cannot write report.json");
  });

  return rep;
}

struct ManifestEntry {
  unsigned vtype = 0;
  std::string label;
  std::string file;
};

template <typename T>
AccuracyReport eval_manifest(const fs::path& dir, const std::vector<ManifestEntry>& entries,
                             std::span<const EvalPair> pairs, Metric metric,
                             double threshold) {
  std::vector<EmbeddingTable<T>> tables;
  for (const auto& e : entries) {
    std::string label;
    tables.push_back(load_checkpoint<T>((dir / e.file).string(), &label));
    if (label != e.label)
      throw std::runtime_error("checkpoint label mismatch: file says '" + label +
                               "', manifest says '" + e.label + "'");
  }
  return link_accuracy<T>(tables, pairs, metric, threshold);
}

} // namespace

RunReport run_training(const RunConfig& cfg) {
  stage("config", [&] { cfg.validate(); });
  if (cfg.dtype == Dtype::f32) return run_impl<float>(cfg);
  return run_impl<double>(cfg);
}

SweepReport run_sweep(const RunConfig& cfg, const std::vector<std::uint32_t>& worker_counts) {
  if (worker_counts.empty()) throw std::invalid_argument("sweep: worker count list is empty");
  SweepReport rep;
  fs::create_directories(cfg.out_dir);
  for (std::uint32_t c : worker_counts) {
    RunConfig run_cfg = cfg;
    run_cfg.workers = c;
    run_cfg.out_dir = (fs::path(cfg.out_dir) / ("w" + std::to_string(c))).string();
    SweepRow row;
    row.workers = c;
    RunReport run;
    try {
      run = run_training(run_cfg);
      row.pos_acc = run.final_accuracy.pos_acc;
      row.neg_acc = run.final_accuracy.neg_acc;
      row.total_acc = run.final_accuracy.total_acc;
      row.steps_to_threshold = run.steps_to_threshold;
      std::string csv = "convergence_w" + std::to_string(c) + ".csv";
      std::error_code ec;
      fs::copy_file(fs::path(run_cfg.out_dir) / csv, fs::path(cfg.out_dir) / csv,
                    fs::copy_options::overwrite_existing, ec);
    } catch (const std::exception& e) {
      row.error = e.what();
      run = RunReport{};
    }
    rep.rows.push_back(row);
    rep.runs.push_back(std::move(run));
  }
  std::ofstream table(fs::path(cfg.out_dir) / "sweep_table.tsv");
  table << "workers\tpos_acc\tneg_acc\ttotal_acc\tsteps_to_threshold\n";
  for (const auto& r : rep.rows) {
    if (!r.error.empty()) {
      table << "# w" << r.workers << " failed: " << one_line(r.error) << '\n';
      continue;
    }
    char buf[160];
    std::snprintf(buf, sizeof buf, "%u\t%.2f\t%.2f\t%.2f\t%lld\n", r.workers, r.pos_acc,
                  r.neg_acc, r.total_acc, static_cast<long long>(r.steps_to_threshold));
    table << buf;
  }
  table.flush();
  if (!table) throw std::runtime_error("cannot write sweep_table.tsv");
  return rep;
}

AccuracyReport eval_checkpoint_dir(const std::string& checkpoint_dir,
                                   const std::string& split_path, Metric metric,
                                   double threshold) {
  fs::path dir(checkpoint_dir);
  std::ifstream manifest(dir / "types.tsv");
  if (!manifest)
    throw std::runtime_error("cannot open checkpoint manifest: " +
                             (dir / "types.tsv").string());
  std::vector<ManifestEntry> entries;
  ManifestEntry e;
  while (manifest >> e.vtype >> e.label >> e.file) entries.push_back(e);
  if (entries.empty()) throw std::runtime_error("checkpoint manifest is empty");
  for (std::size_t i = 0; i < entries.size(); ++i)
    if (entries[i].vtype != i)
      throw std::runtime_error("checkpoint manifest: vertex types must be dense and ordered");

  auto pairs = load_split(split_path);
  CheckpointInfo info = peek_checkpoint((dir / entries[0].file).string());
  if (info.dtype == Dtype::f32)
    return eval_manifest<float>(dir, entries, pairs, metric, threshold);
  return eval_manifest<double>(dir, entries, pairs, metric, threshold);
}

} // namespace grembed
