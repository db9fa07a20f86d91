#include "grembed/worker.hpp"

#include <chrono>
#include <cmath>
#include <future>
#include <memory>
#include <stdexcept>

#include "grembed/ps_client.hpp"
#include "grembed/shard_io.hpp"

namespace grembed {

template <typename T>
double train_subset(LocalModel<T>& model, std::span<const LocalRow> rows,
                    const TrainConfig& cfg) {
  if (rows.empty() || cfg.n_steps == 0) return 0.0;
  const T lr = static_cast<T>(cfg.learning_rate);

  std::vector<const T*> neg_ptrs;
  std::vector<T*> gneg_ptrs;
  double loss_sum = 0.0;
  std::size_t cursor = 0;
  for (std::uint32_t step = 0; step < cfg.n_steps; ++step) {
    for (auto& g : model.grads) g.clear();
    double batch_loss = 0.0;
    for (std::uint32_t b = 0; b < cfg.batch_size; ++b) {
      const LocalRow& row = rows[cursor];
      cursor = (cursor + 1) % rows.size();
      auto& in_table = model.tables[row.input_type];
      auto& ctx_table = model.tables[row.context_type];
      auto& in_grads = model.grads[row.input_type];
      auto& ctx_grads = model.grads[row.context_type];
      neg_ptrs.clear();
      gneg_ptrs.clear();
      for (auto n : row.negatives) {
        neg_ptrs.push_back(ctx_table.row(n).data());
        gneg_ptrs.push_back(ctx_grads.row(n));
      }
      batch_loss += nce_row_grad<T>(in_table.row(row.input).data(),
                                    ctx_table.row(row.context).data(), neg_ptrs.data(),
                                    neg_ptrs.size(), in_table.dim(), cfg.metric,
                                    in_grads.row(row.input), ctx_grads.row(row.context),
                                    gneg_ptrs.data());
    }
    if (!std::isfinite(batch_loss)) throw PoisonedBatchError(step);
    for (std::size_t t = 0; t < model.tables.size(); ++t)
      if (model.tables[t].rows() > 0) sgd_step(model.tables[t], model.grads[t], lr);
    loss_sum += batch_loss / cfg.batch_size;
  }
  return loss_sum / cfg.n_steps;
}

template double train_subset<float>(LocalModel<float>&, std::span<const LocalRow>,
                                    const TrainConfig&);
template double train_subset<double>(LocalModel<double>&, std::span<const LocalRow>,
                                     const TrainConfig&);

namespace {

template <typename T>
struct Fetched {
  bool within_budget = false;
  LocalIndexMap map;
  std::vector<LocalRow> rows;
  LocalModel<T> model;
};

template <typename T>
class WorkerLoop {
 public:
  WorkerLoop(const WorkerConfig& cfg, const SubsetProgressFn& progress)
      : cfg_(cfg), progress_(progress) {}

  WorkerReport run() {
    auto t0 = std::chrono::steady_clock::now();
    ShardHeader header;
    std::vector<TrainingRow> rows = read_shard(cfg_.shard_path, &header);
    TrainConfig train = cfg_.train;
    train.negatives = header.k;

    RouteTable routes = RouteTable::load(cfg_.routes_path);
    client_ = std::make_unique<RoutedClient>(routes, cfg_.connect_attempts);
    if (cfg_.prefetch)
      prefetch_client_ = std::make_unique<RoutedClient>(routes, cfg_.connect_attempts);

    WorkerReport report;
    const std::uint64_t data_size = train.data_size();
    std::span<const TrainingRow> all(rows);
    std::vector<std::span<const TrainingRow>> slices;
    for (std::uint32_t e = 0; e < cfg_.epochs; ++e)
      for (std::uint64_t at = 0; at < rows.size(); at += data_size)
        slices.push_back(
            all.subspan(at, std::min<std::uint64_t>(data_size, rows.size() - at)));

    std::future<Fetched<T>> next;
    for (std::uint64_t i = 0; i < slices.size(); ++i) {
      auto s0 = std::chrono::steady_clock::now();
      SubsetReport sub;
      sub.subset = i;
      try {
        if (cfg_.prefetch)
          run_prefetched(slices, i, train, sub, next);
        else
          sub.mean_loss = process(slices[i], train, sub) / slices[i].size();
      } catch (const PoisonedBatchError& e) {
        sub.error = e.what();
        ++report.aborted_subsets;
      }
      sub.wall_ms =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - s0)
              .count();
      report.rows_seen += slices[i].size();
      ++report.subsets;
      report.fetched += sub.fetched;
      report.flushed += sub.flushed;
      report.steps += sub.steps;
      report.splits += sub.splits;
      report.last_mean_loss = sub.mean_loss;
      if (progress_) progress_(sub);
    }
    report.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
            .count();
    return report;
  }

 private:
  std::uint64_t footprint_bytes(const LocalIndexMap& map) const {
    return map.total_unique() * cfg_.dim * sizeof(T);
  }

  // Budget counts the fetched table bytes (the per-batch tensor constraint);
  // worker-private gradient buffers are excluded.
  Fetched<T> fetch(RoutedClient& client, std::span<const TrainingRow> part) {
    Fetched<T> f;
    f.map = LocalIndexMap::build(part);
    if (footprint_bytes(f.map) > cfg_.budget_bytes) return f;
    f.within_budget = true;
    f.rows = relabel(part, f.map);
    std::uint8_t types = f.map.type_count();
    f.model.tables.assign(types, {});
    f.model.grads.assign(types, {});
    for (std::uint8_t t = 0; t < types; ++t) {
      std::uint32_t uniq = f.map.unique_count(t);
      if (uniq == 0) continue;
      f.model.tables[t] = EmbeddingTable<T>(uniq, cfg_.dim);
      f.model.grads[t].reset(uniq, cfg_.dim);
      client.get_rows<T>(t, f.map.globals(t), cfg_.dim, f.model.tables[t].data());
    }
    return f;
  }

  void flush(const LocalIndexMap& map, const LocalModel<T>& model) {
    for (std::uint8_t t = 0; t < map.type_count(); ++t) {
      if (map.unique_count(t) == 0) continue;
      client_->put_rows<T>(t, map.globals(t), cfg_.dim, model.tables[t].data());
    }
  }

  // Returns the row-weighted loss sum for `part`, splitting in half while the
  // unique-row footprint exceeds the byte budget.
  double process(std::span<const TrainingRow> part, const TrainConfig& train,
                 SubsetReport& sub) {
    Fetched<T> f = fetch(*client_, part);
    if (!f.within_budget) {
      if (part.size() <= 1)
        throw std::runtime_error("worker: single-row footprint " +
                                 std::to_string(footprint_bytes(f.map)) + " exceeds budget " +
                                 std::to_string(cfg_.budget_bytes));
      ++sub.splits;
      double a = process(part.subspan(0, part.size() / 2), train, sub);
      double b = process(part.subspan(part.size() / 2), train, sub);
      return a + b;
    }
    sub.fetched += f.map.total_unique();
    double loss = train_subset<T>(f.model, f.rows, train);
    sub.steps += train.n_steps;
    flush(f.map, f.model);
    sub.flushed += f.map.total_unique();
    return loss * static_cast<double>(part.size());
  }

  // Depth-1 prefetch: slice i+1 is fetched on a second connection set while
  // slice i trains. The prefetched view does not see slice i's flush; that
  // staleness is the documented cost of enabling prefetch.
  void run_prefetched(const std::vector<std::span<const TrainingRow>>& slices,
                      std::uint64_t i, const TrainConfig& train, SubsetReport& sub,
                      std::future<Fetched<T>>& next) {
    Fetched<T> cur = next.valid() ? next.get() : fetch(*client_, slices[i]);
    if (i + 1 < slices.size()) {
      auto part = slices[i + 1];
      next = std::async(std::launch::async,
                        [this, part] { return fetch(*prefetch_client_, part); });
    }
    if (!cur.within_budget) {
      // Oversized subset: fall back to the splitting path (nothing was
      // fetched for it yet, so the budget still holds).
      sub.mean_loss = process(slices[i], train, sub) / slices[i].size();
      return;
    }
    sub.fetched += cur.map.total_unique();
    double loss = train_subset<T>(cur.model, cur.rows, train);
    sub.steps += train.n_steps;
    flush(cur.map, cur.model);
    sub.flushed += cur.map.total_unique();
    sub.mean_loss = loss;
  }

  WorkerConfig cfg_;
  SubsetProgressFn progress_;
  std::unique_ptr<RoutedClient> client_;
  std::unique_ptr<RoutedClient> prefetch_client_;
};

} // namespace

WorkerReport run_worker(const WorkerConfig& cfg, const SubsetProgressFn& progress) {
  if (cfg.dtype == Dtype::f32) return WorkerLoop<float>(cfg, progress).run();
  return WorkerLoop<double>(cfg, progress).run();
}

} // namespace grembed
