#include "grembed/walk.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "grembed/rng.hpp"

namespace grembed {

std::uint64_t expected_pair_count(std::uint64_t w, std::uint64_t l, std::uint64_t c) {
  std::uint64_t per_walk = 0;
  for (std::uint64_t j = 2; j <= c; ++j)
    if (l + 1 > j) per_walk += l - j + 1;
  return w * per_walk;
}

std::vector<VertexRef> random_walk(const Graph& g, VertexRef start,
                                   std::uint32_t length, std::mt19937_64& rng) {
  std::vector<VertexRef> walk;
  walk.reserve(length);
  VertexRef cur = start;
  for (std::uint32_t i = 0; i < length; ++i) {
    walk.push_back(cur);
    if (i + 1 == length) break;
    auto nbrs = g.neighbors(cur);
    if (nbrs.empty()) break;
    cur = nbrs[bounded(rng, nbrs.size())];
  }
  return walk;
}

std::vector<std::pair<VertexRef, VertexRef>> generate_pairs(const Graph& g,
                                                            const WalkParams& p,
                                                            WalkStats* stats) {
  if (p.context_window < 2)
    throw std::invalid_argument("walk: context window must be at least 2");
  if (p.walk_length < 2)
    throw std::invalid_argument("walk: walk length must be at least 2");

  WalkStats st;
  std::vector<std::pair<VertexRef, VertexRef>> out;
  out.reserve(expected_pair_count(p.walks_per_vertex, p.walk_length, p.context_window) *
              g.total_vertices());

  for (std::uint8_t t = 0; t < g.type_count(); ++t) {
    for (std::uint64_t id = 0; id < g.vertex_count(t); ++id) {
      VertexRef start{t, id};
      for (std::uint32_t wi = 0; wi < p.walks_per_vertex; ++wi) {
        std::uint64_t vkey = (static_cast<std::uint64_t>(t) << 56) ^ id;
        auto rng = make_engine(mix_seed(p.seed, vkey, wi));
        auto walk = random_walk(g, start, p.walk_length, rng);
        ++st.walks;
        if (walk.size() < p.walk_length) ++st.truncated;
        for (std::size_t i = 0; i + 1 < walk.size(); ++i)
          for (std::uint32_t d = 1; d < p.context_window && i + d < walk.size(); ++d) {
            out.emplace_back(walk[i], walk[i + d]);
            ++st.pairs;
          }
      }
    }
  }
  if (stats) *stats = st;
  return out;
}

namespace {

// Sampler over one vertex type. Uniform needs only the count; unigram^0.75
// builds a cumulative mass over context occurrences.
struct TypeSampler {
  std::uint64_t count = 0;
  std::vector<double> cumulative; // empty => uniform

  VertexRef sample(std::uint8_t t, std::mt19937_64& rng) const {
    if (cumulative.empty()) return {t, bounded(rng, count)};
    double u = unit_real(rng) * cumulative.back();
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    std::uint64_t id = static_cast<std::uint64_t>(it - cumulative.begin());
    if (id >= count) id = count - 1;
    return {t, id};
  }
};

} // namespace

std::vector<TrainingRow> attach_negatives(const Graph& g,
                                          std::span<const std::pair<VertexRef, VertexRef>> pairs,
                                          const NegativeParams& p) {
  std::vector<TypeSampler> samplers(g.type_count());
  for (std::uint8_t t = 0; t < g.type_count(); ++t)
    samplers[t].count = g.vertex_count(t);

  if (p.dist == NoiseDist::unigram75) {
    std::vector<std::vector<double>> freq(g.type_count());
    for (std::uint8_t t = 0; t < g.type_count(); ++t)
      freq[t].assign(g.vertex_count(t), 0.0);
    for (const auto& [in, ctx] : pairs) {
      (void)in;
      freq[ctx.vtype][ctx.id] += 1.0;
    }
    for (std::uint8_t t = 0; t < g.type_count(); ++t) {
      auto& cum = samplers[t].cumulative;
      cum.resize(freq[t].size());
      double run = 0.0;
      for (std::size_t i = 0; i < freq[t].size(); ++i) {
        // Unseen vertices keep a floor of one occurrence so the support stays
        // the whole type.
        run += std::pow(freq[t][i] > 0 ? freq[t][i] : 1.0, 0.75);
        cum[i] = run;
      }
    }
  }

  std::vector<TrainingRow> rows;
  rows.reserve(pairs.size());
  for (std::size_t r = 0; r < pairs.size(); ++r) {
    const auto& [input, context] = pairs[r];
    auto rng = make_engine(mix_seed(p.seed, r, 0x6e656773ull));
    TrainingRow row{input, context, {}};
    row.negatives.reserve(p.k);
    const auto& sampler = samplers[context.vtype];
    for (std::uint32_t j = 0; j < p.k; ++j) {
      std::uint32_t attempts = 0;
      for (;;) {
        VertexRef cand = sampler.sample(context.vtype, rng);
        if (!(cand == input) && !g.has_edge(input, cand)) {
          row.negatives.push_back(cand);
          break;
        }
        if (++attempts >= p.max_attempts)
          throw std::runtime_error(
              "negatives: noise space saturated for input vertex " +
              std::to_string(input.vtype) + ":" + std::to_string(input.id) + " after " +
              std::to_string(p.max_attempts) + " attempts");
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<std::span<const TrainingRow>> shard_rows(std::span<const TrainingRow> rows,
                                                     std::uint32_t worker_count) {
  if (worker_count == 0) throw std::invalid_argument("shard: worker count must be positive");
  std::vector<std::span<const TrainingRow>> shards;
  shards.reserve(worker_count);
  std::size_t base = rows.size() / worker_count;
  std::size_t extra = rows.size() % worker_count;
  std::size_t at = 0;
  for (std::uint32_t s = 0; s < worker_count; ++s) {
    std::size_t len = base + (s < extra ? 1 : 0);
    shards.push_back(rows.subspan(at, len));
    at += len;
  }
  return shards;
}

} // namespace grembed
