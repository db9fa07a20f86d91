#include "grembed/nce.hpp"

#include <cmath>
#include <stdexcept>

#include "grembed/kernels.hpp"

namespace grembed {

namespace {

double clamp30(double z) { return z < -30.0 ? -30.0 : (z > 30.0 ? 30.0 : z); }

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// -log sigmoid(z) without cancellation.
double nls(double z) { return std::log1p(std::exp(-z)); }

template <typename T>
double raw_score(const T* u, const T* v, std::uint32_t dim, Metric metric) {
  double s = kern::dot(u, v, dim);
  if (metric == Metric::dot) return s;
  double nu = std::sqrt(static_cast<double>(kern::dot(u, u, dim)));
  double nv = std::sqrt(static_cast<double>(kern::dot(v, v, dim)));
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return s / (nu * nv);
}

// Adds d(score)/du into gu and d(score)/dv into gv, both scaled by `w`.
template <typename T>
void add_score_grad(const T* u, const T* v, std::uint32_t dim, Metric metric, double w,
                    T* gu, T* gv) {
  if (metric == Metric::dot) {
    kern::axpy(gu, static_cast<T>(w), v, dim);
    kern::axpy(gv, static_cast<T>(w), u, dim);
    return;
  }
  double nu2 = kern::dot(u, u, dim);
  double nv2 = kern::dot(v, v, dim);
  if (nu2 == 0.0 || nv2 == 0.0) return;
  double nu = std::sqrt(nu2), nv = std::sqrt(nv2);
  double c = kern::dot(u, v, dim) / (nu * nv);
  // d c / d u = v/(|u||v|) - c u/|u|^2, symmetric in v.
  kern::axpy(gu, static_cast<T>(w / (nu * nv)), v, dim);
  kern::axpy(gu, static_cast<T>(-w * c / nu2), u, dim);
  kern::axpy(gv, static_cast<T>(w / (nu * nv)), u, dim);
  kern::axpy(gv, static_cast<T>(-w * c / nv2), v, dim);
}

} // namespace

template <typename T>
double score(const T* u, const T* v, std::uint32_t dim, Metric metric) {
  return raw_score(u, v, dim, metric);
}

template <typename T>
double nce_loss(const T* x, const T* y, const T* const* negs, std::size_t k,
                std::uint32_t dim, Metric metric) {
  double loss = nls(clamp30(raw_score(x, y, dim, metric)));
  for (std::size_t i = 0; i < k; ++i)
    loss += nls(-clamp30(raw_score(x, negs[i], dim, metric)));
  return loss;
}

template <typename T>
double nce_row_grad(const T* x, const T* y, const T* const* negs, std::size_t k,
                    std::uint32_t dim, Metric metric, T* gx, T* gy, T* const* gnegs) {
  double s_pos = clamp30(raw_score(x, y, dim, metric));
  double loss = nls(s_pos);
  // d/ds of -log sigmoid(s) is -(1 - sigmoid(s)).
  add_score_grad(x, y, dim, metric, -(1.0 - sigmoid(s_pos)), gx, gy);
  for (std::size_t i = 0; i < k; ++i) {
    double s_neg = clamp30(raw_score(x, negs[i], dim, metric));
    loss += nls(-s_neg);
    // d/ds of -log sigmoid(-s) is sigmoid(s).
    add_score_grad(x, negs[i], dim, metric, sigmoid(s_neg), gx, gnegs[i]);
  }
  return loss;
}

template <typename T>
PairGradients<T> nce_gradients(const T* x, const T* y, const T* const* negs, std::size_t k,
                               std::uint32_t dim, Metric metric) {
  PairGradients<T> g;
  g.input.assign(dim, T(0));
  g.context.assign(dim, T(0));
  g.negatives.assign(k, std::vector<T>(dim, T(0)));
  std::vector<T*> gnegs(k);
  for (std::size_t i = 0; i < k; ++i) gnegs[i] = g.negatives[i].data();
  g.loss = nce_row_grad(x, y, negs, k, dim, metric, g.input.data(), g.context.data(),
                        gnegs.data());
  return g;
}

template <typename T>
SgdStats sgd_step(EmbeddingTable<T>& table, const GradientSet<T>& grads, T lr) {
  if (grads.rows() != table.rows() || grads.dim() != table.dim())
    throw std::invalid_argument("sgd: gradient shape does not match table");
  SgdStats st;
  for (std::uint64_t r = 0; r < table.rows(); ++r) {
    if (!grads.touched(r)) continue;
    const T* g = grads.row_data(r);
    bool finite = true;
    for (std::uint32_t j = 0; j < table.dim(); ++j)
      if (!std::isfinite(static_cast<double>(g[j]))) {
        finite = false;
        break;
      }
    if (!finite) {
      ++st.skipped;
      continue;
    }
    kern::axpy(table.row(r).data(), -lr, g, table.dim());
    ++st.updated;
  }
  return st;
}

#define GREMBED_INSTANTIATE(T)                                                              \
  template double score<T>(const T*, const T*, std::uint32_t, Metric);                      \
  template double nce_loss<T>(const T*, const T*, const T* const*, std::size_t,             \
                              std::uint32_t, Metric);                                       \
  template double nce_row_grad<T>(const T*, const T*, const T* const*, std::size_t,         \
                                  std::uint32_t, Metric, T*, T*, T* const*);                \
  template PairGradients<T> nce_gradients<T>(const T*, const T*, const T* const*,           \
                                             std::size_t, std::uint32_t, Metric);           \
  template SgdStats sgd_step<T>(EmbeddingTable<T>&, const GradientSet<T>&, T);

GREMBED_INSTANTIATE(float)
GREMBED_INSTANTIATE(double)
#undef GREMBED_INSTANTIATE

} // namespace grembed
