#include "gabo/features/centrality.hpp"

#include <cmath>
#include <queue>
#include <string>

namespace gabo::features {

using data::MolGraph;

std::vector<double> degree(const MolGraph& g) {
  std::vector<double> deg(g.num_nodes, 0.0);
  for (const auto& [u, v] : g.edges) deg[u] += 1.0;
  return deg;
}

std::vector<double> pagerank(const MolGraph& g, const PageRankOptions& opt) {
  const std::size_t n = g.num_nodes;
  if (n == 0) throw std::invalid_argument("pagerank: graph has no nodes");
  const auto adj = data::adjacency(g);
  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<double> rank(n, inv_n), next(n);
  double residual = 0.0;
  for (std::size_t it = 0; it < opt.max_iter; ++it) {
    double dangling = 0.0;
    for (std::size_t u = 0; u < n; ++u) {
      if (adj[u].empty()) dangling += rank[u];
    }
    const double base = (1.0 - opt.damping) * inv_n + opt.damping * dangling * inv_n;
    std::fill(next.begin(), next.end(), base);
    for (std::size_t u = 0; u < n; ++u) {
      if (adj[u].empty()) continue;
      const double share = opt.damping * rank[u] / static_cast<double>(adj[u].size());
      for (auto v : adj[u]) next[v] += share;
    }
    residual = 0.0;
    for (std::size_t u = 0; u < n; ++u) residual += std::abs(next[u] - rank[u]);
    rank.swap(next);
    if (residual < opt.tol) return rank;
  }
  throw ConvergenceError("pagerank: no convergence after " + std::to_string(opt.max_iter) +
                             " iterations (last L1 change " + std::to_string(residual) + ")",
                         residual);
}

std::vector<double> betweenness(const MolGraph& g) {
  const std::size_t n = g.num_nodes;
  std::vector<double> bc(n, 0.0);
  if (n < 3) return bc;
  const auto adj = data::adjacency(g);

  std::vector<std::vector<std::uint32_t>> preds(n);
  std::vector<double> sigma(n), delta(n);
  std::vector<long> dist(n);
  std::vector<std::uint32_t> order;
  order.reserve(n);
  for (std::size_t s = 0; s < n; ++s) {
    for (auto& p : preds) p.clear();
    std::fill(sigma.begin(), sigma.end(), 0.0);
    std::fill(delta.begin(), delta.end(), 0.0);
    std::fill(dist.begin(), dist.end(), -1);
    order.clear();
    sigma[s] = 1.0;
    dist[s] = 0;
    std::queue<std::uint32_t> queue;
    queue.push(static_cast<std::uint32_t>(s));
    while (!queue.empty()) {
      const auto v = queue.front();
      queue.pop();
      order.push_back(v);
      for (auto w : adj[v]) {
        if (dist[w] < 0) {
          dist[w] = dist[v] + 1;
          queue.push(w);
        }
        if (dist[w] == dist[v] + 1) {
          sigma[w] += sigma[v];
          preds[w].push_back(v);
        }
      }
    }
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const auto w = *it;
      for (auto v : preds[w]) delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
      if (w != s) bc[w] += delta[w];
    }
  }
  // Each unordered pair was counted from both endpoints.
  const double pairs = static_cast<double>((n - 1) * (n - 2)) / 2.0;
  for (auto& x : bc) x = x / 2.0 / pairs;
  return bc;
}

std::vector<double> closeness(const MolGraph& g) {
  const std::size_t n = g.num_nodes;
  std::vector<double> out(n, 0.0);
  if (n < 2) return out;
  const auto adj = data::adjacency(g);
  std::vector<long> dist(n);
  for (std::size_t s = 0; s < n; ++s) {
    std::fill(dist.begin(), dist.end(), -1);
    dist[s] = 0;
    std::queue<std::uint32_t> queue;
    queue.push(static_cast<std::uint32_t>(s));
    long reached = 0, total = 0;
    while (!queue.empty()) {
      const auto v = queue.front();
      queue.pop();
      for (auto w : adj[v]) {
        if (dist[w] >= 0) continue;
        dist[w] = dist[v] + 1;
        ++reached;
        total += dist[w];
        queue.push(w);
      }
    }
    if (reached == 0) continue;
    const double r = static_cast<double>(reached);
    out[s] = (r / static_cast<double>(n - 1)) * (r / static_cast<double>(total));
  }
  return out;
}

std::vector<double> classic_features(const MolGraph& g) {
  const auto bc = betweenness(g);
  const auto cc = closeness(g);
  const auto deg = degree(g);
  const auto pr = g.num_nodes ? pagerank(g) : std::vector<double>{};
  std::vector<double> out(g.num_nodes * kClassicWidth);
  for (std::size_t i = 0; i < g.num_nodes; ++i) {
    out[i * kClassicWidth + 0] = bc[i];
    out[i * kClassicWidth + 1] = cc[i];
    out[i * kClassicWidth + 2] = deg[i];
    out[i * kClassicWidth + 3] = pr[i];
  }
  return out;
}

std::vector<std::vector<double>> classic_features(std::span<const MolGraph> graphs) {
  std::vector<std::vector<double>> out;
  out.reserve(graphs.size());
  for (const auto& g : graphs) out.push_back(classic_features(g));
  return out;
}

void standardize(std::vector<std::vector<double>>& cache) {
  double count = 0.0;
  double mean[kClassicWidth] = {}, sq[kClassicWidth] = {};
  for (const auto& rows : cache) {
    for (std::size_t i = 0; i + kClassicWidth <= rows.size(); i += kClassicWidth) {
      count += 1.0;
      for (std::size_t k = 0; k < kClassicWidth; ++k) mean[k] += rows[i + k];
    }
  }
  if (count == 0.0) return;
  for (auto& m : mean) m /= count;
  for (const auto& rows : cache) {
    for (std::size_t i = 0; i + kClassicWidth <= rows.size(); i += kClassicWidth) {
      for (std::size_t k = 0; k < kClassicWidth; ++k) sq[k] += (rows[i + k] - mean[k]) * (rows[i + k] - mean[k]);
    }
  }
  double stdev[kClassicWidth];
  for (std::size_t k = 0; k < kClassicWidth; ++k) stdev[k] = std::sqrt(sq[k] / count);
  for (auto& rows : cache) {
    for (std::size_t i = 0; i + kClassicWidth <= rows.size(); i += kClassicWidth) {
      for (std::size_t k = 0; k < kClassicWidth; ++k) {
        rows[i + k] -= mean[k];
        if (stdev[k] > 0.0) rows[i + k] /= stdev[k];
      }
    }
  }
}

}  // namespace gabo::features
