#include "courl/graph.hpp"

#include <algorithm>
#include <functional>
#include <numeric>

namespace courl {

Adjacency to_adjacency(const SimilarityNetwork& g) {
  Adjacency adj;
  const std::size_t n = g.n_nodes();
  adj.offsets.assign(n + 1, 0);
  for (const auto& e : g.edges) {
    ++adj.offsets[e.a + 1];
    ++adj.offsets[e.b + 1];
  }
  std::partial_sum(adj.offsets.begin(), adj.offsets.end(), adj.offsets.begin());
  adj.neighbors.resize(adj.offsets[n]);
  adj.weights.resize(adj.offsets[n]);
  std::vector<std::size_t> fill(adj.offsets.begin(), adj.offsets.end() - 1);
  // rows come out ascending when edges are sorted by (a, b); unsorted input is fixed up below
  for (const auto& e : g.edges) {
    adj.neighbors[fill[e.a]] = e.b;
    adj.weights[fill[e.a]++] = e.weight;
    adj.neighbors[fill[e.b]] = e.a;
    adj.weights[fill[e.b]++] = e.weight;
  }
  std::vector<std::size_t> perm;
  std::vector<std::uint32_t> nb;
  std::vector<double> wt;
  for (std::size_t v = 0; v < n; ++v) {
    const auto lo = adj.offsets[v], hi = adj.offsets[v + 1];
    if (std::is_sorted(adj.neighbors.begin() + static_cast<std::ptrdiff_t>(lo),
                       adj.neighbors.begin() + static_cast<std::ptrdiff_t>(hi)))
      continue;
    perm.resize(hi - lo);
    std::iota(perm.begin(), perm.end(), lo);
    std::sort(perm.begin(), perm.end(), [&](auto x, auto y) { return adj.neighbors[x] < adj.neighbors[y]; });
    nb.clear();
    wt.clear();
    for (auto p : perm) {
      nb.push_back(adj.neighbors[p]);
      wt.push_back(adj.weights[p]);
    }
    std::copy(nb.begin(), nb.end(), adj.neighbors.begin() + static_cast<std::ptrdiff_t>(lo));
    std::copy(wt.begin(), wt.end(), adj.weights.begin() + static_cast<std::ptrdiff_t>(lo));
  }
  return adj;
}

std::vector<std::size_t> core_numbers(const SimilarityNetwork& g) {
  const Adjacency adj = to_adjacency(g);
  const std::size_t n = adj.n_nodes();
  std::vector<std::size_t> deg(n), pos(n), vert(n);
  std::size_t max_deg = 0;
  for (std::size_t v = 0; v < n; ++v) {
    deg[v] = adj.degree(v);
    max_deg = std::max(max_deg, deg[v]);
  }
  std::vector<std::size_t> bin(max_deg + 1, 0);
  for (std::size_t v = 0; v < n; ++v) ++bin[deg[v]];
  std::size_t start = 0;
  for (auto& b : bin) {
    const std::size_t count = b;
    b = start;
    start += count;
  }
  for (std::size_t v = 0; v < n; ++v) {
    pos[v] = bin[deg[v]]++;
    vert[pos[v]] = v;
  }
  for (std::size_t d = max_deg; d > 0; --d) bin[d] = bin[d - 1];
  if (!bin.empty()) bin[0] = 0;

  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t v = vert[i];
    for (auto u : adj.neighbors_of(v)) {
      if (deg[u] > deg[v]) {
        const std::size_t du = deg[u];
        const std::size_t pu = pos[u];
        const std::size_t pw = bin[du];
        const std::size_t w = vert[pw];
        if (u != w) {
          pos[u] = pw;
          vert[pu] = w;
          pos[w] = pu;
          vert[pw] = u;
        }
        ++bin[du];
        --deg[u];
      }
    }
  }
  return deg;
}

SimilarityNetwork induced_subgraph(const SimilarityNetwork& g, std::span<const std::uint32_t> keep) {
  constexpr auto kDropped = static_cast<std::uint32_t>(-1);
  std::vector<std::uint32_t> remap(g.n_nodes(), kDropped);
  std::vector<std::uint32_t> sorted(keep.begin(), keep.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

  SimilarityNetwork sub;
  sub.threshold = g.threshold;
  sub.excluded_users = g.excluded_users;
  for (auto v : sorted) {
    remap[v] = static_cast<std::uint32_t>(sub.nodes.size());
    sub.nodes.push_back(g.nodes[v]);
  }
  for (const auto& e : g.edges) {
    if (remap[e.a] != kDropped && remap[e.b] != kDropped) sub.edges.push_back({remap[e.a], remap[e.b], e.weight});
  }
  return sub;
}

SimilarityNetwork k_core(const SimilarityNetwork& g, std::size_t k) {
  const auto core = core_numbers(g);
  std::vector<std::uint32_t> keep;
  for (std::uint32_t v = 0; v < core.size(); ++v) {
    if (core[v] >= k) keep.push_back(v);
  }
  return induced_subgraph(g, keep);
}

Components connected_components(const SimilarityNetwork& g) {
  const std::size_t n = g.n_nodes();
  std::vector<std::uint32_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0u);
  auto find = [&](std::uint32_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (const auto& e : g.edges) {
    auto ra = find(e.a), rb = find(e.b);
    if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
  }
  Components c;
  c.label.assign(n, 0);
  std::vector<std::int64_t> label_of_root(n, -1);
  for (std::uint32_t v = 0; v < n; ++v) {
    const auto r = find(v);
    if (label_of_root[r] < 0) label_of_root[r] = static_cast<std::int64_t>(c.count++);
    c.label[v] = static_cast<std::uint32_t>(label_of_root[r]);
  }
  return c;
}

GraphMetrics graph_metrics(const SimilarityNetwork& g) {
  GraphMetrics out;
  out.n_nodes = g.n_nodes();
  out.n_edges = g.n_edges();
  std::vector<std::size_t> degree(g.n_nodes(), 0);
  for (const auto& e : g.edges) {
    ++degree[e.a];
    ++degree[e.b];
  }
  for (auto d : degree) ++out.degree_distribution[d];
  const auto comps = connected_components(g);
  out.component_sizes.assign(comps.count, 0);
  for (auto l : comps.label) ++out.component_sizes[l];
  std::sort(out.component_sizes.begin(), out.component_sizes.end(), std::greater<>());
  return out;
}

}  // namespace courl
