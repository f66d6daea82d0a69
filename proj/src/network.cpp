#include "phylonet/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>
#include <string>

#include "phylonet/errors.hpp"
#include "phylonet/stats.hpp"

namespace phylonet {

ColorNetwork::ColorNetwork(MarkedTrajectory trajectory, std::vector<Lineage> lineages,
                           std::vector<MutationPoint> mutations)
    : trajectory_(std::move(trajectory)),
      lineages_(std::move(lineages)),
      mutations_(std::move(mutations)) {}

double ColorNetwork::length() const {
  CompensatedSum s;
  for (const auto& l : lineages_) s.add(l.length());
  return s.value();
}

std::size_t ColorNetwork::alive_at(double t) const {
  std::size_t n = 0;
  for (const auto& l : lineages_)
    if (l.birth_time <= t && t < l.end_time) ++n;
  return n;
}

std::vector<std::size_t> ColorNetwork::alive_lineages_at(double t) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < lineages_.size(); ++i)
    if (lineages_[i].birth_time <= t && t < lineages_[i].end_time) out.push_back(i);
  return out;
}

ColorNetwork realize_network(const MarkedTrajectory& path, RngStream& rng) {
  if (path.initial_state() != 1)
    throw std::invalid_argument("realize_network: path must start from a single lineage");
  std::vector<Lineage> lin(1);
  lin[0].birth_time = path.start_time();
  std::vector<MutationPoint> muts;
  std::vector<std::size_t> alive{0};
  std::vector<std::size_t> pos{0};
  auto remove = [&](std::size_t id) {
    std::size_t p = pos[id];
    alive[p] = alive.back();
    pos[alive[p]] = p;
    alive.pop_back();
  };
  for (const Event& e : path.events()) {
    switch (e.kind) {
      case EventKind::Birth: {
        std::size_t from = alive[rng.below(alive.size())];
        std::size_t id = lin.size();
        Lineage child;
        child.birth_time = e.time;
        child.parent = from;
        lin.push_back(std::move(child));
        lin[from].branches.push_back(id);
        pos.push_back(alive.size());
        alive.push_back(id);
        break;
      }
      case EventKind::Death:
      case EventKind::Mutation: {
        std::size_t id = alive[rng.below(alive.size())];
        lin[id].end_time = e.time;
        if (e.kind == EventKind::Mutation) {
          lin[id].end = LineageEnd::Mutation;
          lin[id].end_ref = muts.size();
          muts.push_back({id, e.time});
        } else {
          lin[id].end = LineageEnd::Death;
        }
        remove(id);
        break;
      }
      case EventKind::Coalescence: {
        // Uniform ordered pair: uniform unordered pair plus a fair coin.
        std::size_t n = alive.size();
        std::size_t i = rng.below(n);
        std::size_t j = rng.below(n - 1);
        if (j >= i) ++j;
        std::size_t ending = alive[i], into = alive[j];
        lin[ending].end_time = e.time;
        lin[ending].end = LineageEnd::Coalescence;
        lin[ending].end_ref = into;
        lin[into].merged_in.push_back(ending);
        remove(ending);
        break;
      }
    }
  }
  return ColorNetwork(path, std::move(lin), std::move(muts));
}

ColorNetwork decorate(const ModelParams& params, std::size_t m, RngStream& rng,
                      std::uint64_t max_retries) {
  MarkedTrajectory path = condition_on_mutations(params, m, rng, max_retries);
  return realize_network(path, rng);
}

GenealogyTree GenealogyTree::from_outdegrees(std::vector<int> outdegrees) {
  std::size_t n = outdegrees.size();
  if (n == 0) throw std::invalid_argument("genealogy tree: empty outdegree sequence");
  GenealogyTree t;
  t.outdegree_ = std::move(outdegrees);
  t.children_.assign(n, {});
  t.parent_.assign(n, 0);
  t.child_index_.assign(n, 0);
  t.depth_.assign(n, 0);
  std::vector<std::pair<std::size_t, int>> stack;
  if (t.outdegree_[0] < 0) throw std::invalid_argument("genealogy tree: negative outdegree");
  if (t.outdegree_[0] > 0) stack.push_back({0, t.outdegree_[0]});
  for (std::size_t v = 1; v < n; ++v) {
    if (t.outdegree_[v] < 0) throw std::invalid_argument("genealogy tree: negative outdegree");
    if (stack.empty()) throw std::invalid_argument("genealogy tree: not a Lukasiewicz code");
    auto& top = stack.back();
    std::size_t p = top.first;
    t.parent_[v] = p;
    t.child_index_[v] = t.children_[p].size();
    t.children_[p].push_back(v);
    t.depth_[v] = t.depth_[p] + 1;
    if (--top.second == 0) stack.pop_back();
    if (t.outdegree_[v] > 0) stack.push_back({v, t.outdegree_[v]});
  }
  if (!stack.empty()) throw std::invalid_argument("genealogy tree: not a Lukasiewicz code");
  return t;
}

std::size_t GenealogyTree::height() const {
  return depth_.empty() ? 0 : *std::max_element(depth_.begin(), depth_.end());
}

GenealogyTree sample_genealogy_tree(const TiltedOffspring& off, std::size_t n, RngStream& rng,
                                    TreeMethod method, std::uint64_t max_retries) {
  if (n == 0) throw std::invalid_argument("sample_genealogy_tree: n must be >= 1");
  std::vector<int> xi(n);
  for (std::uint64_t attempt = 0; attempt < max_retries; ++attempt) {
    if (method == TreeMethod::Cycle) {
      long long sum = 0;
      for (std::size_t i = 0; i < n; ++i) {
        xi[i] = static_cast<int>(sample_from_cdf(off.cdf, rng));
        sum += xi[i] - 1;
      }
      if (sum != -1) continue;
      // Cycle lemma: start right after the first minimum of the partial sums.
      long long s = 0, best = 0;
      std::size_t arg = 0;
      for (std::size_t i = 0; i < n; ++i) {
        s += xi[i] - 1;
        if (s < best) {
          best = s;
          arg = i + 1;
        }
      }
      std::rotate(xi.begin(), xi.begin() + static_cast<std::ptrdiff_t>(arg % n), xi.end());
      return GenealogyTree::from_outdegrees(xi);
    }
    // Rejection: draw outdegrees in depth-first order until the pile of
    // unexplored vertices empties.
    long long pile = 1;
    std::size_t count = 0;
    while (pile > 0 && count <= n) {
      int d = static_cast<int>(sample_from_cdf(off.cdf, rng));
      if (count < n) xi[count] = d;
      ++count;
      pile += d - 1;
    }
    if (pile == 0 && count == n) return GenealogyTree::from_outdegrees(xi);
  }
  throw RetryExhausted("sample_genealogy_tree: no tree of size " + std::to_string(n) + " in " +
                           std::to_string(max_retries) + " attempts",
                       0.0);
}

GluedNetwork glue(GenealogyTree tree, std::vector<ColorNetwork> decorations) {
  if (decorations.size() != tree.size())
    throw StructuralError("glue: " + std::to_string(decorations.size()) + " decorations for " +
                          std::to_string(tree.size()) + " colors");
  for (std::size_t v = 0; v < tree.size(); ++v) {
    if (decorations[v].mutation_points().size() != static_cast<std::size_t>(tree.outdegree(v)))
      throw StructuralError("glue: color " + std::to_string(v) + " has " +
                            std::to_string(decorations[v].mutation_points().size()) +
                            " mutation points but outdegree " + std::to_string(tree.outdegree(v)));
    if (decorations[v].lineages().empty())
      throw StructuralError("glue: color " + std::to_string(v) + " has no lineages");
  }
  GluedNetwork g;
  g.tree_ = std::move(tree);
  g.decorations_ = std::move(decorations);
  std::size_t n = g.tree_.size();
  g.root_time_.assign(n, 0.0);
  for (std::size_t v = 1; v < n; ++v) {
    std::size_t p = g.tree_.parent(v);
    const auto& dp = g.decorations_[p];
    double t = dp.mutation_points()[g.tree_.child_index(v)].time;
    g.root_time_[v] = g.root_time_[p] + (t - dp.root_time());
  }
  CompensatedSum len;
  for (const auto& d : g.decorations_) len.add(d.length());
  g.total_length_ = len.value();
  g.build_graph();
  return g;
}

void GluedNetwork::build_graph() {
  const std::size_t n = tree_.size();
  lineage_nodes_.assign(n, {});
  mutation_nodes_.assign(n, {});
  node_time_.clear();
  edge_u_.clear();
  edge_v_.clear();
  edge_w_.clear();
  lineage_cum_.clear();
  lineage_index_.clear();
  auto new_node = [&](double t) {
    node_time_.push_back(t);
    return node_time_.size() - 1;
  };
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  CompensatedSum cum;
  for (std::size_t v = 0; v < n; ++v) {
    const ColorNetwork& d = decorations_[v];
    const auto& lin = d.lineages();
    const double shift = root_time_[v] - d.root_time();
    const std::size_t L = lin.size();
    std::vector<std::size_t> branch_node(L, kNone), merge_node(L, kNone);
    std::size_t root_node = v == 0 ? new_node(shift + lin[0].birth_time)
                                   : mutation_nodes_[tree_.parent(v)][tree_.child_index(v)];
    mutation_nodes_[v].assign(d.mutation_points().size(), kNone);
    for (std::size_t l = 0; l < L; ++l) {
      for (std::size_t c : lin[l].branches) branch_node[c] = new_node(shift + lin[c].birth_time);
      for (std::size_t m : lin[l].merged_in) merge_node[m] = new_node(shift + lin[m].end_time);
    }
    lineage_nodes_[v].assign(L, {});
    for (std::size_t l = 0; l < L; ++l) {
      const Lineage& x = lin[l];
      auto& nodes = lineage_nodes_[v][l];
      nodes.push_back(x.parent ? branch_node[l] : root_node);
      // Interior points: branch and merge points in time order.
      std::size_t bi = 0, mi = 0;
      while (bi < x.branches.size() || mi < x.merged_in.size()) {
        bool take_branch =
            mi >= x.merged_in.size() ||
            (bi < x.branches.size() &&
             lin[x.branches[bi]].birth_time <= lin[x.merged_in[mi]].end_time);
        nodes.push_back(take_branch ? branch_node[x.branches[bi++]] : merge_node[x.merged_in[mi++]]);
      }
      std::size_t end_node;
      if (x.end == LineageEnd::Coalescence) {
        end_node = merge_node[l];
      } else {
        end_node = new_node(shift + x.end_time);
        if (x.end == LineageEnd::Mutation) mutation_nodes_[v][x.end_ref] = end_node;
      }
      nodes.push_back(end_node);
      for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        edge_u_.push_back(nodes[i]);
        edge_v_.push_back(nodes[i + 1]);
        edge_w_.push_back(node_time_[nodes[i + 1]] - node_time_[nodes[i]]);
      }
      cum.add(x.length());
      lineage_cum_.push_back(cum.value());
      lineage_index_.push_back({v, l});
    }
  }
  // Adjacency in compressed form.
  const std::size_t N = node_time_.size();
  adj_offset_.assign(N + 1, 0);
  for (std::size_t e = 0; e < edge_u_.size(); ++e) {
    ++adj_offset_[edge_u_[e] + 1];
    ++adj_offset_[edge_v_[e] + 1];
  }
  for (std::size_t i = 0; i < N; ++i) adj_offset_[i + 1] += adj_offset_[i];
  adj_edge_.assign(adj_offset_[N], 0);
  std::vector<std::size_t> fill(adj_offset_.begin(), adj_offset_.end() - 1);
  for (std::size_t e = 0; e < edge_u_.size(); ++e) {
    adj_edge_[fill[edge_u_[e]]++] = e;
    adj_edge_[fill[edge_v_[e]]++] = e;
  }
}

double GluedNetwork::height(const PointRef& x) const {
  const ColorNetwork& d = decorations_.at(x.vertex);
  const Lineage& l = d.lineages().at(x.lineage);
  return root_time_[x.vertex] + (l.birth_time - d.root_time()) + x.offset;
}

std::pair<std::size_t, std::size_t> GluedNetwork::bracket(const PointRef& x) const {
  const auto& nodes = lineage_nodes_.at(x.vertex).at(x.lineage);
  double h = height(x);
  // First node strictly above h; the point lies on the edge ending there.
  auto it = std::upper_bound(nodes.begin() + 1, nodes.end() - 1, h,
                             [&](double t, std::size_t node) { return t < node_time_[node]; });
  std::size_t i = static_cast<std::size_t>(it - nodes.begin());
  return {nodes[i - 1], nodes[i]};
}

std::vector<double> GluedNetwork::distances_from(const PointRef& x) const {
  const std::size_t N = node_time_.size();
  std::vector<double> dist(N, std::numeric_limits<double>::infinity());
  auto [a, b] = bracket(x);
  double h = height(x);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[a] = std::max(0.0, h - node_time_[a]);
  dist[b] = std::min(dist[b], std::max(0.0, node_time_[b] - h));
  pq.push({dist[a], a});
  pq.push({dist[b], b});
  while (!pq.empty()) {
    auto [du, u] = pq.top();
    pq.pop();
    if (du > dist[u]) continue;
    for (std::size_t k = adj_offset_[u]; k < adj_offset_[u + 1]; ++k) {
      std::size_t e = adj_edge_[k];
      std::size_t w = edge_u_[e] == u ? edge_v_[e] : edge_u_[e];
      double nd = du + edge_w_[e];
      if (nd < dist[w]) {
        dist[w] = nd;
        pq.push({nd, w});
      }
    }
  }
  return dist;
}

double distance(const GluedNetwork& g, const PointRef& a, const PointRef& b) {
  auto dist = g.distances_from(a);
  auto [u, v] = g.bracket(b);
  double hb = g.height(b);
  double best = std::min(dist[u] + (hb - g.node_time(u)), dist[v] + (g.node_time(v) - hb));
  if (a.vertex == b.vertex && a.lineage == b.lineage && g.bracket(a) == std::make_pair(u, v))
    best = std::min(best, std::abs(g.height(a) - hb));
  return best;
}

PointRef GluedNetwork::locate(double s) const {
  auto it = std::upper_bound(lineage_cum_.begin(), lineage_cum_.end(), s);
  if (it == lineage_cum_.end()) --it;
  std::size_t k = static_cast<std::size_t>(it - lineage_cum_.begin());
  auto [v, l] = lineage_index_[k];
  double before = k == 0 ? 0.0 : lineage_cum_[k - 1];
  double len = decorations_[v].lineages()[l].length();
  return PointRef{v, l, std::clamp(s - before, 0.0, len)};
}

PointRef uniform_point(const GluedNetwork& g, RngStream& rng) {
  if (!(g.total_length() > 0.0)) throw std::invalid_argument("uniform_point: network has no length");
  return g.locate(rng.uniform() * g.total_length());
}

ConditionedExcursions::ConditionedExcursions(const ModelParams& params, int m_max)
    : params_(params), m_max_(m_max) {
  if (m_max < 0) throw std::invalid_argument("ConditionedExcursions: m_max must be >= 0");
  // Same state truncation as offspring_pmf: level n+1 carries no mutations.
  n_ = offspring_pmf(params, 0).state_trunc;
  const std::size_t len = static_cast<std::size_t>(m_max) + 1;
  P_.assign(static_cast<std::size_t>(n_) + 2, std::vector<double>(len, 0.0));
  Q_ = P_;
  P_[static_cast<std::size_t>(n_) + 1][0] = 1.0;
  for (int k = n_; k >= 1; --k) {
    const auto& up = P_[static_cast<std::size_t>(k) + 1];
    auto& Q = Q_[static_cast<std::size_t>(k)];
    auto& P = P_[static_cast<std::size_t>(k)];
    double r = params.rho(static_cast<std::size_t>(k));
    double theta = r / (1.0 + r);
    double pk = params.mu / r;
    double scale = 1.0 / (1.0 - (1.0 - theta) * up[0]);
    Q[0] = theta * scale;
    for (std::size_t m = 1; m < len; ++m) {
      double conv = 0.0;
      for (std::size_t j = 1; j <= m; ++j) conv += up[j] * Q[m - j];
      Q[m] = (1.0 - theta) * conv * scale;
    }
    P[0] = (1.0 - pk) * Q[0];
    for (std::size_t m = 1; m < len; ++m) P[m] = (1.0 - pk) * Q[m] + pk * Q[m - 1];
  }
}

double ConditionedExcursions::probability(int m) const {
  if (m < 0 || m > m_max_) return 0.0;
  return P_[1][static_cast<std::size_t>(m)];
}

MarkedTrajectory ConditionedExcursions::sample(int m, RngStream& rng) const {
  if (m < 0 || m > m_max_)
    throw std::invalid_argument("ConditionedExcursions: m outside the table");
  if (!(probability(m) > 0.0))
    throw RetryExhausted("ConditionedExcursions: P(M = " + std::to_string(m) + ") underflows", 0.0);
  const ModelParams& p = params_;
  std::vector<Event> events;
  double t = 0.0;
  struct Frame {
    int k;
    int r;     // mutations still owed by up-excursions
    bool mut;  // final down-jump is a Mutation
  };
  std::vector<Frame> stack;
  auto down_kind = [&](int k, bool mut) {
    if (mut) return EventKind::Mutation;
    double u = rng.uniform() * (p.rho(static_cast<std::size_t>(k)) - p.mu);
    return (u < p.alpha || k == 1) ? EventKind::Death : EventKind::Coalescence;
  };
  // Beyond the table: whole excursions from k to k-1 by rejection.
  auto deep_excursion = [&](int k0, int j) {
    std::vector<Event> buf;
    for (std::uint64_t attempt = 0;; ++attempt) {
      if (attempt >= 10'000'000)
        throw RetryExhausted("ConditionedExcursions: deep excursion rejected too often", 0.0);
      buf.clear();
      double s = t;
      int k = k0, muts = 0;
      while (k >= k0) {
        double r = p.rho(static_cast<std::size_t>(k));
        s += rng.exponential(static_cast<double>(k) * (1.0 + r));
        EventKind kind = rng.uniform() * (1.0 + r) < 1.0 ? EventKind::Birth : draw_down_kind(p, k, rng);
        buf.push_back({s, kind});
        if (kind == EventKind::Mutation) ++muts;
        k += kind == EventKind::Birth ? 1 : -1;
      }
      if (muts == j) {
        events.insert(events.end(), buf.begin(), buf.end());
        t = s;
        return;
      }
    }
  };
  auto open = [&](int k, int j) {
    const auto& P = P_[static_cast<std::size_t>(k)];
    const auto& Q = Q_[static_cast<std::size_t>(k)];
    double pk = p.mu / p.rho(static_cast<std::size_t>(k));
    bool mut = j >= 1 && rng.uniform() * P[static_cast<std::size_t>(j)] <
                             pk * Q[static_cast<std::size_t>(j) - 1];
    stack.push_back({k, j - (mut ? 1 : 0), mut});
  };
  open(1, m);
  while (!stack.empty()) {
    const int k = stack.back().k;
    const int r = stack.back().r;
    double rate = p.rho(static_cast<std::size_t>(k));
    t += rng.exponential(static_cast<double>(k) * (1.0 + rate));
    const auto& Q = Q_[static_cast<std::size_t>(k)];
    double theta = rate / (1.0 + rate);
    double u = rng.uniform() * Q[static_cast<std::size_t>(r)];
    if (r == 0) {
      if (u < theta) {
        events.push_back({t, down_kind(k, stack.back().mut)});
        stack.pop_back();
        continue;
      }
      u -= theta;
    }
    // Up-jump carrying j of the r owed mutations.
    const auto& up = P_[static_cast<std::size_t>(k) + 1];
    int j = 0, last = -1;
    for (; j <= r; ++j) {
      double w = (1.0 - theta) * up[static_cast<std::size_t>(j)] *
                 Q[static_cast<std::size_t>(r - j)];
      if (w <= 0.0) continue;
      last = j;
      if (u < w) break;
      u -= w;
    }
    if (j > r) j = last;
    if (j < 0) throw std::logic_error("ConditionedExcursions: empty conditional law");
    events.push_back({t, EventKind::Birth});
    stack.back().r -= j;
    if (k + 1 > n_) {
      deep_excursion(k + 1, j);
    } else {
      open(k + 1, j);
    }
  }
  return MarkedTrajectory(1, 0.0, std::move(events));
}

NetworkModel NetworkModel::make(const ModelParams& params) {
  NetworkModel m;
  m.params = params;
  m.tilt = zeta_tilt(params);
  m.offspring = make_tilted_offspring(params, m.tilt);
  m.nu_cdf = cumulative(nu_circ_pmf(params, 1e-15).probs);
  std::vector<double> sb(m.offspring.probs.size());
  for (std::size_t i = 0; i < sb.size(); ++i) sb[i] = static_cast<double>(i) * m.offspring.probs[i];
  m.size_biased_cdf = cumulative(sb);
  m.excursions = std::make_shared<ConditionedExcursions>(
      params, static_cast<int>(m.offspring.probs.size()) - 1);
  return m;
}

double outdegree_probability(const NetworkModel& model, int m) {
  if (m < 0 || static_cast<std::size_t>(m) >= model.offspring.probs.size()) return 0.0;
  const auto& t = model.offspring.tilt;
  return model.offspring.probs[static_cast<std::size_t>(m)] *
         std::exp(std::log(t.E_zetaM) - m * std::log(t.zeta));
}

ColorNetwork decorate(const NetworkModel& model, int m, RngStream& rng, DecorateMethod method,
                      std::uint64_t max_retries) {
  double acc = outdegree_probability(model, m);
  if (method == DecorateMethod::Auto)
    method = acc >= kRejectionFloor || m > model.excursions->m_max() ? DecorateMethod::Rejection
                                                                     : DecorateMethod::Exact;
  if (method == DecorateMethod::Exact) return realize_network(model.excursions->sample(m, rng), rng);
  if (acc < 1e-6)
    throw RetryExhausted("decorate: acceptance probability " + std::to_string(acc) +
                             " for outdegree " + std::to_string(m) + " is below 1e-6",
                         acc);
  return decorate(model.params, static_cast<std::size_t>(m), rng, max_retries);
}

namespace {

GluedNetwork sample_direct(const NetworkModel& model, std::size_t n, RngStream& rng,
                           std::uint64_t max_retries) {
  for (std::uint64_t attempt = 0; attempt < max_retries; ++attempt) {
    std::vector<ColorNetwork> decs;
    std::vector<std::vector<std::size_t>> kids;
    std::size_t created = 1;
    bool too_big = false;
    // Colors do not interact, so simulating them one by one in breadth-first
    // order is the same as running the whole particle system.
    for (std::size_t next = 0; next < created; ++next) {
      MarkedTrajectory path = simulate_trajectory(model.params, 1, rng);
      decs.push_back(realize_network(path, rng));
      std::size_t m = decs.back().mutation_points().size();
      kids.emplace_back();
      for (std::size_t i = 0; i < m; ++i) kids.back().push_back(created + i);
      created += m;
      if (created > n) {
        too_big = true;
        break;
      }
    }
    if (too_big || created != n) continue;
    // Relabel breadth-first ids into depth-first preorder.
    std::vector<int> outdeg;
    std::vector<ColorNetwork> ordered;
    std::vector<std::size_t> stack{0};
    while (!stack.empty()) {
      std::size_t v = stack.back();
      stack.pop_back();
      outdeg.push_back(static_cast<int>(kids[v].size()));
      ordered.push_back(std::move(decs[v]));
      for (auto it = kids[v].rbegin(); it != kids[v].rend(); ++it) stack.push_back(*it);
    }
    return glue(GenealogyTree::from_outdegrees(std::move(outdeg)), std::move(ordered));
  }
  throw RetryExhausted("sample_network(direct): no network with " + std::to_string(n) +
                           " colors in " + std::to_string(max_retries) +
                           " attempts; the tilted method is exponentially faster off criticality",
                       0.0);
}

}  // namespace

GluedNetwork sample_network(const NetworkModel& model, std::size_t n, RngStream& rng,
                            NetworkMethod method, std::uint64_t max_retries) {
  if (n == 0) throw std::invalid_argument("sample_network: n must be >= 1");
  if (method == NetworkMethod::Direct) return sample_direct(model, n, rng, max_retries);
  GenealogyTree tree = sample_genealogy_tree(model.offspring, n, rng);
  std::vector<ColorNetwork> decs;
  decs.reserve(n);
  for (std::size_t v = 0; v < n; ++v) {
    decs.push_back(decorate(model, tree.outdegree(v), rng, DecorateMethod::Auto, max_retries));
  }
  return glue(std::move(tree), std::move(decs));
}

std::vector<ColorTrace> trace_contour(const GluedNetwork& g, RngStream& rng) {
  std::vector<ColorTrace> out;
  out.reserve(g.colors());
  for (std::size_t v = 0; v < g.colors(); ++v) {
    const ColorNetwork& d = g.decorations()[v];
    const auto& lin = d.lineages();
    const double shift = g.color_root_time(v) - d.root_time();
    ColorTrace tr;
    tr.vertex = v;
    std::vector<std::size_t> cursor(lin.size(), 0);
    std::vector<std::pair<std::size_t, double>> stack{{0, lin[0].birth_time}};
    CompensatedSum len;
    while (!stack.empty()) {
      auto [l, t0] = stack.back();
      stack.pop_back();
      const Lineage& x = lin[l];
      if (cursor[l] < x.branches.size()) {
        std::size_t c = x.branches[cursor[l]++];
        double tb = lin[c].birth_time;
        tr.pieces.push_back({shift + t0, shift + tb});
        len.add(tb - t0);
        // Coin: which of the two outgoing lineages is explored first.
        if (rng.bernoulli(0.5)) {
          stack.push_back({l, tb});
          stack.push_back({c, tb});
        } else {
          stack.push_back({c, tb});
          stack.push_back({l, tb});
        }
      } else {
        tr.pieces.push_back({shift + t0, shift + x.end_time});
        len.add(x.end_time - t0);
      }
    }
    tr.length = len.value();
    out.push_back(std::move(tr));
  }
  return out;
}

double trace_height(const std::vector<ColorTrace>& trace, double t) {
  const std::size_t n = trace.size();
  t = std::clamp(t, 0.0, 1.0);
  std::size_t c = std::min(static_cast<std::size_t>(t * static_cast<double>(n)), n - 1);
  const ColorTrace& tr = trace[c];
  double s = (t * static_cast<double>(n) - static_cast<double>(c)) * tr.length;
  double acc = 0.0;
  for (const auto& p : tr.pieces) {
    double len = p.end - p.start;
    if (s <= acc + len) return p.start + std::max(0.0, s - acc);
    acc += len;
  }
  return tr.pieces.back().end;
}

HeightProcess contour(const GluedNetwork& g, RngStream& rng, std::size_t grid_size) {
  if (grid_size < 2) throw std::invalid_argument("contour: grid_size must be >= 2");
  auto trace = trace_contour(g, rng);
  HeightProcess hp;
  hp.grid_size = grid_size;
  hp.t.resize(grid_size);
  hp.h.resize(grid_size);
  for (std::size_t i = 0; i < grid_size; ++i) {
    double t = static_cast<double>(i) / static_cast<double>(grid_size - 1);
    hp.t[i] = t;
    hp.h[i] = trace_height(trace, t);
  }
  return hp;
}

}  // namespace phylonet
