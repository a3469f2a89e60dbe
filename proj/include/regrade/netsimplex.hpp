#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <tuple>
#include <vector>

#include "regrade/errors.hpp"

namespace regrade {

/// Sparse optimal flow for a balanced transportation instance.
struct TransportFlows {
  std::vector<std::tuple<int, int, double>> flows;  // (source, sink, volume)
  double objective = 0.0;
  int pivots = 0;
};

/// Primal network simplex on the complete bipartite transportation graph.
///
/// Minimizes sum(cost[i*m+j] * x[i][j]) subject to row sums = supply,
/// column sums = demand, x >= 0. Supplies and demands must balance (the
/// caller adds a zero-cost dummy node for unbalanced problems). The basis is
/// a spanning tree rooted at an artificial node; pricing scans arcs in blocks
/// and takes the most negative reduced cost per block. Runs comfortably at
/// thousands of nodes, where a dense tableau would be hopeless.
inline TransportFlows solve_transportation(int n, int m,
                                           const std::vector<double>& cost,
                                           const std::vector<double>& supply,
                                           const std::vector<double>& demand) {
  if (n <= 0 || m <= 0) throw ArgumentError("transportation: empty side");
  if (cost.size() != static_cast<std::size_t>(n) * m)
    throw ArgumentError("transportation: cost size mismatch");
  if (supply.size() != static_cast<std::size_t>(n) ||
      demand.size() != static_cast<std::size_t>(m))
    throw ArgumentError("transportation: supply/demand size mismatch");

  double total_s = 0.0, total_d = 0.0, max_c = 0.0;
  for (double s : supply) {
    if (!(s >= 0.0)) throw ArgumentError("transportation: negative supply");
    total_s += s;
  }
  for (double d : demand) {
    if (!(d >= 0.0)) throw ArgumentError("transportation: negative demand");
    total_d += d;
  }
  for (double c : cost) max_c = std::max(max_c, std::fabs(c));
  const double scale = std::max({total_s, total_d, 1e-12});
  if (std::fabs(total_s - total_d) > 1e-9 * scale)
    throw ArgumentError("transportation: unbalanced supply/demand");

  const int num_arcs = n * m;           // real arcs, id a: (a/m) -> n + a%m
  const int root = n + m;               // artificial root node
  const int num_nodes = n + m + 1;
  const double art_cost = (max_c + 1.0) * static_cast<double>(num_nodes);
  const double eps_rc = 1e-11 * std::max(max_c, 1.0);

  // Tree state: per node, the arc to its parent and the flow it carries.
  std::vector<int> parent(num_nodes, -1);
  std::vector<int> parc(num_nodes, -1);       // arc id; >= num_arcs artificial
  std::vector<char> up(num_nodes, 0);         // arc points node -> parent
  std::vector<double> flow(num_nodes, 0.0);   // on the parent arc
  std::vector<double> pot(num_nodes, 0.0);    // potentials, pot[root] = 0
  std::vector<int> depth(num_nodes, 0);
  std::vector<std::vector<int>> kids(num_nodes);

  for (int i = 0; i < n; ++i) {  // source -> root, carries the supply
    parent[i] = root;
    parc[i] = num_arcs + i;
    up[i] = 1;
    flow[i] = supply[i];
    depth[i] = 1;
    pot[i] = -art_cost;  // pot[root] = pot[i] + art_cost
    kids[root].push_back(i);
  }
  for (int j = 0; j < m; ++j) {  // root -> sink, carries the demand
    const int v = n + j;
    parent[v] = root;
    parc[v] = num_arcs + v;
    up[v] = 0;
    flow[v] = demand[j];
    depth[v] = 1;
    pot[v] = art_cost;
    kids[root].push_back(v);
  }

  auto arc_cost = [&](int a) {
    return a < num_arcs ? cost[a] : art_cost;
  };

  // pot is recomputed from the tree after each pivot; rc of real arc (i, j)
  // is cost - (pot[sink] - pot[source]).
  auto recompute_potentials = [&]() {
    std::vector<int> stack{root};
    pot[root] = 0.0;
    depth[root] = 0;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (int w : kids[v]) {
        depth[w] = depth[v] + 1;
        pot[w] = up[w] ? pot[v] - arc_cost(parc[w]) : pot[v] + arc_cost(parc[w]);
        stack.push_back(w);
      }
    }
  };

  const int block =
      std::max(64, static_cast<int>(std::sqrt(static_cast<double>(num_arcs))));
  int scan_pos = 0;

  // One pricing pass: the most negative reduced cost in the first block that
  // contains any, continuing round-robin from the previous position.
  auto find_entering = [&]() -> int {
    int checked = 0;
    while (checked < num_arcs) {
      int best = -1;
      double best_rc = -eps_rc;
      const int end = std::min(scan_pos + block, num_arcs);
      int i = scan_pos / m;
      int j = scan_pos % m;
      double pu = pot[i];
      for (int a = scan_pos; a < end; ++a) {
        const double rc = cost[a] - pot[n + j] + pu;
        if (rc < best_rc) {
          best_rc = rc;
          best = a;
        }
        if (++j == m) {
          j = 0;
          if (++i < n) pu = pot[i];
        }
      }
      checked += end - scan_pos;
      scan_pos = end == num_arcs ? 0 : end;
      if (best >= 0) return best;
    }
    return -1;
  };

  std::vector<int> path_u, path_v;
  const int max_pivots = 1000 + 200 * (n + m);
  int pivots = 0;
  for (;; ++pivots) {
    if (pivots > max_pivots)
      throw SolveError("transportation: pivot budget exhausted");
    const int enter = find_entering();
    if (enter < 0) break;
    const int eu = enter / m;
    const int ev = n + enter % m;

    // Tree paths from both endpoints to their common ancestor.
    path_u.clear();
    path_v.clear();
    int a = eu, b = ev;
    while (depth[a] > depth[b]) {
      path_u.push_back(a);
      a = parent[a];
    }
    while (depth[b] > depth[a]) {
      path_v.push_back(b);
      b = parent[b];
    }
    while (a != b) {
      path_u.push_back(a);
      path_v.push_back(b);
      a = parent[a];
      b = parent[b];
    }

    // Push theta around the cycle eu -> ev -> tree path -> eu. Climbing the
    // v side moves with each w->parent arc, descending the u side against
    // it, so v-side arcs pointing down and u-side arcs pointing up block.
    double theta = std::numeric_limits<double>::infinity();
    int leave = -1;
    bool leave_on_u = false;
    for (int w : path_v) {
      if (!up[w] && flow[w] < theta) {
        theta = flow[w];
        leave = w;
        leave_on_u = false;
      }
    }
    for (int w : path_u) {
      if (up[w] && flow[w] < theta) {
        theta = flow[w];
        leave = w;
        leave_on_u = true;
      }
    }
    if (leave < 0)
      throw SolveError("transportation: unbounded cycle (corrupt basis)");

    for (int w : path_v) flow[w] += up[w] ? theta : -theta;
    for (int w : path_u) flow[w] += up[w] ? -theta : theta;

    // Re-root the cut subtree at the entering arc's endpoint on that side.
    const int xend = leave_on_u ? eu : ev;
    std::vector<int> chain;
    for (int w = xend; w != leave; w = parent[w]) chain.push_back(w);
    chain.push_back(leave);
    // Reverse parent pointers from xend up to the leaving node.
    int prev_parent = leave_on_u ? ev : eu;
    int prev_arc = enter;
    // Entering arc direction: eu -> ev. If attaching at eu, the arc points
    // from the new child eu to its parent ev; otherwise it points down.
    char prev_up = leave_on_u ? 1 : 0;
    double prev_flow = theta;
    for (std::size_t idx = 0; idx < chain.size(); ++idx) {
      const int w = chain[idx];
      const int old_parent = parent[w];
      const int old_arc = parc[w];
      const char old_up = up[w];
      const double old_flow = flow[w];
      // Detach from old parent.
      auto& sib = kids[old_parent];
      sib.erase(std::find(sib.begin(), sib.end(), w));
      parent[w] = prev_parent;
      parc[w] = prev_arc;
      up[w] = prev_up;
      flow[w] = prev_flow;
      kids[prev_parent].push_back(w);
      prev_parent = w;
      prev_arc = old_arc;
      prev_up = old_up ? 0 : 1;  // arc direction flips relative to the walk
      prev_flow = old_flow;
      if (w == leave) break;
      (void)idx;
    }

    recompute_potentials();
  }

  // Flows straight from the tree by leaf elimination keeps conservation
  // exact: every node's parent arc carries its subtree imbalance.
  std::vector<double> imb(num_nodes, 0.0);
  for (int i = 0; i < n; ++i) imb[i] = supply[i];
  for (int j = 0; j < m; ++j) imb[n + j] = -demand[j];
  std::vector<int> order(num_nodes);
  for (int v = 0; v < num_nodes; ++v) order[v] = v;
  std::sort(order.begin(), order.end(),
            [&](int a2, int b2) { return depth[a2] > depth[b2]; });
  TransportFlows out;
  out.pivots = pivots;
  for (int v : order) {
    if (v == root) continue;
    double f = up[v] ? imb[v] : -imb[v];
    if (f < 0.0 && f > -1e-9 * scale) f = 0.0;
    if (f < 0.0) throw SolveError("transportation: negative basic flow");
    imb[parent[v]] += imb[v];
    flow[v] = f;
    const int a2 = parc[v];
    if (a2 < num_arcs && f > 0.0) {
      out.flows.emplace_back(a2 / m, a2 % m, f);
      out.objective += f * cost[a2];
    } else if (a2 >= num_arcs && f > 1e-7 * scale) {
      throw SolveError("transportation: artificial arc kept positive flow");
    }
  }
  std::sort(out.flows.begin(), out.flows.end());
  return out;
}

}  // namespace regrade
