#include "roughchaos/transport.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "roughchaos/errors.hpp"

namespace roughchaos {

double TransportPlan::marginal_error(std::span<const double> a, std::span<const double> b) const {
  std::vector<double> ra(n_rows, 0.0), cb(n_cols, 0.0);
  for (std::size_t t = 0; t < mass.size(); ++t) {
    ra[rows[t]] += mass[t];
    cb[cols[t]] += mass[t];
  }
  double err = 0.0;
  for (std::size_t i = 0; i < n_rows; ++i) err = std::max(err, std::abs(ra[i] - a[i]));
  for (std::size_t j = 0; j < n_cols; ++j) err = std::max(err, std::abs(cb[j] - b[j]));
  return err;
}

namespace {

constexpr int kNone = -1;

std::vector<std::int64_t> scale_weights(std::span<const double> w, std::int64_t total) {
  double sum = 0.0;
  for (double v : w) sum += v;
  std::vector<std::int64_t> out(w.size());
  std::int64_t acc = 0;
  std::size_t largest = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    out[i] = std::llround(w[i] / sum * static_cast<double>(total));
    acc += out[i];
    if (w[i] > w[largest]) largest = i;
  }
  out[largest] += total - acc;
  return out;
}

// Primal network simplex on the complete bipartite graph rows -> cols plus an
// artificial root joined to every node.
class NetworkSimplex {
 public:
  NetworkSimplex(std::span<const double> a, std::span<const double> b,
                 std::span<const double> cost)
      : n_(a.size()), m_(b.size()), cost_(cost), a_(a), b_(b) {
    nodes_ = n_ + m_ + 1;
    root_ = static_cast<int>(n_ + m_);
    arcs_ = n_ * m_;
    for (double c : cost_) max_cost_ = std::max(max_cost_, std::abs(c));
    art_cost_ = (max_cost_ + 1.0) * static_cast<double>(nodes_);
    tol_scale_ = 4e-16 * static_cast<double>(nodes_) + 1e-14;

    const std::int64_t total = std::int64_t{1} << 40;
    const auto sa = scale_weights(a, total);
    const auto sb = scale_weights(b, total);
    supply_.resize(n_ + m_);
    for (std::size_t i = 0; i < n_; ++i) supply_[i] = sa[i];
    for (std::size_t j = 0; j < m_; ++j) supply_[n_ + j] = -sb[j];

    flow_.assign(arcs_ + n_ + m_, 0);
    in_tree_.assign(arcs_, 0);
    parent_.assign(nodes_, kNone);
    pred_.assign(nodes_, 0);
    up_.assign(nodes_, 0);
    depth_.assign(nodes_, 0);
    pi_.assign(nodes_, 0.0);
    first_child_.assign(nodes_, kNone);
    next_sib_.assign(nodes_, kNone);
    prev_sib_.assign(nodes_, kNone);
    art_up_.assign(n_ + m_, 0);

    for (std::size_t u = 0; u < n_ + m_; ++u) {
      const int v = static_cast<int>(u);
      const std::size_t arc = arcs_ + u;
      parent_[u] = root_;
      pred_[u] = arc;
      depth_[u] = 1;
      if (supply_[u] > 0) {
        art_up_[u] = 1;
        up_[u] = 1;
        flow_[arc] = supply_[u];
        pi_[u] = -art_cost_;
      } else {
        up_[u] = 0;
        flow_[arc] = -supply_[u];
        pi_[u] = art_cost_;
      }
      link_child(root_, v);
    }
    block_ = std::max<std::size_t>(16, static_cast<std::size_t>(std::sqrt(double(arcs_))));
  }

  TransportPlan run() {
    std::size_t guard = 0;
    const std::size_t limit = 50 * (arcs_ + nodes_) + 100000;
    for (;;) {
      const std::size_t e = find_entering();
      if (e == kDone) break;
      pivot(e);
      if (++guard > limit) throw SolverError("network simplex exceeded its pivot limit");
    }
    return extract();
  }

 private:
  static constexpr std::size_t kDone = std::numeric_limits<std::size_t>::max();

  int source(std::size_t arc) const {
    if (arc < arcs_) return static_cast<int>(arc / m_);
    const std::size_t u = arc - arcs_;
    return art_up_[u] ? static_cast<int>(u) : root_;
  }
  int target(std::size_t arc) const {
    if (arc < arcs_) return static_cast<int>(n_ + arc % m_);
    const std::size_t u = arc - arcs_;
    return art_up_[u] ? root_ : static_cast<int>(u);
  }
  double arc_cost(std::size_t arc) const { return arc < arcs_ ? cost_[arc] : art_cost_; }

  void link_child(int p, int c) {
    prev_sib_[c] = kNone;
    next_sib_[c] = first_child_[p];
    if (first_child_[p] != kNone) prev_sib_[first_child_[p]] = c;
    first_child_[p] = c;
  }
  void unlink_child(int p, int c) {
    if (prev_sib_[c] != kNone)
      next_sib_[prev_sib_[c]] = next_sib_[c];
    else
      first_child_[p] = next_sib_[c];
    if (next_sib_[c] != kNone) prev_sib_[next_sib_[c]] = prev_sib_[c];
    prev_sib_[c] = next_sib_[c] = kNone;
  }

  std::size_t find_entering() {
    if (arcs_ == 0) return kDone;
    std::size_t scanned = 0;
    std::size_t best = kDone;
    double best_rc = 0.0;
    std::size_t in_block = 0;
    while (scanned < arcs_) {
      const std::size_t arc = next_arc_;
      next_arc_ = next_arc_ + 1 == arcs_ ? 0 : next_arc_ + 1;
      ++scanned;
      if (!in_tree_[arc]) {
        const std::size_t i = arc / m_, j = n_ + arc % m_;
        const double rc = cost_[arc] + pi_[i] - pi_[j];
        const double tol = tol_scale_ * (max_cost_ + std::abs(pi_[i]) + std::abs(pi_[j]));
        if (rc < -tol && rc < best_rc) {
          best_rc = rc;
          best = arc;
        }
      }
      if (++in_block == block_) {
        if (best != kDone) return best;
        in_block = 0;
      }
    }
    return best;
  }

  void pivot(std::size_t e) {
    const int s = source(e), t = target(e);
    // Join node of the cycle.
    int x = s, y = t;
    while (depth_[x] > depth_[y]) x = parent_[x];
    while (depth_[y] > depth_[x]) y = parent_[y];
    while (x != y) {
      x = parent_[x];
      y = parent_[y];
    }
    const int join = x;

    // Leaving arc: strict on the source side, non-strict on the target side,
    // which keeps the tree strongly feasible.
    std::int64_t delta = std::numeric_limits<std::int64_t>::max();
    int u_out = kNone;
    bool on_source_side = false;
    for (int w = s; w != join; w = parent_[w])
      if (up_[w] && flow_[pred_[w]] < delta) {
        delta = flow_[pred_[w]];
        u_out = w;
        on_source_side = true;
      }
    for (int w = t; w != join; w = parent_[w])
      if (!up_[w] && flow_[pred_[w]] <= delta) {
        delta = flow_[pred_[w]];
        u_out = w;
        on_source_side = false;
      }
    if (u_out == kNone) throw SolverError("transport problem is unbounded");

    if (delta > 0) {
      flow_[e] += delta;
      for (int w = s; w != join; w = parent_[w]) flow_[pred_[w]] += up_[w] ? -delta : delta;
      for (int w = t; w != join; w = parent_[w]) flow_[pred_[w]] += up_[w] ? delta : -delta;
    }

    const std::size_t leaving = pred_[u_out];
    if (leaving < arcs_) in_tree_[leaving] = 0;
    in_tree_[e] = 1;

    const int w_in = on_source_side ? s : t;
    const int other = on_source_side ? t : s;

    // Reverse the tree path w_in -> u_out and hang it below `other`.
    path_.clear();
    for (int w = w_in;; w = parent_[w]) {
      path_.push_back(w);
      if (w == u_out) break;
    }
    unlink_child(parent_[u_out], u_out);
    old_pred_.resize(path_.size());
    old_up_.resize(path_.size());
    for (std::size_t i = 0; i < path_.size(); ++i) {
      old_pred_[i] = pred_[path_[i]];
      old_up_[i] = up_[path_[i]];
    }
    // Detach every path edge before relinking so sibling lists stay valid.
    for (std::size_t i = 1; i < path_.size(); ++i) unlink_child(path_[i], path_[i - 1]);
    for (std::size_t i = 1; i < path_.size(); ++i) {
      const int child = path_[i - 1], node = path_[i];
      parent_[node] = child;
      pred_[node] = old_pred_[i - 1];
      up_[node] = !old_up_[i - 1];
      link_child(child, node);
    }
    parent_[w_in] = other;
    pred_[w_in] = e;
    up_[w_in] = (w_in == s);
    link_child(other, w_in);
    refresh_subtree(w_in);
  }

  void refresh_subtree(int top) {
    stack_.clear();
    stack_.push_back(top);
    while (!stack_.empty()) {
      const int x = stack_.back();
      stack_.pop_back();
      const int p = parent_[x];
      depth_[x] = depth_[p] + 1;
      const double c = arc_cost(pred_[x]);
      pi_[x] = up_[x] ? pi_[p] - c : pi_[p] + c;
      for (int ch = first_child_[x]; ch != kNone; ch = next_sib_[ch]) stack_.push_back(ch);
    }
  }

  TransportPlan extract() {
    // Preorder from the root, then accumulate subtree excess bottom-up using
    // the exact weights.
    std::vector<int> order;
    order.reserve(nodes_);
    stack_.assign(1, root_);
    while (!stack_.empty()) {
      const int x = stack_.back();
      stack_.pop_back();
      order.push_back(x);
      for (int ch = first_child_[x]; ch != kNone; ch = next_sib_[ch]) stack_.push_back(ch);
    }
    std::vector<double> excess(nodes_, 0.0);
    double sa = 0.0, sb = 0.0;
    for (double v : a_) sa += v;
    for (double v : b_) sb += v;
    for (std::size_t i = 0; i < n_; ++i) excess[i] = a_[i];
    for (std::size_t j = 0; j < m_; ++j) excess[n_ + j] = -b_[j] * (sa / sb);
    TransportPlan plan;
    plan.n_rows = n_;
    plan.n_cols = m_;
    const double slack = 1e-9 * std::max(1.0, sa);
    for (std::size_t k = order.size(); k-- > 1;) {
      const int x = order[k];
      const double f = up_[x] ? excess[x] : -excess[x];
      excess[parent_[x]] += excess[x];
      const std::size_t arc = pred_[x];
      if (arc >= arcs_) {
        if (std::abs(f) > slack) throw SolverError("artificial arc carries flow at the optimum");
        continue;
      }
      if (f < -slack) throw SolverError("optimal tree has negative flow " + std::to_string(f));
      if (f <= 0.0) continue;
      plan.rows.push_back(arc / m_);
      plan.cols.push_back(arc % m_);
      plan.mass.push_back(f);
      plan.objective += f * cost_[arc];
    }
    return plan;
  }

  std::size_t n_, m_, nodes_ = 0, arcs_ = 0;
  int root_ = 0;
  std::span<const double> cost_, a_, b_;
  double max_cost_ = 0.0, art_cost_ = 0.0, tol_scale_ = 0.0;
  std::vector<std::int64_t> supply_, flow_;
  std::vector<char> in_tree_, up_, art_up_;
  std::vector<int> parent_, depth_, first_child_, next_sib_, prev_sib_;
  std::vector<std::size_t> pred_;
  std::vector<double> pi_;
  std::size_t block_ = 16, next_arc_ = 0;
  std::vector<int> path_, stack_;
  std::vector<std::size_t> old_pred_;
  std::vector<char> old_up_;
};

}  // namespace

TransportPlan solve_transport(std::span<const double> a, std::span<const double> b,
                              std::span<const double> cost) {
  if (a.empty() || b.empty()) throw ArgumentError("transport needs nonempty marginals");
  if (cost.size() != a.size() * b.size()) throw ArgumentError("cost matrix has the wrong shape");
  double sa = 0.0, sb = 0.0;
  for (double v : a) {
    if (!(v >= 0.0)) throw ArgumentError("marginal weights must be nonnegative");
    sa += v;
  }
  for (double v : b) {
    if (!(v >= 0.0)) throw ArgumentError("marginal weights must be nonnegative");
    sb += v;
  }
  if (!(sa > 0.0) || std::abs(sa - sb) > 1e-9 * sa)
    throw ArgumentError("transport problem is not balanced");
  for (double c : cost)
    if (!std::isfinite(c)) throw ArgumentError("cost matrix must be finite");
  return NetworkSimplex(a, b, cost).run();
}

}  // namespace roughchaos
