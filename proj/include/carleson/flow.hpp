#ifndef CARLESON_FLOW_HPP
#define CARLESON_FLOW_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace carleson {

constexpr double kUnbounded = std::numeric_limits<double>::infinity();

/// Directed flow network. Arc insertion order is part of the value;
/// identical networks solve to bitwise-identical flows.
struct FlowNetwork {
    struct Arc {
        int from;
        int to;
        double capacity;  // kUnbounded for uncapacitated arcs
    };

    int node_count = 0;
    int source = 0;
    int sink = 0;
    std::vector<Arc> arcs;

    std::size_t add_arc(int from, int to, double capacity) {
        if (from < 0 || from >= node_count || to < 0 || to >= node_count)
            throw std::invalid_argument("arc endpoint out of range");
        if (!(capacity >= 0.0))
            throw std::invalid_argument("negative arc capacity");
        arcs.push_back({from, to, capacity});
        return arcs.size() - 1;
    }
};

struct FlowResult {
    double value = 0.0;
    std::vector<double> arc_flow;        // parallel to FlowNetwork::arcs
    std::vector<char> source_side;       // per node: on the source side of the min cut
};

namespace detail {

// Dinic over an adjacency list of residual arcs. Even indices are forward
// arcs, odd are their reverses.
class DinicSolver {
  public:
    explicit DinicSolver(const FlowNetwork& net) : net_(net), adj_(net.node_count) {
        head_.reserve(net.arcs.size() * 2);
        for (const auto& arc : net_.arcs) {
            adj_[arc.from].push_back(static_cast<int>(head_.size()));
            head_.push_back({arc.to, arc.capacity});
            adj_[arc.to].push_back(static_cast<int>(head_.size()));
            head_.push_back({arc.from, 0.0});
        }
    }

    double solve(int s, int t, double eps) {
        double total = 0.0;
        std::vector<int> level(net_.node_count);
        std::vector<std::size_t> it(net_.node_count);
        while (bfs(s, t, eps, level)) {
            std::fill(it.begin(), it.end(), 0);
            while (true) {
                double pushed = dfs(s, t, kUnbounded, eps, level, it);
                if (pushed <= 0.0) break;
                total += pushed;
            }
        }
        eps_ = eps;
        return total;
    }

    double flow_on(std::size_t arc_index) const { return head_[2 * arc_index + 1].residual; }

    std::vector<char> source_reachable(int s) const {
        std::vector<char> seen(net_.node_count, 0);
        std::vector<int> stack = {s};
        seen[s] = 1;
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            for (int e : adj_[u]) {
                const ResArc& a = head_[e];
                if (!seen[a.to] && a.residual > eps_) {
                    seen[a.to] = 1;
                    stack.push_back(a.to);
                }
            }
        }
        return seen;
    }

  private:
    struct ResArc {
        int to;
        double residual;
    };

    bool bfs(int s, int t, double eps, std::vector<int>& level) {
        std::fill(level.begin(), level.end(), -1);
        std::vector<int> queue = {s};
        level[s] = 0;
        for (std::size_t qi = 0; qi < queue.size(); ++qi) {
            int u = queue[qi];
            for (int e : adj_[u]) {
                const ResArc& a = head_[e];
                if (level[a.to] < 0 && a.residual > eps) {
                    level[a.to] = level[u] + 1;
                    queue.push_back(a.to);
                }
            }
        }
        return level[t] >= 0;
    }

    double dfs(int u, int t, double limit, double eps, const std::vector<int>& level,
               std::vector<std::size_t>& it) {
        if (u == t) return limit;
        for (; it[u] < adj_[u].size(); ++it[u]) {
            int e = adj_[u][it[u]];
            ResArc& a = head_[e];
            if (a.residual > eps && level[a.to] == level[u] + 1) {
                double pushed = dfs(a.to, t, std::min(limit, a.residual), eps, level, it);
                if (pushed > 0.0) {
                    a.residual -= pushed;
                    head_[e ^ 1].residual += pushed;
                    return pushed;
                }
            }
        }
        return 0.0;
    }

    const FlowNetwork& net_;
    std::vector<std::vector<int>> adj_;
    std::vector<ResArc> head_;
    double eps_ = 0.0;
};

inline bool unbounded_path_exists(const FlowNetwork& net) {
    std::vector<std::vector<int>> adj(net.node_count);
    for (const auto& arc : net.arcs)
        if (arc.capacity == kUnbounded) adj[arc.from].push_back(arc.to);
    std::vector<char> seen(net.node_count, 0);
    std::vector<int> stack = {net.source};
    seen[net.source] = 1;
    while (!stack.empty()) {
        int u = stack.back();
        stack.pop_back();
        if (u == net.sink) return true;
        for (int v : adj[u])
            if (!seen[v]) {
                seen[v] = 1;
                stack.push_back(v);
            }
    }
    return false;
}

}  // namespace detail

/// Exact max flow with min cut from final residual reachability.
/// Finite capacities are scaled by a power of two before solving so the
/// rescale is lossless; residual positivity threshold is 1e-12 after scaling.
inline FlowResult max_flow(const FlowNetwork& net) {
    if (net.source == net.sink) throw std::invalid_argument("source equals sink");
    if (net.source < 0 || net.source >= net.node_count || net.sink < 0 ||
        net.sink >= net.node_count)
        throw std::invalid_argument("invalid source or sink node id");
    if (detail::unbounded_path_exists(net))
        throw std::runtime_error("unbounded flow: source reaches sink via uncapacitated arcs");

    double max_cap = 0.0;
    for (const auto& arc : net.arcs)
        if (arc.capacity != kUnbounded) max_cap = std::max(max_cap, arc.capacity);
    double scale = 1.0;
    if (max_cap > 0.0) scale = std::exp2(std::ceil(std::log2(max_cap)));

    FlowNetwork scaled = net;
    for (auto& arc : scaled.arcs)
        if (arc.capacity != kUnbounded) arc.capacity /= scale;

    detail::DinicSolver solver(scaled);
    const double eps = 1e-12;
    double value = solver.solve(net.source, net.sink, eps) * scale;

    FlowResult result;
    result.value = value;
    result.arc_flow.resize(net.arcs.size());
    for (std::size_t i = 0; i < net.arcs.size(); ++i)
        result.arc_flow[i] = solver.flow_on(i) * scale;
    result.source_side = solver.source_reachable(net.source);
    return result;
}

/// Capacity of the cut separating result.source_side from the rest.
inline double cut_capacity(const FlowNetwork& net, const FlowResult& result) {
    double cap = 0.0;
    for (const auto& arc : net.arcs)
        if (result.source_side[arc.from] && !result.source_side[arc.to])
            cap += arc.capacity;
    return cap;
}

}  // namespace carleson

#endif
