#include "pdsde/assignment.hpp"

#include <algorithm>
#include <deque>
#include <limits>

#include "pdsde/error.hpp"

namespace pdsde {

Assignment solve_assignment(std::span<const double> cost, std::size_t n) {
    if (cost.size() != n * n) throw DimensionError("assignment cost matrix is not n x n");
    Assignment out;
    if (n == 0) return out;

    constexpr double inf = std::numeric_limits<double>::infinity();
    // 1-based bookkeeping; column 0 is the virtual root of each augmenting tree.
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
    std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
    std::vector<char> used(n + 1);

    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = p[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    out.row_to_col.assign(n, 0);
    for (std::size_t j = 1; j <= n; ++j) out.row_to_col[p[j] - 1] = j - 1;
    for (std::size_t i = 0; i < n; ++i) out.cost += cost[i * n + out.row_to_col[i]];
    return out;
}

namespace {

struct HopcroftKarp {
    const std::vector<std::vector<std::size_t>>& adj;
    std::vector<std::size_t> match_left;
    std::vector<std::size_t> match_right;
    std::vector<std::size_t> dist;
    std::vector<std::size_t> cursor;
    static constexpr std::size_t inf = std::numeric_limits<std::size_t>::max();

    HopcroftKarp(const std::vector<std::vector<std::size_t>>& a, std::size_t right)
        : adj(a), match_left(a.size(), kUnmatched), match_right(right, kUnmatched),
          dist(a.size()), cursor(a.size()) {}

    bool bfs() {
        std::deque<std::size_t> queue;
        bool reachable_free = false;
        for (std::size_t u = 0; u < adj.size(); ++u) {
            if (match_left[u] == kUnmatched) {
                dist[u] = 0;
                queue.push_back(u);
            } else {
                dist[u] = inf;
            }
        }
        while (!queue.empty()) {
            const std::size_t u = queue.front();
            queue.pop_front();
            for (std::size_t v : adj[u]) {
                const std::size_t w = match_right[v];
                if (w == kUnmatched) {
                    reachable_free = true;
                } else if (dist[w] == inf) {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        return reachable_free;
    }

    bool dfs(std::size_t u) {
        for (std::size_t& k = cursor[u]; k < adj[u].size(); ++k) {
            const std::size_t v = adj[u][k];
            const std::size_t w = match_right[v];
            if (w == kUnmatched || (dist[w] == dist[u] + 1 && dfs(w))) {
                match_left[u] = v;
                match_right[v] = u;
                ++k;
                return true;
            }
        }
        dist[u] = inf;
        return false;
    }

    void run() {
        while (bfs()) {
            std::fill(cursor.begin(), cursor.end(), 0);
            for (std::size_t u = 0; u < adj.size(); ++u) {
                if (match_left[u] == kUnmatched) dfs(u);
            }
        }
    }
};

}  // namespace

std::vector<std::size_t> max_bipartite_matching(const std::vector<std::vector<std::size_t>>& adjacency,
                                                std::size_t right_count) {
    for (const auto& row : adjacency) {
        if (!std::is_sorted(row.begin(), row.end())) {
            throw DomainError("matching adjacency lists must be sorted");
        }
        if (!row.empty() && row.back() >= right_count) throw DomainError("matching vertex out of range");
    }
    HopcroftKarp hk(adjacency, right_count);
    hk.run();
    return hk.match_left;
}

FlowNetwork::FlowNetwork(std::size_t nodes) : graph_(nodes), level_(nodes), next_(nodes) {}

void FlowNetwork::add_edge(std::size_t from, std::size_t to, double capacity) {
    graph_[from].push_back({to, graph_[to].size(), capacity});
    graph_[to].push_back({from, graph_[from].size() - 1, 0.0});
}

bool FlowNetwork::build_levels(std::size_t source, std::size_t sink, double eps) {
    std::fill(level_.begin(), level_.end(), -1);
    std::deque<std::size_t> queue{source};
    level_[source] = 0;
    while (!queue.empty()) {
        const std::size_t u = queue.front();
        queue.pop_front();
        for (const Edge& e : graph_[u]) {
            if (e.cap > eps && level_[e.to] < 0) {
                level_[e.to] = level_[u] + 1;
                queue.push_back(e.to);
            }
        }
    }
    return level_[sink] >= 0;
}

double FlowNetwork::push(std::size_t u, std::size_t sink, double limit, double eps) {
    if (u == sink) return limit;
    for (std::size_t& k = next_[u]; k < graph_[u].size(); ++k) {
        Edge& e = graph_[u][k];
        if (e.cap <= eps || level_[e.to] != level_[u] + 1) continue;
        const double got = push(e.to, sink, std::min(limit, e.cap), eps);
        if (got > eps) {
            e.cap -= got;
            graph_[e.to][e.rev].cap += got;
            return got;
        }
    }
    return 0.0;
}

double FlowNetwork::max_flow(std::size_t source, std::size_t sink, double eps) {
    double total = 0.0;
    while (build_levels(source, sink, eps)) {
        std::fill(next_.begin(), next_.end(), 0);
        for (;;) {
            const double f = push(source, sink, std::numeric_limits<double>::infinity(), eps);
            if (f <= eps) break;
            total += f;
        }
    }
    return total;
}

}  // namespace pdsde
