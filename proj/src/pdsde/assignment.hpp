#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace pdsde {

struct Assignment {
    std::vector<std::size_t> row_to_col;
    double cost = 0.0;  // sum of cost(row, row_to_col[row])
};

// Exact square linear assignment (minimization) by shortest augmenting paths
// with dual potentials, O(n^3). `cost` is row-major n x n.
Assignment solve_assignment(std::span<const double> cost, std::size_t n);

// Maximum bipartite matching by Hopcroft-Karp. adjacency[u] lists the right
// vertices reachable from left vertex u; lists are visited in ascending order
// so the result is deterministic. Returns match_of_left (npos when unmatched).
std::vector<std::size_t> max_bipartite_matching(const std::vector<std::vector<std::size_t>>& adjacency,
                                                std::size_t right_count);

inline constexpr std::size_t kUnmatched = static_cast<std::size_t>(-1);

// Maximum s-t flow (Dinic) on a small real-capacity network.
class FlowNetwork {
public:
    explicit FlowNetwork(std::size_t nodes);

    void add_edge(std::size_t from, std::size_t to, double capacity);
    double max_flow(std::size_t source, std::size_t sink, double eps = 1e-15);

private:
    struct Edge {
        std::size_t to;
        std::size_t rev;
        double cap;
    };

    bool build_levels(std::size_t source, std::size_t sink, double eps);
    double push(std::size_t u, std::size_t sink, double limit, double eps);

    std::vector<std::vector<Edge>> graph_;
    std::vector<int> level_;
    std::vector<std::size_t> next_;
};

}  // namespace pdsde
