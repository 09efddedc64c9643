#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "corecd/error.hpp"
#include "corecd/rng.hpp"

namespace corecd {

/// Directed graph over n labeled nodes, stored as a dense row-major
/// adjacency matrix: adj[i*n+j] != 0 iff edge i->j.
struct Dag {
    int n = 0;
    std::vector<std::uint8_t> adj;

    Dag() = default;
    explicit Dag(int nodes) : n(nodes), adj(static_cast<std::size_t>(nodes) * nodes, 0) {}

    bool edge(int i, int j) const { return adj[static_cast<std::size_t>(i) * n + j] != 0; }

    void set_edge(int i, int j, bool present) {
        if (i == j)
            throw ValidationError("self-loops are not representable");
        adj[static_cast<std::size_t>(i) * n + j] = present ? 1 : 0;
    }

    int edge_count() const;

    bool operator==(const Dag& other) const { return n == other.n && adj == other.adj; }

    /// Row-major bitstring of length n*n, '0'/'1'.
    std::string bits() const;
    static Dag from_bits(int n, const std::string& bits);
};

/// True iff no directed cycle exists (Kahn's algorithm).
bool is_acyclic(const Dag& g);

/// Structural Hamming distance: number of directed edges present in
/// exactly one of the two graphs.
int shd(const Dag& a, const Dag& b);

/// Every labeled DAG on n nodes, each exactly once, ordered
/// lexicographically by the row-major flattened adjacency.
std::vector<Dag> enumerate_all_dags(int n);

/// Random DAG: draws a uniform node permutation as topological order and
/// includes each forward edge independently with probability p.
Dag generate_er_dag(int n, double p, Rng& rng);

struct SplitSpec {
    int train = 0;
    int test = 0;
};

struct GraphDataset {
    int n = 0;
    double edge_prob = 0.0;
    std::uint64_t seed = 0;
    std::vector<Dag> train;
    std::vector<Dag> test;

    bool operator==(const GraphDataset& other) const = default;
};

/// Builds a train/test dataset of distinct labeled DAGs. For n <= 4 the
/// pool is the full enumeration; above that it is deduplicated ER draws
/// (`total` of them). The pool is shuffled before splitting so both
/// splits share the same sparsity profile. Deterministic given seed.
GraphDataset build_dataset(int n, int total, SplitSpec split, double p, std::uint64_t seed);

void save_dataset(const GraphDataset& ds, const std::string& path);
GraphDataset load_dataset(const std::string& path);

double mean_edge_count(std::span<const Dag> graphs);

} // namespace corecd
