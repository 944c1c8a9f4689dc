#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace rwi {

using VertexId = std::int32_t;

// The implicit absorbing ghost state, used as a pseudo-vertex id in flows and
// step sampling.
inline constexpr VertexId kGhost = -1;

struct WeightedEdge {
    VertexId u;
    VertexId v;
    double weight;
};

// Sorted set of vertex ids with O(log n) membership.
class VertexSet {
  public:
    VertexSet() = default;
    explicit VertexSet(std::vector<VertexId> ids);

    bool contains(VertexId v) const;
    std::size_t size() const { return ids_.size(); }
    bool empty() const { return ids_.empty(); }
    const std::vector<VertexId>& ids() const { return ids_; }
    auto begin() const { return ids_.begin(); }
    auto end() const { return ids_.end(); }

    bool subset_of(const VertexSet& other) const;
    bool operator==(const VertexSet& other) const { return ids_ == other.ids_; }

  private:
    std::vector<VertexId> ids_;
};

// Finite connected graph with symmetric positive conductances, optional
// self-loops and per-vertex kill weights to an implicit absorbing ghost.
// With at least one positive kill weight the embedded chain is absorbed
// almost surely, which is the finite stand-in for transience.
//
// Total vertex weight: a_x = sum of incident edge weights + self-loop + kill.
// Transition probabilities p(x,y) = a_{x,y} / a_x, kill probability k_x / a_x.
class KilledWeightedGraph {
  public:
    KilledWeightedGraph(std::size_t n_vertices, std::vector<WeightedEdge> edges,
                        std::vector<double> kill_weights,
                        std::vector<std::string> labels = {});

    std::size_t size() const { return n_; }
    const std::vector<WeightedEdge>& edges() const { return edges_; }

    double kill_weight(VertexId x) const { return kill_[idx(x)]; }
    double self_loop_weight(VertexId x) const { return self_loop_[idx(x)]; }
    double total_weight(VertexId x) const { return total_weight_[idx(x)]; }

    // neighbors including a self-loop entry (x, w) when present; ghost excluded
    const std::vector<std::pair<VertexId, double>>& neighbors(VertexId x) const {
        return adjacency_[idx(x)];
    }

    double edge_weight(VertexId x, VertexId y) const;

    double transition_probability(VertexId x, VertexId y) const {
        return edge_weight(x, y) / total_weight(x);
    }
    double kill_probability(VertexId x) const { return kill_[idx(x)] / total_weight_[idx(x)]; }

    bool has_labels() const { return !labels_.empty(); }
    const std::string& label(VertexId x) const;
    // -1 when the label is unknown
    VertexId vertex_by_label(const std::string& label) const;

    // Collapsed "escape" vertices of quasi-one-dimensional families, in
    // (left, right) order; unset for generic graphs.
    std::optional<std::pair<VertexId, VertexId>> ends() const { return ends_; }
    void set_ends(VertexId left, VertexId right);

    VertexSet all_vertices() const;

  private:
    std::size_t idx(VertexId x) const;

    std::size_t n_ = 0;
    std::vector<WeightedEdge> edges_;   // undirected, stored once, u < v; no self-loops here
    std::vector<double> self_loop_;
    std::vector<double> kill_;
    std::vector<double> total_weight_;
    std::vector<std::vector<std::pair<VertexId, double>>> adjacency_;
    std::vector<std::string> labels_;
    std::optional<std::pair<VertexId, VertexId>> ends_;
};

// Validating constructor wrapper: infers the vertex count, rejects duplicate
// or asymmetric edges, disconnected graphs and all-zero kills.
KilledWeightedGraph build_graph(const std::vector<WeightedEdge>& edges,
                                const std::vector<std::pair<VertexId, double>>& kills);

struct BiasedZGraph {
    KilledWeightedGraph graph;
    double exterior_return_prob;  // excursion return probability used in the collapse
};

// Conductance-biased chain on {-radius..radius} with a(n,n+1) = 2^n,
// a(-n-1,-n) = 2^n.  The exterior beyond each endpoint is collapsed exactly
// into a self-loop / kill pair, so all hitting probabilities and Green values
// inside the window equal those of the infinite chain.
BiasedZGraph make_biased_z(int radius);

// Rooted b-ary tree of the given depth with unit conductances; the infinite
// subtrees below the leaves are collapsed exactly (excursion return
// probability 1/branching).
KilledWeightedGraph make_regular_tree(int branching, int depth);

// Cubic lattice box {-radius..radius}^dimension with unit conductances and an
// absorbing halo: every edge leaving the box becomes one unit of kill weight.
// This is an approximation of the infinite lattice; quantities should be
// checked for stability under radius doubling.
KilledWeightedGraph make_lattice_box(int dimension, int radius);

struct ExhaustionLevel {
    int level;
    KilledWeightedGraph graph;
    VertexSet window;
};

// Increasing windows K_n of one infinite model, each realized inside a large
// enough finite truncation.  Vertices are labeled by the infinite model's
// coordinates, so measures at different levels are comparable.
struct ExhaustionFamily {
    std::string family;  // "biased_z", "tree", "lattice"
    int param = 0;       // branching (tree) or dimension (lattice); unused for biased_z
    int buffer = 2;
    std::vector<ExhaustionLevel> levels;

    // id of the vertex carrying `label` at a given level
    VertexId vertex_at(std::size_t level_index, const std::string& label) const;
};

ExhaustionFamily make_exhaustion(const std::string& family, const std::vector<int>& levels,
                                 int param = 0, int buffer = 2);

// Line-oriented graph file format:
//   vertices N
//   edge u v w
//   kill x k
// '#' starts a comment.  Weights round-trip through 17 significant digits.
void save_graph(const KilledWeightedGraph& graph, std::ostream& out);
void save_graph(const KilledWeightedGraph& graph, const std::string& path);
KilledWeightedGraph load_graph(std::istream& in);
KilledWeightedGraph load_graph(const std::string& path);

// decimal formatting used by every on-disk artifact
std::string format_g17(double value);

}  // namespace rwi
