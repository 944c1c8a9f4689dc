#include "rwi/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace rwi {

VertexSet::VertexSet(std::vector<VertexId> ids) : ids_(std::move(ids)) {
    std::sort(ids_.begin(), ids_.end());
    ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
}

bool VertexSet::contains(VertexId v) const {
    return std::binary_search(ids_.begin(), ids_.end(), v);
}

bool VertexSet::subset_of(const VertexSet& other) const {
    return std::includes(other.ids_.begin(), other.ids_.end(), ids_.begin(), ids_.end());
}

KilledWeightedGraph::KilledWeightedGraph(std::size_t n_vertices, std::vector<WeightedEdge> edges,
                                         std::vector<double> kill_weights,
                                         std::vector<std::string> labels)
    : n_(n_vertices), kill_(std::move(kill_weights)), labels_(std::move(labels)) {
    if (n_ == 0) throw std::invalid_argument("graph must have at least one vertex");
    if (kill_.size() != n_) throw std::invalid_argument("kill weight vector size mismatch");
    if (!labels_.empty() && labels_.size() != n_)
        throw std::invalid_argument("label vector size mismatch");

    self_loop_.assign(n_, 0.0);
    adjacency_.assign(n_, {});
    edges_.reserve(edges.size());

    std::map<std::pair<VertexId, VertexId>, double> seen;
    for (const auto& e : edges) {
        if (e.u < 0 || e.v < 0 || static_cast<std::size_t>(e.u) >= n_ ||
            static_cast<std::size_t>(e.v) >= n_)
            throw std::invalid_argument("edge endpoint out of range");
        if (!(e.weight > 0.0) || !std::isfinite(e.weight))
            throw std::invalid_argument("edge weight must be a positive finite number");
        auto key = std::minmax(e.u, e.v);
        auto [it, inserted] = seen.emplace(key, e.weight);
        if (!inserted) {
            if (it->second != e.weight)
                throw std::invalid_argument("asymmetric duplicate edge (" +
                                            std::to_string(e.u) + "," + std::to_string(e.v) +
                                            "): weights disagree");
            throw std::invalid_argument("duplicate undirected edge (" + std::to_string(e.u) +
                                        "," + std::to_string(e.v) + ")");
        }
        if (e.u == e.v) {
            self_loop_[e.u] = e.weight;
        } else {
            edges_.push_back({key.first, key.second, e.weight});
        }
    }

    for (const auto& e : edges_) {
        adjacency_[e.u].push_back({e.v, e.weight});
        adjacency_[e.v].push_back({e.u, e.weight});
    }
    for (std::size_t x = 0; x < n_; ++x) {
        if (self_loop_[x] > 0.0)
            adjacency_[x].push_back({static_cast<VertexId>(x), self_loop_[x]});
        std::sort(adjacency_[x].begin(), adjacency_[x].end());
    }

    total_weight_.assign(n_, 0.0);
    bool any_kill = false;
    for (std::size_t x = 0; x < n_; ++x) {
        if (kill_[x] < 0.0 || !std::isfinite(kill_[x]))
            throw std::invalid_argument("kill weight must be nonnegative and finite");
        if (kill_[x] > 0.0) any_kill = true;
        double a = kill_[x] + self_loop_[x];
        for (const auto& [y, w] : adjacency_[x])
            if (y != static_cast<VertexId>(x)) a += w;
        if (!(a > 0.0) || !std::isfinite(a))
            throw std::invalid_argument("vertex " + std::to_string(x) +
                                        " has no positive total weight");
        total_weight_[x] = a;
    }
    if (!any_kill)
        throw std::invalid_argument("all kill weights are zero: the chain would never be absorbed");

    // connectivity over real edges (self-loops and ghost do not connect)
    std::vector<char> reached(n_, 0);
    std::queue<VertexId> frontier;
    frontier.push(0);
    reached[0] = 1;
    std::size_t count = 1;
    while (!frontier.empty()) {
        VertexId x = frontier.front();
        frontier.pop();
        for (const auto& [y, w] : adjacency_[x]) {
            if (!reached[y]) {
                reached[y] = 1;
                ++count;
                frontier.push(y);
            }
        }
    }
    if (count != n_) throw std::invalid_argument("graph is not connected");
}

double KilledWeightedGraph::edge_weight(VertexId x, VertexId y) const {
    for (const auto& [z, w] : neighbors(x))
        if (z == y) return w;
    return 0.0;
}

const std::string& KilledWeightedGraph::label(VertexId x) const {
    static const std::string empty;
    if (labels_.empty()) return empty;
    return labels_[idx(x)];
}

VertexId KilledWeightedGraph::vertex_by_label(const std::string& label) const {
    for (std::size_t i = 0; i < labels_.size(); ++i)
        if (labels_[i] == label) return static_cast<VertexId>(i);
    return -1;
}

void KilledWeightedGraph::set_ends(VertexId left, VertexId right) {
    idx(left);
    idx(right);
    ends_ = {left, right};
}

VertexSet KilledWeightedGraph::all_vertices() const {
    std::vector<VertexId> ids(n_);
    for (std::size_t i = 0; i < n_; ++i) ids[i] = static_cast<VertexId>(i);
    return VertexSet(std::move(ids));
}

std::size_t KilledWeightedGraph::idx(VertexId x) const {
    if (x < 0 || static_cast<std::size_t>(x) >= n_)
        throw std::out_of_range("vertex id " + std::to_string(x) + " out of range");
    return static_cast<std::size_t>(x);
}

KilledWeightedGraph build_graph(const std::vector<WeightedEdge>& edges,
                                const std::vector<std::pair<VertexId, double>>& kills) {
    VertexId max_id = -1;
    for (const auto& e : edges) max_id = std::max({max_id, e.u, e.v});
    for (const auto& [v, k] : kills) max_id = std::max(max_id, v);
    if (max_id < 0) throw std::invalid_argument("empty graph");
    std::vector<double> kill(static_cast<std::size_t>(max_id) + 1, 0.0);
    for (const auto& [v, k] : kills) {
        if (v < 0) throw std::invalid_argument("negative vertex id");
        kill[v] += k;
    }
    return KilledWeightedGraph(static_cast<std::size_t>(max_id) + 1, edges, std::move(kill));
}

BiasedZGraph make_biased_z(int radius) {
    if (radius < 1) throw std::invalid_argument("make_biased_z: radius must be >= 1");
    const int n = 2 * radius + 1;
    auto id = [radius](int coord) { return static_cast<VertexId>(coord + radius); };

    std::vector<WeightedEdge> edges;
    for (int m = 0; m < radius; ++m) {
        double w = std::ldexp(1.0, m);  // 2^m
        edges.push_back({id(m), id(m + 1), w});
        edges.push_back({id(-m - 1), id(-m), w});
    }
    // Exterior collapse at +/-radius.  The outward conductance 2^radius is an
    // excursion into a one-sided chain with escape bias 2/3; the excursion
    // returns with probability q/p = 1/2, so the outward weight splits evenly
    // into a self-loop and a kill.
    const double return_prob = 0.5;
    double outward = std::ldexp(1.0, radius);
    double loop = outward * return_prob;
    edges.push_back({id(radius), id(radius), loop});
    edges.push_back({id(-radius), id(-radius), loop});

    std::vector<double> kill(n, 0.0);
    kill[id(radius)] = outward * (1.0 - return_prob);
    kill[id(-radius)] = outward * (1.0 - return_prob);

    std::vector<std::string> labels(n);
    for (int c = -radius; c <= radius; ++c) labels[id(c)] = std::to_string(c);

    KilledWeightedGraph g(n, std::move(edges), std::move(kill), std::move(labels));
    g.set_ends(id(-radius), id(radius));
    return {std::move(g), return_prob};
}

KilledWeightedGraph make_regular_tree(int branching, int depth) {
    if (branching < 2) throw std::invalid_argument("make_regular_tree: branching must be >= 2");
    if (depth < 1) throw std::invalid_argument("make_regular_tree: depth must be >= 1");

    std::vector<WeightedEdge> edges;
    std::vector<std::string> labels;
    std::vector<int> depth_of;
    labels.push_back("r");
    depth_of.push_back(0);

    // breadth-first layout: children of vertex i are appended in order
    std::vector<VertexId> current{0};
    for (int d = 1; d <= depth; ++d) {
        std::vector<VertexId> next;
        for (VertexId parent : current) {
            for (int c = 0; c < branching; ++c) {
                VertexId child = static_cast<VertexId>(labels.size());
                labels.push_back(labels[parent] + "." + std::to_string(c));
                depth_of.push_back(d);
                edges.push_back({parent, child, 1.0});
                next.push_back(child);
            }
        }
        current = std::move(next);
    }

    const std::size_t n = labels.size();
    std::vector<double> kill(n, 0.0);
    std::vector<WeightedEdge> loops;
    // Collapse the infinite subtree below each leaf: the depth-walk escapes
    // with bias b/(b+1), so an excursion returns with probability 1/b and the
    // outward weight b splits into self-loop 1 and kill b-1.
    const double return_prob = 1.0 / branching;
    for (std::size_t v = 0; v < n; ++v) {
        if (depth_of[v] == depth) {
            double outward = static_cast<double>(branching);
            edges.push_back({static_cast<VertexId>(v), static_cast<VertexId>(v),
                             outward * return_prob});
            kill[v] = outward * (1.0 - return_prob);
        }
    }
    return KilledWeightedGraph(n, std::move(edges), std::move(kill), std::move(labels));
}

namespace {

std::string lattice_label(const std::vector<int>& coords) {
    std::string s = "(";
    for (std::size_t i = 0; i < coords.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(coords[i]);
    }
    return s + ")";
}

}  // namespace

KilledWeightedGraph make_lattice_box(int dimension, int radius) {
    if (dimension < 3)
        throw std::invalid_argument(
            "make_lattice_box: dimension must be >= 3 (the target chain must be transient)");
    if (radius < 0) throw std::invalid_argument("make_lattice_box: radius must be >= 0");

    const int side = 2 * radius + 1;
    std::size_t n = 1;
    for (int d = 0; d < dimension; ++d) n *= static_cast<std::size_t>(side);
    if (n > 2'000'000) throw std::invalid_argument("make_lattice_box: box too large");

    auto coords_of = [&](std::size_t index) {
        std::vector<int> c(dimension);
        for (int d = 0; d < dimension; ++d) {
            c[d] = static_cast<int>(index % side) - radius;
            index /= side;
        }
        return c;
    };
    auto index_of = [&](const std::vector<int>& c) {
        std::size_t index = 0;
        for (int d = dimension - 1; d >= 0; --d)
            index = index * side + static_cast<std::size_t>(c[d] + radius);
        return index;
    };

    std::vector<WeightedEdge> edges;
    std::vector<double> kill(n, 0.0);
    std::vector<std::string> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto c = coords_of(i);
        labels[i] = lattice_label(c);
        for (int d = 0; d < dimension; ++d) {
            // +1 direction: interior edge or one unit of halo kill; the -1
            // face contributes its own kill below
            if (c[d] + 1 <= radius) {
                auto c2 = c;
                ++c2[d];
                edges.push_back({static_cast<VertexId>(i), static_cast<VertexId>(index_of(c2)),
                                 1.0});
            } else {
                kill[i] += 1.0;
            }
            if (c[d] - 1 < -radius) kill[i] += 1.0;
        }
    }
    return KilledWeightedGraph(n, std::move(edges), std::move(kill), std::move(labels));
}

VertexId ExhaustionFamily::vertex_at(std::size_t level_index, const std::string& label) const {
    if (level_index >= levels.size()) throw std::out_of_range("exhaustion level out of range");
    VertexId v = levels[level_index].graph.vertex_by_label(label);
    if (v < 0)
        throw std::invalid_argument("label '" + label + "' not present at level " +
                                    std::to_string(levels[level_index].level));
    return v;
}

ExhaustionFamily make_exhaustion(const std::string& family, const std::vector<int>& levels,
                                 int param, int buffer) {
    if (levels.empty()) throw std::invalid_argument("make_exhaustion: no levels given");
    for (std::size_t i = 1; i < levels.size(); ++i)
        if (levels[i] <= levels[i - 1])
            throw std::invalid_argument("make_exhaustion: levels must be strictly increasing");
    if (buffer < 1) throw std::invalid_argument("make_exhaustion: buffer must be >= 1");

    ExhaustionFamily out;
    out.family = family;
    out.buffer = buffer;

    for (int level : levels) {
        if (level < 0) throw std::invalid_argument("make_exhaustion: negative level");
        ExhaustionLevel entry{level, KilledWeightedGraph(1, {}, {1.0}), {}};
        if (family == "biased_z") {
            entry.graph = make_biased_z(level + buffer).graph;
            std::vector<VertexId> window;
            for (int c = -level; c <= level; ++c)
                window.push_back(entry.graph.vertex_by_label(std::to_string(c)));
            entry.window = VertexSet(std::move(window));
        } else if (family == "tree") {
            int branching = param > 0 ? param : 2;
            out.param = branching;
            entry.graph = make_regular_tree(branching, level + buffer);
            std::vector<VertexId> window;
            for (std::size_t v = 0; v < entry.graph.size(); ++v) {
                // depth = number of '.' separators in the label
                const std::string& lab = entry.graph.label(static_cast<VertexId>(v));
                auto depth = std::count(lab.begin(), lab.end(), '.');
                if (depth <= level) window.push_back(static_cast<VertexId>(v));
            }
            entry.window = VertexSet(std::move(window));
        } else if (family == "lattice") {
            int dimension = param > 0 ? param : 3;
            out.param = dimension;
            entry.graph = make_lattice_box(dimension, level + buffer);
            std::vector<VertexId> window;
            for (std::size_t v = 0; v < entry.graph.size(); ++v) {
                const std::string& lab = entry.graph.label(static_cast<VertexId>(v));
                // inside the level box iff every coordinate has |c| <= level
                std::stringstream ss(lab.substr(1, lab.size() - 2));
                bool inside = true;
                std::string tok;
                while (std::getline(ss, tok, ','))
                    if (std::abs(std::stoi(tok)) > level) inside = false;
                if (inside) window.push_back(static_cast<VertexId>(v));
            }
            entry.window = VertexSet(std::move(window));
        } else {
            throw std::invalid_argument("make_exhaustion: unknown family '" + family + "'");
        }
        out.levels.push_back(std::move(entry));
    }
    return out;
}

std::string format_g17(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

void save_graph(const KilledWeightedGraph& graph, std::ostream& out) {
    out << "vertices " << graph.size() << "\n";
    if (graph.has_labels())
        for (std::size_t v = 0; v < graph.size(); ++v)
            out << "# label " << v << " " << graph.label(static_cast<VertexId>(v)) << "\n";
    for (const auto& e : graph.edges())
        out << "edge " << e.u << " " << e.v << " " << format_g17(e.weight) << "\n";
    for (std::size_t v = 0; v < graph.size(); ++v) {
        double loop = graph.self_loop_weight(static_cast<VertexId>(v));
        if (loop > 0.0) out << "edge " << v << " " << v << " " << format_g17(loop) << "\n";
    }
    for (std::size_t v = 0; v < graph.size(); ++v) {
        double k = graph.kill_weight(static_cast<VertexId>(v));
        if (k > 0.0) out << "kill " << v << " " << format_g17(k) << "\n";
    }
    if (auto ends = graph.ends())
        out << "# ends " << ends->first << " " << ends->second << "\n";
}

void save_graph(const KilledWeightedGraph& graph, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    save_graph(graph, out);
}

KilledWeightedGraph load_graph(std::istream& in) {
    std::size_t n = 0;
    bool have_n = false;
    std::vector<WeightedEdge> edges;
    std::vector<double> kill;
    std::vector<std::string> labels;
    bool have_labels = false;
    long end_left = -1, end_right = -1;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ss(line);
        std::string word;
        if (!(ss >> word)) continue;
        if (word == "#") {
            // labels and ends ride along as structured comments
            std::string sub;
            if (ss >> sub) {
                if (sub == "label") {
                    std::size_t v;
                    std::string lab;
                    if (ss >> v >> lab && have_n && v < n) {
                        labels.resize(n);
                        labels[v] = lab;
                        have_labels = true;
                    }
                } else if (sub == "ends") {
                    ss >> end_left >> end_right;
                }
            }
            continue;
        }
        if (word[0] == '#') continue;
        if (word == "vertices") {
            if (!(ss >> n) || n == 0)
                throw std::runtime_error("graph file line " + std::to_string(line_no) +
                                         ": bad vertex count");
            kill.assign(n, 0.0);
            have_n = true;
        } else if (word == "edge") {
            long u, v;
            double w;
            if (!have_n || !(ss >> u >> v >> w))
                throw std::runtime_error("graph file line " + std::to_string(line_no) +
                                         ": bad edge record");
            edges.push_back({static_cast<VertexId>(u), static_cast<VertexId>(v), w});
        } else if (word == "kill") {
            long v;
            double k;
            if (!have_n || !(ss >> v >> k) || v < 0 || static_cast<std::size_t>(v) >= n)
                throw std::runtime_error("graph file line " + std::to_string(line_no) +
                                         ": bad kill record");
            kill[static_cast<std::size_t>(v)] = k;
        } else {
            throw std::runtime_error("graph file line " + std::to_string(line_no) +
                                     ": unknown record '" + word + "'");
        }
    }
    if (!have_n) throw std::runtime_error("graph file has no 'vertices' header");
    KilledWeightedGraph g(n, std::move(edges), std::move(kill),
                          have_labels ? std::move(labels) : std::vector<std::string>{});
    if (end_left >= 0 && end_right >= 0)
        g.set_ends(static_cast<VertexId>(end_left), static_cast<VertexId>(end_right));
    return g;
}

KilledWeightedGraph load_graph(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    return load_graph(in);
}

}  // namespace rwi
