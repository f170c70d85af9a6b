#pragma once

#include <algorithm>
#include <deque>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "decoykit/bitstring.hpp"

// BitMap: plaintext as a walk over a secret labeled graph. Stations carry
// letters and emit them on arrival; junctions are silent waypoints. Each
// (vertex, road label) pair has at most one successor, so a label sequence
// decodes to exactly one walk. A decoy map reassigns station letters so the
// same label sequence reads as a different message.
namespace decoykit::bitmap {

inline constexpr int kDefaultPathBound = 8; // max edges per per-symbol segment

// Payload symbols handed out by the generator, in order; the separator is
// appended after them and is deliberately outside this set.
inline constexpr std::string_view kPayloadSymbols =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
inline constexpr char kDefaultSeparator = '.';

struct Vertex {
    std::string id;
    bool is_station = false;
    char symbol = 0; // meaningful only for stations
};

struct Edge {
    std::string from;
    std::string label;
    std::string to;
};

/// Raised by forge_decoy_map when the decoy conflicts with the station-visit
/// pattern: the same station is visited at two positions that would need
/// different symbols.
class InconsistentDecoyError : public std::runtime_error {
public:
    InconsistentDecoyError(std::size_t first, std::size_t second)
        : std::runtime_error("decoy is inconsistent with the visit pattern: positions " +
                             std::to_string(first) + " and " + std::to_string(second) +
                             " revisit one station but ask for different symbols"),
          first_position(first),
          second_position(second) {}

    std::size_t first_position;
    std::size_t second_position;
};

class MapKey {
public:
    MapKey(std::vector<Vertex> vertices, const std::vector<Edge>& edges, const std::string& start,
           char separator)
        : vertices_(std::move(vertices)), sep_(separator) {
        if (vertices_.empty()) throw std::invalid_argument("bitmap key: no vertices");
        for (std::size_t i = 0; i < vertices_.size(); ++i) {
            const Vertex& v = vertices_[i];
            if (v.id.empty() || v.id.find_first_of(" \t\n") != std::string::npos) {
                throw std::invalid_argument("bitmap key: vertex id '" + v.id +
                                            "' is empty or contains whitespace");
            }
            if (v.is_station && (v.symbol <= ' ' || v.symbol > '~')) {
                throw std::invalid_argument("bitmap key: station '" + v.id +
                                            "' has a non-printable symbol");
            }
            if (!by_id_.emplace(v.id, i).second) {
                throw std::invalid_argument("bitmap key: duplicate vertex id '" + v.id + "'");
            }
        }
        out_.resize(vertices_.size());
        for (const Edge& e : edges) {
            const auto from = find(e.from);
            const auto to = find(e.to);
            if (!from || !to) {
                throw std::invalid_argument("bitmap key: edge references unknown vertex ('" +
                                            e.from + "' -> '" + e.to + "')");
            }
            if (e.label.empty() || e.label.find_first_of(" \t\n") != std::string::npos) {
                throw std::invalid_argument("bitmap key: bad edge label '" + e.label + "'");
            }
            if (!out_[*from].emplace(e.label, *to).second) {
                throw std::invalid_argument("bitmap key: vertex '" + e.from +
                                            "' has two edges labeled '" + e.label + "'");
            }
        }
        const auto s = find(start);
        if (!s) throw std::invalid_argument("bitmap key: unknown start vertex '" + start + "'");
        start_ = *s;
        bool sep_seen = false;
        for (const Vertex& v : vertices_) {
            if (v.is_station && v.symbol == sep_) sep_seen = true;
        }
        if (!sep_seen) {
            throw std::invalid_argument("bitmap key: separator '" + std::string(1, sep_) +
                                        "' is not carried by any station");
        }
    }

    std::size_t vertex_count() const { return vertices_.size(); }
    const Vertex& vertex(std::size_t i) const { return vertices_.at(i); }
    std::optional<std::size_t> find(const std::string& id) const {
        const auto it = by_id_.find(id);
        if (it == by_id_.end()) return std::nullopt;
        return it->second;
    }
    const std::map<std::string, std::size_t>& out_edges(std::size_t i) const {
        return out_.at(i);
    }
    std::size_t start() const { return start_; }
    char separator() const { return sep_; }

    /// Distinct station symbols; by the key invariants this is the alphabet.
    std::set<char> alphabet() const {
        std::set<char> out;
        for (const Vertex& v : vertices_) {
            if (v.is_station) out.insert(v.symbol);
        }
        return out;
    }

    /// Same graph with station symbols replaced where `replacement` has one.
    MapKey with_symbols(const std::vector<std::optional<char>>& replacement) const {
        MapKey out = *this;
        for (std::size_t i = 0; i < out.vertices_.size(); ++i) {
            if (replacement[i]) {
                if (!out.vertices_[i].is_station) {
                    throw std::logic_error("with_symbols: vertex " + std::to_string(i) +
                                           " is not a station");
                }
                out.vertices_[i].symbol = *replacement[i];
            }
        }
        return out;
    }

private:
    std::vector<Vertex> vertices_;
    std::map<std::string, std::size_t> by_id_;
    std::vector<std::map<std::string, std::size_t>> out_; // label -> target, per vertex
    std::size_t start_ = 0;
    char sep_ = 0;
};

/// Insert the separator between equal adjacent symbols so the output has no
/// immediate repetitions. The input must not contain the separator.
inline std::string normalize_plaintext(std::string_view msg, char separator) {
    std::string out;
    out.reserve(msg.size() * 2);
    for (std::size_t i = 0; i < msg.size(); ++i) {
        if (msg[i] == separator) {
            throw std::invalid_argument("normalize_plaintext: separator '" +
                                        std::string(1, separator) + "' occurs in the input at " +
                                        std::to_string(i));
        }
        if (i > 0 && msg[i] == msg[i - 1]) out.push_back(separator);
        out.push_back(msg[i]);
    }
    return out;
}

/// Drop every separator; inverse of normalize_plaintext on separator-free input.
inline std::string denormalize(std::string_view msg, char separator) {
    std::string out;
    out.reserve(msg.size());
    for (char c : msg) {
        if (c != separator) out.push_back(c);
    }
    return out;
}

namespace detail {

struct Segment {
    std::vector<std::string> labels;
    std::size_t end = 0;
};

// All simple paths from `from` to a station carrying `symbol`, internal
// vertices junctions only, at most l_max edges. The endpoint may be the
// source itself (the walk can sit on the only station carrying the next
// symbol); junctions are never revisited. Deterministic order: edges are
// explored in label order.
inline void collect_segments(const MapKey& key, std::size_t from, char symbol, int l_max,
                             std::vector<std::size_t>& path, std::vector<bool>& on_path,
                             std::vector<std::string>& labels, std::vector<Segment>& out) {
    if (static_cast<int>(labels.size()) >= l_max) return;
    for (const auto& [label, to] : key.out_edges(path.back())) {
        const Vertex& v = key.vertex(to);
        labels.push_back(label);
        if (v.is_station) {
            // stations terminate a segment either way
            if (v.symbol == symbol) out.push_back({labels, to});
        } else if (!on_path[to]) {
            path.push_back(to);
            on_path[to] = true;
            collect_segments(key, from, symbol, l_max, path, on_path, labels, out);
            on_path[to] = false;
            path.pop_back();
        }
        labels.pop_back();
    }
}

inline std::vector<Segment> segments(const MapKey& key, std::size_t from, char symbol,
                                     int l_max) {
    std::vector<Segment> out;
    std::vector<std::size_t> path{from};
    std::vector<bool> on_path(key.vertex_count(), false);
    on_path[from] = true;
    std::vector<std::string> labels;
    collect_segments(key, from, symbol, l_max, path, on_path, labels, out);
    return out;
}

struct Walk {
    std::string text;                 // emitted symbols
    std::vector<std::size_t> visits;  // station vertex per emitted symbol
};

inline Walk replay(const MapKey& key, const std::vector<std::string>& labels) {
    Walk w;
    std::size_t cur = key.start();
    for (std::size_t p = 0; p < labels.size(); ++p) {
        const auto& edges = key.out_edges(cur);
        const auto it = edges.find(labels[p]);
        if (it == edges.end()) {
            throw std::runtime_error("bitmap decode: vertex '" + key.vertex(cur).id +
                                     "' has no road labeled '" + labels[p] + "' (position " +
                                     std::to_string(p) + ")");
        }
        cur = it->second;
        const Vertex& v = key.vertex(cur);
        if (v.is_station) {
            w.text.push_back(v.symbol);
            w.visits.push_back(cur);
        }
    }
    return w;
}

} // namespace detail

/// Encode a normalized message (no two equal adjacent symbols) as a label
/// sequence. Each symbol becomes one path segment, chosen uniformly among
/// all acyclic junction-internal candidates of length <= l_max.
inline std::vector<std::string> encode(const MapKey& key, std::string_view msg, RandomSource& rng,
                                       int l_max = kDefaultPathBound) {
    if (l_max < 1) throw std::invalid_argument("bitmap encode: l_max must be positive");
    const auto alphabet = key.alphabet();
    for (std::size_t p = 0; p < msg.size(); ++p) {
        if (p > 0 && msg[p] == msg[p - 1]) {
            throw std::invalid_argument("bitmap encode: message is not normalized (repeat at "
                                        "position " + std::to_string(p) + ")");
        }
        if (alphabet.find(msg[p]) == alphabet.end()) {
            throw std::invalid_argument("bitmap encode: symbol '" + std::string(1, msg[p]) +
                                        "' at position " + std::to_string(p) +
                                        " is not in the key alphabet");
        }
    }
    std::vector<std::string> out;
    std::size_t cur = key.start();
    for (std::size_t p = 0; p < msg.size(); ++p) {
        const auto cands = detail::segments(key, cur, msg[p], l_max);
        if (cands.empty()) {
            throw std::runtime_error("bitmap encode: no path of length <= " +
                                     std::to_string(l_max) + " from '" + key.vertex(cur).id +
                                     "' to a station carrying '" + std::string(1, msg[p]) +
                                     "' (position " + std::to_string(p) + ")");
        }
        const auto& pick = cands[rng.below(cands.size())];
        out.insert(out.end(), pick.labels.begin(), pick.labels.end());
        cur = pick.end;
    }
    return out;
}

/// Replay the walk from the start vertex, emitting the symbol of every
/// station arrived at. The result is the normalized plaintext.
inline std::string decode(const MapKey& key, const std::vector<std::string>& labels) {
    return detail::replay(key, labels).text;
}

/// Station vertices visited (one per emitted symbol), for forgery work.
inline std::vector<std::size_t> decode_visits(const MapKey& key,
                                              const std::vector<std::string>& labels) {
    return detail::replay(key, labels).visits;
}

/// Invariant check used by the generator and by key audits: every alphabet
/// symbol is reachable from the start and from every station through
/// junction-internal paths of at most l_max edges.
inline std::vector<std::string> check_key(const MapKey& key, int l_max = kDefaultPathBound) {
    std::vector<std::string> problems;
    const auto alphabet = key.alphabet();

    std::vector<std::size_t> sources{key.start()};
    for (std::size_t i = 0; i < key.vertex_count(); ++i) {
        if (key.vertex(i).is_station && i != key.start()) sources.push_back(i);
    }
    for (std::size_t src : sources) {
        // BFS over junction-internal reachability; stations are terminals
        std::set<char> covered;
        std::vector<int> junction_depth(key.vertex_count(), -1);
        std::deque<std::size_t> frontier;
        auto expand = [&](std::size_t v, int depth) {
            for (const auto& [label, to] : key.out_edges(v)) {
                (void)label;
                const Vertex& t = key.vertex(to);
                if (t.is_station) {
                    covered.insert(t.symbol);
                } else if (junction_depth[to] < 0 && depth + 1 < l_max) {
                    junction_depth[to] = depth + 1;
                    frontier.push_back(to);
                }
            }
        };
        expand(src, 0);
        while (!frontier.empty()) {
            const std::size_t j = frontier.front();
            frontier.pop_front();
            expand(j, junction_depth[j]);
        }
        for (char c : alphabet) {
            if (covered.find(c) == covered.end()) {
                problems.push_back("no path of length <= " + std::to_string(l_max) + " from '" +
                                   key.vertex(src).id + "' to a station carrying '" +
                                   std::string(1, c) + "'");
            }
        }
    }
    return problems;
}

/// Random map over n_symbols (payload symbols plus the separator, which is
/// always the last symbol). Junctions form a deterministic fan-out tree that
/// reaches every station; stations get one edge into the tree and otherwise
/// random edges, which is where the one-to-many path choice comes from.
/// Rejection-samples until check_key passes.
inline MapKey generate_map(int n_symbols, int n_stations, int n_junctions, int n_labels,
                           RandomSource& rng, int l_max = kDefaultPathBound) {
    if (n_symbols < 2 ||
        static_cast<std::size_t>(n_symbols) > kPayloadSymbols.size() + 1) {
        throw std::invalid_argument("generate_map: symbol count out of range [2, " +
                                    std::to_string(kPayloadSymbols.size() + 1) + "]");
    }
    if (n_stations < n_symbols) {
        throw std::invalid_argument("generate_map: need at least one station per symbol");
    }
    if (n_junctions < 0) throw std::invalid_argument("generate_map: negative junction count");
    if (n_labels < 2) throw std::invalid_argument("generate_map: need at least two labels");

    std::vector<char> symbols;
    for (int i = 0; i + 1 < n_symbols; ++i) symbols.push_back(kPayloadSymbols[static_cast<std::size_t>(i)]);
    symbols.push_back(kDefaultSeparator);

    std::vector<std::string> labels;
    for (int i = 0; i < n_labels; ++i) labels.push_back("r" + std::to_string(i));

    const std::size_t S = static_cast<std::size_t>(n_stations);
    const std::size_t J = static_cast<std::size_t>(n_junctions);
    const std::size_t B = static_cast<std::size_t>(n_labels);
    const std::size_t n_syms = static_cast<std::size_t>(n_symbols);

    // provable capacity bounds: a source reaches at most its own direct
    // targets plus the stations hanging off the junction tree
    const std::size_t tree_slots = (J > 0) ? J * (B - 1) + 1 : 0;
    if ((J == 0 && B < n_syms) || (J > 0 && tree_slots + B - 1 < n_syms)) {
        throw std::runtime_error("generate_map: " + std::to_string(n_junctions) +
                                 " junctions with " + std::to_string(n_labels) +
                                 " labels cannot reach all " + std::to_string(n_symbols) +
                                 " symbols from every station");
    }

    constexpr int kAttempts = 10000;
    for (int attempt = 0; attempt < kAttempts; ++attempt) {
        std::vector<Vertex> vertices;
        for (std::size_t i = 0; i < S; ++i) {
            const char sym = (i < symbols.size())
                                 ? symbols[i]
                                 : symbols[rng.below(symbols.size())];
            vertices.push_back({"S" + std::to_string(i), true, sym});
        }
        for (std::size_t j = 0; j < J; ++j) {
            vertices.push_back({"J" + std::to_string(j), false, 0});
        }
        const auto station_id = [](std::size_t i) { return "S" + std::to_string(i); };
        const auto junction_id = [](std::size_t j) { return "J" + std::to_string(j); };
        const auto any_id = [&](std::size_t v) {
            return v < S ? station_id(v) : junction_id(v - S);
        };

        // leaf-slot targets: the first n_symbols slots cover one station per
        // symbol (station i < n_symbols carries symbol i), the rest roam
        std::vector<std::size_t> slot_station(tree_slots);
        if (tree_slots > 0) {
            std::vector<std::size_t> sym_perm(n_syms);
            for (std::size_t i = 0; i < n_syms; ++i) sym_perm[i] = i;
            for (std::size_t i = n_syms; i > 1; --i) {
                std::swap(sym_perm[i - 1], sym_perm[rng.below(i)]);
            }
            for (std::size_t t = 0; t < tree_slots; ++t) {
                slot_station[t] = (t < n_syms) ? sym_perm[t] : rng.below(S);
            }
        }

        std::vector<Edge> edges;
        if (J > 0) {
            // heap-shaped junction tree: junction j's slot k targets heap
            // index j*B + 1 + k; indexes past the junctions land on stations
            for (std::size_t j = 0; j < J; ++j) {
                for (std::size_t k = 0; k < B; ++k) {
                    const std::size_t child = j * B + 1 + k;
                    if (child < J) {
                        edges.push_back({junction_id(j), labels[k], junction_id(child)});
                    } else {
                        const std::size_t slot = child - J;
                        edges.push_back(
                            {junction_id(j), labels[k], station_id(slot_station[slot])});
                    }
                }
            }
            // stations: label 0 enters the tree, the rest roam freely
            for (std::size_t i = 0; i < S; ++i) {
                edges.push_back({station_id(i), labels[0], junction_id(0)});
                for (std::size_t k = 1; k < B; ++k) {
                    edges.push_back({station_id(i), labels[k], any_id(rng.below(S + J))});
                }
            }
        } else {
            // no junctions: every road must end directly at a station
            for (std::size_t i = 0; i < S; ++i) {
                for (std::size_t k = 0; k < B; ++k) {
                    edges.push_back({station_id(i), labels[k], station_id(rng.below(S))});
                }
            }
        }

        const std::string start = station_id(rng.below(S));
        MapKey key(vertices, edges, start, kDefaultSeparator);
        if (check_key(key, l_max).empty()) return key;
    }
    throw std::runtime_error("generate_map: no valid map in " + std::to_string(kAttempts) +
                             " attempts (configuration too tight for the path bound)");
}

/// Reassign station symbols so the given label sequence decodes to the decoy
/// text (after normalization with the key's separator). Exists iff the decoy
/// is consistent with the station-visit pattern.
inline MapKey forge_decoy_map(const MapKey& key, const std::vector<std::string>& labels,
                              std::string_view decoy) {
    const auto visits = decode_visits(key, labels);
    const std::string norm = normalize_plaintext(decoy, key.separator());
    if (norm.size() != visits.size()) {
        throw std::invalid_argument("forge_decoy_map: decoy normalizes to " +
                                    std::to_string(norm.size()) + " symbols but the walk visits " +
                                    std::to_string(visits.size()) + " stations");
    }
    std::vector<std::optional<char>> assign(key.vertex_count());
    std::vector<std::size_t> first_seen(key.vertex_count(), 0);
    for (std::size_t p = 0; p < visits.size(); ++p) {
        const std::size_t v = visits[p];
        if (!assign[v]) {
            assign[v] = norm[p];
            first_seen[v] = p;
        } else if (*assign[v] != norm[p]) {
            throw InconsistentDecoyError(first_seen[v], p);
        }
    }
    return key.with_symbols(assign);
}

// ---- key file format (text, line-oriented, bit-exact) ----
//
//   bitmap v1
//   start=<id>
//   sep=<symbol>
//   vertex <id> station <symbol> | vertex <id> junction
//   edge <from> <label> <to>

inline void write_key(std::ostream& os, const MapKey& key) {
    os << "bitmap v1\n";
    os << "start=" << key.vertex(key.start()).id << "\n";
    os << "sep=" << key.separator() << "\n";
    for (std::size_t i = 0; i < key.vertex_count(); ++i) {
        const Vertex& v = key.vertex(i);
        if (v.is_station) {
            os << "vertex " << v.id << " station " << v.symbol << "\n";
        } else {
            os << "vertex " << v.id << " junction\n";
        }
    }
    for (std::size_t i = 0; i < key.vertex_count(); ++i) {
        for (const auto& [label, to] : key.out_edges(i)) {
            os << "edge " << key.vertex(i).id << " " << label << " " << key.vertex(to).id << "\n";
        }
    }
}

inline std::string key_to_string(const MapKey& key) {
    std::ostringstream os;
    write_key(os, key);
    return os.str();
}

inline MapKey read_key(std::istream& is) {
    auto fail = [](std::size_t line, const std::string& why) -> std::runtime_error {
        return std::runtime_error("bitmap key: line " + std::to_string(line) + ": " + why);
    };
    std::string line;
    if (!std::getline(is, line) || line != "bitmap v1") {
        throw fail(1, "expected header 'bitmap v1'");
    }
    if (!std::getline(is, line) || line.rfind("start=", 0) != 0) {
        throw fail(2, "expected 'start=<id>'");
    }
    const std::string start = line.substr(6);
    if (!std::getline(is, line) || line.rfind("sep=", 0) != 0 || line.size() != 5) {
        throw fail(3, "expected 'sep=<symbol>'");
    }
    const char sep = line[4];

    std::vector<Vertex> vertices;
    std::vector<Edge> edges;
    std::size_t lineno = 3;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string kw;
        ls >> kw;
        if (kw == "vertex") {
            std::string id, kind, sym;
            ls >> id >> kind;
            if (kind == "station") {
                ls >> sym;
                if (id.empty() || sym.size() != 1) throw fail(lineno, "bad station line");
                vertices.push_back({id, true, sym[0]});
            } else if (kind == "junction") {
                if (id.empty()) throw fail(lineno, "bad junction line");
                vertices.push_back({id, false, 0});
            } else {
                throw fail(lineno, "vertex kind must be 'station' or 'junction'");
            }
        } else if (kw == "edge") {
            Edge e;
            ls >> e.from >> e.label >> e.to;
            if (e.from.empty() || e.label.empty() || e.to.empty()) {
                throw fail(lineno, "expected 'edge <from> <label> <to>'");
            }
            edges.push_back(std::move(e));
        } else {
            throw fail(lineno, "expected a 'vertex' or 'edge' line");
        }
    }
    try {
        return MapKey(std::move(vertices), edges, start, sep);
    } catch (const std::invalid_argument& e) {
        throw std::runtime_error(e.what());
    }
}

inline MapKey key_from_string(std::string_view text) {
    std::istringstream is{std::string(text)};
    return read_key(is);
}

// Ciphertext file: whitespace-separated label tokens.

inline void write_labels(std::ostream& os, const std::vector<std::string>& labels) {
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (i > 0) os << " ";
        os << labels[i];
    }
    os << "\n";
}

inline std::vector<std::string> read_labels(std::istream& is) {
    std::vector<std::string> out;
    std::string token;
    while (is >> token) out.push_back(token);
    return out;
}

} // namespace decoykit::bitmap
