#pragma once

// Level lines of a height configuration, and the path and circuit events.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <optional>
#include <unordered_map>
#include <vector>

#include "pinnacle/dual.hpp"
#include "pinnacle/lattice.hpp"

namespace pinnacle {

struct GeometricContour {
    std::vector<DualEdge> edges;        ///< cyclic order
    std::vector<Point> interior;        ///< V_gamma, sorted
    std::vector<Point> inner_boundary;  ///< sorted
    std::vector<Point> outer_boundary;  ///< sorted
    bool positive = true;               ///< {eta >= h} lies inside

    [[nodiscard]] size_t length() const { return edges.size(); }
    [[nodiscard]] size_t area() const { return interior.size(); }
    [[nodiscard]] bool encloses(Point p) const { return std::binary_search(interior.begin(), interior.end(), p); }
};

struct LevelLineSet {
    int level = 0;
    int side = 0;
    std::vector<GeometricContour> contours;

    [[nodiscard]] size_t total_length() const {
        size_t s = 0;
        for (const auto& c : contours) s += c.length();
        return s;
    }
};

/// Bonds with at least one endpoint in the box whose endpoints lie on different sides of level h.
[[nodiscard]] inline std::vector<DualEdge> discordant_edges(const HeightConfig& config, int h) {
    std::vector<DualEdge> out;
    for_each_bond(config.side(), [&](const Bond& b) {
        if ((config.at(b.a) >= h) != (config.at(b.b) >= h)) out.push_back(dual_of(b.a, b.b));
    });
    return out;
}

[[nodiscard]] inline size_t count_discordant_bonds(const HeightConfig& config, int h) {
    return discordant_edges(config, h).size();
}

namespace detail {

inline void fill_boundaries(GeometricContour& c) {
    std::vector<Point> touched;
    for (const DualEdge& e : c.edges) {
        touched.push_back(e.first());
        touched.push_back(e.second());
    }
    // corners turning through the NW or SE quadrant also see the diagonal site
    const EdgeSet own = make_edge_set(c.edges);
    auto has = [&](DualVertex w, Side s) { return own.contains(incident(w, s).key()); };
    for (const DualEdge& e : c.edges)
        for (DualVertex w : endpoints(e)) {
            if ((has(w, Side::N) && has(w, Side::W)) || (has(w, Side::S) && has(w, Side::E)))
                for (Point p : surrounding(w)) touched.push_back(p);
        }
    std::sort(touched.begin(), touched.end());
    touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
    for (Point p : touched) (c.encloses(p) ? c.inner_boundary : c.outer_boundary).push_back(p);
}

}  // namespace detail

/// Splits the discordant dual edges of level h into closed circuits. At dual vertices of
/// degree four the walk continues along the linked partner of the incoming edge.
[[nodiscard]] inline LevelLineSet extract_level_lines(const HeightConfig& config, int h) {
    LevelLineSet out;
    out.level = h;
    out.side = config.side();
    const std::vector<DualEdge> all = discordant_edges(config, h);
    const EdgeSet present = make_edge_set(all);
    EdgeSet used;
    used.reserve(all.size() * 2);

    for (const DualEdge& start : all) {
        if (used.contains(start.key())) continue;
        GeometricContour c;
        // walk from the first endpoint through the edge toward the second
        auto ends = endpoints(start);
        DualVertex at = ends[1];
        Side came_from = start.dir == BondDir::East ? Side::S : Side::W;  // side of `at` we entered through
        c.edges.push_back(start);
        used.insert(start.key());
        for (;;) {
            int degree = 0;
            std::array<bool, 4> avail{};
            for (int s = 0; s < 4; ++s) {
                avail[size_t(s)] = present.contains(incident(at, Side(s)).key());
                degree += avail[size_t(s)];
            }
            Side next = came_from;
            if (degree == 4) {
                next = linked(came_from);
            } else {
                for (int s = 0; s < 4; ++s)
                    if (avail[size_t(s)] && Side(s) != came_from) next = Side(s);
            }
            const DualEdge e = incident(at, next);
            if (e == start) break;
            c.edges.push_back(e);
            used.insert(e.key());
            at = neighbor(at, next);
            came_from = opposite(next);
        }
        c.interior = enclosed_sites(c.edges);
        const DualEdge& e0 = c.edges.front();
        const Point in = c.encloses(e0.first()) ? e0.first() : e0.second();
        c.positive = config.at(in) >= h;
        detail::fill_boundaries(c);
        out.contours.push_back(std::move(c));
    }
    return out;
}

/// Natural-log threshold (log L)^2.
[[nodiscard]] inline double macroscopic_threshold(int L) {
    const double l = std::log(double(L));
    return l * l;
}

/// Keeps contours strictly longer than (log L)^2.
[[nodiscard]] inline LevelLineSet macroscopic_filter(const LevelLineSet& levels, int L) {
    LevelLineSet out;
    out.level = levels.level;
    out.side = levels.side;
    const double t = macroscopic_threshold(L);
    for (const auto& c : levels.contours)
        if (double(c.length()) > t) out.contours.push_back(c);
    return out;
}

struct PathEvent {
    bool occurred = false;
    double span = 0.0;        ///< largest distance within a component of {eta != h}
    std::vector<Point> path;  ///< nearest-neighbour path realising the span
};

namespace detail {

inline long long cross(Point o, Point a, Point b) {
    return 1LL * (a.x - o.x) * (b.y - o.y) - 1LL * (a.y - o.y) * (b.x - o.x);
}

/// Farthest pair of a point set via its convex hull.
inline std::pair<Point, Point> diameter_pair(std::vector<Point> pts) {
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 3) return {pts.front(), pts.back()};
    std::vector<Point> hull(2 * pts.size());
    size_t k = 0;
    for (size_t i = 0; i < pts.size(); ++i) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    for (size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
        while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    std::pair<Point, Point> best{hull[0], hull[0]};
    long long bd = -1;
    for (size_t i = 0; i < hull.size(); ++i)
        for (size_t j = i + 1; j < hull.size(); ++j) {
            const long long d = norm2(hull[i] - hull[j]);
            if (d > bd) bd = d, best = {hull[i], hull[j]};
        }
    return best;
}

}  // namespace detail

/// Is there a nearest-neighbour path of box sites avoiding height h whose endpoints are at distance >= r?
[[nodiscard]] inline PathEvent detect_path_event(const HeightConfig& config, double r, int h) {
    if (!(r > 0.0)) throw DomainError("detect_path_event: r must be positive");
    const size_t n = config.site_count();
    std::vector<int> comp(n, -1);
    PathEvent best;
    int label = 0;
    for (size_t s = 0; s < n; ++s) {
        if (comp[s] >= 0 || config.data()[s] == h) continue;
        std::vector<Point> members;
        std::deque<size_t> queue{s};
        comp[s] = label;
        while (!queue.empty()) {
            const size_t i = queue.front();
            queue.pop_front();
            const Point p = config.point(i);
            members.push_back(p);
            for (Point off : kNeighborOffsets) {
                const Point q = p + off;
                if (!config.inside(q)) continue;
                const size_t k = config.index(q);
                if (comp[k] < 0 && config.data()[k] != h) comp[k] = label, queue.push_back(k);
            }
        }
        const auto [a, b] = detail::diameter_pair(members);
        const double span = norm(a - b);
        if (span > best.span || best.path.empty()) {
            best.span = span;
            // breadth-first path from a to b inside this component
            std::vector<long long> parent(n, -2);
            std::deque<size_t> bfs{config.index(a)};
            parent[config.index(a)] = -1;
            while (!bfs.empty()) {
                const size_t i = bfs.front();
                bfs.pop_front();
                if (i == config.index(b)) break;
                const Point p = config.point(i);
                for (Point off : kNeighborOffsets) {
                    const Point q = p + off;
                    if (!config.inside(q)) continue;
                    const size_t k = config.index(q);
                    if (comp[k] == label && parent[k] == -2) parent[k] = (long long)i, bfs.push_back(k);
                }
            }
            best.path.clear();
            for (long long i = (long long)config.index(b); i >= 0; i = parent[size_t(i)]) best.path.push_back(config.point(size_t(i)));
            std::reverse(best.path.begin(), best.path.end());
        }
        ++label;
    }
    best.occurred = !best.path.empty() && best.span >= r;
    return best;
}

struct CircuitEvent {
    bool occurred = false;
    int inner_side = 0;          ///< side of the centred sub-box
    std::vector<Point> circuit;  ///< sites of {eta >= j} surrounding the sub-box, sorted
};

/// Is there a *-connected circuit of sites with eta >= j in the box whose interior contains
/// the centred sub-box of side L - margin (at least 1)? Decided through the dual statement:
/// no nearest-neighbour path of sites with eta <= j - 1 joins the sub-box to the box's outer ring.
[[nodiscard]] inline CircuitEvent detect_circuit_event(const HeightConfig& config, int j, int margin) {
    if (margin < 0) throw DomainError("detect_circuit_event: margin must be >= 0");
    const int L = config.side();
    CircuitEvent out;
    out.inner_side = std::max(1, L - margin);
    const int o = (L - out.inner_side) / 2;
    auto in_sub = [&](Point p) { return p.x >= o && p.y >= o && p.x < o + out.inner_side && p.y < o + out.inner_side; };
    auto low = [&](Point p) { return config[p] <= j - 1; };

    // low sites reachable from outside the box
    const size_t n = config.site_count();
    std::vector<char> reach(n, 0);
    std::deque<Point> queue;
    for (size_t i = 0; i < n; ++i) {
        const Point p = config.point(i);
        const bool ring = p.x == 0 || p.y == 0 || p.x == L - 1 || p.y == L - 1;
        if (ring && low(p)) reach[i] = 1, queue.push_back(p);
    }
    while (!queue.empty()) {
        const Point p = queue.front();
        queue.pop_front();
        for (Point off : kNeighborOffsets) {
            const Point q = p + off;
            if (config.inside(q) && !reach[config.index(q)] && low(q)) reach[config.index(q)] = 1, queue.push_back(q);
        }
    }
    for (size_t i = 0; i < n; ++i)
        if (reach[i] && in_sub(config.point(i))) return out;
    out.occurred = true;

    // the component of the sub-box in the complement; its sites touching the reached set or the outside
    std::vector<char> seen(n, 0);
    const Point c0{o, o};
    seen[config.index(c0)] = 1;
    queue.push_back(c0);
    while (!queue.empty()) {
        const Point p = queue.front();
        queue.pop_front();
        bool rim = false;
        for (Point off : kNeighborOffsets) {
            const Point q = p + off;
            if (!config.inside(q) || reach[config.index(q)]) {
                rim = true;
                continue;
            }
            if (!seen[config.index(q)]) seen[config.index(q)] = 1, queue.push_back(q);
        }
        if (rim) out.circuit.push_back(p);
    }
    std::sort(out.circuit.begin(), out.circuit.end());
    return out;
}

struct AreaSummary {
    int level = 0;
    size_t n_contours = 0;
    size_t n_macroscopic = 0;
    size_t max_area = 0;
    size_t total_area = 0;
    double area_fraction = 0.0;  ///< max_area / L^2
    bool has_negative_macroscopic = false;
};

[[nodiscard]] inline AreaSummary area_statistics(const LevelLineSet& levels, int L) {
    AreaSummary s;
    s.level = levels.level;
    s.n_contours = levels.contours.size();
    const double t = macroscopic_threshold(L);
    for (const auto& c : levels.contours) {
        s.max_area = std::max(s.max_area, c.area());
        s.total_area += c.area();
        if (double(c.length()) > t) {
            ++s.n_macroscopic;
            if (!c.positive) s.has_negative_macroscopic = true;
        }
    }
    s.area_fraction = L > 0 ? double(s.max_area) / (double(L) * double(L)) : 0.0;
    return s;
}

}  // namespace pinnacle
