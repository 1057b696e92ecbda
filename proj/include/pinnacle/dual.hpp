#pragma once

// Dual lattice (Z^2 + (1/2, 1/2)). A dual edge is named by the primal bond it
// crosses; a dual vertex (u, v) is the point (u + 1/2, v + 1/2).

#include <algorithm>
#include <array>
#include <cstdint>
#include <unordered_set>
#include <vector>

#include "pinnacle/lattice.hpp"

namespace pinnacle {

enum class BondDir : std::uint8_t { East, North };

/// Dual edge crossing the bond {site, site + e} where e is (1,0) for East and (0,1) for North.
struct DualEdge {
    Point site;
    BondDir dir = BondDir::East;

    friend constexpr bool operator==(DualEdge, DualEdge) = default;
    friend constexpr auto operator<=>(DualEdge, DualEdge) = default;

    [[nodiscard]] constexpr Point first() const { return site; }
    [[nodiscard]] constexpr Point second() const {
        return dir == BondDir::East ? Point{site.x + 1, site.y} : Point{site.x, site.y + 1};
    }
    [[nodiscard]] std::uint64_t key() const {
        const auto ux = std::uint64_t(std::uint32_t(site.x + (1 << 30)));
        const auto uy = std::uint64_t(std::uint32_t(site.y + (1 << 30)));
        return (ux << 33) | (uy << 1) | std::uint64_t(dir == BondDir::North);
    }
};

/// The dual edge crossing an arbitrary nearest-neighbour bond.
[[nodiscard]] inline DualEdge dual_of(Point a, Point b) {
    if (b.x == a.x + 1 && b.y == a.y) return {a, BondDir::East};
    if (a.x == b.x + 1 && a.y == b.y) return {b, BondDir::East};
    if (b.y == a.y + 1 && b.x == a.x) return {a, BondDir::North};
    return {b, BondDir::North};
}

struct DualVertex {
    int u = 0;
    int v = 0;

    friend constexpr bool operator==(DualVertex, DualVertex) = default;
    friend constexpr auto operator<=>(DualVertex, DualVertex) = default;
};

/// Directions of the four dual edges at a dual vertex.
enum class Side : std::uint8_t { N = 0, E = 1, S = 2, W = 3 };

[[nodiscard]] constexpr DualEdge incident(DualVertex w, Side s) {
    switch (s) {
        case Side::N: return {{w.u, w.v + 1}, BondDir::East};
        case Side::S: return {{w.u, w.v}, BondDir::East};
        case Side::E: return {{w.u + 1, w.v}, BondDir::North};
        case Side::W: return {{w.u, w.v}, BondDir::North};
    }
    return {};
}

/// Both dual endpoints of an edge, ordered (south, north) or (west, east).
[[nodiscard]] constexpr std::array<DualVertex, 2> endpoints(DualEdge e) {
    if (e.dir == BondDir::East) return {DualVertex{e.site.x, e.site.y - 1}, DualVertex{e.site.x, e.site.y}};
    return {DualVertex{e.site.x - 1, e.site.y}, DualVertex{e.site.x, e.site.y}};
}

[[nodiscard]] constexpr DualVertex neighbor(DualVertex w, Side s) {
    switch (s) {
        case Side::N: return {w.u, w.v + 1};
        case Side::S: return {w.u, w.v - 1};
        case Side::E: return {w.u + 1, w.v};
        case Side::W: return {w.u - 1, w.v};
    }
    return w;
}

[[nodiscard]] constexpr Side opposite(Side s) { return Side((int(s) + 2) % 4); }

/// Partner under the linked-pair rule along the NW-SE diagonal: N with E, S with W.
[[nodiscard]] constexpr Side linked(Side s) {
    switch (s) {
        case Side::N: return Side::E;
        case Side::E: return Side::N;
        case Side::S: return Side::W;
        case Side::W: return Side::S;
    }
    return s;
}

/// The four primal sites around a dual vertex: SW, SE, NW, NE.
[[nodiscard]] constexpr std::array<Point, 4> surrounding(DualVertex w) {
    return {Point{w.u, w.v}, Point{w.u + 1, w.v}, Point{w.u, w.v + 1}, Point{w.u + 1, w.v + 1}};
}

using EdgeSet = std::unordered_set<std::uint64_t>;

[[nodiscard]] inline EdgeSet make_edge_set(const std::vector<DualEdge>& edges) {
    EdgeSet s;
    s.reserve(edges.size() * 2);
    for (const DualEdge& e : edges) s.insert(e.key());
    return s;
}

/// Sites enclosed by a closed set of dual edges: a horizontal ray from the site crosses an
/// odd number of them. A hole pinched off at a shared corner therefore stays outside. Sorted.
[[nodiscard]] inline std::vector<Point> enclosed_sites(const std::vector<DualEdge>& edges) {
    if (edges.empty()) return {};
    int x0 = edges[0].site.x, x1 = x0, y0 = edges[0].site.y, y1 = y0;
    for (const DualEdge& e : edges) {
        for (Point p : {e.first(), e.second()}) {
            x0 = std::min(x0, p.x), x1 = std::max(x1, p.x);
            y0 = std::min(y0, p.y), y1 = std::max(y1, p.y);
        }
    }
    const EdgeSet blocked = make_edge_set(edges);
    std::vector<Point> inside;
    for (int y = y0; y <= y1; ++y) {
        bool odd = false;
        for (int x = x0; x <= x1; ++x) {
            if (blocked.contains(DualEdge{{x - 1, y}, BondDir::East}.key())) odd = !odd;
            if (odd) inside.push_back({x, y});
        }
    }
    std::sort(inside.begin(), inside.end());
    return inside;
}

/// Dual circuit around the sites [x0, x1] x [y0, y1].
[[nodiscard]] inline std::vector<DualEdge> rectangle_circuit(int x0, int y0, int x1, int y1) {
    std::vector<DualEdge> out;
    for (int x = x0; x <= x1; ++x) out.push_back({{x, y0 - 1}, BondDir::North});
    for (int y = y0; y <= y1; ++y) out.push_back({{x1, y}, BondDir::East});
    for (int x = x1; x >= x0; --x) out.push_back({{x, y1}, BondDir::North});
    for (int y = y1; y >= y0; --y) out.push_back({{x0 - 1, y}, BondDir::East});
    return out;
}

}  // namespace pinnacle
