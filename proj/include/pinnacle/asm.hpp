#pragma once

// Families of h non-crossing, edge-disjoint down-right lattice paths with minimal
// endpoints, their six-vertex (domain-wall) encoding and alternating sign matrices.
//
// Path i (1 <= i <= h) runs from (0, h - i) to (h - i, 0) with unit steps (+1, 0) and
// (0, -1); x grows to the right and y grows upward. It is stored through its column
// heights: y(x) is the height of the step from x to x + 1.

#include <boost/multiprecision/cpp_int.hpp>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "pinnacle/error.hpp"

namespace pinnacle {

using BigInt = boost::multiprecision::cpp_int;

struct DownRightPath {
    int span = 0;              ///< the path runs from (0, span) to (span, 0)
    std::vector<int> heights;  ///< heights[x] for x in [0, span)

    friend bool operator==(const DownRightPath&, const DownRightPath&) = default;

    [[nodiscard]] int length() const { return 2 * span; }

    /// Unit edges as (kind, x, y): kind 0 is horizontal [x, x+1] at height y, kind 1 is vertical [y, y+1] on line x.
    template <class F>
    void for_each_edge(F&& f) const {
        int cur = span;
        for (int x = 0; x <= span; ++x) {
            const int target = x < span ? heights[size_t(x)] : 0;
            for (int y = target; y < cur; ++y) f(1, x, y);
            cur = target;
            if (x < span) f(0, x, cur);
        }
    }
};

struct PathFamily {
    int h = 0;
    std::vector<DownRightPath> paths;  ///< paths[i - 1] is path i

    friend bool operator==(const PathFamily&, const PathFamily&) = default;

    /// Endpoint vectors a = b = (h - 1, ..., 0).
    [[nodiscard]] std::vector<int> endpoints() const {
        std::vector<int> u;
        for (int i = 1; i <= h; ++i) u.push_back(h - i);
        return u;
    }
};

inline void validate(const PathFamily& f) {
    if (f.h < 0 || f.paths.size() != size_t(f.h)) throw ValidityError("path family: expected h paths");
    std::vector<std::int64_t> keys;
    for (int i = 0; i < f.h; ++i) {
        const DownRightPath& p = f.paths[size_t(i)];
        const std::string tag = "path " + std::to_string(i + 1);
        if (p.span != f.h - 1 - i || p.heights.size() != size_t(p.span)) throw ValidityError(tag + ": wrong endpoints");
        for (int x = 0; x < p.span; ++x) {
            const int y = p.heights[size_t(x)];
            if (y < 0 || y > p.span || (x > 0 && y > p.heights[size_t(x - 1)]))
                throw ValidityError(tag + ": not a down-right path at x=" + std::to_string(x));
            if (i > 0 && y > f.paths[size_t(i - 1)].heights[size_t(x)])
                throw ValidityError(tag + ": crosses path " + std::to_string(i) + " at x=" + std::to_string(x));
        }
        p.for_each_edge([&](int k, int x, int y) { keys.push_back((std::int64_t(k) << 40) | (std::int64_t(x) << 20) | y); });
    }
    std::sort(keys.begin(), keys.end());
    if (std::adjacent_find(keys.begin(), keys.end()) != keys.end()) throw ValidityError("path family: paths share an edge");
}

namespace detail {

inline void path_family_search(int h, int i, PathFamily& f, std::vector<char>& used,
                               const std::function<void(const PathFamily&)>& visit) {
    if (i == h) {
        visit(f);
        return;
    }
    const int n = h - 1 - i;
    const int W = h + 1;
    auto slot = [&](int k, int x, int y) { return (size_t(k) * size_t(W) + size_t(x)) * size_t(W) + size_t(y); };
    DownRightPath& p = f.paths[size_t(i)];
    p.span = n;
    p.heights.assign(size_t(n), 0);
    const DownRightPath* above = i > 0 ? &f.paths[size_t(i - 1)] : nullptr;

    // depth-first over the column heights, pruning on crossing and shared edges
    std::function<void(int, int)> rec = [&](int x, int cap) {
        if (x == n) {
            std::vector<size_t> mine;
            bool clash = false;
            p.for_each_edge([&](int k, int ex, int ey) {
                const size_t s = slot(k, ex, ey);
                if (used[s]) clash = true;
                mine.push_back(s);
            });
            if (clash) return;
            for (size_t s : mine) used[s] = 1;
            path_family_search(h, i + 1, f, used, visit);
            for (size_t s : mine) used[s] = 0;
            return;
        }
        const int bound = above ? std::min(cap, above->heights[size_t(x)]) : cap;
        for (int y = bound; y >= 0; --y) {
            if (used[slot(0, x, y)]) continue;
            p.heights[size_t(x)] = y;
            rec(x + 1, y);
        }
    };
    rec(0, n);
}

}  // namespace detail

inline constexpr int kMaxEnumeratedFamilies = 6;

/// Visits every family for h <= 6.
inline void for_each_path_family(int h, const std::function<void(const PathFamily&)>& visit) {
    if (h < 0) throw DomainError("path families: h must be >= 0");
    if (h > kMaxEnumeratedFamilies) throw BudgetError("path families: exhaustive enumeration limited to h <= 6", double(h));
    PathFamily f;
    f.h = h;
    f.paths.resize(size_t(h));
    std::vector<char> used(2 * size_t(h + 1) * size_t(h + 1), 0);
    detail::path_family_search(h, 0, f, used, visit);
}

[[nodiscard]] inline std::uint64_t enumerate_path_families(int h) {
    std::uint64_t n = 0;
    for_each_path_family(h, [&](const PathFamily&) { ++n; });
    return n;
}

/// prod_{k=0}^{h-1} (3k+1)! / (h+k)!
[[nodiscard]] inline BigInt asm_product_formula(int h) {
    if (h < 0) throw DomainError("asm_product_formula: h must be >= 0");
    auto factorial = [](int n) {
        BigInt f = 1;
        for (int i = 2; i <= n; ++i) f *= i;
        return f;
    };
    BigInt num = 1, den = 1;
    for (int k = 0; k < h; ++k) {
        num *= factorial(3 * k + 1);
        den *= factorial(h + k);
    }
    return num / den;
}

/// log A(h) from log-gamma sums.
[[nodiscard]] inline double log_asm_count(int h) {
    if (h < 0) throw DomainError("log_asm_count: h must be >= 0");
    double s = 0.0;
    for (int k = 0; k < h; ++k) s += std::lgamma(3.0 * k + 2.0) - std::lgamma(double(h + k) + 1.0);
    return s;
}

/// Natural log of a positive big integer.
[[nodiscard]] inline double log_big(const BigInt& n) {
    if (n <= 0) throw DomainError("log_big: argument must be positive");
    const unsigned msb = boost::multiprecision::msb(n);
    const unsigned shift = msb > 60 ? msb - 60 : 0;
    const BigInt top = n >> shift;
    return std::log(top.convert_to<double>()) + double(shift) * std::numbers::ln2;
}

/// log(3 sqrt(3) / 4), the growth constant of log A(h) / h^2.
inline const double kAsmGrowth = std::log(3.0 * std::sqrt(3.0) / 4.0);

/// Six-vertex configuration on an h x h grid. Row r sits at height y = h - 1 - r.
/// H[r][x] is the horizontal edge entering column x of row r from the left (x = h is the
/// right boundary); V[r][x] is the vertical edge entering row r of column x from above
/// (r = h is the bottom boundary). Domain walls: H[r][0] = 1, H[r][h] = 0, V[0][x] = 0, V[h][x] = 1.
struct SixVertexConfig {
    int h = 0;
    std::vector<std::vector<int>> H;
    std::vector<std::vector<int>> V;

    friend bool operator==(const SixVertexConfig&, const SixVertexConfig&) = default;

    /// 0..5: empty, full, horizontal through, vertical through, left-to-down turn, top-to-right turn.
    [[nodiscard]] int vertex_type(int r, int x) const {
        const int l = H[size_t(r)][size_t(x)], rt = H[size_t(r)][size_t(x + 1)];
        const int t = V[size_t(r)][size_t(x)], d = V[size_t(r + 1)][size_t(x)];
        if (!l && !t) return 0;
        if (l && t) return 1;
        if (l && rt) return 2;
        if (t && d) return 3;
        if (l && d) return 4;
        return 5;
    }
};

inline void validate(const SixVertexConfig& c) {
    const int h = c.h;
    if (c.H.size() != size_t(h) || c.V.size() != size_t(h + 1)) throw ValidityError("six-vertex: wrong grid shape");
    for (int r = 0; r < h; ++r) {
        if (c.H[size_t(r)].size() != size_t(h + 1)) throw ValidityError("six-vertex: wrong row width");
        if (c.H[size_t(r)][0] != 1 || c.H[size_t(r)][size_t(h)] != 0)
            throw ValidityError("six-vertex: domain wall violated on row " + std::to_string(r));
    }
    for (int x = 0; x < h; ++x)
        if (c.V[0][size_t(x)] != 0 || c.V[size_t(h)][size_t(x)] != 1)
            throw ValidityError("six-vertex: domain wall violated on column " + std::to_string(x));
    for (int r = 0; r < h; ++r)
        for (int x = 0; x < h; ++x) {
            const int l = c.H[size_t(r)][size_t(x)], rt = c.H[size_t(r)][size_t(x + 1)];
            const int t = c.V[size_t(r)][size_t(x)], d = c.V[size_t(r + 1)][size_t(x)];
            const bool binary = (l | rt | t | d) <= 1 && l >= 0 && rt >= 0 && t >= 0 && d >= 0;
            if (!binary || l + t != rt + d)
                throw ValidityError("six-vertex: ice rule fails at vertex (" + std::to_string(r) + ", " + std::to_string(x) + ")");
        }
}

struct ASMatrix {
    int h = 0;
    std::vector<std::vector<int>> m;

    friend bool operator==(const ASMatrix&, const ASMatrix&) = default;
    friend auto operator<=>(const ASMatrix& a, const ASMatrix& b) { return a.m <=> b.m; }
};

inline void validate(const ASMatrix& a) {
    if (a.m.size() != size_t(a.h)) throw ValidityError("ASM: wrong number of rows");
    auto line = [&](auto get, const std::string& what) {
        int sum = 0, last = 0;
        for (int k = 0; k < a.h; ++k) {
            const int v = get(k);
            if (v < -1 || v > 1) throw ValidityError("ASM: entry outside {-1, 0, 1} in " + what);
            if (v != 0) {
                if (v == last) throw ValidityError("ASM: signs do not alternate in " + what);
                last = v;
            }
            sum += v;
        }
        if (sum != 1) throw ValidityError("ASM: " + what + " does not sum to 1");
        if (a.h > 0 && last != 1) throw ValidityError("ASM: " + what + " ends with -1");
    };
    for (int r = 0; r < a.h; ++r) {
        if (a.m[size_t(r)].size() != size_t(a.h)) throw ValidityError("ASM: wrong row width");
        line([&](int k) { return a.m[size_t(r)][size_t(k)]; }, "row " + std::to_string(r));
    }
    for (int x = 0; x < a.h; ++x) line([&](int k) { return a.m[size_t(k)][size_t(x)]; }, "column " + std::to_string(x));
}

[[nodiscard]] inline bool is_valid(const ASMatrix& a) {
    try {
        validate(a);
        return true;
    } catch (const ValidityError&) {
        return false;
    }
}

/// Occupied edges of the paths, with each path entering through the left wall and leaving through the floor.
[[nodiscard]] inline SixVertexConfig paths_to_six_vertex(const PathFamily& f) {
    validate(f);
    const int h = f.h;
    SixVertexConfig c{h, std::vector<std::vector<int>>(size_t(h), std::vector<int>(size_t(h + 1), 0)),
                      std::vector<std::vector<int>>(size_t(h + 1), std::vector<int>(size_t(h), 0))};
    for (int r = 0; r < h; ++r) c.H[size_t(r)][0] = 1;
    for (int x = 0; x < h; ++x) c.V[size_t(h)][size_t(x)] = 1;
    for (const DownRightPath& p : f.paths)
        p.for_each_edge([&](int kind, int x, int y) {
            if (kind == 0)
                c.H[size_t(h - 1 - y)][size_t(x + 1)] = 1;
            else
                c.V[size_t(h - 1 - y)][size_t(x)] = 1;
        });
    validate(c);
    return c;
}

/// Traces the paths back out of a six-vertex configuration; at full vertices the
/// path from the top turns right and the path from the left turns down.
[[nodiscard]] inline PathFamily six_vertex_to_paths(const SixVertexConfig& c) {
    validate(c);
    const int h = c.h;
    PathFamily f;
    f.h = h;
    for (int i = 1; i <= h; ++i) {
        DownRightPath p;
        p.span = h - i;
        int x = 0, r = i - 1;  // start at (0, h - i), entered from the left
        bool from_left = true;
        for (;;) {
            const bool right = c.H[size_t(r)][size_t(x + 1)] != 0;
            const bool down = c.V[size_t(r + 1)][size_t(x)] != 0;
            const bool full = c.vertex_type(r, x) == 1;
            const bool go_down = full ? from_left : down;
            if (!go_down && !right) throw ValidityError("six-vertex: path stops at vertex (" + std::to_string(r) + ", " + std::to_string(x) + ")");
            if (go_down) {
                if (r == h - 1) break;
                ++r;
                from_left = false;
            } else {
                p.heights.push_back(h - 1 - r);
                ++x;
                from_left = true;
            }
        }
        if (x != p.span || p.heights.size() != size_t(p.span))
            throw ValidityError("six-vertex: path " + std::to_string(i) + " leaves at the wrong column");
        f.paths.push_back(std::move(p));
    }
    validate(f);
    return f;
}

/// M[r][x] = H[r][x] - H[r][x+1]: +1 where a path turns from horizontal to vertical, -1 for the reverse.
[[nodiscard]] inline ASMatrix six_vertex_to_asm(const SixVertexConfig& c) {
    validate(c);
    ASMatrix a{c.h, std::vector<std::vector<int>>(size_t(c.h), std::vector<int>(size_t(c.h), 0))};
    for (int r = 0; r < c.h; ++r)
        for (int x = 0; x < c.h; ++x) a.m[size_t(r)][size_t(x)] = c.H[size_t(r)][size_t(x)] - c.H[size_t(r)][size_t(x + 1)];
    validate(a);
    return a;
}

[[nodiscard]] inline SixVertexConfig asm_to_six_vertex(const ASMatrix& a) {
    validate(a);
    const int h = a.h;
    SixVertexConfig c{h, std::vector<std::vector<int>>(size_t(h), std::vector<int>(size_t(h + 1), 0)),
                      std::vector<std::vector<int>>(size_t(h + 1), std::vector<int>(size_t(h), 0))};
    for (int r = 0; r < h; ++r) {
        c.H[size_t(r)][0] = 1;
        for (int x = 0; x < h; ++x) {
            c.H[size_t(r)][size_t(x + 1)] = c.H[size_t(r)][size_t(x)] - a.m[size_t(r)][size_t(x)];
            c.V[size_t(r + 1)][size_t(x)] = c.V[size_t(r)][size_t(x)] + a.m[size_t(r)][size_t(x)];
        }
    }
    validate(c);
    return c;
}

inline constexpr int kMaxTransferSide = 8;

/// Number of domain-wall six-vertex configurations by a row transfer over vertical-edge masks.
[[nodiscard]] inline std::uint64_t six_vertex_count(int h) {
    if (h < 0) throw DomainError("six_vertex_count: h must be >= 0");
    if (h > kMaxTransferSide) throw BudgetError("six_vertex_count: transfer enumeration limited to h <= 8", double(h));
    std::map<std::uint32_t, std::uint64_t> rows{{0u, 1u}};
    for (int r = 0; r < h; ++r) {
        std::map<std::uint32_t, std::uint64_t> next;
        for (auto [top, ways] : rows) {
            // walk along the row carrying the horizontal edge state
            std::function<void(int, int, std::uint32_t)> go = [&](int x, int left, std::uint32_t down) {
                if (x == h) {
                    if (left == 0) next[down] += ways;
                    return;
                }
                const int t = int((top >> x) & 1u);
                const int in = left + t;
                if (in == 0) go(x + 1, 0, down);
                else if (in == 2) go(x + 1, 1, down | (1u << x));
                else {
                    go(x + 1, 1, down);
                    go(x + 1, 0, down | (1u << x));
                }
            };
            go(0, 1, 0u);
        }
        rows.swap(next);
    }
    const std::uint32_t full = h == 0 ? 0u : ((1u << h) - 1u);
    const auto it = rows.find(full);
    return it == rows.end() ? 0 : it->second;
}

/// Bracket 4(beta + 2 log(27/16) +- C e^{-beta}) h^2 for the restricted model.
struct RsosRate {
    double beta = 0.0;
    double center = 0.0;  ///< 4 (beta + 2 log(27/16))

    [[nodiscard]] double half_width(double C) const { return 4.0 * C * std::exp(-beta); }
    [[nodiscard]] double lower(double C) const { return center - half_width(C); }
    [[nodiscard]] double upper(double C) const { return center + half_width(C); }
};

[[nodiscard]] inline RsosRate rsos_rate_constant(double beta) {
    if (!(beta > 0.0)) throw DomainError("rsos_rate_constant: beta must be positive");
    return {beta, 4.0 * (beta + 2.0 * std::log(27.0 / 16.0))};
}

/// Character picture of the path union: '-' and '|' for edges, '+' for vertices.
[[nodiscard]] inline std::string render(const PathFamily& f) {
    const int h = f.h;
    const int W = 2 * h + 1;
    std::vector<std::string> canvas(size_t(W), std::string(size_t(W), ' '));
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < h; ++x) canvas[size_t(2 * y)][size_t(2 * x)] = '.';
    for (const DownRightPath& p : f.paths)
        p.for_each_edge([&](int kind, int x, int y) {
            if (kind == 0) {
                canvas[size_t(2 * y)][size_t(2 * x + 1)] = '-';
                canvas[size_t(2 * y)][size_t(2 * x)] = '+';
                canvas[size_t(2 * y)][size_t(2 * x + 2)] = '+';
            } else {
                canvas[size_t(2 * y + 1)][size_t(2 * x)] = '|';
                canvas[size_t(2 * y)][size_t(2 * x)] = '+';
                canvas[size_t(2 * y + 2)][size_t(2 * x)] = '+';
            }
        });
    std::ostringstream os;
    for (size_t y = canvas.size(); y-- > 0;) {
        std::string row = canvas[y];
        row.erase(row.find_last_not_of(' ') + 1);
        os << row << '\n';
    }
    return os.str();
}

[[nodiscard]] inline std::string render(const SixVertexConfig& c) {
    std::ostringstream os;
    for (int r = 0; r < c.h; ++r) {
        for (int x = 0; x < c.h; ++x) os << ' ' << (c.V[size_t(r)][size_t(x)] ? '|' : ' ') << ' ';
        os << '\n';
        for (int x = 0; x < c.h; ++x) os << (c.H[size_t(r)][size_t(x)] ? '-' : ' ') << c.vertex_type(r, x) << ' ';
        os << (c.H[size_t(r)][size_t(c.h)] ? '-' : ' ') << '\n';
    }
    for (int x = 0; x < c.h; ++x) os << ' ' << (c.V[size_t(c.h)][size_t(x)] ? '|' : ' ') << ' ';
    os << '\n';
    return os.str();
}

[[nodiscard]] inline std::string render(const ASMatrix& a) {
    std::ostringstream os;
    for (const auto& row : a.m) {
        for (size_t x = 0; x < row.size(); ++x) os << (x ? " " : "") << (row[x] < 0 ? "" : " ") << row[x];
        os << '\n';
    }
    return os.str();
}

}  // namespace pinnacle
