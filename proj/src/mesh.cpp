#include "hrvem/mesh.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace hrvem {

namespace {

double loop_signed_area(const std::vector<Vec2>& pts) {
    double a = 0.0;
    const int m = static_cast<int>(pts.size());
    for (int i = 0; i < m; ++i) {
        const Vec2& p = pts[i];
        const Vec2& q = pts[(i + 1) % m];
        a += cross(p, q);
    }
    return 0.5 * a;
}

Vec2 loop_centroid(const std::vector<Vec2>& pts, double area) {
    double cx = 0.0, cy = 0.0;
    const int m = static_cast<int>(pts.size());
    for (int i = 0; i < m; ++i) {
        const Vec2& p = pts[i];
        const Vec2& q = pts[(i + 1) % m];
        const double w = cross(p, q);
        cx += (p.x + q.x) * w;
        cy += (p.y + q.y) * w;
    }
    return {cx / (6.0 * area), cy / (6.0 * area)};
}

double orient(const Vec2& a, const Vec2& b, const Vec2& c) {
    return cross(b - a, c - a);
}

bool on_segment(const Vec2& a, const Vec2& b, const Vec2& p) {
    return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
           std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
}

// Intersection test for closed segments, endpoint touches included.
bool segments_intersect(const Vec2& p1, const Vec2& p2, const Vec2& p3, const Vec2& p4) {
    const double d1 = orient(p3, p4, p1);
    const double d2 = orient(p3, p4, p2);
    const double d3 = orient(p1, p2, p3);
    const double d4 = orient(p1, p2, p4);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
        ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
        return true;
    if (d1 == 0 && on_segment(p3, p4, p1)) return true;
    if (d2 == 0 && on_segment(p3, p4, p2)) return true;
    if (d3 == 0 && on_segment(p1, p2, p3)) return true;
    if (d4 == 0 && on_segment(p1, p2, p4)) return true;
    return false;
}

bool loop_is_simple(const std::vector<Vec2>& pts) {
    const int m = static_cast<int>(pts.size());
    for (int i = 0; i < m; ++i) {
        for (int j = i + 1; j < m; ++j) {
            if (j == i || (j + 1) % m == i || (i + 1) % m == j) continue;  // adjacent
            if (segments_intersect(pts[i], pts[(i + 1) % m], pts[j], pts[(j + 1) % m]))
                return false;
        }
    }
    return true;
}

std::vector<Vec2> cell_points(const PolygonMesh& mesh, int c) {
    std::vector<Vec2> pts;
    pts.reserve(mesh.cells[c].size());
    for (int v : mesh.cells[c]) pts.push_back(mesh.vertices[v]);
    return pts;
}

// Clip a convex polygon against the half-plane cross(b-a, x-a) >= 0.
std::vector<Vec2> clip_halfplane(const std::vector<Vec2>& poly, const Vec2& a, const Vec2& b) {
    std::vector<Vec2> out;
    const int m = static_cast<int>(poly.size());
    if (m == 0) return out;
    out.reserve(m + 2);
    for (int i = 0; i < m; ++i) {
        const Vec2& p = poly[i];
        const Vec2& q = poly[(i + 1) % m];
        const double fp = orient(a, b, p);
        const double fq = orient(a, b, q);
        if (fp >= 0.0) out.push_back(p);
        if ((fp > 0.0 && fq < 0.0) || (fp < 0.0 && fq > 0.0)) {
            const double t = fp / (fp - fq);
            out.push_back(p + t * (q - p));
        }
    }
    return out;
}

double dist_point_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
    const Vec2 ab = b - a;
    const double len2 = dot(ab, ab);
    if (len2 == 0.0) return dist(p, a);
    double t = dot(p - a, ab) / len2;
    t = std::clamp(t, 0.0, 1.0);
    return dist(p, a + t * ab);
}

double dist_to_loop_boundary(const std::vector<Vec2>& loop, const Vec2& p) {
    double d = std::numeric_limits<double>::max();
    const int m = static_cast<int>(loop.size());
    for (int i = 0; i < m; ++i)
        d = std::min(d, dist_point_segment(p, loop[i], loop[(i + 1) % m]));
    return d;
}

bool point_in_convex(const std::vector<Vec2>& poly, const Vec2& p, double tol) {
    const int m = static_cast<int>(poly.size());
    for (int i = 0; i < m; ++i)
        if (orient(poly[i], poly[(i + 1) % m], p) < tol) return false;
    return true;
}

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

// ---------------------------------------------------------------------------
// Structured generators
// ---------------------------------------------------------------------------

struct GridBuilder {
    std::vector<Vec2> vertices;
    std::vector<std::vector<int>> cells;

    int add_vertex(Vec2 p) {
        vertices.push_back(p);
        return static_cast<int>(vertices.size()) - 1;
    }
};

PolygonMesh build_quad_grid(int n) {
    GridBuilder g;
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i)
            g.add_vertex({static_cast<double>(i) / n, static_cast<double>(j) / n});
    auto vid = [n](int i, int j) { return j * (n + 1) + i; };
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            g.cells.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)});
    return PolygonMesh::from_cells(std::move(g.vertices), std::move(g.cells));
}

// Criss-cross split: the diagonal direction alternates with (i+j) parity.
std::vector<std::vector<int>> tri_cells(int n) {
    auto vid = [n](int i, int j) { return j * (n + 1) + i; };
    std::vector<std::vector<int>> cells;
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const int a = vid(i, j), b = vid(i + 1, j), c = vid(i + 1, j + 1), d = vid(i, j + 1);
            if ((i + j) % 2 == 0) {
                cells.push_back({a, b, c});
                cells.push_back({a, c, d});
            } else {
                cells.push_back({a, b, d});
                cells.push_back({b, c, d});
            }
        }
    }
    return cells;
}

std::vector<Vec2> grid_vertices(int n) {
    std::vector<Vec2> v;
    v.reserve((n + 1) * (n + 1));
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i)
            v.push_back({static_cast<double>(i) / n, static_cast<double>(j) / n});
    return v;
}

PolygonMesh build_tri_grid(int n) {
    return PolygonMesh::from_cells(grid_vertices(n), tri_cells(n));
}

// Jitter interior vertices in 2D and boundary (non-corner) vertices
// tangentially; fixed draw order keeps the mesh a pure function of the seed.
void jitter_grid(std::vector<Vec2>& v, int n, double amplitude, std::mt19937_64& rng) {
    const double a = amplitude / n;
    for (int j = 0; j <= n; ++j) {
        for (int i = 0; i <= n; ++i) {
            const double dx = uniform(rng, -a, a);
            const double dy = uniform(rng, -a, a);
            Vec2& p = v[j * (n + 1) + i];
            const bool on_x = (i == 0 || i == n);
            const bool on_y = (j == 0 || j == n);
            if (on_x && on_y) continue;
            if (on_x) { p.y += dy; continue; }
            if (on_y) { p.x += dx; continue; }
            p.x += dx;
            p.y += dy;
        }
    }
}

// Structured concave quads: each square is split by its diagonal whose
// midpoint is pushed off the diagonal by 0.3 of the cell size, giving one
// convex and one concave (dart) quad per square.
PolygonMesh build_conc_quad(int n) {
    GridBuilder g;
    g.vertices = grid_vertices(n);
    auto vid = [n](int i, int j) { return j * (n + 1) + i; };
    const double w = 1.0 / n;
    const double off = 0.3 * w / std::sqrt(2.0);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const int a = vid(i, j), b = vid(i + 1, j), c = vid(i + 1, j + 1), d = vid(i, j + 1);
            const Vec2 center{(i + 0.5) * w, (j + 0.5) * w};
            if ((i + j) % 2 == 0) {
                const int m = g.add_vertex(center + Vec2{off, -off});  // toward b
                g.cells.push_back({a, b, c, m});
                g.cells.push_back({a, m, c, d});
            } else {
                const int m = g.add_vertex(center + Vec2{-off, -off});  // toward a
                g.cells.push_back({a, b, m, d});
                g.cells.push_back({b, c, d, m});
            }
        }
    }
    return PolygonMesh::from_cells(std::move(g.vertices), std::move(g.cells));
}

// Structured hexagons: a staggered brick layout whose interface vertices are
// shifted vertically (peaks up, notches down) to form a honeycomb. Boundary
// rows degenerate to pentagons/quads so the square is covered exactly.
PolygonMesh build_hex_grid(int n) {
    const double w = 1.0 / n, h = 1.0 / n;
    const double delta = h / 6.0;

    // A vertex lives at (t*w/2, j*h + dy), t = 0..2n, j = 0..n.
    // Rows are bricks; even rows start at x=0, odd rows are offset by w/2.
    auto vertex_exists = [&](int t, int j) {
        if (j == 0) return t % 2 == 0;
        if (j == n) {
            const int r = n - 1;
            return (r % 2 == 0) ? (t % 2 == 0) : (t % 2 == 1 || t == 0 || t == 2 * n);
        }
        return true;  // interior interfaces carry both rows' corners
    };
    auto vertex_dy = [&](int t, int j) {
        if (j == 0 || j == n || t == 0 || t == 2 * n) return 0.0;
        const int lower = j - 1;
        const bool corner_of_lower = (lower % 2 == 0) ? (t % 2 == 0) : (t % 2 == 1);
        return corner_of_lower ? -delta : delta;
    };

    GridBuilder g;
    std::map<std::pair<int, int>, int> index;
    auto vid = [&](int t, int j) {
        auto key = std::make_pair(t, j);
        auto it = index.find(key);
        if (it != index.end()) return it->second;
        const int id = g.add_vertex({t * w / 2.0, j * h + vertex_dy(t, j)});
        index.emplace(key, id);
        return id;
    };

    for (int r = 0; r < n; ++r) {
        std::vector<std::pair<int, int>> spans;  // [t_left, t_right] per cell
        if (r % 2 == 0) {
            for (int i = 0; i < n; ++i) spans.emplace_back(2 * i, 2 * i + 2);
        } else {
            spans.emplace_back(0, 1);
            for (int i = 0; i < n - 1; ++i) spans.emplace_back(2 * i + 1, 2 * i + 3);
            spans.emplace_back(2 * n - 1, 2 * n);
        }
        for (auto [tl, tr] : spans) {
            std::vector<int> loop;
            for (int t = tl; t <= tr; ++t)
                if (vertex_exists(t, r)) loop.push_back(vid(t, r));
            for (int t = tr; t >= tl; --t)
                if (vertex_exists(t, r + 1)) loop.push_back(vid(t, r + 1));
            g.cells.push_back(std::move(loop));
        }
    }
    return PolygonMesh::from_cells(std::move(g.vertices), std::move(g.cells));
}

// Unstructured concave hexagons: column-paired bricks split by a randomized
// two-point zigzag, on a jittered grid.
PolygonMesh build_conc_hex(int n, std::uint64_t seed) {
    if (n % 2 != 0)
        throw std::invalid_argument("ConcHexU needs an even resolution (cells pair into columns)");
    std::mt19937_64 rng(seed);
    const double w = 1.0 / n;

    std::vector<Vec2> v = grid_vertices(n);
    jitter_grid(v, n, 0.08, rng);

    GridBuilder g;
    g.vertices = std::move(v);
    auto vid = [n](int i, int j) { return j * (n + 1) + i; };
    for (int j = 0; j < n; ++j) {
        for (int c = 0; c < n / 2; ++c) {
            const int i = 2 * c;
            const int a = vid(i, j), b = vid(i + 2, j);
            const int cc = vid(i + 2, j + 1), d = vid(i, j + 1);
            const int e = vid(i + 1, j), f = vid(i + 1, j + 1);
            const double delta = uniform(rng, -0.3, 0.3) * w;
            const Vec2 pe = g.vertices[e], pf = g.vertices[f];
            const int m1 = g.add_vertex(pe + (pf - pe) / 3.0 + Vec2{delta, 0.0});
            const int m2 = g.add_vertex(pe + (pf - pe) * (2.0 / 3.0) - Vec2{delta, 0.0});
            g.cells.push_back({a, e, m1, m2, f, d});
            g.cells.push_back({e, b, cc, f, m2, m1});
        }
    }
    return PolygonMesh::from_cells(std::move(g.vertices), std::move(g.cells));
}

// ---------------------------------------------------------------------------
// Voronoi generator (PolyU)
// ---------------------------------------------------------------------------

std::vector<Vec2> voronoi_cell(const std::vector<Vec2>& seeds, int i,
                               const std::vector<int>& order) {
    std::vector<Vec2> poly{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    const Vec2 si = seeds[i];
    for (int j : order) {
        const Vec2 sj = seeds[j];
        const double dij = dist(si, sj);
        double rmax = 0.0;
        for (const Vec2& p : poly) rmax = std::max(rmax, dist(p, si));
        if (dij > 2.0 * rmax) break;  // remaining seeds are farther; no cut possible
        // keep (x - m) . (sj - si) <= 0
        const Vec2 m = (si + sj) * 0.5;
        const Vec2 d = sj - si;
        std::vector<Vec2> out;
        out.reserve(poly.size() + 2);
        const int mp = static_cast<int>(poly.size());
        for (int a = 0; a < mp; ++a) {
            const Vec2& p = poly[a];
            const Vec2& q = poly[(a + 1) % mp];
            const double fp = dot(p - m, d);
            const double fq = dot(q - m, d);
            if (fp <= 0.0) out.push_back(p);
            if ((fp < 0.0 && fq > 0.0) || (fp > 0.0 && fq < 0.0))
                out.push_back(p + (fp / (fp - fq)) * (q - p));
        }
        poly = std::move(out);
        if (poly.size() < 3) break;
    }
    return poly;
}

std::vector<std::vector<Vec2>> voronoi_cells(const std::vector<Vec2>& seeds) {
    const int ns = static_cast<int>(seeds.size());
    std::vector<std::vector<Vec2>> cells(ns);
    std::vector<int> order(ns);
    for (int i = 0; i < ns; ++i) {
        order.clear();
        for (int j = 0; j < ns; ++j)
            if (j != i) order.push_back(j);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            const double da = dist(seeds[a], seeds[i]);
            const double db = dist(seeds[b], seeds[i]);
            if (da != db) return da < db;
            return a < b;
        });
        cells[i] = voronoi_cell(seeds, i, order);
        if (cells[i].size() < 3)
            throw std::runtime_error("degenerate Voronoi cell (coincident seeds?)");
    }
    return cells;
}

PolygonMesh build_poly_voronoi(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<Vec2> seeds(static_cast<std::size_t>(n) * n);
    for (auto& s : seeds) {
        s.x = uniform01(rng);
        s.y = uniform01(rng);
    }

    const int lloyd_iterations = 2;
    for (int it = 0; it < lloyd_iterations; ++it) {
        auto cells = voronoi_cells(seeds);
        for (std::size_t i = 0; i < seeds.size(); ++i) {
            const double a = loop_signed_area(cells[i]);
            seeds[i] = loop_centroid(cells[i], a);
        }
    }
    auto cells = voronoi_cells(seeds);

    // Weld near-coincident vertices across cells (tolerance 1e-9).
    const double tol = 1e-9;
    std::vector<Vec2> verts;
    std::map<std::pair<long long, long long>, std::vector<int>> bins;
    auto weld = [&](Vec2 p) {
        const long long bx = static_cast<long long>(std::floor(p.x / tol));
        const long long by = static_cast<long long>(std::floor(p.y / tol));
        for (long long ix = bx - 1; ix <= bx + 1; ++ix)
            for (long long iy = by - 1; iy <= by + 1; ++iy) {
                auto it = bins.find({ix, iy});
                if (it == bins.end()) continue;
                for (int id : it->second)
                    if (dist(verts[id], p) <= tol) return id;
            }
        verts.push_back(p);
        const int id = static_cast<int>(verts.size()) - 1;
        bins[{bx, by}].push_back(id);
        return id;
    };

    std::vector<std::vector<int>> loops;
    loops.reserve(cells.size());
    for (const auto& poly : cells) {
        std::vector<int> loop;
        for (const Vec2& p : poly) loop.push_back(weld(p));
        // drop collapsed (duplicate) vertices
        std::vector<int> clean;
        const int m = static_cast<int>(loop.size());
        for (int a = 0; a < m; ++a)
            if (loop[a] != loop[(a + 1) % m]) clean.push_back(loop[a]);
        if (clean.size() < 3) throw std::runtime_error("Voronoi cell collapsed during welding");
        loops.push_back(std::move(clean));
    }
    return PolygonMesh::from_cells(std::move(verts), std::move(loops));
}

PolygonMesh build_jittered(MeshFamily base, int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<Vec2> v = grid_vertices(n);
    const double amplitude = (base == MeshFamily::TriS) ? 0.12 : 0.15;
    jitter_grid(v, n, amplitude, rng);
    if (base == MeshFamily::TriS)
        return PolygonMesh::from_cells(std::move(v), tri_cells(n));
    auto vid = [n](int i, int j) { return j * (n + 1) + i; };
    std::vector<std::vector<int>> cells;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            cells.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)});
    return PolygonMesh::from_cells(std::move(v), std::move(cells));
}

} // namespace

// ---------------------------------------------------------------------------
// PolygonMesh
// ---------------------------------------------------------------------------

PolygonMesh PolygonMesh::from_cells(std::vector<Vec2> vertices,
                                    std::vector<std::vector<int>> cells) {
    PolygonMesh mesh;
    mesh.vertices = std::move(vertices);
    mesh.cells = std::move(cells);

    const int nv = mesh.num_vertices();
    for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
        const auto& loop = mesh.cells[c];
        if (loop.size() < 3)
            throw std::invalid_argument("cell " + std::to_string(c) + " has fewer than 3 vertices");
        std::vector<Vec2> pts;
        pts.reserve(loop.size());
        for (int v : loop) {
            if (v < 0 || v >= nv)
                throw std::invalid_argument("cell " + std::to_string(c) + " references vertex " +
                                            std::to_string(v) + " out of range");
            pts.push_back(mesh.vertices[v]);
        }
        std::vector<int> sorted(loop);
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw std::invalid_argument("cell " + std::to_string(c) + " repeats a vertex");
        if (loop_signed_area(pts) <= 0.0)
            throw std::invalid_argument("cell " + std::to_string(c) + " is not counter-clockwise");
        if (!loop_is_simple(pts))
            throw std::invalid_argument("cell " + std::to_string(c) + " is self-intersecting");
    }

    std::map<std::pair<int, int>, int> edge_index;
    std::vector<int> use_count;
    std::vector<int> sign_sum;
    mesh.cell_edges.resize(mesh.cells.size());
    for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
        const auto& loop = mesh.cells[c];
        const int m = static_cast<int>(loop.size());
        for (int i = 0; i < m; ++i) {
            const int a = loop[i], b = loop[(i + 1) % m];
            const auto key = std::minmax(a, b);
            auto it = edge_index.find(key);
            int e;
            if (it == edge_index.end()) {
                e = static_cast<int>(mesh.edges.size());
                mesh.edges.push_back({key.first, key.second, false});
                use_count.push_back(0);
                sign_sum.push_back(0);
                edge_index.emplace(key, e);
            } else {
                e = it->second;
            }
            const int sign = (a < b) ? 1 : -1;
            mesh.cell_edges[c].push_back({e, sign});
            use_count[e] += 1;
            sign_sum[e] += sign;
        }
    }
    for (std::size_t e = 0; e < mesh.edges.size(); ++e) {
        if (use_count[e] == 1) {
            mesh.edges[e].boundary = true;
        } else if (use_count[e] == 2) {
            if (sign_sum[e] != 0)
                throw std::invalid_argument("interior edge " + std::to_string(e) +
                                            " used twice with the same orientation");
        } else {
            throw std::invalid_argument("edge " + std::to_string(e) + " used " +
                                        std::to_string(use_count[e]) + " times");
        }
    }
    return mesh;
}

double PolygonMesh::edge_length(int e) const {
    return dist(vertices[edges[e].v0], vertices[edges[e].v1]);
}

Vec2 PolygonMesh::edge_normal(int e) const {
    const Vec2 t = vertices[edges[e].v1] - vertices[edges[e].v0];
    return perp(t) / norm(t);
}

Vec2 PolygonMesh::edge_point(int e, double s) const {
    const Vec2& a = vertices[edges[e].v0];
    const Vec2& b = vertices[edges[e].v1];
    return a + (0.5 * (s + 1.0)) * (b - a);
}

double PolygonMesh::cell_area(int c) const {
    return loop_signed_area(cell_points(*this, c));
}

double PolygonMesh::total_area() const {
    double a = 0.0;
    for (int c = 0; c < num_cells(); ++c) a += cell_area(c);
    return a;
}

// ---------------------------------------------------------------------------
// Families
// ---------------------------------------------------------------------------

const char* family_name(MeshFamily f) {
    switch (f) {
        case MeshFamily::TriS: return "TriS";
        case MeshFamily::QuadS: return "QuadS";
        case MeshFamily::HexS: return "HexS";
        case MeshFamily::ConcQuadS: return "ConcQuadS";
        case MeshFamily::TriU: return "TriU";
        case MeshFamily::QuadU: return "QuadU";
        case MeshFamily::PolyU: return "PolyU";
        case MeshFamily::ConcHexU: return "ConcHexU";
    }
    return "?";
}

MeshFamily parse_family(const std::string& name) {
    for (MeshFamily f : all_families())
        if (name == family_name(f)) return f;
    throw std::invalid_argument("unknown mesh family: " + name);
}

std::vector<MeshFamily> all_families() {
    return {MeshFamily::TriS,  MeshFamily::QuadS, MeshFamily::HexS,  MeshFamily::ConcQuadS,
            MeshFamily::TriU,  MeshFamily::QuadU, MeshFamily::PolyU, MeshFamily::ConcHexU};
}

bool family_is_unstructured(MeshFamily f) {
    return f == MeshFamily::TriU || f == MeshFamily::QuadU || f == MeshFamily::PolyU ||
           f == MeshFamily::ConcHexU;
}

PolygonMesh generate_mesh(MeshFamily family, int n, std::uint64_t seed) {
    if (n < 2) throw std::invalid_argument("mesh resolution must be at least 2");
    PolygonMesh mesh;
    switch (family) {
        case MeshFamily::TriS: mesh = build_tri_grid(n); break;
        case MeshFamily::QuadS: mesh = build_quad_grid(n); break;
        case MeshFamily::HexS: mesh = build_hex_grid(n); break;
        case MeshFamily::ConcQuadS: mesh = build_conc_quad(n); break;
        case MeshFamily::TriU: mesh = build_jittered(MeshFamily::TriS, n, seed); break;
        case MeshFamily::QuadU: mesh = build_jittered(MeshFamily::QuadS, n, seed); break;
        case MeshFamily::PolyU: mesh = build_poly_voronoi(n, seed); break;
        case MeshFamily::ConcHexU: mesh = build_conc_hex(n, seed); break;
    }
    const double area = mesh.total_area();
    if (std::abs(area - 1.0) > 1e-12)
        throw std::runtime_error(std::string("generated ") + family_name(family) +
                                 " mesh does not cover the unit square");
    return mesh;
}

// ---------------------------------------------------------------------------
// Geometry cache and validation
// ---------------------------------------------------------------------------

std::vector<Vec2> polygon_kernel(const std::vector<Vec2>& loop) {
    double xmin = loop[0].x, xmax = loop[0].x, ymin = loop[0].y, ymax = loop[0].y;
    for (const Vec2& p : loop) {
        xmin = std::min(xmin, p.x); xmax = std::max(xmax, p.x);
        ymin = std::min(ymin, p.y); ymax = std::max(ymax, p.y);
    }
    std::vector<Vec2> region{{xmin, ymin}, {xmax, ymin}, {xmax, ymax}, {xmin, ymax}};
    const int m = static_cast<int>(loop.size());
    for (int i = 0; i < m && region.size() >= 3; ++i)
        region = clip_halfplane(region, loop[i], loop[(i + 1) % m]);
    if (region.size() < 3) region.clear();
    return region;
}

namespace {

// Best star-center found by sampling the kernel: kernel centroid plus a grid
// over its bounding box, scored by distance to the cell boundary.
std::pair<Vec2, double> kernel_search(const std::vector<Vec2>& loop,
                                      const std::vector<Vec2>& kernel) {
    Vec2 best{0, 0};
    double best_r = -1.0;
    if (kernel.empty()) return {best, 0.0};
    auto consider = [&](const Vec2& p) {
        if (!point_in_convex(kernel, p, 0.0)) return;
        const double r = dist_to_loop_boundary(loop, p);
        if (r > best_r) { best_r = r; best = p; }
    };
    const double ka = loop_signed_area(kernel);
    if (ka > 0.0) consider(loop_centroid(kernel, ka));
    double xmin = kernel[0].x, xmax = kernel[0].x, ymin = kernel[0].y, ymax = kernel[0].y;
    for (const Vec2& p : kernel) {
        xmin = std::min(xmin, p.x); xmax = std::max(xmax, p.x);
        ymin = std::min(ymin, p.y); ymax = std::max(ymax, p.y);
    }
    const int grid = 24;
    for (int j = 0; j <= grid; ++j)
        for (int i = 0; i <= grid; ++i)
            consider({xmin + (xmax - xmin) * i / grid, ymin + (ymax - ymin) * j / grid});
    if (best_r < 0.0) return {best, 0.0};
    return {best, best_r};
}

} // namespace

CellGeometry compute_cell_geometry(const PolygonMesh& mesh, int cell) {
    const auto pts = cell_points(mesh, cell);
    const int m = static_cast<int>(pts.size());
    CellGeometry geo;
    geo.area = loop_signed_area(pts);
    if (geo.area <= 0.0)
        throw std::invalid_argument("degenerate cell " + std::to_string(cell));
    geo.centroid = loop_centroid(pts, geo.area);
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j)
            geo.diameter = std::max(geo.diameter, dist(pts[i], pts[j]));

    const auto kernel = polygon_kernel(pts);
    if (point_in_convex(kernel, geo.centroid, 1e-14)) {
        geo.star_point = geo.centroid;
    } else {
        auto [p, r] = kernel_search(pts, kernel);
        if (r <= 0.0)
            throw std::runtime_error("cell " + std::to_string(cell) +
                                     " has an empty kernel; cannot build a fan");
        geo.star_point = p;
    }

    geo.fan.reserve(m);
    for (int i = 0; i < m; ++i) {
        const std::array<Vec2, 3> tri{geo.star_point, pts[i], pts[(i + 1) % m]};
        if (orient(tri[0], tri[1], tri[2]) <= 0.0)
            throw std::runtime_error("fan triangle of cell " + std::to_string(cell) +
                                     " is inverted");
        geo.fan.push_back(tri);
    }

    // midpoint rule per fan triangle, exact for quadratics
    double sm = 0.0;
    for (const auto& t : geo.fan) {
        const double ta = 0.5 * orient(t[0], t[1], t[2]);
        const Vec2 m01 = (t[0] + t[1]) * 0.5, m12 = (t[1] + t[2]) * 0.5, m02 = (t[0] + t[2]) * 0.5;
        auto r2 = [&](const Vec2& p) {
            const Vec2 d = p - geo.centroid;
            return dot(d, d);
        };
        sm += ta / 3.0 * (r2(m01) + r2(m12) + r2(m02));
    }
    geo.second_moment = sm;
    return geo;
}

ValidationReport validate_mesh(const PolygonMesh& mesh, double gamma, double c) {
    if (gamma <= 0.0 || gamma >= 1.0 || c <= 0.0 || c >= 1.0)
        throw std::invalid_argument("validate_mesh: gamma and c must lie in (0,1)");
    ValidationReport report;
    report.cells.reserve(mesh.num_cells());
    for (int ci = 0; ci < mesh.num_cells(); ++ci) {
        const auto pts = cell_points(mesh, ci);
        const int m = static_cast<int>(pts.size());
        CellValidation cv;
        double diameter = 0.0, min_dist = std::numeric_limits<double>::max();
        for (int i = 0; i < m; ++i)
            for (int j = i + 1; j < m; ++j) {
                const double d = dist(pts[i], pts[j]);
                diameter = std::max(diameter, d);
                min_dist = std::min(min_dist, d);
            }
        const auto kernel = polygon_kernel(pts);
        const double radius = kernel_search(pts, kernel).second;
        cv.star_radius_ratio = (diameter > 0.0) ? radius / diameter : 0.0;
        cv.min_vertex_dist_ratio = (diameter > 0.0) ? min_dist / diameter : 0.0;
        cv.a1_ok = cv.star_radius_ratio >= gamma;
        cv.a2_ok = cv.min_vertex_dist_ratio >= c;
        if (!cv.a1_ok) ++report.a1_violations;
        if (!cv.a2_ok) ++report.a2_violations;
        report.cells.push_back(cv);
    }
    return report;
}

double mean_edge_length(const PolygonMesh& mesh) {
    if (mesh.num_edges() == 0) throw std::invalid_argument("mesh has no edges");
    double sum = 0.0;
    for (int e = 0; e < mesh.num_edges(); ++e) sum += mesh.edge_length(e);
    return sum / mesh.num_edges();
}

// ---------------------------------------------------------------------------
// File I/O
// ---------------------------------------------------------------------------

std::string write_mesh_string(const PolygonMesh& mesh) {
    std::string out;
    out.reserve(mesh.num_vertices() * 48 + mesh.num_cells() * 24);
    char buf[64];
    out += "{\n  \"vertices\": [\n";
    for (int v = 0; v < mesh.num_vertices(); ++v) {
        std::snprintf(buf, sizeof buf, "    [%.17g, %.17g]%s\n", mesh.vertices[v].x,
                      mesh.vertices[v].y, v + 1 < mesh.num_vertices() ? "," : "");
        out += buf;
    }
    out += "  ],\n  \"cells\": [\n";
    for (int c = 0; c < mesh.num_cells(); ++c) {
        out += "    [";
        for (std::size_t i = 0; i < mesh.cells[c].size(); ++i) {
            out += std::to_string(mesh.cells[c][i]);
            if (i + 1 < mesh.cells[c].size()) out += ", ";
        }
        out += (c + 1 < mesh.num_cells()) ? "],\n" : "]\n";
    }
    out += "  ]\n}\n";
    return out;
}

void write_mesh(const PolygonMesh& mesh, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    f << write_mesh_string(mesh);
}

PolygonMesh read_mesh_string(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("malformed mesh document: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("vertices") || !doc.contains("cells"))
        throw std::invalid_argument("mesh document needs \"vertices\" and \"cells\"");
    std::vector<Vec2> vertices;
    for (const auto& v : doc["vertices"]) {
        if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
            throw std::invalid_argument("vertex entries must be [x, y] pairs");
        vertices.push_back({v[0].get<double>(), v[1].get<double>()});
    }
    std::vector<std::vector<int>> cells;
    for (const auto& c : doc["cells"]) {
        if (!c.is_array()) throw std::invalid_argument("cell entries must be arrays");
        std::vector<int> loop;
        for (const auto& v : c) {
            if (!v.is_number_integer()) throw std::invalid_argument("cell vertex ids must be integers");
            loop.push_back(v.get<int>());
        }
        cells.push_back(std::move(loop));
    }
    return PolygonMesh::from_cells(std::move(vertices), std::move(cells));
}

PolygonMesh read_mesh(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return read_mesh_string(ss.str());
}

} // namespace hrvem
