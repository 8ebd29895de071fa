#pragma once

#include "hrvem/geometry.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace hrvem {

/// Undirected mesh edge. Endpoints are stored with v0 < v1; the global
/// tangent runs from v0 to v1 and the global normal is the tangent rotated
/// clockwise, so every cell sharing the edge agrees on both.
struct Edge {
    int v0 = -1;
    int v1 = -1;
    bool boundary = false;
};

/// Reference from a cell to one of its edges. sign = +1 when the
/// cell-local outward normal coincides with the global edge normal.
struct EdgeUse {
    int edge = -1;
    int sign = 0;
};

class PolygonMesh {
public:
    std::vector<Vec2> vertices;
    std::vector<std::vector<int>> cells;       // CCW vertex loops
    std::vector<Edge> edges;                   // derived from cells
    std::vector<std::vector<EdgeUse>> cell_edges;  // cell_edges[c][i] joins loop[i] -> loop[i+1]

    /// Builds connectivity from vertex loops and verifies the structural
    /// invariants: simple CCW loops, interior edges shared by exactly two
    /// cells with opposite signs, boundary edges by exactly one.
    /// Throws std::invalid_argument on violation.
    static PolygonMesh from_cells(std::vector<Vec2> vertices,
                                  std::vector<std::vector<int>> cells);

    int num_vertices() const { return static_cast<int>(vertices.size()); }
    int num_edges() const { return static_cast<int>(edges.size()); }
    int num_cells() const { return static_cast<int>(cells.size()); }

    double edge_length(int e) const;
    Vec2 edge_normal(int e) const;   // unit global normal
    Vec2 edge_point(int e, double s) const;  // s in [-1,1], s=-1 at v0

    double cell_area(int c) const;   // shoelace
    double total_area() const;
};

enum class MeshFamily { TriS, QuadS, HexS, ConcQuadS, TriU, QuadU, PolyU, ConcHexU };

const char* family_name(MeshFamily f);
MeshFamily parse_family(const std::string& name);  // throws on unknown name
std::vector<MeshFamily> all_families();
bool family_is_unstructured(MeshFamily f);

/// Meshes of the unit square [0,1]^2. Structured families ignore the seed;
/// unstructured ones are deterministic functions of (family, n, seed).
PolygonMesh generate_mesh(MeshFamily family, int n, std::uint64_t seed = 0);

struct CellGeometry {
    Vec2 centroid;
    double area = 0.0;
    double diameter = 0.0;        // max pairwise vertex distance
    double second_moment = 0.0;   // integral of |x - centroid|^2
    Vec2 star_point;              // fan apex: centroid if inside the kernel
    std::vector<std::array<Vec2, 3>> fan;  // (star_point, v_i, v_{i+1})
};

CellGeometry compute_cell_geometry(const PolygonMesh& mesh, int cell);

struct CellValidation {
    double star_radius_ratio = 0.0;     // best kernel ball radius / h_E
    double min_vertex_dist_ratio = 0.0; // min pairwise vertex distance / h_E
    bool a1_ok = false;
    bool a2_ok = false;
};

struct ValidationReport {
    std::vector<CellValidation> cells;
    int a1_violations = 0;
    int a2_violations = 0;
    bool all_ok() const { return a1_violations == 0 && a2_violations == 0; }
};

/// Diagnostic check of the shape assumptions: star-shapedness w.r.t. a ball
/// of radius >= gamma*h_E and vertex separation >= c*h_E. Reports only,
/// never throws.
ValidationReport validate_mesh(const PolygonMesh& mesh, double gamma, double c);

double mean_edge_length(const PolygonMesh& mesh);

/// Mesh file I/O. UTF-8 JSON document {"vertices": [[x,y],...],
/// "cells": [[v0,v1,...],...]} with 0-based CCW loops; coordinates are
/// written with 17 significant digits so a round trip is exact.
PolygonMesh read_mesh(const std::string& path);
PolygonMesh read_mesh_string(const std::string& text);
void write_mesh(const PolygonMesh& mesh, const std::string& path);
std::string write_mesh_string(const PolygonMesh& mesh);

// Kernel of a simple polygon (intersection of edge half-planes), used for
// star-center searches. Empty result means not star-shaped.
std::vector<Vec2> polygon_kernel(const std::vector<Vec2>& loop);

} // namespace hrvem
