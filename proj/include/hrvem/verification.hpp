#pragma once

#include "hrvem/analysis.hpp"
#include "hrvem/mesh.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace hrvem {

struct CheckResult {
    std::string name;
    bool pass = false;
    double value = 0.0;  // the measured quantity (error, eigenvalue, ...)
    std::string detail;
};

/// Patch test on one mesh: linear displacement data with constant C must be
/// reproduced. Returns (stress DOF relative error, displacement L2 error).
std::pair<double, double> patch_test(const PolygonMesh& mesh, int k);

/// Projector range reproduction: DOF extraction of C eps(p), p random in
/// P_{k+1}(E)^2, followed by the projector, must return eps(p). Returns the
/// worst relative strain-coefficient error over `samples` draws per cell of
/// the mesh.
double projector_consistency(const PolygonMesh& mesh, int k, int samples, std::uint64_t seed);

/// Smallest eigenvalue of the local stress matrix over all cells.
double min_ah_eigenvalue(const PolygonMesh& mesh, const ElasticityField& field, int k);

/// Smallest eigenvalue of the stabilization matrix over all cells.
double min_se_eigenvalue(const PolygonMesh& mesh, const ElasticityField& field, int k);

/// Smallest singular value of the assembled divergence block (dense; meant
/// for desk-scale meshes).
double min_b_singular_value(const PolygonMesh& mesh, int k);

/// Full property suite behind the CLI `check` subcommand: DOF counts,
/// SPD/PSD checks, patch tests, projector consistency, commuting diagram
/// and divergence-block rank on small meshes of every family.
std::vector<CheckResult> run_property_checks(int k, std::uint64_t seed);

} // namespace hrvem
