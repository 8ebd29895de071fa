#include "hrvem/analysis.hpp"
#include "hrvem/mesh.hpp"
#include "hrvem/study.hpp"
#include "hrvem/verification.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace hrvem;

namespace {

py::dict level_to_dict(const LevelResult& row) {
    py::dict d;
    d["n"] = row.n;
    d["h_bar_e"] = row.h_bar_e;
    d["E_sigma"] = row.e_sigma;
    d["E_sigma_div"] = row.e_sigma_div;
    d["E_u"] = row.e_u;
    d["norm_sigma"] = row.norm_sigma;
    d["norm_sigma_div"] = row.norm_sigma_div;
    d["norm_u"] = row.norm_u;
    d["n_dofs"] = row.n_dofs;
    return d;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Mixed stress-displacement virtual element solver on polygonal meshes";

    py::enum_<MeshFamily>(m, "MeshFamily")
        .value("TriS", MeshFamily::TriS)
        .value("QuadS", MeshFamily::QuadS)
        .value("HexS", MeshFamily::HexS)
        .value("ConcQuadS", MeshFamily::ConcQuadS)
        .value("TriU", MeshFamily::TriU)
        .value("QuadU", MeshFamily::QuadU)
        .value("PolyU", MeshFamily::PolyU)
        .value("ConcHexU", MeshFamily::ConcHexU);

    py::class_<PolygonMesh>(m, "PolygonMesh")
        .def_property_readonly("num_vertices", &PolygonMesh::num_vertices)
        .def_property_readonly("num_edges", &PolygonMesh::num_edges)
        .def_property_readonly("num_cells", &PolygonMesh::num_cells)
        .def_property_readonly("vertices",
                               [](const PolygonMesh& mesh) {
                                   py::list out;
                                   for (const Vec2& v : mesh.vertices)
                                       out.append(py::make_tuple(v.x, v.y));
                                   return out;
                               })
        .def_property_readonly("cells",
                               [](const PolygonMesh& mesh) { return mesh.cells; })
        .def("total_area", &PolygonMesh::total_area)
        .def("mean_edge_length", [](const PolygonMesh& mesh) { return mean_edge_length(mesh); })
        .def("save", [](const PolygonMesh& mesh, const std::string& path) {
            write_mesh(mesh, path);
        })
        .def_static("load", [](const std::string& path) { return read_mesh(path); });

    m.def("generate_mesh", &generate_mesh, py::arg("family"), py::arg("n"),
          py::arg("seed") = 0,
          "Mesh of the unit square; unstructured families are deterministic in the seed.");

    m.def("parse_family", &parse_family, py::arg("name"));

    m.def(
        "validate_mesh",
        [](const PolygonMesh& mesh, double gamma, double c) {
            const ValidationReport report = validate_mesh(mesh, gamma, c);
            py::dict d;
            d["a1_violations"] = report.a1_violations;
            d["a2_violations"] = report.a2_violations;
            d["all_ok"] = report.all_ok();
            py::list ratios;
            for (const auto& cell : report.cells)
                ratios.append(py::make_tuple(cell.star_radius_ratio, cell.min_vertex_dist_ratio));
            d["cell_ratios"] = ratios;
            return d;
        },
        py::arg("mesh"), py::arg("gamma") = 0.1, py::arg("c") = 0.05,
        "Shape-assumption diagnostics (star-shapedness and vertex spacing).");

    m.def(
        "solve_case",
        [](const std::string& test, MeshFamily family, int n, int k, std::uint64_t seed,
           double solver_tol) {
            if (test.size() != 1) throw std::invalid_argument("test must be 'a', 'b' or 'c'");
            return level_to_dict(run_case(test[0], family, n, k, seed, solver_tol));
        },
        py::arg("test"), py::arg("family"), py::arg("n"), py::arg("k"), py::arg("seed") = 0,
        py::arg("solver_tol") = 1e-10,
        "Generate, assemble, solve and return the three error norms.");

    m.def(
        "fit_rate",
        [](const std::vector<std::pair<double, double>>& levels, double exact_threshold) {
            const RateFit fit = fit_rate(levels, exact_threshold);
            py::dict d;
            d["exact"] = fit.exact;
            d["slope"] = fit.slope;
            d["levels_used"] = fit.levels_used;
            return d;
        },
        py::arg("levels"), py::arg("exact_threshold") = 1e-12,
        "Least-squares slope of log(err) vs log(h) over the finest levels.");

    m.def(
        "check_commuting_diagram",
        [](const PolygonMesh& mesh, const std::string& test, int k) {
            if (test.size() != 1) throw std::invalid_argument("test must be 'a', 'b' or 'c'");
            return check_commuting_diagram(mesh, make_test(test[0]), k);
        },
        py::arg("mesh"), py::arg("test"), py::arg("k"));

    m.def(
        "run_study",
        [](const std::string& config_path) {
            const StudyResult result = run_study(load_config(config_path));
            py::dict d;
            d["expectations_ok"] = result.expectations_ok;
            d["failures"] = result.failures;
            py::dict families;
            for (const auto& fam : result.families) {
                py::dict fd;
                py::list rows;
                for (const auto& row : fam.levels) rows.append(level_to_dict(row));
                fd["levels"] = rows;
                fd["rate_E_sigma"] = fam.rate_sigma.exact
                                         ? py::object(py::str("exact"))
                                         : py::object(py::float_(fam.rate_sigma.slope));
                fd["rate_E_sigma_div"] =
                    fam.rate_sigma_div.exact ? py::object(py::str("exact"))
                                             : py::object(py::float_(fam.rate_sigma_div.slope));
                fd["rate_E_u"] = fam.rate_u.exact ? py::object(py::str("exact"))
                                                  : py::object(py::float_(fam.rate_u.slope));
                families[family_name(fam.family)] = fd;
            }
            d["families"] = families;
            return d;
        },
        py::arg("config_path"),
        "Run a convergence study from a config file; writes CSV/Markdown/SVG outputs.");

    m.def(
        "patch_test",
        [](const PolygonMesh& mesh, int k) {
            const auto [stress_err, u_err] = patch_test(mesh, k);
            return py::make_tuple(stress_err, u_err);
        },
        py::arg("mesh"), py::arg("k") = 1,
        "Reproduction error for a linear displacement state with constant material.");
}
