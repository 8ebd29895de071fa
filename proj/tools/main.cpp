#include "hrvem/mesh.hpp"
#include "hrvem/study.hpp"
#include "hrvem/verification.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <string>

namespace {

int cmd_run(const std::string& config_path, const std::string& test_override,
            int k_override, const std::vector<int>& levels_override,
            const std::string& out_dir_override, long seed_override, double tol_override) {
    hrvem::StudyConfig config = hrvem::load_config(config_path);
    if (!test_override.empty()) {
        if (test_override.size() != 1) throw std::invalid_argument("--test must be a, b or c");
        config.test = test_override[0];
    }
    if (k_override > 0) config.k = k_override;
    if (!levels_override.empty()) config.levels = levels_override;
    if (!out_dir_override.empty()) config.out_dir = out_dir_override;
    if (seed_override >= 0) config.rng_seed = static_cast<std::uint64_t>(seed_override);
    if (tol_override > 0) config.solver_tol = tol_override;

    const hrvem::StudyResult result = hrvem::run_study(config);
    for (const auto& fam : result.families) {
        std::printf("%-10s rate E_sigma=%s  E_sigma_div=%s  E_u=%s  (%.1f s)\n",
                    hrvem::family_name(fam.family),
                    fam.rate_sigma.exact ? "exact" : std::to_string(fam.rate_sigma.slope).c_str(),
                    fam.rate_sigma_div.exact ? "exact"
                                             : std::to_string(fam.rate_sigma_div.slope).c_str(),
                    fam.rate_u.exact ? "exact" : std::to_string(fam.rate_u.slope).c_str(),
                    fam.family_seconds);
    }
    std::printf("outputs written to %s\n", config.out_dir.c_str());
    if (!result.expectations_ok) {
        for (const auto& f : result.failures) std::printf("FAILED expectation: %s\n", f.c_str());
        return 1;
    }
    return 0;
}

int cmd_mesh(const std::string& family_name, int n, long seed, const std::string& out) {
    const hrvem::MeshFamily family = hrvem::parse_family(family_name);
    const hrvem::PolygonMesh mesh =
        hrvem::generate_mesh(family, n, seed >= 0 ? static_cast<std::uint64_t>(seed) : 0);
    hrvem::write_mesh(mesh, out);
    std::printf("%s n=%d: %d vertices, %d edges, %d cells -> %s\n", family_name.c_str(), n,
                mesh.num_vertices(), mesh.num_edges(), mesh.num_cells(), out.c_str());
    const auto report = hrvem::validate_mesh(mesh, 0.1, 0.05);
    if (!report.all_ok())
        std::printf("note: %d cells below the A1 ball ratio, %d below the A2 spacing ratio\n",
                    report.a1_violations, report.a2_violations);
    return 0;
}

int cmd_check(int k, long seed) {
    const auto checks = hrvem::run_property_checks(k, seed >= 0 ? seed : 0);
    bool all = true;
    for (const auto& c : checks) {
        std::printf("%-34s %s  (%.3e)%s\n", c.name.c_str(), c.pass ? "PASS" : "FAIL", c.value,
                    c.detail.empty() ? "" : ("  " + c.detail).c_str());
        all = all && c.pass;
    }
    std::printf("%s\n", all ? "all checks passed" : "CHECKS FAILED");
    return all ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mixed stress-displacement virtual element solver on polygonal meshes"};
    app.require_subcommand(1);

    std::string config_path, test_override, out_dir_override;
    int k_override = 0;
    std::vector<int> levels_override;
    long seed = -1;
    double tol = 0.0;

    auto* run = app.add_subcommand("run", "run a convergence study from a config file");
    run->add_option("config", config_path, "study configuration file")->required();
    run->add_option("--test", test_override, "override the test label (a, b or c)");
    run->add_option("--k", k_override, "override the polynomial order");
    run->add_option("--levels", levels_override, "override the refinement levels");
    run->add_option("--out-dir", out_dir_override, "override the output directory");
    run->add_option("--seed", seed, "override the mesh generator seed");
    run->add_option("--tol", tol, "override the solver residual tolerance");

    std::string mesh_family = "QuadS", mesh_out = "mesh.json";
    int mesh_n = 4;
    long mesh_seed = -1;
    auto* mesh = app.add_subcommand("mesh", "generate a mesh file");
    mesh->add_option("family", mesh_family, "mesh family")->required();
    mesh->add_option("n", mesh_n, "resolution")->required();
    mesh->add_option("--seed", mesh_seed, "generator seed (unstructured families)");
    mesh->add_option("--out", mesh_out, "output path");

    int check_k = 1;
    long check_seed = -1;
    auto* check = app.add_subcommand("check", "run the property suite");
    check->add_option("--k", check_k, "polynomial order");
    check->add_option("--seed", check_seed, "mesh generator seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (run->parsed())
            return cmd_run(config_path, test_override, k_override, levels_override,
                           out_dir_override, seed, tol);
        if (mesh->parsed()) return cmd_mesh(mesh_family, mesh_n, mesh_seed, mesh_out);
        if (check->parsed()) return cmd_check(check_k, check_seed);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 2;
}
