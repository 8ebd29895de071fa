// Acceptance suite: convergence rates, exactness cases and structural
// properties of the mixed virtual element solver. Prints one PASS/FAIL line
// per criterion; the exit code is the number of failures.

#include "hrvem/analysis.hpp"
#include "hrvem/assembly.hpp"
#include "hrvem/element.hpp"
#include "hrvem/study.hpp"
#include "hrvem/verification.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

using namespace hrvem;

namespace {

constexpr std::uint64_t kSeed = 42;
const std::vector<MeshFamily> kRateFamilies{MeshFamily::QuadS, MeshFamily::TriS,
                                            MeshFamily::PolyU, MeshFamily::ConcQuadS};

struct Series {
    std::vector<LevelResult> rows;
    double seconds = 0.0;
};

using SeriesKey = std::tuple<char, int, MeshFamily>;  // test, k, family

std::map<SeriesKey, Series> g_series;

const Series& run_series(char test, int k, MeshFamily family, const std::vector<int>& levels) {
    const SeriesKey key{test, k, family};
    auto it = g_series.find(key);
    if (it != g_series.end()) return it->second;
    Series series;
    const auto t0 = std::chrono::steady_clock::now();
    for (int n : levels)
        series.rows.push_back(run_case(test, family, n, k, kSeed, 1e-10));
    const auto t1 = std::chrono::steady_clock::now();
    series.seconds = std::chrono::duration<double>(t1 - t0).count();
    return g_series.emplace(key, std::move(series)).first->second;
}

RateFit series_rate(const Series& series, double LevelResult::* err,
                    double LevelResult::* ref) {
    double scale = 0.0;
    std::vector<std::pair<double, double>> pts;
    for (const auto& row : series.rows) {
        scale = std::max(scale, row.*ref);
        pts.push_back({row.h_bar_e, row.*err});
    }
    return fit_rate(pts, 1e-10 * (1.0 + scale));
}

struct Criterion {
    int id;
    bool pass;
    std::string detail;
};

std::vector<Criterion> g_results;

void report(int id, bool pass, const std::string& detail) {
    g_results.push_back({id, pass, detail});
    std::printf("%s criterion %d: %s\n", pass ? "PASS" : "FAIL", id, detail.c_str());
    std::fflush(stdout);
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

bool rate_ok(const RateFit& fit, double min_slope) {
    return fit.exact || fit.slope >= min_slope;
}

std::string rate_str(const RateFit& fit) {
    return fit.exact ? "exact" : fmt(fit.slope);
}

// criteria 1 and 2: fitted slopes over the required families
void criterion_rates(int id, int k, const std::vector<int>& levels, double min_slope) {
    bool pass = true;
    double worst = 1e9;
    double slowest = 0.0;
    std::ostringstream detail;
    for (char test : {'a', 'b', 'c'}) {
        for (MeshFamily family : kRateFamilies) {
            const Series& s = run_series(test, k, family, levels);
            slowest = std::max(slowest, s.seconds);
            const RateFit rs = series_rate(s, &LevelResult::e_sigma, &LevelResult::norm_sigma);
            const RateFit ru = series_rate(s, &LevelResult::e_u, &LevelResult::norm_u);
            bool ok = rate_ok(rs, min_slope) && rate_ok(ru, min_slope);
            if (!rs.exact) worst = std::min(worst, rs.slope);
            if (!ru.exact) worst = std::min(worst, ru.slope);
            if (test != 'a') {
                const RateFit rd =
                    series_rate(s, &LevelResult::e_sigma_div, &LevelResult::norm_sigma_div);
                ok = ok && rate_ok(rd, min_slope);
                if (!rd.exact) worst = std::min(worst, rd.slope);
                if (!rate_ok(rd, min_slope))
                    detail << " [" << test << "/" << family_name(family)
                           << " E_sigma_div=" << rate_str(rd) << "]";
            }
            if (!rate_ok(rs, min_slope) || !rate_ok(ru, min_slope))
                detail << " [" << test << "/" << family_name(family) << " E_sigma=" << rate_str(rs)
                       << " E_u=" << rate_str(ru) << "]";
            pass = pass && ok && s.seconds < 120.0;
        }
    }
    std::ostringstream msg;
    msg << "k=" << k << " rates over {a,b,c} x {QuadS,TriS,PolyU,ConcQuadS}: min slope " << fmt(worst)
        << " (need >= " << min_slope << "), slowest series " << fmt(slowest) << " s (budget 120)"
        << detail.str();
    report(id, pass, msg.str());
}

void criterion_exact_divergence() {
    bool pass = true;
    double worst = 0.0;
    for (MeshFamily family : all_families()) {
        const bool rate_family =
            std::find(kRateFamilies.begin(), kRateFamilies.end(), family) != kRateFamilies.end();
        const std::vector<int> levels = rate_family ? std::vector<int>{4, 8, 16, 32}
                                                    : std::vector<int>{4, 8};
        const Series& s = run_series('a', 1, family, levels);
        for (const auto& row : s.rows) {
            worst = std::max(worst, row.e_sigma_div);
            pass = pass && row.e_sigma_div <= 1e-10;  // f = 0, so 1e-10 * (1 + ||f||) = 1e-10
        }
    }
    report(3, pass,
           "test a, k=1: max E_sigma_div " + fmt(worst) + " over all 8 families (need <= 1e-10)");
}

void criterion_exact_k2() {
    bool pass = true;
    double worst = 0.0;
    for (MeshFamily family : all_families()) {
        const bool rate_family =
            std::find(kRateFamilies.begin(), kRateFamilies.end(), family) != kRateFamilies.end();
        const std::vector<int> levels = rate_family ? std::vector<int>{4, 8, 16}
                                                    : std::vector<int>{4, 8};
        const Series& s = run_series('a', 2, family, levels);
        for (const auto& row : s.rows) {
            const double rel_sigma = row.e_sigma / (1.0 + row.norm_sigma);
            const double rel_div = row.e_sigma_div / (1.0 + row.norm_sigma_div);
            worst = std::max({worst, rel_sigma, rel_div});
            pass = pass && rel_sigma <= 1e-9 && rel_div <= 1e-9;
        }
    }
    report(4, pass,
           "test a, k=2: max relative E_sigma / E_sigma_div " + fmt(worst) +
               " over all 8 families (need <= 1e-9)");
}

void criterion_patch() {
    bool pass = true;
    double worst_s = 0.0, worst_u = 0.0;
    for (MeshFamily family : all_families()) {
        const PolygonMesh mesh = generate_mesh(family, 4, kSeed);
        const auto [stress_err, u_err] = patch_test(mesh, 1);
        worst_s = std::max(worst_s, stress_err);
        worst_u = std::max(worst_u, u_err);
        pass = pass && stress_err <= 1e-9 && u_err <= 1e-10;
    }
    report(5, pass,
           "patch test, k=1, all families: stress DOF err " + fmt(worst_s) +
               " (<= 1e-9), displacement L2 err " + fmt(worst_u) + " (<= 1e-10)");
}

void criterion_commuting() {
    const PolygonMesh mesh = generate_mesh(MeshFamily::PolyU, 8, kSeed);
    const ManufacturedSolution sol = make_test('b');
    const double d1 = check_commuting_diagram(mesh, sol, 1);
    const double d2 = check_commuting_diagram(mesh, sol, 2);
    const bool pass = d1 <= 1e-10 && d2 <= 1e-10;
    report(6, pass,
           "commuting diagram, test b on PolyU n=8: discrepancy k=1 " + fmt(d1) + ", k=2 " +
               fmt(d2) + " (need <= 1e-10)");
}

void criterion_structural() {
    bool pass = true;
    double min_eig = 1e300, min_se = 1e300, min_sv = 1e300;
    const ElasticityField field = plane_strain_isotropic(1.0, 1.0);
    for (MeshFamily family : all_families()) {
        const PolygonMesh mesh = generate_mesh(family, 4, kSeed);
        for (int k : {1, 2}) {
            for (int c = 0; c < mesh.num_cells(); ++c) {
                const Element el(mesh, c, k);
                const int ne = el.num_edges();
                if (el.num_stress_dofs() != 2 * (k + 1) * ne + (k + 1) * (k + 2) - 3 ||
                    el.num_displacement_dofs() != (k + 1) * (k + 2))
                    pass = false;
            }
            min_eig = std::min(min_eig, min_ah_eigenvalue(mesh, field, k));
            min_se = std::min(min_se, min_se_eigenvalue(mesh, field, k));
        }
        const PolygonMesh small = generate_mesh(family, 2, kSeed);
        for (int k : {1, 2}) min_sv = std::min(min_sv, min_b_singular_value(small, k));
    }
    pass = pass && min_eig > 0.0 && min_se > -1e-12 && min_sv > 1e-12;
    report(7, pass,
           "structural: DOF formulas hold on every cell; min Ah eigenvalue " + fmt(min_eig) +
               " (> 0), min Se eigenvalue " + fmt(min_se) + " (>= -1e-12), min B singular value " +
               fmt(min_sv) + " (> 1e-12)");
}

void criterion_projector() {
    bool pass = true;
    double worst = 0.0;
    for (MeshFamily family : all_families()) {
        const PolygonMesh mesh = generate_mesh(family, 2, kSeed);
        for (int k : {1, 2}) {
            // 20 random fields per family; the mesh has several cells, spread the draws
            const double err = projector_consistency(mesh, k, 20 / mesh.num_cells() + 1, kSeed + k);
            worst = std::max(worst, err);
            pass = pass && err <= 1e-10;
        }
    }
    report(8, pass,
           "projector consistency on random P_{k+1} fields: worst relative strain error " +
               fmt(worst) + " (need <= 1e-10)");
}

void criterion_determinism() {
    StudyConfig config;
    config.test = 'a';
    config.k = 1;
    config.families = {MeshFamily::QuadS, MeshFamily::PolyU};
    config.levels = {4, 8};
    config.rng_seed = kSeed;
    config.out_dir = "acceptance_determinism";
    auto slurp = [](const std::string& path) {
        std::ifstream f(path, std::ios::binary);
        std::stringstream ss;
        ss << f.rdbuf();
        return ss.str();
    };
    run_study(config);
    const std::string first_quad = slurp(csv_path(config, MeshFamily::QuadS));
    const std::string first_poly = slurp(csv_path(config, MeshFamily::PolyU));
    run_study(config);
    const bool pass = !first_quad.empty() && first_quad == slurp(csv_path(config, MeshFamily::QuadS)) &&
                      first_poly == slurp(csv_path(config, MeshFamily::PolyU));
    std::filesystem::remove_all(config.out_dir);
    report(9, pass, std::string("repeated runs produce byte-identical CSVs: ") +
                        (pass ? "yes" : "no"));
}

} // namespace

int main() {
    std::printf("acceptance suite (seed %llu)\n", static_cast<unsigned long long>(kSeed));
    criterion_rates(1, 1, {4, 8, 16, 32}, 1.8);
    criterion_rates(2, 2, {4, 8, 16}, 2.7);
    criterion_exact_divergence();
    criterion_exact_k2();
    criterion_patch();
    criterion_commuting();
    criterion_structural();
    criterion_projector();
    criterion_determinism();

    int failures = 0;
    for (const auto& r : g_results) failures += r.pass ? 0 : 1;
    std::printf("%d/%zu criteria passed\n", static_cast<int>(g_results.size()) - failures,
                g_results.size());
    return failures;
}
