#include "hrvem/study.hpp"

#include "hrvem/assembly.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hrvem {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> parse_array(const std::string& value, const std::string& key) {
    const std::string v = trim(value);
    if (v.size() < 2 || v.front() != '[' || v.back() != ']')
        throw std::invalid_argument("config: " + key + " must be a [..] array");
    std::vector<std::string> items;
    std::string body = v.substr(1, v.size() - 2);
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) items.push_back(item);
    }
    return items;
}

double parse_double(const std::string& value, const std::string& key) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("");
        return d;
    } catch (...) {
        throw std::invalid_argument("config: bad number for " + key + ": " + value);
    }
}

long parse_int(const std::string& value, const std::string& key) {
    try {
        std::size_t pos = 0;
        const long v = std::stol(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw std::invalid_argument("config: bad integer for " + key + ": " + value);
    }
}

bool parse_bool(const std::string& value, const std::string& key) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw std::invalid_argument("config: bad boolean for " + key + ": " + value);
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt(double v, const char* format = "%.6g") {
    char buf[40];
    std::snprintf(buf, sizeof buf, format, v);
    return buf;
}

std::string rate_string(const RateFit& fit) {
    if (fit.exact) return "exact";
    return fmt(fit.slope, "%.3f");
}

// ---------------------------------------------------------------------------
// SVG log-log plot
// ---------------------------------------------------------------------------

struct PlotSeries {
    std::string label;
    std::vector<std::pair<double, double>> points;  // (h, error), error > 0
};

const char* kPalette[8] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                           "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string svg_loglog(const std::string& title, const std::string& ylabel,
                       const std::vector<PlotSeries>& series, int ref_slope) {
    std::ostringstream out;
    const int width = 640, height = 480;
    const double ml = 70, mr = 160, mt = 40, mb = 55;

    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    bool any = false;
    for (const auto& s : series)
        for (const auto& [h, e] : s.points) {
            any = true;
            xmin = std::min(xmin, std::log10(h));
            xmax = std::max(xmax, std::log10(h));
            ymin = std::min(ymin, std::log10(e));
            ymax = std::max(ymax, std::log10(e));
        }
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << width
        << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    out << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
    out << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"15\">" << title << "</text>\n";
    if (!any) {
        out << "<text x=\"" << width / 2 << "\" y=\"" << height / 2
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
            << "all values at machine precision</text>\n</svg>\n";
        return out.str();
    }
    if (xmax - xmin < 0.2) { xmin -= 0.1; xmax += 0.1; }
    if (ymax - ymin < 0.2) { ymin -= 0.1; ymax += 0.1; }
    xmin -= 0.06 * (xmax - xmin); xmax += 0.06 * (xmax - xmin);
    ymin -= 0.08 * (ymax - ymin); ymax += 0.08 * (ymax - ymin);

    const double pw = width - ml - mr, ph = height - mt - mb;
    auto px = [&](double lx) { return ml + (lx - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double ly) { return mt + ph - (ly - ymin) / (ymax - ymin) * ph; };

    out << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\"" << ph
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int d = static_cast<int>(std::ceil(xmin)); d <= static_cast<int>(std::floor(xmax)); ++d) {
        out << "<line x1=\"" << fmt(px(d)) << "\" y1=\"" << mt + ph << "\" x2=\"" << fmt(px(d))
            << "\" y2=\"" << mt << "\" stroke=\"#dddddd\"/>\n";
        out << "<text x=\"" << fmt(px(d)) << "\" y=\"" << mt + ph + 18
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">1e" << d
            << "</text>\n";
    }
    for (int d = static_cast<int>(std::ceil(ymin)); d <= static_cast<int>(std::floor(ymax)); ++d) {
        out << "<line x1=\"" << ml << "\" y1=\"" << fmt(py(d)) << "\" x2=\"" << ml + pw
            << "\" y2=\"" << fmt(py(d)) << "\" stroke=\"#dddddd\"/>\n";
        out << "<text x=\"" << ml - 6 << "\" y=\"" << fmt(py(d) + 4)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">1e" << d
            << "</text>\n";
    }
    out << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 12
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
        << "mean edge length</text>\n";
    out << "<text x=\"18\" y=\"" << mt + ph / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
        << "transform=\"rotate(-90 18 " << mt + ph / 2 << ")\">" << ylabel << "</text>\n";

    int color = 0;
    double ly_legend = mt + 10;
    for (const auto& s : series) {
        const char* c = kPalette[color % 8];
        std::ostringstream pts;
        for (const auto& [h, e] : s.points)
            pts << fmt(px(std::log10(h))) << "," << fmt(py(std::log10(e))) << " ";
        out << "<polyline points=\"" << pts.str() << "\" fill=\"none\" stroke=\"" << c
            << "\" stroke-width=\"1.6\"/>\n";
        for (const auto& [h, e] : s.points)
            out << "<circle cx=\"" << fmt(px(std::log10(h))) << "\" cy=\""
                << fmt(py(std::log10(e))) << "\" r=\"3\" fill=\"" << c << "\"><title>h="
                << fmt17(h) << " err=" << fmt17(e) << "</title></circle>\n";
        out << "<line x1=\"" << ml + pw + 12 << "\" y1=\"" << ly_legend << "\" x2=\""
            << ml + pw + 34 << "\" y2=\"" << ly_legend << "\" stroke=\"" << c
            << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << ml + pw + 40 << "\" y=\"" << ly_legend + 4
            << "\" font-family=\"sans-serif\" font-size=\"12\">" << s.label << "</text>\n";
        ly_legend += 18;
        ++color;
    }

    // reference slope triangle near the lower right of the data
    const double tx1 = xmin + 0.62 * (xmax - xmin), tx0 = tx1 - 0.18 * (xmax - xmin);
    const double ty0 = ymin + 0.10 * (ymax - ymin);
    const double ty1 = ty0 + ref_slope * (tx1 - tx0);
    out << "<polygon points=\"" << fmt(px(tx0)) << "," << fmt(py(ty0)) << " " << fmt(px(tx1))
        << "," << fmt(py(ty0)) << " " << fmt(px(tx1)) << "," << fmt(py(ty1))
        << "\" fill=\"none\" stroke=\"#555555\"/>\n";
    out << "<text x=\"" << fmt(px((tx0 + tx1) / 2)) << "\" y=\"" << fmt(py(ty0) + 14)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">1</text>\n";
    out << "<text x=\"" << fmt(px(tx1) + 6) << "\" y=\"" << fmt(py((ty0 + ty1) / 2))
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << ref_slope << "</text>\n";
    out << "</svg>\n";
    return out.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    f << content;
}

} // namespace

StudyConfig parse_config(const std::string& text) {
    StudyConfig config;
    bool have_families = false, have_levels = false;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "test") {
            if (value.size() != 1 || (value[0] != 'a' && value[0] != 'b' && value[0] != 'c'))
                throw std::invalid_argument("config: test must be a, b or c");
            config.test = value[0];
        } else if (key == "k") {
            const long k = parse_int(value, key);
            if (k < 1) throw std::invalid_argument("config: k must be >= 1");
            config.k = static_cast<int>(k);
        } else if (key == "families") {
            config.families.clear();
            for (const auto& name : parse_array(value, key))
                config.families.push_back(parse_family(name));
            have_families = true;
        } else if (key == "levels") {
            config.levels.clear();
            for (const auto& item : parse_array(value, key))
                config.levels.push_back(static_cast<int>(parse_int(item, key)));
            for (std::size_t i = 0; i < config.levels.size(); ++i) {
                if (config.levels[i] < 2)
                    throw std::invalid_argument("config: levels must be >= 2");
                // refinement must be strict so h_bar_e decreases level to level
                if (i > 0 && config.levels[i] <= config.levels[i - 1])
                    throw std::invalid_argument("config: levels must be strictly increasing");
            }
            have_levels = true;
        } else if (key == "seed") {
            config.rng_seed = static_cast<std::uint64_t>(parse_int(value, key));
        } else if (key == "out_dir") {
            config.out_dir = value;
        } else if (key == "solver_tol") {
            config.solver_tol = parse_double(value, key);
        } else if (key == "exact_threshold") {
            config.exact_threshold = parse_double(value, key);
        } else if (key == "record_timing") {
            config.record_timing = parse_bool(value, key);
        } else if (key == "dump_matrix") {
            config.dump_matrix = parse_bool(value, key);
        } else if (key == "expect_rate_min") {
            config.expect.rate_min = parse_double(value, key);
        } else if (key == "expect_exact") {
            config.expect.exact_norms = parse_array(value, key);
            for (const auto& n : config.expect.exact_norms)
                if (n != "E_sigma" && n != "E_sigma_div" && n != "E_u")
                    throw std::invalid_argument("config: unknown norm in expect_exact: " + n);
        } else {
            throw std::invalid_argument("config: unknown key: " + key);
        }
    }
    if (!have_families || config.families.empty())
        throw std::invalid_argument("config: families must be a non-empty list");
    if (!have_levels || config.levels.empty())
        throw std::invalid_argument("config: levels must be a non-empty list");
    return config;
}

StudyConfig load_config(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open config file " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

LevelResult run_case(char test, MeshFamily family, int n, int k, std::uint64_t seed,
                     double solver_tol, bool record_timing) {
    LevelResult row;
    row.n = n;
    const auto t0 = std::chrono::steady_clock::now();
    const PolygonMesh mesh = generate_mesh(family, n, seed);
    row.h_bar_e = mean_edge_length(mesh);
    const ManufacturedSolution sol = make_test(test);
    const std::function<Vec2(Vec2)> f = sol.zero_body_force ? nullptr : sol.body_force;
    const std::function<Vec2(Vec2)> g = sol.zero_boundary_data ? nullptr : sol.displacement;
    const SaddleSystem system = assemble(mesh, sol.field, k, f, g);
    row.n_dofs = system.dofs.total();
    const SolveResult solution = solve(system, solver_tol);
    if (!solution.converged && !solution.message.empty())
        throw std::runtime_error(solution.message);
    row.e_sigma = error_sigma(mesh, sol, solution.stress, k);
    row.e_sigma_div = error_sigma_div(mesh, sol, solution.stress, k);
    row.e_u = error_u(mesh, sol, solution.displacement, k);
    const Eigen::VectorXd zero_s = Eigen::VectorXd::Zero(system.dofs.n_stress);
    const Eigen::VectorXd zero_u = Eigen::VectorXd::Zero(system.dofs.n_displacement);
    row.norm_sigma = error_sigma(mesh, sol, zero_s, k);
    row.norm_sigma_div = error_sigma_div(mesh, sol, zero_s, k);
    row.norm_u = error_u(mesh, sol, zero_u, k);
    if (record_timing) {
        const auto t1 = std::chrono::steady_clock::now();
        row.seconds = std::chrono::duration<double>(t1 - t0).count();
    }
    return row;
}

std::string csv_path(const StudyConfig& config, MeshFamily family) {
    return config.out_dir + "/test_" + config.test + "_k" + std::to_string(config.k) + "_" +
           family_name(family) + ".csv";
}

std::string summary_path(const StudyConfig& config) {
    return config.out_dir + "/test_" + config.test + "_k" + std::to_string(config.k) +
           "_summary.md";
}

std::string plot_path(const StudyConfig& config, const std::string& norm) {
    return config.out_dir + "/test_" + config.test + "_k" + std::to_string(config.k) + "_" +
           norm + ".svg";
}

namespace {

RateFit family_rate(const FamilyResult& fam, double threshold,
                    double LevelResult::* err, double LevelResult::* ref) {
    std::vector<std::pair<double, double>> pts;
    double scale = 0.0;
    for (const auto& row : fam.levels) {
        if (row.failed) continue;
        scale = std::max(scale, row.*ref);
        pts.push_back({row.h_bar_e, row.*err});
    }
    const double cutoff = threshold * (1.0 + scale);
    std::vector<std::pair<double, double>> usable;
    for (const auto& p : pts)
        if (p.second > cutoff) usable.push_back(p);
    if (usable.empty()) {
        RateFit fit;
        fit.exact = true;
        return fit;
    }
    if (usable.size() < 2) {
        RateFit fit;  // single stray level: treat as exact-dominated, no slope
        fit.exact = true;
        return fit;
    }
    return fit_rate(usable, 0.0);
}

} // namespace

StudyResult run_study(const StudyConfig& config) {
    StudyResult result;
    result.config = config;
    std::filesystem::create_directories(config.out_dir);

    for (MeshFamily family : config.families) {
        FamilyResult fam;
        fam.family = family;
        const auto fam_t0 = std::chrono::steady_clock::now();
        for (int n : config.levels) {
            LevelResult row;
            try {
                row = run_case(config.test, family, n, config.k, config.rng_seed,
                               config.solver_tol, config.record_timing);
            } catch (const std::exception& e) {
                row.n = n;
                row.failed = true;
                row.error = e.what();
                result.failures.push_back(std::string(family_name(family)) + " n=" +
                                          std::to_string(n) + ": " + e.what());
            }
            fam.levels.push_back(row);
            if (config.dump_matrix && !row.failed) {
                const PolygonMesh mesh = generate_mesh(family, n, config.rng_seed);
                const ManufacturedSolution sol = make_test(config.test);
                const SaddleSystem system =
                    assemble(mesh, sol.field, config.k,
                             sol.zero_body_force ? nullptr : sol.body_force,
                             sol.zero_boundary_data ? nullptr : sol.displacement);
                write_matrix_market(system, config.out_dir + "/matrix_" +
                                                family_name(family) + "_" + std::to_string(n) +
                                                ".mtx");
            }
        }
        const auto fam_t1 = std::chrono::steady_clock::now();
        fam.family_seconds = std::chrono::duration<double>(fam_t1 - fam_t0).count();
        fam.rate_sigma = family_rate(fam, config.exact_threshold, &LevelResult::e_sigma,
                                     &LevelResult::norm_sigma);
        fam.rate_sigma_div = family_rate(fam, config.exact_threshold, &LevelResult::e_sigma_div,
                                         &LevelResult::norm_sigma_div);
        fam.rate_u = family_rate(fam, config.exact_threshold, &LevelResult::e_u,
                                 &LevelResult::norm_u);
        result.families.push_back(std::move(fam));
    }

    // CSV per family
    for (const auto& fam : result.families) {
        std::ostringstream csv;
        csv << "n,h_bar_e,E_sigma,E_sigma_div,E_u,N_dofs,seconds\r\n";
        for (const auto& row : fam.levels) {
            if (row.failed) {
                csv << row.n << ",error,error,error,error,0,0\r\n";
                continue;
            }
            csv << row.n << "," << fmt17(row.h_bar_e) << "," << fmt17(row.e_sigma) << ","
                << fmt17(row.e_sigma_div) << "," << fmt17(row.e_u) << "," << row.n_dofs << ","
                << fmt17(row.seconds) << "\r\n";
        }
        write_file(csv_path(config, fam.family), csv.str());
    }

    // Markdown summary
    {
        std::ostringstream md;
        md << "# Convergence study: test " << config.test << ", k = " << config.k << "\n\n";
        md << "Levels n = ";
        for (std::size_t i = 0; i < config.levels.size(); ++i)
            md << config.levels[i] << (i + 1 < config.levels.size() ? ", " : "\n\n");
        md << "| family | rate E_sigma | rate E_sigma_div | rate E_u |\n";
        md << "|--------|--------------|------------------|----------|\n";
        for (const auto& fam : result.families)
            md << "| " << family_name(fam.family) << " | " << rate_string(fam.rate_sigma)
               << " | " << rate_string(fam.rate_sigma_div) << " | " << rate_string(fam.rate_u)
               << " |\n";
        md << "\n";
        for (const auto& fam : result.families) {
            md << "## " << family_name(fam.family) << "\n\n";
            md << "| n | h_bar_e | E_sigma | E_sigma_div | E_u | N_dofs |\n";
            md << "|---|---------|---------|-------------|-----|--------|\n";
            for (const auto& row : fam.levels) {
                if (row.failed) {
                    md << "| " << row.n << " | error: " << row.error << " | | | | |\n";
                    continue;
                }
                md << "| " << row.n << " | " << fmt(row.h_bar_e, "%.4e") << " | "
                   << fmt(row.e_sigma, "%.4e") << " | " << fmt(row.e_sigma_div, "%.4e") << " | "
                   << fmt(row.e_u, "%.4e") << " | " << row.n_dofs << " |\n";
            }
            if (config.record_timing)
                md << "\nwall time: " << fmt(fam.family_seconds, "%.2f") << " s\n";
            md << "\n";
        }
        write_file(summary_path(config), md.str());
    }

    // SVG plots: one per norm, a curve per family, only non-exact points
    struct NormDef {
        const char* name;
        double LevelResult::* err;
        double LevelResult::* ref;
    };
    const NormDef norms[3] = {{"E_sigma", &LevelResult::e_sigma, &LevelResult::norm_sigma},
                              {"E_sigma_div", &LevelResult::e_sigma_div, &LevelResult::norm_sigma_div},
                              {"E_u", &LevelResult::e_u, &LevelResult::norm_u}};
    for (const auto& nd : norms) {
        std::vector<PlotSeries> series;
        for (const auto& fam : result.families) {
            PlotSeries s;
            s.label = family_name(fam.family);
            for (const auto& row : fam.levels) {
                if (row.failed) continue;
                const double cutoff = config.exact_threshold * (1.0 + row.*(nd.ref));
                if (row.*(nd.err) > cutoff) s.points.push_back({row.h_bar_e, row.*(nd.err)});
            }
            if (!s.points.empty()) series.push_back(std::move(s));
        }
        const std::string title = std::string(nd.name) + ", test " + config.test + ", k = " +
                                  std::to_string(config.k);
        write_file(plot_path(config, nd.name), svg_loglog(title, nd.name, series, config.k + 1));
    }

    // expectations
    auto check_rate = [&](const FamilyResult& fam, const RateFit& fit, const char* norm) {
        if (!config.expect.rate_min || fit.exact) return;
        if (fit.slope < *config.expect.rate_min) {
            result.expectations_ok = false;
            result.failures.push_back(std::string(family_name(fam.family)) + " " + norm +
                                      " rate " + rate_string(fit) + " below " +
                                      fmt(*config.expect.rate_min, "%.2f"));
        }
    };
    for (const auto& fam : result.families) {
        for (const auto& row : fam.levels)
            if (row.failed) result.expectations_ok = false;
        check_rate(fam, fam.rate_sigma, "E_sigma");
        check_rate(fam, fam.rate_sigma_div, "E_sigma_div");
        check_rate(fam, fam.rate_u, "E_u");
        for (const auto& norm : config.expect.exact_norms) {
            const RateFit& fit = (norm == "E_sigma") ? fam.rate_sigma
                                : (norm == "E_sigma_div") ? fam.rate_sigma_div
                                                          : fam.rate_u;
            if (!fit.exact) {
                result.expectations_ok = false;
                result.failures.push_back(std::string(family_name(fam.family)) + " " + norm +
                                          " expected exact but has rate " + rate_string(fit));
            }
        }
    }
    return result;
}

} // namespace hrvem
