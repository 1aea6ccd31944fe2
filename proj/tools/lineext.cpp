// Command-line driver: geometry emission, batch extension, range testing,
// sample-table fitting, and the acceptance checks.
#include <algorithm>
#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lineext/extend.hpp"
#include "lineext/io.hpp"
#include "lineext/rangetest.hpp"
#include "lineext/verify.hpp"

using namespace lineext;

namespace {

struct FieldArgs {
    std::string truth;
    std::string samples;
    int fit_degree = 2;
    double corrupt = 0.0;

    void attach(CLI::App* cmd) {
        cmd->add_option("--truth", truth,
                        "ground truth spec: poly:j,k,re,im;... or exp:re_a,im_a,re_b,im_b");
        cmd->add_option("--samples", samples,
                        "per-line sample table CSV (theta,t,re_f,im_f)");
        cmd->add_option("--fit-degree", fit_degree,
                        "polynomial degree for --samples ingestion");
        cmd->add_option("--corrupt", corrupt,
                        "wrap the field with an additive cos(theta) perturbation");
    }
};

std::vector<LineSamples> read_sample_table(const std::string& path) {
    std::vector<LineSamples> lines;
    std::map<double, std::size_t> index;
    bool first = true;
    for (const auto& row : read_csv(path)) {
        if (first) {
            first = false;
            bool numeric = true;
            try {
                (void)parse_double(row.at(0));
            } catch (const ParseError&) {
                numeric = false;
            }
            if (!numeric) continue; // header row
        }
        if (row.size() != 4)
            throw ParseError("sample table rows need theta,t,re_f,im_f");
        const double theta = parse_double(row[0]);
        auto it = index.find(theta);
        if (it == index.end()) {
            index.emplace(theta, lines.size());
            lines.push_back({theta, {}, {}});
            it = index.find(theta);
        }
        lines[it->second].t.push_back(parse_double(row[1]));
        lines[it->second].value.emplace_back(parse_double(row[2]), parse_double(row[3]));
    }
    if (lines.empty()) throw ParseError("sample table \"" + path + "\" is empty");
    return lines;
}

LineField make_field(const SupportCurve& curve, const FieldArgs& args) {
    std::optional<LineField> base;
    if (!args.truth.empty() && !args.samples.empty())
        throw ParseError("give either --truth or --samples, not both");
    if (!args.truth.empty())
        base = from_ground_truth(curve, GroundTruth::parse(args.truth));
    else if (!args.samples.empty())
        base = fit_from_real_samples(curve, read_sample_table(args.samples),
                                     args.fit_degree)
                   .field;
    else
        throw ParseError("a field spec is required: --truth or --samples");
    if (args.corrupt != 0.0) return corrupt(*base, args.corrupt);
    return *base;
}

void write_loop_rows(std::ofstream& out, const Loop& loop, const std::string& tag) {
    for (const auto& s : loop.samples)
        out << fmt17(s.theta) << "," << fmt17(s.pos.real()) << ","
            << fmt17(s.pos.imag()) << "," << fmt17(s.dpos.real()) << ","
            << fmt17(s.dpos.imag()) << "," << tag << "\n";
}

const char* region_name(Region r) {
    switch (r) {
        case Region::OmegaPlus: return "OmegaPlus";
        case Region::OmegaMinus: return "OmegaMinus";
        case Region::OmegaZero: return "OmegaZero";
        case Region::OnM: return "OnM";
    }
    return "unknown";
}

int run_geometry(const std::string& curve_spec, const std::string& z_arg,
                 const std::string& w_arg, const std::string& c_arg,
                 const std::string& out_path, const std::string& raster_z,
                 int raster_grid, double raster_extent,
                 const std::string& raster_out) {
    const SupportCurve curve = SupportCurve::parse(curve_spec);
    const int targets = !z_arg.empty() + !w_arg.empty() + !c_arg.empty();
    if (targets > 1)
        throw ParseError("give exactly one of --z, --w, --c per run");
    if (targets == 0 && raster_z.empty())
        throw ParseError("nothing to emit: give --z, --w, --c or --raster-z");
    if (targets == 1 && out_path.empty())
        throw ParseError("--out is required with --z/--w/--c");

    EmittedFiles files;
    if (!z_arg.empty() || !w_arg.empty()) {
        const bool zslice = !w_arg.empty();
        const Complex fix = parse_complex(zslice ? w_arg : z_arg);
        const GammaSlice slice = zslice ? z_slice(curve, fix) : build_gamma(curve, fix);
        std::ofstream out = files.open(out_path);
        out << "theta,re,im,d_re,d_im,loop\n";
        if (slice.split()) {
            write_loop_rows(out, slice.inner(), "inner");
            write_loop_rows(out, slice.outer(), "outer");
        } else {
            write_loop_rows(out, slice.full(), "full");
        }
    } else if (!c_arg.empty()) {
        const KSlice k = k_slice(curve, parse_complex(c_arg));
        std::ofstream out = files.open(out_path);
        out << "theta,re,im,d_re,d_im,loop\n";
        write_loop_rows(out, k.loops[0], "branch+");
        write_loop_rows(out, k.loops[1], "branch-");
    }

    if (!raster_z.empty()) {
        if (raster_out.empty()) throw ParseError("--raster-out is required with --raster-z");
        const Complex z = parse_complex(raster_z);
        const GammaSlice slice = build_gamma(curve, z);
        std::ofstream out = files.open(raster_out);
        out << "re_z,im_z,re_w,im_w,label\n";
        for (int i = 0; i < raster_grid; ++i) {
            for (int j = 0; j < raster_grid; ++j) {
                const Complex w(-raster_extent + 2.0 * raster_extent * i /
                                                     (raster_grid - 1),
                                -raster_extent + 2.0 * raster_extent * j /
                                                     (raster_grid - 1));
                std::string label;
                try {
                    label = region_name(classify_with_slice(slice, w).region);
                } catch (const Error&) {
                    label = "BoundaryBand";
                }
                out << fmt17(z.real()) << "," << fmt17(z.imag()) << ","
                    << fmt17(w.real()) << "," << fmt17(w.imag()) << "," << label
                    << "\n";
            }
        }
    }
    files.commit();
    return 0;
}

int run_extend(const std::string& curve_spec, const FieldArgs& field_args,
               const std::vector<std::string>& at, const std::string& points_path,
               bool default_grid, int nodes, bool fallback, int fallback_degree,
               std::uint64_t seed, const std::string& out_path) {
    const SupportCurve curve = SupportCurve::parse(curve_spec);
    const LineField field = make_field(curve, field_args);
    const QuadratureConfig cfg = QuadratureConfig::with_total_nodes(nodes);

    std::vector<std::pair<Complex, Complex>> points;
    for (const auto& spec : at) {
        const auto parts = split_csv_row(spec);
        if (parts.size() != 4)
            throw ParseError("--at takes re_z,im_z,re_w,im_w");
        points.emplace_back(Complex(parse_double(parts[0]), parse_double(parts[1])),
                            Complex(parse_double(parts[2]), parse_double(parts[3])));
    }
    if (!points_path.empty()) {
        bool first = true;
        for (const auto& row : read_csv(points_path)) {
            if (first) {
                first = false;
                try {
                    (void)parse_double(row.at(0));
                } catch (const ParseError&) {
                    continue; // header
                }
            }
            if (row.size() < 4)
                throw ParseError("points file rows need re_z,im_z,re_w,im_w");
            points.emplace_back(Complex(parse_double(row[0]), parse_double(row[1])),
                                Complex(parse_double(row[2]), parse_double(row[3])));
        }
    }
    if (default_grid) {
        Rng rng(seed);
        for (int i = 0; i < 10; ++i) {
            points.push_back(sample_omega_minus(curve, rng));
            points.push_back(sample_omega_plus(curve, rng));
            points.push_back(sample_omega_zero(curve, rng));
        }
    }
    if (points.empty())
        throw ParseError("no evaluation points: give --at, --points or --grid default");
    if (out_path.empty()) throw ParseError("--out is required");

    GlobalFitResult fit;
    ExtendOptions opt;
    if (fallback) {
        SamplePlan plan;
        plan.seed = seed;
        fit = global_fit(field, curve, fallback_degree, plan, cfg);
        opt.fallback = &fit.poly;
        opt.fallback_err = fit.heldout_residual;
    }

    EmittedFiles files;
    std::ofstream out = files.open(out_path);
    out << "re_z,im_z,re_w,im_w,re_F,im_F,method,err_est,label,status\n";
    std::map<std::string, int> method_counts;
    double max_err = 0.0;
    for (const auto& [z, w] : points) {
        std::string method = "none", label = "unknown", status = "ok";
        Complex value{0.0, 0.0};
        double err = 0.0;
        try {
            const ExtensionResult r = extend(field, curve, z, w, cfg, opt);
            value = r.value;
            err = r.err_est;
            method = method_name(r.method);
            label = region_name(r.region.region);
            max_err = std::max(max_err, err);
            ++method_counts[method];
        } catch (const Error& e) {
            status = e.what();
            std::replace(status.begin(), status.end(), ',', ';');
            ++method_counts["error"];
        }
        out << fmt17(z.real()) << "," << fmt17(z.imag()) << "," << fmt17(w.real())
            << "," << fmt17(w.imag()) << "," << fmt17(value.real()) << ","
            << fmt17(value.imag()) << "," << method << "," << fmt17(err) << ","
            << label << "," << status << "\n";
    }
    files.commit();

    std::string summary = "extend: " + std::to_string(points.size()) + " points";
    for (const auto& [name, count] : method_counts)
        summary += ", " + name + "=" + std::to_string(count);
    summary += ", max err_est = " + fmt17(max_err);
    std::cout << summary << "\n";
    return 0;
}

int run_range_test(const std::string& curve_spec, const FieldArgs& field_args,
                   const std::string& z_set, int n_max, double tol, int nodes,
                   const std::string& out_path) {
    const SupportCurve curve = SupportCurve::parse(curve_spec);
    const LineField field = make_field(curve, field_args);
    const QuadratureConfig cfg = QuadratureConfig::with_total_nodes(nodes);

    std::vector<Complex> zs;
    if (z_set == "rings") {
        zs = default_z_rings(curve);
    } else if (z_set == "empty") {
        // vacuous run
    } else {
        bool first = true;
        for (const auto& row : read_csv(z_set)) {
            if (first) {
                first = false;
                try {
                    (void)parse_double(row.at(0));
                } catch (const ParseError&) {
                    continue;
                }
            }
            if (row.size() < 2) throw ParseError("z-set rows need re,im");
            zs.emplace_back(parse_double(row[0]), parse_double(row[1]));
        }
    }

    const MomentReport report = range_test(field, curve, zs, n_max, tol, cfg);
    if (!out_path.empty()) {
        EmittedFiles files;
        std::ofstream out = files.open(out_path);
        out << report.to_json().dump(2) << "\n";
        files.commit();
    }
    for (const auto& warning : report.warnings)
        std::cout << "warning: " << warning << "\n";
    int offending = 0;
    for (const auto& e : report.entries)
        if (!e.pass) ++offending;
    for (const auto& e : report.consistency)
        if (!e.pass) ++offending;
    std::cout << "range-test: " << (report.aggregate_pass ? "PASS" : "FAIL") << " ("
              << report.entries.size() << " moments, " << report.consistency.size()
              << " consistency checks, " << offending << " offending)\n";
    if (!report.aggregate_pass) {
        int shown = 0;
        for (const auto& e : report.entries) {
            if (e.pass) continue;
            if (++shown > 10) break;
            std::cout << "  offending: z = " << fmt17(e.z.real()) << ","
                      << fmt17(e.z.imag()) << " n = " << e.n
                      << " normalized = " << fmt17(e.normalized) << "\n";
        }
        if (offending > shown)
            std::cout << "  ... and " << (offending - std::min(shown, 10))
                      << " more (see the JSON report)\n";
        for (const auto& err : report.errors) std::cout << "  error: " << err << "\n";
    }
    return report.aggregate_pass ? 0 : 1;
}

int run_fit(const std::string& curve_spec, const std::string& samples_path,
            int degree, const std::string& out_path) {
    const SupportCurve curve = SupportCurve::parse(curve_spec);
    const FittedLineField fit =
        fit_from_real_samples(curve, read_sample_table(samples_path), degree);
    nlohmann::ordered_json j;
    j["curve"] = curve.spec();
    j["degree"] = degree;
    j["max_residual"] = fit.max_residual;
    j["lines"] = nlohmann::ordered_json::array();
    for (const auto& d : fit.diagnostics)
        j["lines"].push_back({{"theta", d.theta},
                              {"residual", d.residual},
                              {"condition", d.condition}});
    if (!out_path.empty()) {
        EmittedFiles files;
        std::ofstream out = files.open(out_path);
        out << j.dump(2) << "\n";
        files.commit();
    }
    std::cout << "fit: " << fit.diagnostics.size()
              << " lines, max residual = " << fmt17(fit.max_residual) << "\n";
    return 0;
}

int run_verify() {
    const auto results = lineext::verify::run_all();
    bool all_pass = true;
    for (const auto& r : results) {
        std::printf("%s  %d. %-38s (%.2f s)  %s\n", r.pass ? "PASS" : "FAIL", r.index,
                    r.name.c_str(), r.seconds, r.detail.c_str());
        all_pass = all_pass && r.pass;
    }
    std::printf("%s\n", all_pass ? "verify: all criteria passed"
                                 : "verify: FAILURES present");
    return all_pass ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"analytic continuation from entire data on the tangent lines of a convex curve"};
    app.require_subcommand(1);

    std::string curve_spec;
    std::uint64_t seed = 1;
    int nodes = 512;
    app.add_option("--curve", curve_spec,
                   "curve spec: circle:R, ellipse:A,B or fourier:c0,a1,b1,...");
    app.add_option("--seed", seed, "seed for random point sets");
    app.add_option("--nodes", nodes, "quadrature nodes per contour");

    // geometry
    auto* geo = app.add_subcommand("geometry", "emit slice loops and region rasters");
    std::string z_arg, w_arg, c_arg, out_path, raster_z, raster_out;
    int raster_grid = 41;
    double raster_extent = 4.0;
    geo->add_option("--z", z_arg, "emit the w-slice over this z (re,im)");
    geo->add_option("--w", w_arg, "emit the z-slice over this w (re,im)");
    geo->add_option("--c", c_arg, "emit the quadric slice zw = c (re,im)");
    geo->add_option("--out", out_path, "loop CSV path");
    geo->add_option("--raster-z", raster_z, "classify a w-grid at this fixed z");
    geo->add_option("--raster-grid", raster_grid, "raster points per side");
    geo->add_option("--raster-extent", raster_extent, "raster half-width");
    geo->add_option("--raster-out", raster_out, "raster CSV path");

    // extend
    auto* ext = app.add_subcommand("extend", "evaluate the extension at points");
    FieldArgs ext_field;
    ext_field.attach(ext);
    std::vector<std::string> at;
    std::string points_path, grid;
    bool fallback = false;
    int fallback_degree = 2;
    ext->add_option("--at", at, "evaluation point re_z,im_z,re_w,im_w (repeatable)");
    ext->add_option("--points", points_path, "points file CSV");
    ext->add_option("--grid", grid, "'default' draws a seeded admissible point set");
    ext->add_flag("--fallback", fallback, "fit a global polynomial for unreachable points");
    ext->add_option("--fallback-degree", fallback_degree, "fallback fit degree");
    ext->add_option("--out", out_path, "output CSV path");

    // range-test
    auto* rt = app.add_subcommand("range-test", "moment-condition range verdict");
    FieldArgs rt_field;
    rt_field.attach(rt);
    std::string z_set = "rings";
    int n_max = 8;
    double tol = kDefaultMomentTol;
    rt->add_option("--z-set", z_set, "'rings', 'empty' or a CSV of re,im");
    rt->add_option("--nmax", n_max, "largest moment order");
    rt->add_option("--tol", tol, "normalized moment tolerance");
    rt->add_option("--out", out_path, "JSON report path");

    // fit
    auto* fit = app.add_subcommand("fit", "fit per-line polynomials to a sample table");
    std::string fit_samples;
    int fit_degree = 2;
    fit->add_option("--samples", fit_samples, "sample table CSV (theta,t,re_f,im_f)")
        ->required();
    fit->add_option("--degree", fit_degree, "fit degree");
    fit->add_option("--out", out_path, "JSON diagnostics path");

    // verify
    app.add_subcommand("verify", "run the acceptance checks");

    CLI11_PARSE(app, argc, argv);

    try {
        if (geo->parsed())
            return run_geometry(curve_spec, z_arg, w_arg, c_arg, out_path, raster_z,
                                raster_grid, raster_extent, raster_out);
        if (ext->parsed())
            return run_extend(curve_spec, ext_field, at, points_path,
                              grid == "default", nodes, fallback, fallback_degree,
                              seed, out_path);
        if (rt->parsed())
            return run_range_test(curve_spec, rt_field, z_set, n_max, tol, nodes,
                                  out_path);
        if (fit->parsed()) return run_fit(curve_spec, fit_samples, fit_degree, out_path);
        return run_verify();
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
