// newtonlab: numerical laboratory for Newton maps of p(z) e^{q(z)}.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "newtonlab/newtonlab.hpp"

using namespace newtonlab;

namespace {

struct CommonArgs {
    std::string p_str, q_str = "0+0i";
    std::string out_path;
    std::string config_path;
};

json load_config(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) throw Error("IoError", "cannot read config file " + path);
    json j;
    in >> j;
    return j;
}

// command line wins; otherwise the config file; otherwise the default
template <typename T>
T pick(const CLI::Option* opt, T cli_value, const json& config, const char* key, T fallback) {
    if (opt && opt->count() > 0) return cli_value;
    if (config.contains(key)) return config.at(key).get<T>();
    return fallback;
}

void emit(const json& j, const std::string& out_path) {
    std::string text = serialize(j);
    if (out_path.empty()) {
        std::fputs(text.c_str(), stdout);
    } else {
        std::ofstream out(out_path);
        if (!out) throw Error("IoError", "cannot write " + out_path);
        out << text;
    }
}

cplx parse_point(const std::string& text) {
    auto comma = text.find(',');
    if (comma == std::string::npos)
        throw Error("ParseError", "expected 're,im' in '" + text + "'");
    return cplx{std::stod(text.substr(0, comma)), std::stod(text.substr(comma + 1))};
}

Viewport parse_viewport(const std::string& text) {
    Viewport vp;
    if (std::sscanf(text.c_str(), "%lf,%lf,%lf,%lf", &vp.x0, &vp.x1, &vp.y0, &vp.y1) != 4)
        throw Error("ParseError", "expected 'x0,x1,y0,y1' in '" + text + "'");
    return vp;
}

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stoi(tok));
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for Newton maps of p(z)e^{q(z)}"};
    app.require_subcommand(1);

    CommonArgs args;
    app.add_option("--out", args.out_path, "write the JSON report here instead of stdout");
    app.add_option("--config", args.config_path, "JSON config file with defaults");

    // build
    auto* cmd_build = app.add_subcommand("build", "construct the Newton map and classify its points");
    std::string p_str, q_str = "0+0i";
    cmd_build->add_option("--p", p_str, "coefficients of p, ascending, 're+imi' comma-separated");
    cmd_build->add_option("--q", q_str, "coefficients of q (default constant 0)");

    // orbit
    auto* cmd_orbit = app.add_subcommand("orbit", "iterate one starting point");
    std::string z0_str = "0,0";
    int max_steps = 10000;
    double eps_conv = 1e-9;
    cmd_orbit->add_option("--p", p_str, "coefficients of p");
    cmd_orbit->add_option("--q", q_str, "coefficients of q");
    auto* opt_z0 = cmd_orbit->add_option("--z0", z0_str, "starting point re,im");
    auto* opt_steps = cmd_orbit->add_option("--max-steps", max_steps, "iteration budget");
    auto* opt_eps = cmd_orbit->add_option("--eps", eps_conv, "convergence radius (spherical)");

    // pcm-check
    auto* cmd_pcm = app.add_subcommand("pcm-check", "postcritical minimality heuristics");
    cmd_pcm->add_option("--p", p_str, "coefficients of p");
    cmd_pcm->add_option("--q", q_str, "coefficients of q");

    // render
    auto* cmd_render = app.add_subcommand("render", "basin/petal raster to PPM");
    std::string viewport_str = "-2,2,-2,2", image_path;
    int width = 512, height = 512;
    int grid_steps = 2000;
    bool overlays = true;
    cmd_render->add_option("--p", p_str, "coefficients of p");
    cmd_render->add_option("--q", q_str, "coefficients of q");
    auto* opt_vp = cmd_render->add_option("--viewport", viewport_str, "x0,x1,y0,y1");
    auto* opt_w = cmd_render->add_option("--width", width, "pixels");
    auto* opt_h = cmd_render->add_option("--height", height, "pixels");
    auto* opt_gsteps = cmd_render->add_option("--max-steps", grid_steps, "per-pixel budget");
    cmd_render->add_option("--image", image_path, "output PPM path");
    cmd_render->add_flag("--overlays,!--no-overlays", overlays,
                         "draw fixed and critical points");

    // blaschke
    auto* cmd_bla = app.add_subcommand("blaschke", "disk models B_b and P_k");
    int bla_k = 2;
    double target_mult = -1.0;
    cmd_bla->add_option("--k", bla_k, "degree k >= 2")->required();
    cmd_bla->add_option("--target-multiplier", target_mult,
                        "solve for b with this multiplier in (0,1); default parabolic");

    // surgery-check
    auto* cmd_sur = app.add_subcommand("surgery-check", "model map g and dilatation diagnostics");
    int sur_k = 2, sur_mmax = 60, sur_grid = 512, sur_m0 = 5;
    double sur_r = 0.8, sur_lambda = 2.0, sur_theta = kPi / 4.0;
    cmd_sur->add_option("--k", sur_k, "degree k >= 2")->required();
    cmd_sur->add_option("--r", sur_r, "gluing radius in (alpha, 1)")->required();
    cmd_sur->add_option("--lambda", sur_lambda, "repelling model multiplier");
    cmd_sur->add_option("--theta", sur_theta, "sector angle in (0, pi)");
    cmd_sur->add_option("--mmax", sur_mmax, "largest quadrilateral index");
    cmd_sur->add_option("--grid", sur_grid, "dilatation field resolution");
    cmd_sur->add_option("--m0", sur_m0, "innermost quadrilateral index");

    // surgery-pipeline
    auto* cmd_pipe = app.add_subcommand("surgery-pipeline", "end-to-end surgery ingredients");
    std::string mark_str;
    cmd_pipe->add_option("--p", p_str, "coefficients of p");
    cmd_pipe->add_option("--mark", mark_str, "comma-separated marked basin indices")->required();

    // channel
    auto* cmd_chan = app.add_subcommand("channel", "channel diagram rays and accesses");
    std::string chan_mark_str, csv_path;
    cmd_chan->add_option("--p", p_str, "coefficients of p");
    cmd_chan->add_option("--q", q_str, "coefficients of q");
    cmd_chan->add_option("--mark", chan_mark_str, "selections basin:ray,...");
    cmd_chan->add_option("--csv", csv_path, "export polylines as CSV");

    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help() << std::flush;
        return 2;
    }

    try {
        json config = load_config(args.config_path);

        // polynomials may come from the config file's RunConfig fields
        CLI::App* active = app.get_subcommands().empty() ? nullptr : app.get_subcommands()[0];
        bool needs_p = active && active != cmd_bla && active != cmd_sur;
        if (needs_p) {
            if (active->count("--p") == 0) {
                if (config.contains("p"))
                    p_str = config.at("p").get<std::string>();
                else {
                    std::cerr << "--p is required (flag or config file)\n\n"
                              << app.help() << std::flush;
                    return 2;
                }
            }
            if (active->get_option_no_throw("--q") && active->count("--q") == 0 &&
                config.contains("q"))
                q_str = config.at("q").get<std::string>();
        }

        if (*cmd_build) {
            NewtonMapSpec N = build_newton_map(ComplexPoly::parse(p_str), ComplexPoly::parse(q_str));
            emit(to_json(make_build_report(N)), args.out_path);
        } else if (*cmd_orbit) {
            z0_str = pick(opt_z0, z0_str, config, "z0", z0_str);
            max_steps = pick(opt_steps, max_steps, config, "max_steps", max_steps);
            eps_conv = pick(opt_eps, eps_conv, config, "eps_conv", eps_conv);
            NewtonMapSpec N = build_newton_map(ComplexPoly::parse(p_str), ComplexPoly::parse(q_str));
            OrbitRecord rec = iterate(N, parse_point(z0_str), max_steps, eps_conv);
            emit(to_json(rec), args.out_path);
        } else if (*cmd_pcm) {
            NewtonMapSpec N = build_newton_map(ComplexPoly::parse(p_str), ComplexPoly::parse(q_str));
            emit(to_json(pcm_report(N)), args.out_path);
        } else if (*cmd_render) {
            viewport_str = pick(opt_vp, viewport_str, config, "viewport", viewport_str);
            width = pick(opt_w, width, config, "width", width);
            height = pick(opt_h, height, config, "height", height);
            grid_steps = pick(opt_gsteps, grid_steps, config, "max_steps", grid_steps);
            NewtonMapSpec N = build_newton_map(ComplexPoly::parse(p_str), ComplexPoly::parse(q_str));
            Dynamics dyn = make_dynamics(N);
            GridOptions gopt;
            gopt.max_steps = grid_steps;
            BasinRaster raster = classify_grid(dyn, parse_viewport(viewport_str), width, height, gopt);
            RenderOptions ropt;
            ropt.n_roots = static_cast<int>(dyn.roots.size());
            ropt.n_petals = dyn.nu;
            if (overlays) {
                for (cplx r : dyn.roots) ropt.fixed_point_overlay.push_back(r);
                for (const auto& c : critical_points(N))
                    if (!c.location.at_infinity)
                        ropt.critical_point_overlay.push_back(c.location.z);
                ropt.petal_direction_overlay = dyn.petal_dirs;
            }
            if (!image_path.empty()) write_bytes(image_path, render(raster, ropt));
            emit(to_json(raster, ropt.n_roots, ropt.n_petals), args.out_path);
        } else if (*cmd_bla) {
            BlaschkeReport rep;
            if (target_mult > 0) {
                BlaschkeModel m = solve_b_for_multiplier(bla_k, target_mult);
                rep = {m.k, m.b, m.alpha, m.multiplier, verify_triple_root(m.k)};
            } else {
                BlaschkeModel m = parabolic_blaschke(bla_k);
                rep = {m.k, m.b, m.alpha, m.multiplier, verify_triple_root(m.k)};
            }
            emit(to_json(rep), args.out_path);
        } else if (*cmd_sur) {
            BlaschkeModel bm = solve_b_for_multiplier(sur_k, 0.5);
            DiskSurgeryModel g = build_model_g(sur_k, bm.b, sur_r);
            ContinuityReport cont = model_continuity(g);
            SectorModel sec{sur_lambda, sur_theta, sur_m0};
            auto prof = dilatation_profile(sec, sur_m0, sur_mmax);
            DilatationField field = make_chi_field(sec, sur_grid);
            double c = 0;
            for (const auto& e : prof) c += e.median_K / e.m;
            c /= prof.size();
            std::vector<double> thr;
            for (int m = sur_m0 + 1; m <= sur_m0 + 8; ++m) thr.push_back(c * m);
            AreaTailReport tail = area_tail(field, thr);
            json profile = json::array();
            for (const auto& e : prof)
                profile.push_back(json{{"K_max", e.max_K}, {"K_median", e.median_K}, {"m", e.m}});
            bool verdict = cont.outer_jump < 1e-9 && cont.inner_jump < 1e-9 &&
                           cont.fixed_point_residual < 1e-10 && tail.fit.exponential;
            emit(json{{"area_tail", to_json(tail)},
                      {"continuity", to_json(cont)},
                      {"continuity_max_jump", std::max(cont.outer_jump, cont.inner_jump)},
                      {"dilatation_profile", profile},
                      {"fit", to_json(tail.fit)},
                      {"model", json{{"alpha", bm.alpha},
                                     {"b", bm.b},
                                     {"k", sur_k},
                                     {"lambda", sur_lambda},
                                     {"m0", sur_m0},
                                     {"r", sur_r},
                                     {"theta", sur_theta}}},
                      {"verdict", verdict ? "pass" : "fail"},
                      {"version", kVersion}},
                 args.out_path);
        } else if (*cmd_pipe) {
            NewtonMapSpec N = build_newton_map(ComplexPoly::parse(p_str), ComplexPoly::parse(q_str));
            SurgeryPipelineReport rep = surgery_pipeline_report(N, parse_int_list(mark_str));
            emit(to_json(rep), args.out_path);
        } else if (*cmd_chan) {
            NewtonMapSpec N = build_newton_map(ComplexPoly::parse(p_str), ComplexPoly::parse(q_str));
            Dynamics dyn = make_dynamics(N);
            ChannelDiagram diagram = channel_diagram(dyn);
            if (!chan_mark_str.empty()) {
                std::vector<std::pair<int, int>> sel;
                std::stringstream ss(chan_mark_str);
                std::string tok;
                while (std::getline(ss, tok, ',')) {
                    auto colon = tok.find(':');
                    if (colon == std::string::npos)
                        throw Error("ParseError", "expected basin:ray in '" + tok + "'");
                    sel.push_back({std::stoi(tok.substr(0, colon)),
                                   std::stoi(tok.substr(colon + 1))});
                }
                diagram = mark(diagram, sel);
            }
            std::vector<AccessReport> accesses;
            for (cplx r : dyn.roots)
                accesses.push_back(count_accesses(dyn, r + cplx{1e-3, 1e-3}));
            if (!csv_path.empty()) {
                std::ofstream csv(csv_path);
                csv << "basin,ray,re,im\n";
                for (const auto& ray : diagram.rays)
                    for (cplx z : ray.polyline)
                        csv << ray.basin << ',' << ray.j << ',' << z.real() << ',' << z.imag()
                            << '\n';
            }
            emit(to_json(diagram, accesses), args.out_path);
        }
    } catch (const Error& e) {
        emit(json{{"error", json{{"code", e.code()}, {"message", e.what()}}}}, "");
        return 1;
    } catch (const std::exception& e) {
        emit(json{{"error", json{{"code", "Internal"}, {"message", e.what()}}}}, "");
        return 1;
    }
    return 0;
}
