#include "bend/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <ostream>
#include <sstream>

namespace bend {

namespace {

double ms_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
}

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(std::stod(item));
    }
    return out;
}

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    size_t b = s.find_last_not_of(" \t\r\n");
    return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

} // namespace

void RunConfig::validate() const {
    if (strict_n && n != 33 && n != 65 && n != 129 && n != 257)
        throw BendError(ErrKind::ConfigError, "grid must be one of 33, 65, 129, 257");
    if (n < 3) throw BendError(ErrKind::ConfigError, "grid resolution too small");
    if (k < 0) throw BendError(ErrKind::ConfigError, "smoothness target k must be >= 0");
    if (sigmas.empty()) throw BendError(ErrKind::ConfigError, "sigma list is empty");
    for (double s : sigmas)
        if (!(s > 0 && s < 1))
            throw BendError(ErrKind::ConfigError, "sigma values must lie in (0, 1)");
    if (!(planar_tol > 0 && fi_tol > 0 && vekua_tol > 0 && bending_tol > 0))
        throw BendError(ErrKind::ConfigError, "tolerances must be positive");
    if (surface == "custom" && custom_expr.empty())
        throw BendError(ErrKind::ConfigError, "custom surface needs z = <expression>");
}

void apply_config_line(RunConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "surface")
        cfg.surface = value;
    else if (key == "z")
        cfg.custom_expr = value;
    else if (key == "domain")
        cfg.domain_override = value;
    else if (key == "grid" || key == "n")
        cfg.n = std::stoi(value);
    else if (key == "k")
        cfg.k = std::stoi(value);
    else if (key == "sigma")
        cfg.sigmas = parse_double_list(value);
    else if (key == "planar_tol")
        cfg.planar_tol = std::stod(value);
    else if (key == "fi_tol")
        cfg.fi_tol = std::stod(value);
    else if (key == "vekua_tol")
        cfg.vekua_tol = std::stod(value);
    else if (key == "bending_tol")
        cfg.bending_tol = std::stod(value);
    else if (key == "out")
        cfg.outdir = value;
    else if (key == "dense_max")
        cfg.dense_max_unknowns = std::stoi(value);
    else if (key == "phi_seed") {
        if (value == "const" || value == "1")
            cfg.phi_seed = PhiSeed::One;
        else if (value == "z")
            cfg.phi_seed = PhiSeed::Z;
        else if (value == "z2")
            cfg.phi_seed = PhiSeed::Z2;
        else
            throw BendError(ErrKind::ConfigError, "phi_seed must be const, z or z2");
    } else if (key == "planar") {
        auto v = parse_double_list(value);
        if (v.size() != 3)
            throw BendError(ErrKind::ConfigError, "planar needs s,t,m");
        DeclaredPlanarPoint p;
        p.s = v[0];
        p.t = v[1];
        p.m = int(v[2]);
        p.profile.cos_c = {1.0};
        cfg.custom_planar.push_back(p);
    } else if (key == "profile_cos") {
        if (cfg.custom_planar.empty())
            throw BendError(ErrKind::ConfigError, "profile_cos must follow a planar line");
        cfg.custom_planar.back().profile.cos_c = parse_double_list(value);
    } else if (key == "profile_sin") {
        if (cfg.custom_planar.empty())
            throw BendError(ErrKind::ConfigError, "profile_sin must follow a planar line");
        auto v = parse_double_list(value);
        v.insert(v.begin(), 0.0);  // sin has no constant term
        cfg.custom_planar.back().profile.sin_c = v;
    } else {
        throw BendError(ErrKind::ConfigError, "unknown config key '" + key + "'");
    }
}

RunConfig parse_config_file(const std::string& path) {
    RunConfig cfg;
    std::stringstream ss(read_text(path));
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw BendError(ErrKind::ConfigError,
                            path + ":" + std::to_string(lineno) + ": expected key = value");
        apply_config_line(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

SurfaceDefinition make_surface(const RunConfig& cfg) {
    SurfaceDefinition def;
    if (cfg.surface == "custom") {
        RegionSpec region = cfg.domain_override.empty() ? RegionSpec::disc(1.0)
                                                        : RegionSpec::parse(cfg.domain_override);
        def = SurfaceDefinition::from_expression("custom", region, cfg.custom_expr,
                                                 cfg.custom_planar);
    } else {
        def = catalog_surface(cfg.surface);
        if (!cfg.domain_override.empty()) def.domain = RegionSpec::parse(cfg.domain_override);
    }
    return def;
}

void stage_analyze(PipelineContext& ctx) {
    auto t0 = std::chrono::steady_clock::now();
    ctx.def = make_surface(ctx.cfg);
    ctx.grid = build_domain(ctx.def.domain, ctx.cfg.n);
    ctx.jet = eval_jet(ctx.def, ctx.grid);
    ctx.forms = fundamental_forms(ctx.jet, ctx.grid);
    ctx.forms.planar = detect_planar_points(ctx.forms, ctx.grid, ctx.def, ctx.cfg.planar_tol);

    ctx.mus.clear();
    ctx.mk_used.clear();
    auto& planar_json = ctx.report["planar_points"] = nlohmann::json::array();
    for (auto& p : ctx.forms.planar) {
        SlopeFit kfit;
        p.m_K = vanishing_order(ctx.forms, ctx.grid, p, &kfit);
        if (!p.declared_m)
            throw BendError(ErrKind::ConfigError,
                            "planar point at (" + std::to_string(p.s) + "," + std::to_string(p.t) +
                                ") has no declared degree/profile; declared profiles are required");
        PlanarPointModel model;
        model.m = *p.declared_m;
        model.P = *p.declared_profile;
        ctx.mus.push_back(mu_exponent(model));
        // the exact order 2m - 4 of the declared model drives choose_M; the fit
        // cross-checks it
        ctx.mk_used.push_back(2.0 * *p.declared_m - 4.0);
        nlohmann::json pj;
        pj["s"] = p.s;
        pj["t"] = p.t;
        pj["i"] = p.i;
        pj["j"] = p.j;
        pj["m"] = *p.declared_m;
        pj["mu"] = ctx.mus.back().mu;
        pj["integral_M"] = ctx.mus.back().integral_M;
        pj["m_K_fit"] = p.m_K;
        pj["m_K_declared"] = ctx.mk_used.back();
        pj["m_K_fit_r2"] = kfit.r2;
        planar_json.push_back(pj);
    }

    double minK = 1e300, maxK = -1e300;
    for (int j = 0; j < ctx.grid.ny; ++j)
        for (int i = 0; i < ctx.grid.nx; ++i)
            if (ctx.grid.inside(i, j)) {
                minK = std::min(minK, ctx.forms.K(i, j));
                maxK = std::max(maxK, ctx.forms.K(i, j));
            }
    ctx.report["surface"] = ctx.def.name;
    ctx.report["region"] = ctx.def.domain.describe();
    ctx.report["n"] = ctx.cfg.n;
    ctx.report["k"] = ctx.cfg.k;
    ctx.report["h"] = ctx.grid.h;
    ctx.report["orientation_flipped"] = ctx.forms.orientation_flipped;
    ctx.report["K_min"] = minK;
    ctx.report["K_max"] = maxK;
    ctx.report["planar_count"] = ctx.forms.planar.size();
    ctx.report["timings_ms"]["analyze"] = ms_since(t0);
}

void stage_integral(PipelineContext& ctx) {
    auto t0 = std::chrono::steady_clock::now();
    auto lambda = asymptotic_direction(ctx.forms, ctx.grid);
    ctx.field = build_field(ctx.forms, lambda, ctx.grid);

    double qmax = 0;
    for (int j = 0; j < ctx.grid.ny; ++j)
        for (int i = 0; i < ctx.grid.nx; ++i) {
            if (!ctx.grid.inside(i, j)) continue;
            Complex q = lambda(i, j) * lambda(i, j) +
                        2.0 * ctx.forms.f(i, j) * lambda(i, j) +
                        ctx.forms.e(i, j) * ctx.forms.g(i, j);
            qmax = std::max(qmax, std::abs(q) /
                                      (1.0 + std::abs(ctx.forms.e(i, j) * ctx.forms.g(i, j))));
        }
    ctx.quadratic_identity_max = qmax;
    ctx.report["quadratic_identity_max"] = qmax;
    ctx.report["max_abs_beltrami"] = ctx.field.max_abs_beltrami;

    ctx.fi = solve_first_integral(ctx.field, ctx.grid, ctx.forms.planar);
    ctx.have_fi = true;
    ctx.injectivity = check_injectivity(ctx.fi, ctx.grid, ctx.field, ctx.forms.planar);
    ctx.local_fits.clear();
    for (size_t p = 0; p < ctx.forms.planar.size(); ++p)
        ctx.local_fits.push_back(
            validate_local_model(ctx.fi, ctx.grid, ctx.forms.planar[p], ctx.mus[p].mu));

    auto& fj = ctx.report["first_integral"];
    fj["residual_rel"] = ctx.fi.residual_rel;
    fj["jac_sign"] = ctx.fi.jac_sign;
    fj["injectivity_pass"] = ctx.injectivity.pass;
    fj["sign_flips"] = ctx.injectivity.sign_flips;
    fj["windings"] = ctx.injectivity.windings;
    auto& lm = fj["local_model"] = nlohmann::json::array();
    for (size_t p = 0; p < ctx.local_fits.size(); ++p) {
        nlohmann::json e;
        e["slope"] = ctx.local_fits[p].fit.slope;
        e["r2"] = ctx.local_fits[p].fit.r2;
        e["rel_dev"] = ctx.local_fits[p].rel_dev;
        e["mu"] = ctx.mus[p].mu;
        lm.push_back(e);
    }
    ctx.report["timings_ms"]["integral"] = ms_since(t0);
}

void stage_vekua(PipelineContext& ctx) {
    auto t0 = std::chrono::steady_clock::now();
    std::vector<std::pair<double, double>> mu_mk;
    for (size_t p = 0; p < ctx.mus.size(); ++p)
        mu_mk.emplace_back(ctx.mus[p].mu, ctx.mk_used[p]);
    ctx.M = choose_M(ctx.cfg.k, mu_mk);

    ctx.coeffs = vekua_coefficients(ctx.jet, ctx.field, ctx.grid);
    ctx.problem = pushforward(ctx.coeffs, ctx.fi, ctx.field, ctx.grid, ctx.forms.planar, ctx.M);
    VekuaSolveOptions opts;
    opts.seed = ctx.cfg.phi_seed;
    opts.tolerance = ctx.cfg.vekua_tol;
    opts.dense_max_unknowns = ctx.cfg.dense_max_unknowns;
    ctx.vsol = solve_modified(ctx.problem, opts);
    assemble_solution(ctx.problem, ctx.grid, ctx.forms.planar, ctx.vsol);
    ctx.have_vekua = true;

    auto& vj = ctx.report["vekua"];
    vj["M"] = ctx.M;
    vj["sup_a"] = ctx.problem.sup_a;
    vj["sup_b"] = ctx.problem.sup_b;
    vj["residual_modified"] = ctx.vsol.residual_modified;
    vj["residual_original"] = ctx.vsol.residual_original;
    vj["method"] = ctx.vsol.method;
    vj["iterations"] = ctx.vsol.iterations;
    auto& vs = vj["vanish_slopes"] = nlohmann::json::array();
    for (const auto& f : ctx.vsol.vanish_fits) vs.push_back(f.slope);
    ctx.report["timings_ms"]["vekua"] = ms_since(t0);
}

void stage_bend(PipelineContext& ctx) {
    auto t0 = std::chrono::steady_clock::now();
    ComplexField w = pullback_w(ctx.vsol, ctx.problem, ctx.grid);
    ctx.uv = recover_uv(w, ctx.forms, ctx.grid, ctx.forms.planar);
    ctx.bf = recover_U(ctx.jet, ctx.uv, ctx.forms, ctx.grid, ctx.forms.planar, ctx.cfg.k);
    bending_residual(ctx.jet, ctx.bf, ctx.grid, ctx.forms.planar);
    ctx.rfit = rigid_fit(ctx.jet.R, ctx.bf.U, ctx.grid);
    ctx.have_bending = true;

    // w vanishing order at each planar point (target M mu_j)
    auto& bj = ctx.report["bending"];
    auto& wv = bj["w_vanish_slopes"] = nlohmann::json::array();
    for (size_t p = 0; p < ctx.forms.planar.size(); ++p) {
        std::vector<double> lx, ly;
        const auto& pp = ctx.forms.planar[p];
        for (int j = 0; j < ctx.grid.ny; ++j)
            for (int i = 0; i < ctx.grid.nx; ++i) {
                if (!ctx.grid.inside(i, j)) continue;
                double r = std::hypot(ctx.grid.s(i) - pp.s, ctx.grid.t(j) - pp.t);
                if (r < 3.0 * ctx.grid.h || r > 12.0 * ctx.grid.h) continue;
                double mag = std::abs(w(i, j));
                if (mag <= 0) continue;
                lx.push_back(std::log(r));
                ly.push_back(std::log(mag));
            }
        nlohmann::json e;
        e["slope"] = fit_slope(lx, ly).slope;
        e["target_M_mu"] = ctx.M * ctx.mus[p].mu;
        wv.push_back(e);
    }
    bj["residual_rel"] = ctx.bf.residual_rel;
    bj["used_row_residual"] = ctx.bf.used_row_residual;
    bj["unused_row_residual"] = ctx.bf.unused_row_residual;
    bj["compat_ratio"] = ctx.bf.used_row_residual > 0
                             ? ctx.bf.unused_row_residual / ctx.bf.used_row_residual
                             : 0.0;
    bj["boundary_jump"] = ctx.uv.boundary_jump;
    bj["vt_cross_check"] = ctx.bf.vt_cross_check;
    auto& uvan = bj["U_vanish_slopes"] = nlohmann::json::array();
    for (const auto& f : ctx.bf.vanish_fits) uvan.push_back(f.slope);
    auto& rj = bj["rigid_fit"];
    rj["A"] = {ctx.rfit.A.x(), ctx.rfit.A.y(), ctx.rfit.A.z()};
    rj["B"] = {ctx.rfit.B.x(), ctx.rfit.B.y(), ctx.rfit.B.z()};
    rj["relative_residual"] = ctx.rfit.relative_residual;
    rj["nontrivial"] = ctx.rfit.nontrivial;
    ctx.report["timings_ms"]["bend"] = ms_since(t0);
}

void stage_deform(PipelineContext& ctx) {
    auto t0 = std::chrono::steady_clock::now();
    ctx.family = make_deformation(ctx.jet, ctx.bf.U, ctx.cfg.sigmas, ctx.grid);
    ctx.have_deform = true;
    auto& dj = ctx.report["deformation"];
    dj["sigmas"] = ctx.family.sigmas;
    dj["defects"] = ctx.family.defects;
    dj["odd_defects"] = ctx.family.odd_defects;
    dj["slope"] = ctx.family.slope;
    dj["window_slopes"] = ctx.family.window_slopes;
    dj["pm_identity_err"] = ctx.family.pm_identity_err;
    ctx.report["timings_ms"]["deform"] = ms_since(t0);
}

namespace {

std::string fields_dir(const RunConfig& cfg) { return cfg.outdir + "/fields"; }

} // namespace

void save_analyze(const PipelineContext& ctx) {
    write_grid_json(ctx.cfg.outdir + "/grid.json", ctx.grid, ctx.cfg.n);
    write_fields_csv(fields_dir(ctx.cfg) + "/forms.csv", ctx.grid,
                     {{"E", &ctx.forms.E},
                      {"F", &ctx.forms.F},
                      {"G", &ctx.forms.G},
                      {"e", &ctx.forms.e},
                      {"f", &ctx.forms.f},
                      {"g", &ctx.forms.g},
                      {"K", &ctx.forms.K}});
}

void save_integral(const PipelineContext& ctx) {
    auto [lre, lim] = split_complex(ctx.field.lambda);
    auto [mre, mim] = split_complex(ctx.field.beltrami);
    ScalarField deg(ctx.grid);
    for (size_t k = 0; k < deg.size(); ++k) deg[k] = ctx.field.degenerate[k];
    write_fields_csv(fields_dir(ctx.cfg) + "/asymptotic.csv", ctx.grid,
                     {{"lambda_re", &lre},
                      {"lambda_im", &lim},
                      {"g", &ctx.field.g},
                      {"mu_re", &mre},
                      {"mu_im", &mim},
                      {"degenerate", &deg}});
    auto [zre, zim] = split_complex(ctx.fi.Z);
    write_fields_csv(fields_dir(ctx.cfg) + "/z.csv", ctx.grid,
                     {{"z_re", &zre}, {"z_im", &zim}});
}

void save_vekua(const PipelineContext& ctx) {
    ComplexField Wf(ctx.grid), W1f(ctx.grid);
    for (size_t k = 0; k < ctx.problem.nodes.size(); ++k) {
        Wf[ctx.problem.nodes[k]] = ctx.vsol.W[k];
        W1f[ctx.problem.nodes[k]] = ctx.vsol.W1[k];
    }
    auto [wre, wim] = split_complex(Wf);
    auto [w1re, w1im] = split_complex(W1f);
    write_fields_csv(fields_dir(ctx.cfg) + "/w.csv", ctx.grid,
                     {{"w_re", &wre}, {"w_im", &wim}, {"w1_re", &w1re}, {"w1_im", &w1im}});
}

void save_bending(const PipelineContext& ctx) {
    write_fields_csv(fields_dir(ctx.cfg) + "/uv.csv", ctx.grid,
                     {{"u", &ctx.uv.u}, {"v", &ctx.uv.v}});
    ScalarField xi(ctx.grid), eta(ctx.grid), zeta(ctx.grid);
    for (int j = 0; j < ctx.grid.ny; ++j)
        for (int i = 0; i < ctx.grid.nx; ++i)
            if (ctx.grid.inside(i, j)) {
                xi(i, j) = ctx.bf.U(i, j).x();
                eta(i, j) = ctx.bf.U(i, j).y();
                zeta(i, j) = ctx.bf.U(i, j).z();
            }
    write_fields_csv(fields_dir(ctx.cfg) + "/bending.csv", ctx.grid,
                     {{"xi", &xi},
                      {"eta", &eta},
                      {"zeta", &zeta},
                      {"rho1", &ctx.bf.rho1},
                      {"rho2", &ctx.bf.rho2},
                      {"rho3", &ctx.bf.rho3}});
}

void save_deform(const PipelineContext& ctx) {
    write_obj(ctx.cfg.outdir + "/meshes/base.obj", ctx.grid, ctx.jet.R);
    for (double sigma : ctx.cfg.sigmas) {
        std::ostringstream tag;
        tag << sigma;
        write_obj(ctx.cfg.outdir + "/meshes/plus_" + tag.str() + ".obj", ctx.grid,
                  deformed_positions(ctx.jet, ctx.bf.U, sigma, ctx.grid));
        write_obj(ctx.cfg.outdir + "/meshes/minus_" + tag.str() + ".obj", ctx.grid,
                  deformed_positions(ctx.jet, ctx.bf.U, -sigma, ctx.grid));
    }
    std::ostringstream csv;
    csv << "sigma,defect,odd_defect,window_slope\n";
    for (size_t k = 0; k < ctx.family.sigmas.size(); ++k) {
        csv << ctx.family.sigmas[k] << "," << ctx.family.defects[k] << ","
            << ctx.family.odd_defects[k] << ",";
        if (k + 1 < ctx.family.sigmas.size() && k < ctx.family.window_slopes.size())
            csv << ctx.family.window_slopes[k];
        csv << "\n";
    }
    atomic_write_text(ctx.cfg.outdir + "/defect.csv", csv.str());
}

void load_grid_for_stage(PipelineContext& ctx) {
    std::string path = ctx.cfg.outdir + "/grid.json";
    if (!file_exists(path))
        throw BendError(ErrKind::MissingInput, path + " not found; run an earlier stage first");
    int n = 0;
    DomainGrid g = read_grid_json(path, &n);
    if (n != ctx.cfg.n)
        throw BendError(ErrKind::MissingInput, "stored grid resolution does not match config");
}

void load_integral(PipelineContext& ctx) {
    std::string path = fields_dir(ctx.cfg) + "/z.csv";
    if (!file_exists(path))
        throw BendError(ErrKind::MissingInput, path + " not found; run `bend integral` first");
    auto fields = read_fields_csv(path, ctx.grid);
    ctx.fi = FirstIntegral{};
    ctx.fi.Z = join_complex(fields.at("z_re"), fields.at("z_im"));
    ctx.fi.Zs = differentiate(ctx.grid, ctx.fi.Z, Axis::S);
    ctx.fi.Zt = differentiate(ctx.grid, ctx.fi.Z, Axis::T);
    ctx.fi.jac = ScalarField(ctx.grid);
    for (int j = 0; j < ctx.grid.ny; ++j)
        for (int i = 0; i < ctx.grid.nx; ++i)
            if (ctx.grid.inside(i, j))
                ctx.fi.jac(i, j) = std::imag(std::conj(ctx.fi.Zs(i, j)) * ctx.fi.Zt(i, j));
    for (const auto& p : ctx.forms.planar) ctx.fi.planar_images.push_back(ctx.fi.Z(p.i, p.j));
    ctx.have_fi = true;
}

void load_vekua(PipelineContext& ctx) {
    std::string path = fields_dir(ctx.cfg) + "/w.csv";
    if (!file_exists(path))
        throw BendError(ErrKind::MissingInput, path + " not found; run `bend solve` first");
    auto fields = read_fields_csv(path, ctx.grid);
    ComplexField W = join_complex(fields.at("w_re"), fields.at("w_im"));
    ComplexField W1 = join_complex(fields.at("w1_re"), fields.at("w1_im"));
    // rebuild the sample layout so downstream stages can index it
    std::vector<std::pair<double, double>> mu_mk;
    for (size_t p = 0; p < ctx.mus.size(); ++p) mu_mk.emplace_back(ctx.mus[p].mu, ctx.mk_used[p]);
    ctx.M = choose_M(ctx.cfg.k, mu_mk);
    ctx.coeffs = vekua_coefficients(ctx.jet, ctx.field, ctx.grid);
    ctx.problem = pushforward(ctx.coeffs, ctx.fi, ctx.field, ctx.grid, ctx.forms.planar, ctx.M);
    ctx.vsol = VekuaSolution{};
    ctx.vsol.W.resize(ctx.problem.nodes.size());
    ctx.vsol.W1.resize(ctx.problem.nodes.size());
    for (size_t k = 0; k < ctx.problem.nodes.size(); ++k) {
        ctx.vsol.W[k] = W[ctx.problem.nodes[k]];
        ctx.vsol.W1[k] = W1[ctx.problem.nodes[k]];
    }
    ctx.have_vekua = true;
}

void load_bending(PipelineContext& ctx) {
    std::string path = fields_dir(ctx.cfg) + "/bending.csv";
    if (!file_exists(path))
        throw BendError(ErrKind::MissingInput, path + " not found; run `bend bend` first");
    auto fields = read_fields_csv(path, ctx.grid);
    ctx.bf = BendingField{};
    ctx.bf.U = Vec3Field(ctx.grid);
    for (int j = 0; j < ctx.grid.ny; ++j)
        for (int i = 0; i < ctx.grid.nx; ++i)
            if (ctx.grid.inside(i, j))
                ctx.bf.U(i, j) = Vec3(fields.at("xi")(i, j), fields.at("eta")(i, j),
                                      fields.at("zeta")(i, j));
    std::string uvpath = fields_dir(ctx.cfg) + "/uv.csv";
    if (file_exists(uvpath)) {
        auto uvf = read_fields_csv(uvpath, ctx.grid);
        ctx.uv.u = uvf.at("u");
        ctx.uv.v = uvf.at("v");
    }
    ctx.have_bending = true;
}

bool evaluate_gates(PipelineContext& ctx) {
    auto& gj = ctx.report["gates"];
    bool ok = true;
    if (ctx.have_fi) {
        bool g1 = ctx.fi.residual_rel <= ctx.cfg.fi_tol && ctx.injectivity.pass;
        gj["first_integral"] = g1;
        ok = ok && g1;
    }
    if (ctx.have_vekua) {
        bool g2 = ctx.vsol.residual_modified <= ctx.cfg.vekua_tol &&
                  ctx.vsol.residual_original <= 10.0 * ctx.cfg.vekua_tol;
        gj["vekua"] = g2;
        ok = ok && g2;
    }
    if (ctx.have_bending) {
        bool g3 = ctx.bf.residual_rel <= ctx.cfg.bending_tol;
        gj["bending"] = g3;
        ok = ok && g3;
    }
    gj["all"] = ok;
    return ok;
}

void write_report(PipelineContext& ctx) {
    auto& cj = ctx.report["config"];
    cj["surface"] = ctx.cfg.surface;
    cj["n"] = ctx.cfg.n;
    cj["k"] = ctx.cfg.k;
    cj["sigmas"] = ctx.cfg.sigmas;
    cj["planar_tol"] = ctx.cfg.planar_tol;
    cj["fi_tol"] = ctx.cfg.fi_tol;
    cj["vekua_tol"] = ctx.cfg.vekua_tol;
    cj["bending_tol"] = ctx.cfg.bending_tol;
    cj["outdir"] = ctx.cfg.outdir;
    atomic_write_text(ctx.cfg.outdir + "/report.json", ctx.report.dump(2) + "\n");
}

bool run_pipeline(PipelineContext& ctx) {
    ctx.cfg.validate();
    stage_analyze(ctx);
    save_analyze(ctx);
    stage_integral(ctx);
    save_integral(ctx);
    stage_vekua(ctx);
    save_vekua(ctx);
    stage_bend(ctx);
    save_bending(ctx);
    stage_deform(ctx);
    save_deform(ctx);
    bool ok = evaluate_gates(ctx);
    write_report(ctx);
    return ok;
}

bool verify_from_disk(PipelineContext& ctx, std::ostream& out) {
    stage_analyze(ctx);
    auto lambda = asymptotic_direction(ctx.forms, ctx.grid);
    ctx.field = build_field(ctx.forms, lambda, ctx.grid);

    double qmax = 0;
    for (int j = 0; j < ctx.grid.ny; ++j)
        for (int i = 0; i < ctx.grid.nx; ++i) {
            if (!ctx.grid.inside(i, j)) continue;
            Complex q = lambda(i, j) * lambda(i, j) + 2.0 * ctx.forms.f(i, j) * lambda(i, j) +
                        ctx.forms.e(i, j) * ctx.forms.g(i, j);
            qmax = std::max(qmax, std::abs(q) /
                                      (1.0 + std::abs(ctx.forms.e(i, j) * ctx.forms.g(i, j))));
        }
    out << "quadratic_identity_max = " << qmax << "\n";

    load_integral(ctx);
    ComplexField LZ = apply_L(ctx.field, ctx.fi.Z, ctx.grid);
    double num = 0, den = 0;
    for (int j = 0; j < ctx.grid.ny; ++j)
        for (int i = 0; i < ctx.grid.nx; ++i) {
            if (!ctx.grid.inside(i, j) || ctx.field.degenerate(i, j) ||
                !ctx.grid.stencil_ok[ctx.grid.idx(i, j)])
                continue;
            num += std::norm(LZ(i, j));
            double grad = std::abs(ctx.fi.Zs(i, j)) + std::abs(ctx.fi.Zt(i, j));
            den += grad * grad;
        }
    ctx.fi.residual_rel = std::sqrt(num / den);
    ctx.injectivity = check_injectivity(ctx.fi, ctx.grid, ctx.field, ctx.forms.planar);
    out << "first_integral_residual_rel = " << ctx.fi.residual_rel << "\n";
    out << "injectivity_pass = " << (ctx.injectivity.pass ? "true" : "false") << "\n";

    load_vekua(ctx);
    // one transform application re-evaluates the stored solution's residual
    std::vector<Complex> phi(ctx.problem.nodes.size());
    for (size_t k = 0; k < phi.size(); ++k) {
        switch (ctx.cfg.phi_seed) {
            case PhiSeed::One: phi[k] = Complex(1, 0); break;
            case PhiSeed::Z: phi[k] = ctx.problem.zeta[k]; break;
            case PhiSeed::Z2: phi[k] = ctx.problem.zeta[k] * ctx.problem.zeta[k]; break;
        }
    }
    std::vector<Complex> src(phi.size());
    for (size_t k = 0; k < src.size(); ++k)
        src[k] = ctx.problem.a[k] * ctx.vsol.W1[k] +
                 ctx.problem.b[k] * ctx.problem.Hphase[k] * std::conj(ctx.vsol.W1[k]);
    auto T = pompeiu_transform(ctx.problem.zeta, ctx.problem.area, src, ctx.problem.zeta);
    ctx.vsol.alg_residual.assign(phi.size(), 0.0);
    ctx.vsol.residual_modified = 0;
    ctx.vsol.residual_original = 0;
    for (size_t k = 0; k < phi.size(); ++k) {
        double r = std::abs(ctx.vsol.W1[k] - phi[k] - T[k]);
        ctx.vsol.alg_residual[k] = r;
        ctx.vsol.residual_modified = std::max(ctx.vsol.residual_modified, r);
        if (!ctx.problem.excluded[k])
            ctx.vsol.residual_original =
                std::max(ctx.vsol.residual_original, std::abs(ctx.problem.H[k]) * r);
    }
    out << "vekua_residual_modified = " << ctx.vsol.residual_modified << "\n";
    out << "vekua_residual_original = " << ctx.vsol.residual_original << "\n";

    load_bending(ctx);
    bending_residual(ctx.jet, ctx.bf, ctx.grid, ctx.forms.planar);
    ctx.rfit = rigid_fit(ctx.jet.R, ctx.bf.U, ctx.grid);
    out << "bending_residual_rel = " << ctx.bf.residual_rel << "\n";
    out << "rigid_fit_relative_residual = " << ctx.rfit.relative_residual << "\n";
    out << "nontrivial = " << (ctx.rfit.nontrivial ? "true" : "false") << "\n";

    ctx.family = make_deformation(ctx.jet, ctx.bf.U, ctx.cfg.sigmas, ctx.grid);
    ctx.have_deform = true;
    out << "defect_slope = " << ctx.family.slope << "\n";
    out << "pm_identity_err = " << ctx.family.pm_identity_err << "\n";

    return evaluate_gates(ctx);
}

} // namespace bend
