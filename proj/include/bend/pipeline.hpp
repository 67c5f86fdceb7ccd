#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "bend/asymptotic.hpp"
#include "bend/bending.hpp"
#include "bend/first_integral.hpp"
#include "bend/grid.hpp"
#include "bend/io.hpp"
#include "bend/surface.hpp"
#include "bend/vekua.hpp"

namespace bend {

struct RunConfig {
    std::string surface = "quartic";  // catalog name or "custom"
    std::string custom_expr;          // z(s,t) for custom surfaces
    std::string domain_override;      // region text, empty keeps the surface default
    std::vector<DeclaredPlanarPoint> custom_planar;
    int n = 65;
    int k = 2;
    std::vector<double> sigmas = {1e-1, 3e-2, 1e-2, 3e-3, 1e-3};
    double planar_tol = 1e-6;   // relative to max K
    double fi_tol = 5e-3;       // first-integral relative residual gate
    double vekua_tol = 1e-6;    // modified-equation solver tolerance
    double bending_tol = 2e-2;  // dR.dU relative residual gate
    std::string outdir = "out";
    PhiSeed phi_seed = PhiSeed::One;
    int dense_max_unknowns = 4096;
    bool strict_n = true;  // restrict n to {33, 65, 129, 257}

    void validate() const;
};

// flat key = value text; '#' comments; CLI flags override afterwards
RunConfig parse_config_file(const std::string& path);
void apply_config_line(RunConfig& cfg, const std::string& key, const std::string& value);

// Pipeline state: stages fill it left to right. Stage commands reload the
// expensive solves from disk instead of recomputing them.
struct PipelineContext {
    RunConfig cfg;
    DomainGrid grid;
    SurfaceDefinition def;
    SurfaceJet jet;
    FundamentalForms forms;
    std::vector<MuResult> mus;           // one per planar point
    std::vector<double> mk_used;         // vanishing order used by choose_M
    AsymptoticField field;
    double quadratic_identity_max = 0;
    FirstIntegral fi;
    bool have_fi = false;
    InjectivityReport injectivity;
    std::vector<LocalModelFit> local_fits;
    int M = 0;
    VekuaCoefficients coeffs;
    VekuaProblem problem;
    VekuaSolution vsol;
    bool have_vekua = false;
    ScalarBendingData uv;
    BendingField bf;
    RigidMotionFit rfit;
    bool have_bending = false;
    DeformationFamily family;
    bool have_deform = false;
    nlohmann::json report;
};

SurfaceDefinition make_surface(const RunConfig& cfg);

// stages; each assumes the previous ones ran (or were loaded)
void stage_analyze(PipelineContext& ctx);
void stage_integral(PipelineContext& ctx);
void stage_vekua(PipelineContext& ctx);
void stage_bend(PipelineContext& ctx);
void stage_deform(PipelineContext& ctx);

// artifact io under cfg.outdir
void save_analyze(const PipelineContext& ctx);
void save_integral(const PipelineContext& ctx);
void save_vekua(const PipelineContext& ctx);
void save_bending(const PipelineContext& ctx);
void save_deform(const PipelineContext& ctx);
void load_grid_for_stage(PipelineContext& ctx);   // grid.json must match cfg
void load_integral(PipelineContext& ctx);         // z.csv
void load_vekua(PipelineContext& ctx);            // w.csv
void load_bending(PipelineContext& ctx);          // uv.csv + bending.csv
void write_report(PipelineContext& ctx);

// quality gates (recorded in the report; CLI exit code 5 when any fails)
bool evaluate_gates(PipelineContext& ctx);

// full pipeline: analyze .. deform, artifacts, report; returns gate status
bool run_pipeline(PipelineContext& ctx);

// recompute residual summaries from stored fields, print one line each;
// returns gate status (no solver reruns)
bool verify_from_disk(PipelineContext& ctx, std::ostream& out);

} // namespace bend
