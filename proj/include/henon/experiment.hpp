// Experiment runner: strict config parsing for the CLI subcommands, result
// records with config hashes, and the per-subcommand drivers. A record is
// reproducible: identical (config, seed, version) gives byte-identical
// results and artifacts; only the timestamps are volatile.
#pragma once

#include <chrono>
#include <ctime>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "henon/ergodic.hpp"
#include "henon/io.hpp"
#include "henon/manifolds.hpp"
#include "henon/periodic.hpp"
#include "henon/potential.hpp"
#include "henon/shadowing.hpp"
#include "henon/version.hpp"

namespace henon {

struct SaddleSelect {
    int period = 1;
    int index = 0; // into the lex-sorted saddle list at that period
};

struct CensusParams {
    int n_max = 6;
    int grid = 40;
    bool itineraries = true;
    double newton_tol = 1e-12;
    long long slack = 0;
};

struct SliceParams {
    std::string kind = "affine"; // or "unstable"
    std::vector<double> center{0, 0, 0, 0};
    std::vector<double> tangent{1, 0, 0, 0};
    double radius = 2.0;
    int resolution = 256;
    double tol = 1e-8;
    long cap = 2000;
    SaddleSelect saddle{};
    int series_order = 25;
    double series_tol = 1e-10;
};

struct HomoclinicParams {
    SaddleSelect saddle{};
    double r1 = 0.0; // 0: auto from the validity radius
    double r2 = 0.0; // 0: one fundamental annulus r1*|lambda_u|
    int angular_steps = 96;
    int radial_steps = 12;
    int max_land = 80;
    int scan_k_max = 14;
    double transversality_floor = 1e-3;
    int series_order = 25;
    double series_tol = 1e-10;
};

struct ShadowParams {
    SaddleSelect saddle{};
    int N_min = 4;
    int N_max = 16;
    int homoclinic_index = 0;
    HomoclinicParams search{};
};

struct LyapunovParams {
    int n_max = 8;
    CensusParams census{};
    long birkhoff_length = 1200;
    int ensemble = 6;
};

struct RenderParams {
    std::vector<double> center{0, 0, 0, 0};
    std::vector<double> tangent{1, 0, 0, 0};
    std::vector<double> conormal{0, 0, 1, 0}; // second axis of the image plane
    double radius = 3.0;
    int resolution = 512;
    double tol = 1e-8;
    long cap = 512;
};

struct ExperimentConfig {
    std::optional<HenonMap> map;
    uint64_t seed = 1;
    int threads = 0; // 0: hardware
    std::string precision = "double";
    std::string subcommand;
    CensusParams census{};
    SliceParams slice{};
    HomoclinicParams homoclinic{};
    ShadowParams shadow{};
    LyapunovParams lyapunov{};
    RenderParams render{};
    json canonical; // config as parsed, for hashing and the record echo
};

namespace cfgdetail {

inline void parse_vec4(StrictObject& o, const std::string& key, std::vector<double>& out) {
    const json* p = o.get(key);
    if (!p) return;
    if (!p->is_array() || p->size() != 4) {
        o.errors().push_back(o.path() + "." + key + ": expected [z_re, z_im, w_re, w_im]");
        return;
    }
    out.clear();
    for (const auto& v : *p) {
        if (!v.is_number()) {
            o.errors().push_back(o.path() + "." + key + ": expected numbers");
            return;
        }
        out.push_back(v.get<double>());
    }
}

inline SaddleSelect parse_saddle(StrictObject& parent, const std::string& key,
                                 std::vector<std::string>& errors) {
    SaddleSelect s;
    const json* p = parent.get(key);
    if (!p) return s;
    StrictObject o(*p, parent.path() + "." + key, errors);
    s.period = static_cast<int>(o.integer_or("period", 1));
    s.index = static_cast<int>(o.integer_or("index", 0));
    if (s.period < 1) errors.push_back(o.path() + ".period: must be >= 1");
    if (s.index < 0) errors.push_back(o.path() + ".index: must be >= 0");
    return s;
}

inline CensusParams parse_census(const json& j, const std::string& path,
                                 std::vector<std::string>& errors) {
    CensusParams p;
    StrictObject o(j, path, errors);
    p.n_max = static_cast<int>(o.integer_or("n_max", p.n_max));
    p.grid = static_cast<int>(o.integer_or("grid", p.grid));
    p.itineraries = o.boolean_or("itineraries", p.itineraries);
    p.newton_tol = o.number_or("newton_tol", p.newton_tol);
    p.slack = o.integer_or("slack", p.slack);
    if (p.n_max < 1) errors.push_back(path + ".n_max: must be >= 1");
    return p;
}

inline HomoclinicParams parse_homoclinic(const json& j, const std::string& path,
                                         std::vector<std::string>& errors) {
    HomoclinicParams p;
    StrictObject o(j, path, errors);
    p.saddle = parse_saddle(o, "saddle", errors);
    p.r1 = o.number_or("r1", p.r1);
    p.r2 = o.number_or("r2", p.r2);
    p.angular_steps = static_cast<int>(o.integer_or("angular_steps", p.angular_steps));
    p.radial_steps = static_cast<int>(o.integer_or("radial_steps", p.radial_steps));
    p.max_land = static_cast<int>(o.integer_or("max_land", p.max_land));
    p.scan_k_max = static_cast<int>(o.integer_or("scan_k_max", p.scan_k_max));
    p.transversality_floor = o.number_or("transversality_floor", p.transversality_floor);
    p.series_order = static_cast<int>(o.integer_or("series_order", p.series_order));
    p.series_tol = o.number_or("series_tol", p.series_tol);
    if (p.r1 < 0.0) errors.push_back(path + ".r1: must be positive (or 0 for auto)");
    return p;
}

} // namespace cfgdetail

inline const std::vector<std::string>& known_subcommands() {
    static const std::vector<std::string> v{"census", "slice",    "homoclinic",
                                            "shadow", "lyapunov", "render"};
    return v;
}

// Parse and validate; errors are collected exhaustively.
inline ExperimentConfig parse_experiment_config(const json& doc, const std::string& subcommand,
                                                std::vector<std::string>& errors) {
    ExperimentConfig cfg;
    cfg.subcommand = subcommand;
    cfg.canonical = doc;
    StrictObject root(doc, "config", errors);
    const json* mj = root.require("map");
    if (mj) {
        auto factors = parse_map_factors(*mj, "config.map", errors);
        if (!factors.empty()) cfg.map.emplace(std::move(factors));
    }
    cfg.seed = static_cast<uint64_t>(root.integer_or("seed", 1));
    cfg.threads = static_cast<int>(root.integer_or("threads", 0));
    cfg.precision = root.string_or("precision", "double");
    if (cfg.precision != "double" && cfg.precision != "extended")
        errors.push_back("config.precision: must be \"double\" or \"extended\"");
    for (const auto& sc : known_subcommands()) {
        const json* block = root.get(sc);
        if (!block && sc == subcommand &&
            (sc == "census" || sc == "lyapunov"))
            continue; // these run entirely on defaults
        if (!block) continue;
        if (sc == "census") {
            cfg.census = cfgdetail::parse_census(*block, "config.census", errors);
        } else if (sc == "slice") {
            StrictObject o(*block, "config.slice", errors);
            cfg.slice.kind = o.string_or("kind", cfg.slice.kind);
            if (cfg.slice.kind != "affine" && cfg.slice.kind != "unstable")
                errors.push_back("config.slice.kind: must be \"affine\" or \"unstable\"");
            cfgdetail::parse_vec4(o, "center", cfg.slice.center);
            cfgdetail::parse_vec4(o, "tangent", cfg.slice.tangent);
            cfg.slice.radius = o.number_or("radius", cfg.slice.radius);
            cfg.slice.resolution = static_cast<int>(o.integer_or("resolution", cfg.slice.resolution));
            cfg.slice.tol = o.number_or("tol", cfg.slice.tol);
            cfg.slice.cap = o.integer_or("cap", cfg.slice.cap);
            cfg.slice.saddle = cfgdetail::parse_saddle(o, "saddle", errors);
            cfg.slice.series_order = static_cast<int>(o.integer_or("series_order", 25));
            cfg.slice.series_tol = o.number_or("series_tol", 1e-10);
            if (cfg.slice.resolution < 16)
                errors.push_back("config.slice.resolution: must be >= 16");
            if (cfg.slice.radius <= 0.0) errors.push_back("config.slice.radius: must be positive");
        } else if (sc == "homoclinic") {
            cfg.homoclinic = cfgdetail::parse_homoclinic(*block, "config.homoclinic", errors);
        } else if (sc == "shadow") {
            StrictObject o(*block, "config.shadow", errors);
            cfg.shadow.saddle = cfgdetail::parse_saddle(o, "saddle", errors);
            cfg.shadow.N_min = static_cast<int>(o.integer_or("N_min", cfg.shadow.N_min));
            cfg.shadow.N_max = static_cast<int>(o.integer_or("N_max", cfg.shadow.N_max));
            cfg.shadow.homoclinic_index =
                static_cast<int>(o.integer_or("homoclinic_index", 0));
            const json* hb = o.get("search");
            if (hb) cfg.shadow.search = cfgdetail::parse_homoclinic(*hb, "config.shadow.search", errors);
            cfg.shadow.search.saddle = cfg.shadow.saddle;
            if (cfg.shadow.N_min < 1 || cfg.shadow.N_max < cfg.shadow.N_min)
                errors.push_back("config.shadow: need 1 <= N_min <= N_max");
        } else if (sc == "lyapunov") {
            StrictObject o(*block, "config.lyapunov", errors);
            cfg.lyapunov.n_max = static_cast<int>(o.integer_or("n_max", cfg.lyapunov.n_max));
            const json* cb = o.get("census");
            if (cb) cfg.lyapunov.census = cfgdetail::parse_census(*cb, "config.lyapunov.census", errors);
            cfg.lyapunov.birkhoff_length = o.integer_or("birkhoff_length", cfg.lyapunov.birkhoff_length);
            cfg.lyapunov.ensemble = static_cast<int>(o.integer_or("ensemble", cfg.lyapunov.ensemble));
            if (cfg.lyapunov.n_max < 1) errors.push_back("config.lyapunov.n_max: must be >= 1");
        } else if (sc == "render") {
            StrictObject o(*block, "config.render", errors);
            cfgdetail::parse_vec4(o, "center", cfg.render.center);
            cfgdetail::parse_vec4(o, "tangent", cfg.render.tangent);
            cfgdetail::parse_vec4(o, "conormal", cfg.render.conormal);
            cfg.render.radius = o.number_or("radius", cfg.render.radius);
            cfg.render.resolution = static_cast<int>(o.integer_or("resolution", cfg.render.resolution));
            cfg.render.tol = o.number_or("tol", cfg.render.tol);
            cfg.render.cap = o.integer_or("cap", cfg.render.cap);
            if (cfg.render.resolution < 16)
                errors.push_back("config.render.resolution: must be >= 16");
        }
    }
    bool known = false;
    for (const auto& sc : known_subcommands()) known = known || sc == subcommand;
    if (!known) errors.push_back("unknown subcommand '" + subcommand + "'");
    return cfg;
}

// Feasibility warnings on a syntactically valid config.
inline std::vector<std::string> feasibility_warnings(const ExperimentConfig& cfg) {
    std::vector<std::string> warn;
    if (!cfg.map) return warn;
    if (cfg.subcommand == "shadow") {
        // crude multiplier bound: product over factors of sup |p'| on |z| <= R
        double R = filtration_radius(*cfg.map);
        double log_bound = 0.0;
        for (const auto& f : cfg.map->factors()) {
            double sup = f.degree() * std::pow(R, f.degree() - 1);
            for (size_t j = 1; j < f.coeffs().size(); ++j)
                sup += double(j) * std::abs(f.coeffs()[j]) * std::pow(R, double(j) - 1.0);
            log_bound += std::log(sup + std::abs(f.a()));
        }
        double n_big = 2.0 * cfg.shadow.N_max + 24.0;
        if (n_big * log_bound > 120.0 * std::numbers::ln2 && cfg.precision != "extended")
            warn.push_back("shadow: N_max puts multiplier magnitudes past the double budget; "
                           "log-space columns stay valid but consider precision=extended");
    }
    if (cfg.subcommand == "census" || cfg.subcommand == "lyapunov") {
        const CensusParams& cp =
            cfg.subcommand == "census" ? cfg.census : cfg.lyapunov.census;
        double dn = std::pow(double(cfg.map->degree()),
                             cfg.subcommand == "census" ? cfg.census.n_max : cfg.lyapunov.n_max);
        if (dn > 100000.0)
            warn.push_back("census: d^n exceeds 1e5 points; enumeration will be slow and likely "
                           "incomplete");
        (void)cp;
    }
    return warn;
}

// --- records ---

struct ExperimentRecord {
    json doc;
    std::string status; // complete | partial | error
};

namespace recdetail {

inline std::string utc_now() {
    auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline json orbit_json(const PeriodicOrbit& o) {
    json pts = json::array();
    for (const auto& p : o.points)
        pts.push_back(json::array({p.z.real(), p.z.imag(), p.w.real(), p.w.imag()}));
    const char* cls = o.cls == OrbitClass::saddle   ? "saddle"
                      : o.cls == OrbitClass::sink   ? "sink"
                      : o.cls == OrbitClass::source ? "source"
                                                    : "neutral";
    return json{{"period", o.period},
                {"lower_period", o.lower_period},
                {"class", cls},
                {"neutral_flagged", o.neutral_flagged},
                {"points", pts},
                {"lambda_u", json_complex(o.lambda_u)},
                {"lambda_s", json_complex(o.lambda_s)},
                {"log_abs_lambda_u", o.log_abs_lambda_u},
                {"arg_lambda_u", o.arg_lambda_u},
                {"chi_u", o.chi_u},
                {"residual", o.residual}};
}

inline json slice_json(const SliceSample& s) {
    json b = json::array();
    for (const auto& z : s.boundary) b.push_back(json::array({z.real(), z.imag()}));
    return json{{"resolution", s.resolution},
                {"radius", s.radius},
                {"zero_threshold", s.zero_threshold},
                {"nonharmonic", s.nonharmonic},
                {"rescale", s.rescale},
                {"boundary_count", s.boundary.size()},
                {"boundary", b}};
}

inline json geometry_json(const SliceGeometryReport& g) {
    return json{{"theta", g.theta},
                {"residual", g.residual},
                {"free_theta", g.free_theta},
                {"free_residual", g.free_residual},
                {"box_dimension", g.box_dimension},
                {"box_r2", g.box_r2},
                {"scales_used", g.scales_used},
                {"degraded", g.degraded}};
}

} // namespace recdetail

// saddles at the selected period, lex order
inline std::vector<PeriodicOrbit> saddles_at(const HenonMap& map, const SaddleSelect& sel,
                                             const CensusParams& cp) {
    NewtonConfig nc;
    nc.tol = cp.newton_tol;
    SeedOptions so;
    so.grid = cp.grid;
    so.itineraries = cp.itineraries;
    FindResult fr = find_periodic(map, sel.period, standard_seeds(map, sel.period, so), nc);
    std::vector<PeriodicOrbit> out;
    for (auto& o : fr.orbits)
        if (o.cls == OrbitClass::saddle && !o.lower_period) out.push_back(o);
    return out;
}

class Runner {
public:
    Runner(ExperimentConfig cfg, std::string out_dir)
        : cfg_(std::move(cfg)), out_dir_(std::move(out_dir)) {}

    ExperimentRecord run() {
        namespace fs = std::filesystem;
        fs::create_directories(out_dir_);
        json rec;
        rec["schema_version"] = 1;
        rec["tool_version"] = kVersion;
        rec["subcommand"] = cfg_.subcommand;
        rec["config"] = cfg_.canonical;
        rec["config_hash"] = "fnv1a:" + hash_hex(fnv1a(cfg_.canonical.dump()));
        rec["seed"] = cfg_.seed;
        const std::string started = recdetail::utc_now();
        json results;
        json artifacts = json::array();
        std::string status = "complete";
        try {
            if (cfg_.subcommand == "census") run_census(results, artifacts);
            else if (cfg_.subcommand == "slice") run_slice(results, artifacts);
            else if (cfg_.subcommand == "homoclinic") run_homoclinic(results, artifacts);
            else if (cfg_.subcommand == "shadow") run_shadow(results, artifacts, status);
            else if (cfg_.subcommand == "lyapunov") run_lyapunov(results, artifacts);
            else if (cfg_.subcommand == "render") run_render(results, artifacts);
            else throw std::runtime_error("unknown subcommand " + cfg_.subcommand);
        } catch (const std::exception& e) {
            status = "error";
            results["error"] = e.what();
        }
        rec["results"] = results;
        rec["artifacts"] = artifacts;
        rec["status"] = status;
        rec["started_utc"] = started;    // volatile: excluded from determinism
        rec["finished_utc"] = recdetail::utc_now();
        write_file(out_dir_ + "/record.json", rec.dump(2) + "\n");
        return {rec, status};
    }

private:
    const HenonMap& map() const {
        if (!cfg_.map) throw std::runtime_error("config has no valid map");
        return *cfg_.map;
    }

    int threads() const { return cfg_.threads <= 0 ? hardware_threads() : cfg_.threads; }

    void emit(json& artifacts, const std::string& name, const std::string& data) {
        write_file(out_dir_ + "/" + name, data);
        artifacts.push_back(name);
    }

    void emit(json& artifacts, const std::string& name, const std::vector<uint8_t>& data) {
        write_file(out_dir_ + "/" + name, data);
        artifacts.push_back(name);
    }

    CensusResult run_census_core(const CensusParams& cp, int n_max) {
        CensusConfig cc;
        cc.newton.tol = cp.newton_tol;
        cc.seeds.grid = cp.grid;
        cc.seeds.itineraries = cp.itineraries;
        cc.slack = cp.slack;
        return census(map(), n_max, cc);
    }

    static std::string census_csv(const CensusResult& cen) {
        CsvWriter csv("n,fix_count,sper_count,ratio,mean_chi_u,weighted_chi_u,low_confidence");
        for (const auto& r : cen.rows)
            csv.row({std::to_string(r.n), std::to_string(r.fix_count),
                     std::to_string(r.sper_count), fmt17(r.ratio), fmt17(r.mean_chi_u),
                     fmt17(r.weighted_chi_u), r.low_confidence ? "1" : "0"});
        return csv.str();
    }

    void run_census(json& results, json& artifacts) {
        CensusResult cen = run_census_core(cfg_.census, cfg_.census.n_max);
        emit(artifacts, "census.csv", census_csv(cen));
        json orbits = json::array();
        for (const auto& level : cen.by_n) {
            json lv = json::array();
            for (const auto& o : level.orbits) lv.push_back(recdetail::orbit_json(o));
            orbits.push_back(lv);
        }
        emit(artifacts, "orbits.json", orbits.dump(2) + "\n");
        json rows = json::array();
        for (const auto& r : cen.rows)
            rows.push_back(json{{"n", r.n},
                                {"fix_count", r.fix_count},
                                {"sper_count", r.sper_count},
                                {"ratio", r.ratio},
                                {"mean_chi_u", r.mean_chi_u},
                                {"weighted_chi_u", r.weighted_chi_u},
                                {"low_confidence", r.low_confidence}});
        results["rows"] = rows;
    }

    void run_slice(json& results, json& artifacts) {
        SliceSample s;
        if (cfg_.slice.kind == "affine") {
            TransversalDisk disk = make_disk(
                {cplx(cfg_.slice.center[0], cfg_.slice.center[1]),
                 cplx(cfg_.slice.center[2], cfg_.slice.center[3])},
                {cplx(cfg_.slice.tangent[0], cfg_.slice.tangent[1]),
                 cplx(cfg_.slice.tangent[2], cfg_.slice.tangent[3])},
                cfg_.slice.radius);
            s = slice_green(map(), disk, cfg_.slice.resolution, cfg_.slice.tol, cfg_.slice.cap,
                            threads());
        } else {
            auto saddles = saddles_at(map(), cfg_.slice.saddle, cfg_.census);
            if (cfg_.slice.saddle.index >= static_cast<int>(saddles.size()))
                throw std::runtime_error("slice: saddle index out of range");
            const auto& saddle = saddles[static_cast<size_t>(cfg_.slice.saddle.index)];
            auto man = local_series(map(), saddle, ManifoldKind::unstable,
                                    cfg_.slice.series_order, cfg_.slice.series_tol);
            s = unstable_slice(map(), man, cfg_.slice.radius, cfg_.slice.resolution,
                               cfg_.slice.tol, cfg_.slice.cap, threads());
        }
        emit(artifacts, "slice.json", recdetail::slice_json(s).dump(2) + "\n");
        emit(artifacts, "slice.ppm", render_slice_ppm(s));
        results["nonharmonic"] = s.nonharmonic;
        results["boundary_count"] = s.boundary.size();
        results["rescale"] = s.rescale;
        if (s.boundary.size() >= 50)
            results["geometry"] = recdetail::geometry_json(slice_geometry(s));
    }

    struct HomoclinicSetup {
        PeriodicOrbit saddle;
        LocalManifold unstable, stable;
        SaddleChart chart;
        HomoclinicSearchResult found;
        double r1, r2;
    };

    HomoclinicSetup homoclinic_core(const HomoclinicParams& hp) {
        auto saddles = saddles_at(map(), hp.saddle, cfg_.census);
        if (hp.saddle.index >= static_cast<int>(saddles.size()))
            throw std::runtime_error("homoclinic: saddle index out of range");
        HomoclinicSetup hs{saddles[static_cast<size_t>(hp.saddle.index)],
                           local_series(map(), saddles[static_cast<size_t>(hp.saddle.index)],
                                        ManifoldKind::unstable, hp.series_order, hp.series_tol),
                           local_series(map(), saddles[static_cast<size_t>(hp.saddle.index)],
                                        ManifoldKind::stable, hp.series_order, hp.series_tol),
                           {},
                           {},
                           0.0,
                           0.0};
        hs.chart = build_chart(hs.saddle, hs.stable);
        hs.r1 = hp.r1 > 0.0 ? hp.r1 : 0.5 * hs.unstable.validity_radius;
        hs.r2 = hp.r2 > 0.0 ? hp.r2 : hs.r1 * std::abs(hs.saddle.lambda_u);
        HomoclinicConfig hc;
        hc.angular_steps = hp.angular_steps;
        hc.radial_steps = hp.radial_steps;
        hc.max_land = hp.max_land;
        hc.scan_k_max = hp.scan_k_max;
        hc.transversality_floor = hp.transversality_floor;
        hs.found = find_homoclinic(map(), hs.saddle, hs.unstable, hs.chart, hs.r1, hs.r2, hc);
        return hs;
    }

    static std::string homoclinic_csv(const HomoclinicSearchResult& r) {
        CsvWriter csv("zeta_re,zeta_im,landing_k,transversality");
        for (const auto& h : r.points)
            csv.row({fmt17(h.zeta.real()), fmt17(h.zeta.imag()), std::to_string(h.landing_k),
                     fmt17(h.transversality)});
        return csv.str();
    }

    void run_homoclinic(json& results, json& artifacts) {
        HomoclinicSetup hs = homoclinic_core(cfg_.homoclinic);
        emit(artifacts, "homoclinic.csv", homoclinic_csv(hs.found));
        results["saddle"] = recdetail::orbit_json(hs.saddle);
        results["annulus"] = json::array({hs.r1, hs.r2});
        results["count"] = hs.found.points.size();
        results["tangency_candidates"] = hs.found.tangencies.size();
        json pts = json::array();
        for (const auto& h : hs.found.points)
            pts.push_back(json{{"zeta", json_complex(h.zeta)},
                               {"landing_k", h.landing_k},
                               {"transversality", h.transversality},
                               {"point", json::array({h.point.z.real(), h.point.z.imag(),
                                                      h.point.w.real(), h.point.w.imag()})},
                               {"residual", h.residual}});
        results["points"] = pts;
    }

    void run_shadow(json& results, json& artifacts, std::string& status) {
        HomoclinicSetup hs = homoclinic_core(cfg_.shadow.search);
        if (hs.found.points.empty())
            throw std::runtime_error("shadow: no homoclinic point found in the annulus");
        if (cfg_.shadow.homoclinic_index >= static_cast<int>(hs.found.points.size()))
            throw std::runtime_error("shadow: homoclinic index out of range");
        const auto& h = hs.found.points[static_cast<size_t>(cfg_.shadow.homoclinic_index)];
        AsymptoticsConfig ac;
        if (cfg_.precision == "extended") ac.dd_threshold_bits = 0.0; // force dd pseudo-orbits
        AsymptoticsTable tab = multiplier_asymptotics(map(), hs.saddle, hs.unstable, hs.stable,
                                                      hs.chart, h, cfg_.shadow.N_min,
                                                      cfg_.shadow.N_max, ac);
        CsvWriter csv("n,lambda_u_log_re,lambda_u_arg,normalized_ratio_re,normalized_ratio_im,"
                      "succ_ratio_abs,mid_shadow_dist");
        for (const auto& r : tab.rows)
            csv.row({std::to_string(r.n), fmt17(r.log_abs_lambda_u), fmt17(r.arg_lambda_u),
                     fmt17(r.normalized_ratio.real()), fmt17(r.normalized_ratio.imag()),
                     fmt17(r.succ_ratio_abs), fmt17(r.mid_shadow_dist)});
        emit(artifacts, "asymptotics.csv", csv.str());
        results["saddle"] = recdetail::orbit_json(hs.saddle);
        results["homoclinic_zeta"] = json_complex(h.zeta);
        results["landing_k"] = h.landing_k;
        results["k"] = tab.k;
        results["rows"] = tab.rows.size();
        results["c_prime"] = json_complex(tab.c_prime);
        results["c_stable"] = json_complex(tab.c_stable);
        results["spread_last3"] = tab.spread_last3;
        results["spread_last3_stable"] = tab.spread_last3_s;
        results["failures"] = tab.failures;
        for (int parity : {0, 1}) {
            int count = 0;
            for (const auto& r : tab.rows) count += r.parity == parity;
            if (count >= 4) {
                Nu0Estimate nu = estimate_nu0(tab, hs.saddle, parity);
                results[parity == 0 ? "nu0" : "nu0_shifted"] =
                    json{{"value", json_complex(nu.value)},
                         {"uncertainty", nu.uncertainty},
                         {"rows_used", nu.rows_used}};
            }
        }
        if (tab.partial) status = "partial";
    }

    void run_lyapunov(json& results, json& artifacts) {
        CensusResult cen = run_census_core(cfg_.lyapunov.census, cfg_.lyapunov.n_max);
        emit(artifacts, "census.csv", census_csv(cen));
        ExponentEstimate sa = lyapunov_saddle_average(map(), cen, cfg_.lyapunov.n_max);
        results["saddle_average"] = json{{"value", sa.value},
                                         {"count_normalized", sa.count_normalized},
                                         {"dn_normalized", sa.dn_normalized},
                                         {"uncertainty", sa.uncertainty},
                                         {"n", sa.n},
                                         {"low_confidence", sa.low_confidence}};
        // mu-spread Birkhoff ensemble over top-level saddles, seeded draw
        const FindResult& top = cen.by_n.back();
        std::vector<size_t> saddle_idx;
        for (size_t i = 0; i < top.orbits.size(); ++i)
            if (top.orbits[i].cls == OrbitClass::saddle) saddle_idx.push_back(i);
        std::mt19937_64 rng(cfg_.seed);
        std::vector<size_t> chosen;
        for (int k = 0; k < cfg_.lyapunov.ensemble && !saddle_idx.empty(); ++k) {
            std::uniform_int_distribution<size_t> pick(0, saddle_idx.size() - 1);
            size_t j = pick(rng);
            chosen.push_back(saddle_idx[j]);
            saddle_idx.erase(saddle_idx.begin() + static_cast<long>(j));
        }
        json birk = json::array();
        double bsum = 0.0, bw = 0.0;
        for (size_t idx : chosen) {
            const auto& orb = top.orbits[idx];
            // whole cycles only, so the transported average is the exact orbit exponent
            long L = orb.period *
                     std::max<long>(1, cfg_.lyapunov.birkhoff_length / orb.period);
            ExponentEstimate be = lyapunov_birkhoff(map(), orb.points[0],
                                                    unstable_direction(orb), {L, 2});
            birk.push_back(json{{"orbit_period", orb.period},
                                {"value", be.value},
                                {"uncertainty", be.uncertainty}});
            bsum += be.value;
            bw += 1.0;
        }
        results["birkhoff_ensemble"] = birk;
        if (bw > 0) results["birkhoff_mean"] = bsum / bw;
        // spectra with the default schedule
        auto fns = default_test_functions();
        auto spectra = spectrum_series(map(), cen, fns);
        std::string header = "n,period,saddle,in_mask,chi_u";
        for (const auto& f : fns) header += "," + f.name;
        CsvWriter scsv(header);
        json sp_json = json::array();
        for (const auto& sp : spectra) {
            for (const auto& row : sp.rows) {
                std::vector<std::string> cells{std::to_string(sp.n),
                                               std::to_string(row.exact_period),
                                               row.saddle ? "1" : "0", row.in_mask ? "1" : "0",
                                               fmt17(row.chi_u)};
                for (double v : row.sums) cells.push_back(fmt17(v));
                scsv.row(cells);
            }
            json disp = json::array();
            for (double d : sp.dispersion) disp.push_back(d);
            json scales = json::array();
            for (double d : sp.scales) scales.push_back(d);
            sp_json.push_back(json{{"n", sp.n},
                                   {"rho_n", sp.rho_n},
                                   {"j_n", sp.j_n},
                                   {"mask_ratio", sp.mask_ratio},
                                   {"dispersion", disp},
                                   {"scales", scales}});
        }
        emit(artifacts, "spectrum.csv", scsv.str());
        results["spectra"] = sp_json;
        GapReport gap = lyapunov_gap_report(map(), cen);
        results["gap_report"] = json{{"chi_min", gap.chi_min},
                                     {"chi_max", gap.chi_max},
                                     {"min_witness", gap.min_witness},
                                     {"max_witness", gap.max_witness},
                                     {"chi_mu_hat", gap.chi_mu_hat},
                                     {"chi_mu_uncertainty", gap.chi_mu_uncertainty},
                                     {"gap_81", gap.gap_81},
                                     {"gap_82", gap.gap_82},
                                     {"low_confidence", gap.low_confidence}};
    }

    void run_render(json& results, json& artifacts) {
        const RenderParams& rp = cfg_.render;
        C2 center{cplx(rp.center[0], rp.center[1]), cplx(rp.center[2], rp.center[3])};
        C2 ex{cplx(rp.tangent[0], rp.tangent[1]), cplx(rp.tangent[2], rp.tangent[3])};
        C2 ey{cplx(rp.conormal[0], rp.conormal[1]), cplx(rp.conormal[2], rp.conormal[3])};
        double nx = norm_c2(ex), ny = norm_c2(ey);
        if (nx == 0.0 || ny == 0.0) throw std::runtime_error("render: zero axis vector");
        ex = {ex.z / nx, ex.w / nx};
        ey = {ey.z / ny, ey.w / ny};
        GreenEvaluator::Options go;
        go.tol = rp.tol;
        go.cap = rp.cap;
        GreenEvaluator ev(map(), go);
        const int n = rp.resolution;
        std::vector<int32_t> esc(static_cast<size_t>(n) * n, -1);
        parallel_for(threads(), n, [&](long i) {
            for (int j = 0; j < n; ++j) {
                double u = -rp.radius + 2.0 * rp.radius * j / (n - 1);
                double v = -rp.radius + 2.0 * rp.radius * i / (n - 1);
                C2 x{center.z + u * ex.z + v * ey.z, center.w + u * ex.w + v * ey.w};
                GreenValue g = ev.plus(x);
                esc[static_cast<size_t>(i) * n + j] =
                    g.status == GreenStatus::escaping ? static_cast<int32_t>(g.entry_step) : -1;
            }
        });
        long bounded = 0;
        int32_t tmax = 1;
        for (int32_t t : esc) {
            if (t < 0) ++bounded;
            else tmax = std::max(tmax, t);
        }
        std::string header = "P6\n" + std::to_string(n) + " " + std::to_string(n) + "\n255\n";
        std::vector<uint8_t> img(header.begin(), header.end());
        for (int32_t t : esc) {
            uint8_t r, g, b;
            if (t < 0) {
                r = g = b = 0;
            } else {
                double s = double(t) / double(tmax);
                r = static_cast<uint8_t>(40 + 215 * std::min(1.0, 1.2 * s));
                g = static_cast<uint8_t>(30 + 200 * std::min(1.0, 0.4 + 0.6 * s));
                b = static_cast<uint8_t>(90 + 165 * std::min(1.0, 1.0 - 0.7 * s));
            }
            img.push_back(r);
            img.push_back(g);
            img.push_back(b);
        }
        emit(artifacts, "render.ppm", img);
        results["bounded_cells"] = bounded;
        results["max_escape_time"] = tmax;
    }

    ExperimentConfig cfg_;
    std::string out_dir_;
};

} // namespace henon
