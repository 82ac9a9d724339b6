#include "abflux/scenario.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "abflux/errors.hpp"
#include "abflux/gauge.hpp"
#include "abflux/quadrature.hpp"
#include "abflux/schrodinger.hpp"
#include "abflux/transport.hpp"

namespace abflux {

namespace fs = std::filesystem;
using Complex = std::complex<double>;

// ---------------------------------------------------------------------------
// profiles and families

std::pair<std::function<double(double)>, std::function<double(double)>> bump_profile(double amp,
                                                                                     double tc,
                                                                                     double eps) {
    Mollifier m(eps);
    auto e = [m, amp, tc](double t) { return amp * m(t - tc); };
    auto de = [m, amp, tc](double t) { return amp * m.derivative(t - tc); };
    return {e, de};
}

std::vector<BrokenRay> random_ray_family(const Domain& domain, int n, double t0, uint64_t seed,
                                         int max_reflections) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<BrokenRay> out;
    out.reserve(n);
    int attempts = 0;
    const int max_attempts = 100 * std::max(1, n);

    auto boundary_point = [&](double u, Vec2& pt, Vec2& inward) {
        const OuterRegion& o = domain.outer;
        if (o.is_disk) {
            const double ang = 2.0 * M_PI * u;
            const Vec2 nrm(std::cos(ang), std::sin(ang));
            pt = o.center + o.radius * nrm;
            inward = -nrm;
        } else {
            const double w = o.hi.x() - o.lo.x(), h = o.hi.y() - o.lo.y();
            const double per = 2.0 * (w + h);
            double s = u * per;
            if (s < w) {
                pt = {o.lo.x() + s, o.lo.y()};
                inward = {0, 1};
            } else if ((s -= w) < h) {
                pt = {o.hi.x(), o.lo.y() + s};
                inward = {-1, 0};
            } else if ((s -= h) < w) {
                pt = {o.hi.x() - s, o.hi.y()};
                inward = {0, -1};
            } else {
                s -= w;
                pt = {o.lo.x(), o.hi.y() - s};
                inward = {1, 0};
            }
        }
    };

    while (static_cast<int>(out.size()) < n && attempts++ < max_attempts) {
        Vec2 pt, inward;
        boundary_point(unif(rng), pt, inward);
        // aim at a random interior point so the family mixes 0- and >=1-
        // reflection rays
        const double ang = 2.0 * M_PI * unif(rng);
        Vec2 target;
        if (domain.outer.is_disk) {
            const double r = 0.8 * domain.outer.radius * std::sqrt(unif(rng));
            target = domain.outer.center + r * Vec2(std::cos(ang), std::sin(ang));
        } else {
            target = {domain.outer.lo.x() + unif(rng) * (domain.outer.hi.x() - domain.outer.lo.x()),
                      domain.outer.lo.y() + unif(rng) * (domain.outer.hi.y() - domain.outer.lo.y())};
        }
        Vec2 dir = target - pt;
        if (dir.norm() < 1e-9 || dir.dot(inward) <= 1e-3) continue;
        dir.normalize();
        try {
            out.push_back(trace_broken_ray(pt + 1e-9 * inward, dir, t0, domain, max_reflections));
        } catch (const Error&) {
            continue;  // trapped / tangential: resample
        }
    }
    if (static_cast<int>(out.size()) < n)
        throw InvalidScenario("random_ray_family: could not produce the requested family");
    return out;
}

// ---------------------------------------------------------------------------
// schema validation

namespace {

void check_keys(const Json& obj, const std::string& path, const std::set<std::string>& required,
                const std::set<std::string>& optional, std::vector<Diagnostic>& out) {
    if (!obj.is_object()) {
        out.push_back({Diagnostic::Level::Error, path, "expected an object"});
        return;
    }
    for (const auto& [k, v] : obj.items()) {
        (void)v;
        if (!required.count(k) && !optional.count(k))
            out.push_back({Diagnostic::Level::Error, path + "." + k, "unknown key"});
    }
    for (const auto& k : required)
        if (!obj.contains(k))
            out.push_back({Diagnostic::Level::Error, path + "." + k, "missing required key"});
}

bool is_vec2(const Json& j) {
    return j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number();
}

Vec2 to_vec2(const Json& j) {
    if (!is_vec2(j)) throw ConfigInvalid("expected a 2-vector [x1, x2]");
    return {j[0].get<double>(), j[1].get<double>()};
}

const std::set<std::string> kTasks = {"trace-rays",       "ray-transforms",
                                      "holonomy",         "equivalence",
                                      "nonabelian-radon", "schrodinger-boundary-data",
                                      "dtn",              "shielded-demo"};

void validate_profile(const Json& j, const std::string& path, std::vector<Diagnostic>& out) {
    check_keys(j, path, {"type", "amp", "tc", "eps"}, {}, out);
    if (j.is_object() && j.value("type", "") != "bump")
        out.push_back({Diagnostic::Level::Error, path + ".type", "unknown profile type"});
}

void validate_potential(const Json& j, const std::string& path, std::vector<Diagnostic>& out) {
    if (!j.is_object() || !j.contains("type")) {
        out.push_back({Diagnostic::Level::Error, path, "potential needs a type"});
        return;
    }
    const std::string type = j["type"].get<std::string>();
    if (type == "zero") {
        check_keys(j, path, {"type"}, {"support_radius"}, out);
    } else if (type == "vortex") {
        check_keys(j, path, {"type", "flux", "core_radius", "support_radius"}, {"center"}, out);
    } else if (type == "shielded-electric" || type == "shielded-magnetic") {
        check_keys(j, path, {"type", "v0", "r1", "delta", "outer_radius", "t_end", "profile"}, {},
                   out);
        if (j.contains("profile")) validate_profile(j["profile"], path + ".profile", out);
        if (j.contains("delta") && j.contains("r1") &&
            j["delta"].get<double>() > j["r1"].get<double>() / 4.0)
            out.push_back({Diagnostic::Level::Error, path + ".delta",
                           "mollifier exceeds shielding bound (delta > r1/4)"});
    } else {
        out.push_back({Diagnostic::Level::Error, path + ".type", "unknown potential type"});
    }
}

void validate_gauge(const Json& j, const std::string& path, std::vector<Diagnostic>& out) {
    check_keys(j, path, {}, {"m", "bump"}, out);
    if (j.contains("bump"))
        check_keys(j["bump"], path + ".bump", {"amplitude", "center", "width"}, {"time_freq"},
                   out);
    if (j.contains("m") && !j["m"].is_array())
        out.push_back({Diagnostic::Level::Error, path + ".m", "expected an integer array"});
}

void validate_domain(const Json& j, const std::string& path, std::vector<Diagnostic>& out) {
    check_keys(j, path, {"outer"}, {"obstacles", "t_end"}, out);
    if (!j.is_object()) return;
    if (j.contains("outer")) {
        const Json& o = j["outer"];
        const std::string type = o.is_object() ? o.value("type", "") : "";
        if (type == "disk")
            check_keys(o, path + ".outer", {"type", "center", "radius"}, {}, out);
        else if (type == "rect")
            check_keys(o, path + ".outer", {"type", "lo", "hi"}, {}, out);
        else
            out.push_back({Diagnostic::Level::Error, path + ".outer.type",
                           "outer region must be disk or rect"});
    }
    if (j.contains("obstacles")) {
        if (!j["obstacles"].is_array()) {
            out.push_back({Diagnostic::Level::Error, path + ".obstacles", "expected an array"});
        } else {
            int i = 0;
            for (const Json& ob : j["obstacles"]) {
                const std::string p = path + ".obstacles[" + std::to_string(i++) + "]";
                const std::string type = ob.is_object() ? ob.value("type", "") : "";
                if (type == "disk")
                    check_keys(ob, p, {"type", "center", "radius"}, {"motion"}, out);
                else if (type == "polygon")
                    check_keys(ob, p, {"type", "vertices"}, {"motion"}, out);
                else
                    out.push_back(
                        {Diagnostic::Level::Error, p + ".type", "obstacle must be disk or polygon"});
                if (ob.is_object() && ob.contains("motion"))
                    check_keys(ob["motion"], p + ".motion", {"type", "velocity"}, {}, out);
            }
        }
    }
}

void validate_grid(const Json& j, const std::string& path, std::vector<Diagnostic>& out) {
    check_keys(j, path, {"lo", "hi", "nx", "ny", "dt", "nt"}, {}, out);
    if (j.is_object()) {
        if (j.contains("nx") && j["nx"].get<int>() < 16)
            out.push_back({Diagnostic::Level::Error, path + ".nx", "grid counts must be >= 16"});
        if (j.contains("ny") && j["ny"].get<int>() < 16)
            out.push_back({Diagnostic::Level::Error, path + ".ny", "grid counts must be >= 16"});
    }
}

Domain build_domain(const Json& j);

void physical_checks(const Json& cfg, std::vector<Diagnostic>& out) {
    if (!cfg.contains("domain")) return;
    Domain dom;
    try {
        dom = build_domain(cfg["domain"]);
        dom.validate();
    } catch (const Error& e) {
        out.push_back({Diagnostic::Level::Error, "domain", e.what()});
        return;
    }
    // obstacle containment over the whole motion
    for (size_t k = 0; k < dom.obstacles.size(); ++k) {
        for (int s = 0; s <= 64; ++s) {
            const double t = dom.t_end * s / 64.0;
            const Obstacle& ob = dom.obstacles[k];
            const double margin = ob.bounding_radius();
            if (dom.outer.boundary_distance(ob.center(t)) < margin) {
                out.push_back({Diagnostic::Level::Error,
                               "domain.obstacles[" + std::to_string(k) + "]",
                               "obstacle leaves the outer region at t = " + std::to_string(t)});
                break;
            }
        }
    }
    // grid vs obstacle speed sanity for PDE tasks
    const std::string task = cfg.value("task", "");
    if ((task == "schrodinger-boundary-data" || task == "dtn") && cfg.contains("params") &&
        cfg["params"].contains("grid")) {
        const Json& g = cfg["params"]["grid"];
        if (g.contains("lo") && g.contains("hi") && g.contains("nx") && g.contains("dt")) {
            const double h =
                (g["hi"][0].get<double>() - g["lo"][0].get<double>()) / (g["nx"].get<int>() - 1);
            double vmax = 0.0;
            for (const Obstacle& ob : dom.obstacles)
                for (int s = 0; s <= 16; ++s)
                    vmax = std::max(vmax, ob.velocity(dom.t_end * s / 16.0).norm());
            if (g["dt"].get<double>() * vmax >= h)
                out.push_back({Diagnostic::Level::Warning, "params.grid.dt",
                               "dt * obstacle speed >= h: mask may skip cells"});
        }
    }
}

}  // namespace

std::vector<Diagnostic> validate_config(const Json& cfg) {
    std::vector<Diagnostic> out;
    check_keys(cfg, "", {"schema_version", "name", "task"},
               {"seed", "domain", "potential", "potential_pair", "params"}, out);
    if (!cfg.is_object()) return out;
    if (cfg.contains("schema_version") && cfg["schema_version"] != 1)
        out.push_back({Diagnostic::Level::Error, "schema_version", "unsupported schema version"});
    const std::string task = cfg.value("task", "");
    if (cfg.contains("task") && !kTasks.count(task))
        out.push_back({Diagnostic::Level::Error, "task", "unknown task '" + task + "'"});

    auto need = [&](const char* key) {
        if (!cfg.contains(key))
            out.push_back({Diagnostic::Level::Error, key,
                           std::string("task '") + task + "' requires '" + key + "'"});
    };
    if (task == "trace-rays" || task == "ray-transforms" || task == "equivalence" ||
        task == "schrodinger-boundary-data" || task == "dtn")
        need("domain");
    if (task == "holonomy" || task == "schrodinger-boundary-data" || task == "dtn")
        need("potential");
    if (task == "ray-transforms" || task == "equivalence") need("potential_pair");

    if (cfg.contains("domain")) validate_domain(cfg["domain"], "domain", out);
    if (cfg.contains("potential")) validate_potential(cfg["potential"], "potential", out);
    if (cfg.contains("potential_pair")) {
        const Json& pp = cfg["potential_pair"];
        if (pp.is_object() && pp.contains("a") && pp.contains("b")) {
            check_keys(pp, "potential_pair", {"a", "b"}, {}, out);
            validate_potential(pp["a"], "potential_pair.a", out);
            validate_potential(pp["b"], "potential_pair.b", out);
        } else if (pp.is_object() && pp.contains("base")) {
            check_keys(pp, "potential_pair", {"base", "gauge"}, {}, out);
            validate_potential(pp["base"], "potential_pair.base", out);
            if (pp.contains("gauge")) validate_gauge(pp["gauge"], "potential_pair.gauge", out);
        } else {
            out.push_back({Diagnostic::Level::Error, "potential_pair",
                           "needs either {a, b} or {base, gauge}"});
        }
    }

    const Json params = cfg.value("params", Json::object());
    if (task == "trace-rays") {
        check_keys(params, "params", {"n_rays"}, {"t0", "max_reflections"}, out);
    } else if (task == "ray-transforms") {
        check_keys(params, "params", {"n_rays"}, {"t0", "tolerance"}, out);
    } else if (task == "holonomy") {
        check_keys(params, "params", {"loop"}, {"expected", "tolerance"}, out);
        if (params.contains("loop"))
            check_keys(params["loop"], "params.loop", {"center", "radius", "t"}, {"segments"},
                       out);
    } else if (task == "equivalence") {
        check_keys(params, "params", {"t_samples", "clearance"},
                   {"tol_h", "expect", "expected_windings", "roundtrip_tolerance",
                    "witness_expected", "witness_tolerance"},
                   out);
    } else if (task == "nonabelian-radon") {
        check_keys(params, "params", {}, {"h", "offsets", "tolerance"}, out);
    } else if (task == "schrodinger-boundary-data") {
        check_keys(params, "params", {"grid"},
                   {"initial", "drive", "potentials_static", "norm_drift_tolerance",
                    "csv_stride_nodes", "csv_stride_steps"},
                   out);
        if (params.contains("grid")) validate_grid(params["grid"], "params.grid", out);
    } else if (task == "dtn") {
        check_keys(params, "params", {"grid"}, {"drive", "tolerance", "potentials_static"}, out);
        if (params.contains("grid")) validate_grid(params["grid"], "params.grid", out);
    } else if (task == "shielded-demo") {
        check_keys(params, "params", {"kind", "v0", "r1", "delta", "outer_radius", "t_end",
                                      "profile"},
                   {"x10", "times", "loop_radius", "tolerance"}, out);
        if (params.contains("profile")) validate_profile(params["profile"], "params.profile", out);
        const std::string kind = params.value("kind", "");
        if (params.contains("kind") && kind != "electric" && kind != "magnetic")
            out.push_back({Diagnostic::Level::Error, "params.kind", "kind must be electric or "
                                                                    "magnetic"});
        if (params.contains("delta") && params.contains("r1") &&
            params["delta"].get<double>() > params["r1"].get<double>() / 4.0)
            out.push_back({Diagnostic::Level::Error, "params.delta",
                           "mollifier exceeds shielding bound (delta > r1/4)"});
    }

    bool structural_error = false;
    for (const auto& d : out)
        if (d.level == Diagnostic::Level::Error) structural_error = true;
    if (!structural_error) physical_checks(cfg, out);
    return out;
}

// ---------------------------------------------------------------------------
// builders

namespace {

Domain build_domain(const Json& j) {
    Domain dom;
    const Json& o = j.at("outer");
    if (o.at("type") == "disk")
        dom.outer = OuterRegion::disk(to_vec2(o.at("center")), o.at("radius").get<double>());
    else
        dom.outer = OuterRegion::rectangle(to_vec2(o.at("lo")), to_vec2(o.at("hi")));
    dom.t_end = j.value("t_end", 1.0);
    for (const Json& ob : j.value("obstacles", Json::array())) {
        Obstacle obs = ob.at("type") == "disk"
                           ? Obstacle::disk(to_vec2(ob.at("center")), ob.at("radius").get<double>())
                           : [&] {
                                 std::vector<Vec2> vs;
                                 for (const Json& v : ob.at("vertices")) vs.push_back(to_vec2(v));
                                 return Obstacle::polygon(vs);
                             }();
        if (ob.contains("motion")) {
            const Vec2 vel = to_vec2(ob["motion"].at("velocity"));
            obs.set_motion([vel](double t) { return (t * vel).eval(); },
                           [vel](double) { return vel; });
        }
        dom.obstacles.push_back(obs);
    }
    return dom;
}

std::pair<std::function<double(double)>, std::function<double(double)>> build_profile(
    const Json& j) {
    return bump_profile(j.at("amp").get<double>(), j.at("tc").get<double>(),
                        j.at("eps").get<double>());
}

EmPotential build_potential(const Json& j) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "zero") {
        EmPotential p;
        p.support_radius = j.value("support_radius", 1.0);
        p.A = [](const Vec2&, double) { return Vec2::Zero().eval(); };
        p.V = [](const Vec2&, double) { return 0.0; };
        p.dA_dx = [](const Vec2&, double) { return Eigen::Matrix2d::Zero().eval(); };
        p.dA_dt = [](const Vec2&, double) { return Vec2::Zero().eval(); };
        p.dV_dx = [](const Vec2&, double) { return Vec2::Zero().eval(); };
        return p;
    }
    if (type == "vortex") {
        const double flux = j.at("flux").get<double>();
        const Vec2 c = j.contains("center") ? to_vec2(j["center"]) : Vec2::Zero();
        return vortex_potential([flux](double) { return flux; }, [](double) { return 0.0; },
                                [c](double) { return c; }, [](double) { return Vec2::Zero().eval(); },
                                j.at("core_radius").get<double>(),
                                j.at("support_radius").get<double>());
    }
    if (type == "shielded-electric" || type == "shielded-magnetic") {
        auto [e, de] = build_profile(j.at("profile"));
        return build_shielded_scenario(
                   type == "shielded-electric" ? ShieldedKind::Electric : ShieldedKind::Magnetic,
                   e, de, j.at("v0").get<double>(), j.at("r1").get<double>(),
                   j.at("delta").get<double>(), j.at("outer_radius").get<double>(),
                   j.at("t_end").get<double>())
            .potential;
    }
    throw ConfigInvalid("unknown potential type '" + type + "'");
}

GaugeElement build_gauge(const Json& j, const Domain& dom) {
    GaugeElement g = GaugeElement::identity();
    if (j.contains("m")) {
        std::vector<int> m;
        for (const Json& v : j["m"]) m.push_back(v.get<int>());
        g = GaugeElement::winding(dom, m);
    }
    if (j.contains("bump")) {
        const Json& b = j["bump"];
        const double amp = b.at("amplitude").get<double>();
        const Vec2 c = to_vec2(b.at("center"));
        const double w = b.at("width").get<double>();
        const double freq = b.value("time_freq", 0.0);
        auto bump = [](double u) { return u < 1.0 ? std::exp(-1.0 / (1.0 - u)) : 0.0; };
        auto dbump = [bump](double u) {
            return u < 1.0 ? -bump(u) / ((1.0 - u) * (1.0 - u)) : 0.0;
        };
        g.psi = [=](const Vec2& x, double t) {
            const double u = (x - c).squaredNorm() / (w * w);
            return amp * bump(u) * std::cos(freq * t);
        };
        g.dpsi_dx = [=](const Vec2& x, double t) {
            const double u = (x - c).squaredNorm() / (w * w);
            return (amp * dbump(u) * std::cos(freq * t) * 2.0 / (w * w) * (x - c)).eval();
        };
        g.dpsi_dt = [=](const Vec2& x, double t) {
            const double u = (x - c).squaredNorm() / (w * w);
            return -amp * freq * bump(u) * std::sin(freq * t);
        };
    }
    return g;
}

std::pair<EmPotential, EmPotential> build_pair(const Json& j, const Domain& dom) {
    if (j.contains("a")) return {build_potential(j.at("a")), build_potential(j.at("b"))};
    EmPotential base = build_potential(j.at("base"));
    GaugeElement g = build_gauge(j.value("gauge", Json::object()), dom);
    return {base, apply_gauge(base, g)};
}

// ---------------------------------------------------------------------------
// report plumbing

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct Check {
    std::string name;
    double value;
    double tolerance;
    bool pass;
};

struct TaskOutput {
    Json results = Json::object();
    std::vector<Check> checks;
    std::map<std::string, std::string> csv_files;  // filename -> contents
};

void add_check(TaskOutput& out, const std::string& name, double value, double tol) {
    out.checks.push_back({name, value, tol, value <= tol});
}

// --- the eight tasks -------------------------------------------------------

TaskOutput task_trace_rays(const Json& cfg) {
    TaskOutput out;
    const Json& params = cfg.at("params");
    const Domain dom = build_domain(cfg.at("domain"));
    const int n = params.at("n_rays").get<int>();
    const double t0 = params.value("t0", 0.0);
    const int max_refl = params.value("max_reflections", 64);
    const auto rays = random_ray_family(dom, n, t0, cfg.value("seed", 0), max_refl);

    std::string csv = "ray_id,vertex,x1,x2\n";
    int total_refl = 0;
    double len_min = 0.0, len_max = 0.0, len_sum = 0.0;
    for (size_t r = 0; r < rays.size(); ++r) {
        int v = 0;
        for (const RayLeg& leg : rays[r].legs)
            csv += std::to_string(r) + "," + std::to_string(v++) + "," + fmt(leg.start.x()) + "," +
                   fmt(leg.start.y()) + "\n";
        const Vec2 exit = rays[r].exit_point();
        csv += std::to_string(r) + "," + std::to_string(v) + "," + fmt(exit.x()) + "," +
               fmt(exit.y()) + "\n";
        total_refl += static_cast<int>(rays[r].reflections.size());
        const double len = rays[r].total_length();
        len_min = r == 0 ? len : std::min(len_min, len);
        len_max = std::max(len_max, len);
        len_sum += len;
    }
    out.csv_files["rays.csv"] = csv;
    out.results["n_rays"] = rays.size();
    out.results["total_reflections"] = total_refl;
    out.results["length_min"] = len_min;
    out.results["length_max"] = len_max;
    out.results["length_mean"] = rays.empty() ? 0.0 : len_sum / rays.size();
    return out;
}

TaskOutput task_ray_transforms(const Json& cfg) {
    TaskOutput out;
    const Json& params = cfg.at("params");
    const Domain dom = build_domain(cfg.at("domain"));
    auto [pa, pb] = build_pair(cfg.at("potential_pair"), dom);
    const auto rays = random_ray_family(dom, params.at("n_rays").get<int>(),
                                        params.value("t0", 0.0), cfg.value("seed", 0));
    QuadratureConfig quad;
    quad.abs_tol = 1e-10;
    const DiscrepancyReport rep = transform_dataset(pa, pb, rays, quad);

    std::string csv = "ray_id,t0,entry_x1,entry_x2,dir_x1,dir_x2,delta_mag,delta_elec\n";
    for (const RayDiscrepancy& r : rep.rows)
        csv += std::to_string(r.ray_id) + "," + fmt(r.t0) + "," + fmt(r.entry.x()) + "," +
               fmt(r.entry.y()) + "," + fmt(r.direction.x()) + "," + fmt(r.direction.y()) + "," +
               fmt(r.delta_mag) + "," + fmt(r.delta_elec) + "\n";
    out.csv_files["transforms.csv"] = csv;
    out.results["n_rays"] = rep.rows.size();
    out.results["max_mag_defect"] = rep.max_mag_defect;
    out.results["max_elec"] = rep.max_elec;
    if (params.contains("tolerance")) {
        const double tol = params["tolerance"].get<double>();
        add_check(out, "max |exp(i dmag) - 1|", rep.max_mag_defect, tol);
        add_check(out, "max |delec|", rep.max_elec, tol);
    }
    return out;
}

SpacetimePath circle_loop(const Vec2& center, double radius, double t, int segments) {
    std::vector<Vec2> pts;
    pts.reserve(segments + 1);
    for (int i = 0; i <= segments; ++i) {
        const double a = 2.0 * M_PI * i / segments;
        pts.push_back(center + radius * Vec2(std::cos(a), std::sin(a)));
    }
    pts.back() = pts.front();
    return SpacetimePath::spatial_polyline(pts, t, true);
}

TaskOutput task_holonomy(const Json& cfg) {
    TaskOutput out;
    const Json& params = cfg.at("params");
    const EmPotential p = build_potential(cfg.at("potential"));
    const Json& lp = params.at("loop");
    const SpacetimePath loop =
        circle_loop(to_vec2(lp.at("center")), lp.at("radius").get<double>(),
                    lp.at("t").get<double>(), lp.value("segments", 512));
    QuadratureConfig quad;
    quad.abs_tol = 1e-12;
    const Complex r = holonomy(p, loop, quad);
    out.results["holonomy"] = {r.real(), r.imag()};
    out.results["abs"] = std::abs(r);
    out.results["arg"] = std::arg(r);
    out.csv_files["holonomy.csv"] =
        "re,im,abs,arg\n" + fmt(r.real()) + "," + fmt(r.imag()) + "," + fmt(std::abs(r)) + "," +
        fmt(std::arg(r)) + "\n";
    if (params.contains("expected")) {
        const Complex expect(params["expected"][0].get<double>(),
                             params["expected"][1].get<double>());
        add_check(out, "|R - expected|", std::abs(r - expect),
                  params.value("tolerance", 1e-8));
    }
    return out;
}

TaskOutput task_equivalence(const Json& cfg) {
    TaskOutput out;
    const Json& params = cfg.at("params");
    const Domain dom = build_domain(cfg.at("domain"));
    auto [pa, pb] = build_pair(cfg.at("potential_pair"), dom);
    std::vector<double> t_samples;
    for (const Json& t : params.at("t_samples")) t_samples.push_back(t.get<double>());
    const double clearance = params.at("clearance").get<double>();
    EquivalenceOptions opt;
    opt.tol_h = params.value("tol_h", 1e-6);
    const EquivalenceVerdict v = test_gauge_equivalence(pa, pb, dom, t_samples, clearance, opt);

    out.results["equivalent"] = v.equivalent;
    out.results["windings"] = v.windings;
    if (!v.equivalent)
        out.results["witness_holonomy"] = {v.witness_holonomy.real(), v.witness_holonomy.imag()};

    if (params.contains("expect")) {
        const bool want = params["expect"] == "equivalent";
        out.checks.push_back({"verdict matches expectation", v.equivalent == want ? 0.0 : 1.0, 0.5,
                              v.equivalent == want});
    }
    if (params.contains("expected_windings") && v.equivalent) {
        bool match = params["expected_windings"].size() == v.windings.size();
        for (size_t i = 0; match && i < v.windings.size(); ++i)
            match = params["expected_windings"][i].get<int>() == v.windings[i];
        out.checks.push_back({"recovered windings", match ? 0.0 : 1.0, 0.5, match});
    }
    if (params.contains("witness_expected") && !v.equivalent) {
        const Complex expect(params["witness_expected"][0].get<double>(),
                             params["witness_expected"][1].get<double>());
        add_check(out, "|witness holonomy - expected|", std::abs(v.witness_holonomy - expect),
                  params.value("witness_tolerance", 1e-6));
    }
    if (params.contains("roundtrip_tolerance") && v.equivalent) {
        // path-independence of the reconstructed gauge: ratios c(x) conj(c(y))
        // must not depend on the base point used for reconstruction
        const double t0 = t_samples.front();
        const double rad = dom.obstacles.empty()
                               ? 0.5 * dom.outer.radius
                               : dom.obstacles[0].bounding_radius() + 2.0 * clearance;
        std::vector<Vec3> targets;
        for (int i = 0; i < 6; ++i) {
            const double a = 2.0 * M_PI * i / 6.0 + 0.3;
            const Vec2 c = dom.obstacles.empty() ? dom.outer.center : dom.obstacles[0].center(t0);
            targets.emplace_back(c.x() + rad * std::cos(a), c.y() + rad * std::sin(a), t0);
        }
        const Vec3 base1 = targets[0] + Vec3(0.11, 0.07, 0.0);
        const Vec3 base2 = targets[3] + Vec3(-0.09, 0.05, 0.0);
        const auto c1 = construct_gauge_function(pa, pb, dom, base1, targets, clearance, true);
        const auto c2 = construct_gauge_function(pa, pb, dom, base2, targets, clearance, true);
        double err = 0.0;
        for (size_t i = 0; i < targets.size(); ++i)
            for (size_t k = i + 1; k < targets.size(); ++k)
                err = std::max(err, std::abs(c1[i] * std::conj(c1[k]) -
                                             c2[i] * std::conj(c2[k])));
        out.results["roundtrip_error"] = err;
        add_check(out, "gauge reconstruction round trip", err,
                  params["roundtrip_tolerance"].get<double>());
    }
    return out;
}

/// Built-in smooth 2x2 field and an interior-supported gauge for the Radon
/// invariance demonstration.
YmPotential demo_ym_field() {
    auto bump = [](double u) { return u < 1.0 ? std::exp(-1.0 / (1.0 - u)) : 0.0; };
    YmPotential p;
    p.m = 2;
    p.support_radius = 1.0;
    p.A1 = [bump](const Vec2& x, double) {
        Matrix s1(2, 2);
        s1 << 0, 1, 1, 0;
        return (0.8 * bump(x.squaredNorm()) * s1).eval();
    };
    p.A2 = [bump](const Vec2& x, double) {
        Matrix s2(2, 2);
        s2 << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
        return (0.6 * bump(x.squaredNorm()) * s2).eval();
    };
    p.V = [](const Vec2&, double) { return Matrix::Zero(2, 2).eval(); };
    return p;
}

YmGauge demo_ym_gauge() {
    auto bump = [](double u) { return u < 1.0 ? std::exp(-1.0 / (1.0 - u)) : 0.0; };
    auto dbump = [bump](double u) {
        return u < 1.0 ? -bump(u) / ((1.0 - u) * (1.0 - u)) : 0.0;
    };
    const double w2 = 0.64;  // support radius 0.8, interior to the field's
    auto phi = [=](const Vec2& x) { return 0.7 * bump(x.squaredNorm() / w2); };
    auto dphi = [=](const Vec2& x) {
        return (0.7 * dbump(x.squaredNorm() / w2) * 2.0 / w2 * x).eval();
    };
    YmGauge g;
    g.g = [phi](const Vec2& x, double) {
        const double f = phi(x);
        Matrix m(2, 2);
        m << std::polar(1.0, f), 0.0, 0.0, std::polar(1.0, -f);
        return m;
    };
    auto dg_dir = [phi, dphi](const Vec2& x, int j) {
        const double f = phi(x);
        const double d = dphi(x)(j);
        Matrix m(2, 2);
        m << Complex(0, 1) * std::polar(1.0, f) * d, 0.0, 0.0,
            Complex(0, -1) * std::polar(1.0, -f) * d;
        return m;
    };
    g.dg_dx1 = [dg_dir](const Vec2& x, double) { return dg_dir(x, 0); };
    g.dg_dx2 = [dg_dir](const Vec2& x, double) { return dg_dir(x, 1); };
    g.dg_dt = [](const Vec2&, double) { return Matrix::Zero(2, 2).eval(); };
    return g;
}

TaskOutput task_nonabelian_radon(const Json& cfg) {
    TaskOutput out;
    const Json& params = cfg.value("params", Json::object());
    const double h = params.value("h", 1e-3);
    std::vector<double> offsets;
    if (params.contains("offsets"))
        for (const Json& v : params["offsets"]) offsets.push_back(v.get<double>());
    else
        for (int i = 0; i < 5; ++i) offsets.push_back(-0.6 + 0.3 * i);

    const YmPotential p = demo_ym_field();
    const YmPotential pp = apply_gauge(p, demo_ym_gauge());
    const std::vector<Vec2> dirs = {{1.0, 0.0}, {0.6, 0.8}};

    std::string csv = "dir_x1,dir_x2,offset,gauge_defect,unitarity_defect\n";
    double max_defect = 0.0, max_unit = 0.0;
    for (const Vec2& dir : dirs) {
        const auto r = nonabelian_radon(p, dir, offsets, 0.0, h);
        const auto rp = nonabelian_radon(pp, dir, offsets, 0.0, h);
        for (size_t i = 0; i < offsets.size(); ++i) {
            const double defect = (rp[i] - r[i]).norm();
            const double unit = (r[i].adjoint() * r[i] - Matrix::Identity(2, 2)).norm();
            max_defect = std::max(max_defect, defect);
            max_unit = std::max(max_unit, unit);
            csv += fmt(dir.x()) + "," + fmt(dir.y()) + "," + fmt(offsets[i]) + "," + fmt(defect) +
                   "," + fmt(unit) + "\n";
        }
    }
    out.csv_files["radon.csv"] = csv;
    out.results["max_gauge_defect"] = max_defect;
    out.results["max_unitarity_defect"] = max_unit;
    if (params.contains("tolerance"))
        add_check(out, "Radon gauge invariance", max_defect, params["tolerance"].get<double>());
    return out;
}

GridSpec build_grid(const Json& j) {
    GridSpec g;
    g.lo = to_vec2(j.at("lo"));
    g.hi = to_vec2(j.at("hi"));
    g.nx = j.at("nx").get<int>();
    g.ny = j.at("ny").get<int>();
    g.dt = j.at("dt").get<double>();
    g.nt = j.at("nt").get<int>();
    return g;
}

BoundaryFn build_drive(const Json& j) {
    if (!j.is_object() || j.value("type", "none") == "none") return nullptr;
    if (j.at("type") == "pulse") {
        const double amp = j.at("amplitude").get<double>();
        const double tc = j.at("t_center").get<double>();
        const double tw = j.at("t_width").get<double>();
        const Vec2 xc = to_vec2(j.at("x_center"));
        const double xw = j.at("x_width").get<double>();
        return [=](const Vec2& x, double t) -> Complex {
            const double g = std::exp(-(t - tc) * (t - tc) / (tw * tw) -
                                      (x - xc).squaredNorm() / (xw * xw));
            return Complex(amp * g, 0.0);
        };
    }
    throw ConfigInvalid("unknown drive type");
}

InitialFn build_initial(const Json& j) {
    if (!j.is_object() || j.value("type", "none") == "none") return nullptr;
    if (j.at("type") == "gaussian") {
        const Vec2 c = to_vec2(j.at("center"));
        const double sigma = j.at("sigma").get<double>();
        const Vec2 k = to_vec2(j.at("k"));
        return [=](const Vec2& x) {
            return std::exp(-(x - c).squaredNorm() / (2.0 * sigma * sigma)) *
                   std::polar(1.0, k.dot(x));
        };
    }
    throw ConfigInvalid("unknown initial-data type");
}

TaskOutput task_schrodinger(const Json& cfg) {
    TaskOutput out;
    const Json& params = cfg.at("params");
    const Domain dom = build_domain(cfg.at("domain"));
    const EmPotential p = build_potential(cfg.at("potential"));
    const GridSpec grid = build_grid(params.at("grid"));
    SolveOptions opt;
    opt.potentials_static = params.value("potentials_static", true);
    const WaveField w = solve_ibvp(p, dom, grid, build_drive(params.value("drive", Json())),
                                   build_initial(params.value("initial", Json())), opt);
    const BoundaryData bd = boundary_data(w, p);

    const double n0 = w.l2_norm(0);
    double drift = 0.0, nf = w.l2_norm(grid.nt);
    for (int k = 0; k <= grid.nt; ++k)
        drift = std::max(drift, std::abs(w.l2_norm(k) - n0));
    out.results["norm_initial"] = n0;
    out.results["norm_final"] = nf;
    out.results["norm_drift"] = n0 > 0 ? drift / n0 : drift;

    const int sn = params.value("csv_stride_nodes",
                                std::max<int>(1, static_cast<int>(bd.nodes.size()) / 64));
    const int sk = params.value("csv_stride_steps", std::max(1, grid.nt / 32));
    std::string csv = "node,arc,t,f1,f2,f3_x,f3_y\n";
    for (size_t b = 0; b < bd.nodes.size(); b += sn)
        for (int k = 0; k <= grid.nt; k += sk)
            csv += std::to_string(b) + "," + fmt(bd.nodes[b].arc) + "," + fmt(k * grid.dt) + "," +
                   fmt(bd.f1(b, k)) + "," + fmt(bd.f2(b, k)) + "," + fmt(bd.f3_x(b, k)) + "," +
                   fmt(bd.f3_y(b, k)) + "\n";
    out.csv_files["boundary_data.csv"] = csv;
    if (params.contains("norm_drift_tolerance"))
        add_check(out, "relative norm drift", n0 > 0 ? drift / n0 : drift,
                  params["norm_drift_tolerance"].get<double>());
    return out;
}

TaskOutput task_dtn(const Json& cfg) {
    TaskOutput out;
    const Json& params = cfg.at("params");
    const Domain dom = build_domain(cfg.at("domain"));
    const EmPotential p = build_potential(cfg.at("potential"));
    const GridSpec grid = build_grid(params.at("grid"));
    SolveOptions opt;
    opt.potentials_static = params.value("potentials_static", true);
    const DtnData d = dtn_apply(p, dom, grid, build_drive(params.value("drive", Json())), opt);

    double max_abs = 0.0;
    std::string csv = "node,arc,t,re,im\n";
    const int sn = std::max<int>(1, static_cast<int>(d.nodes.size()) / 64);
    const int sk = std::max(1, grid.nt / 32);
    for (Eigen::Index b = 0; b < d.lambda.rows(); ++b)
        for (Eigen::Index k = 0; k < d.lambda.cols(); ++k) {
            max_abs = std::max(max_abs, std::abs(d.lambda(b, k)));
            if (b % sn == 0 && k % sk == 0)
                csv += std::to_string(b) + "," + fmt(d.nodes[b].arc) + "," + fmt(k * grid.dt) +
                       "," + fmt(d.lambda(b, k).real()) + "," + fmt(d.lambda(b, k).imag()) + "\n";
        }
    out.csv_files["dtn.csv"] = csv;
    out.results["max_abs_lambda"] = max_abs;
    if (params.contains("tolerance"))
        add_check(out, "max |Lambda f|", max_abs, params["tolerance"].get<double>());
    return out;
}

TaskOutput task_shielded_demo(const Json& cfg) {
    TaskOutput out;
    const Json& params = cfg.at("params");
    auto [e, de] = build_profile(params.at("profile"));
    const double v0 = params.at("v0").get<double>();
    const double r1 = params.at("r1").get<double>();
    const double delta = params.at("delta").get<double>();
    const bool electric = params.at("kind") == "electric";
    const ShieldedScenario sc = build_shielded_scenario(
        electric ? ShieldedKind::Electric : ShieldedKind::Magnetic, e, de, v0, r1, delta,
        params.at("outer_radius").get<double>(), params.at("t_end").get<double>());

    QuadratureConfig quad;
    quad.abs_tol = 1e-11;
    double max_rel = 0.0;
    if (electric) {
        std::string csv = "x10,flux,expected,rel_error\n";
        for (const Json& xj : params.value("x10", Json::array())) {
            const double x10 = xj.get<double>();
            // E2 support at x1 = x10 lives in t in [(x10-delta)/v0, (x10+delta)/v0]
            const FixedX1RectPatch patch{x10, -2.0 * delta, 2.0 * delta,
                                         std::max(0.0, (x10 - 2.0 * delta) / v0),
                                         std::min(sc.domain.t_end, (x10 + 2.0 * delta) / v0)};
            const double flux = surface_flux(sc.fields, patch, quad);
            const double expected = e(x10 / v0) / v0;
            const double rel = std::abs(flux - expected) / std::abs(expected);
            max_rel = std::max(max_rel, rel);
            csv += fmt(x10) + "," + fmt(flux) + "," + fmt(expected) + "," + fmt(rel) + "\n";
        }
        out.csv_files["cross_section_flux.csv"] = csv;
        out.results["max_rel_error"] = max_rel;
        if (params.contains("tolerance"))
            add_check(out, "cross-section flux vs (1/v0) e(x10/v0)", max_rel,
                      params["tolerance"].get<double>());
    } else {
        const double rad = params.value("loop_radius", 4.0 * delta);
        std::string csv = "t,circulation,expected,abs_error\n";
        double max_abs = 0.0;
        for (const Json& tj : params.value("times", Json::array())) {
            const double t = tj.get<double>();
            const SpacetimePath loop = circle_loop(Vec2(v0 * t, 0.0), rad, t, 512);
            const double circ = line_integral_em(sc.potential, loop, quad);
            const double expected = e(t);
            const double err = std::abs(circ - expected);
            max_abs = std::max(max_abs, err);
            csv += fmt(t) + "," + fmt(circ) + "," + fmt(expected) + "," + fmt(err) + "\n";
        }
        out.csv_files["circulation.csv"] = csv;
        out.results["max_abs_error"] = max_abs;
        if (params.contains("tolerance"))
            add_check(out, "loop circulation vs b(t)", max_abs,
                      params["tolerance"].get<double>());
    }
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// runner

RunOutcome run_scenario(const Json& config, const std::string& out_dir, bool with_timings) {
    const auto diags = validate_config(config);
    for (const auto& d : diags)
        if (d.level == Diagnostic::Level::Error)
            throw ConfigInvalid("config error at '" + d.path + "': " + d.message);

    const auto start = std::chrono::steady_clock::now();
    const std::string task = config.at("task");
    TaskOutput t;
    if (task == "trace-rays") t = task_trace_rays(config);
    else if (task == "ray-transforms") t = task_ray_transforms(config);
    else if (task == "holonomy") t = task_holonomy(config);
    else if (task == "equivalence") t = task_equivalence(config);
    else if (task == "nonabelian-radon") t = task_nonabelian_radon(config);
    else if (task == "schrodinger-boundary-data") t = task_schrodinger(config);
    else if (task == "dtn") t = task_dtn(config);
    else if (task == "shielded-demo") t = task_shielded_demo(config);
    const double ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - start)
                          .count();

    RunOutcome outcome;
    Json& rep = outcome.report;
    rep["schema_version"] = 1;
    rep["scenario"] = config;
    rep["results"] = t.results;
    Json checks = Json::array();
    bool pass = true;
    for (const Check& c : t.checks) {
        checks.push_back(
            {{"name", c.name}, {"value", c.value}, {"tolerance", c.tolerance}, {"pass", c.pass}});
        pass = pass && c.pass;
        std::printf("%s  %-45s %.6e <= %.1e\n", c.pass ? "PASS" : "FAIL", c.name.c_str(), c.value,
                    c.tolerance);
    }
    rep["checks"] = checks;
    rep["pass"] = pass;
    if (with_timings) rep["timings"] = {{"total_ms", ms}};
    outcome.exit_code = pass ? 0 : 2;

    fs::create_directories(out_dir);
    {
        std::ofstream f(fs::path(out_dir) / "report.json");
        f << rep.dump(2) << "\n";
    }
    for (const auto& [name, contents] : t.csv_files) {
        std::ofstream f(fs::path(out_dir) / name);
        f << contents;
    }
    std::printf("%s  %s (report in %s)\n", pass ? "PASS" : "FAIL",
                config.at("name").get<std::string>().c_str(), out_dir.c_str());
    return outcome;
}

// ---------------------------------------------------------------------------
// built-ins and config plumbing

const std::map<std::string, Json>& builtin_scenarios() {
    static const std::map<std::string, Json> corpus = [] {
        std::map<std::string, Json> m;
        m["ab-quantization"] = Json::parse(R"({
            "schema_version": 1, "name": "ab-quantization", "task": "holonomy", "seed": 0,
            "potential": {"type": "vortex", "flux": 6.283185307179586, "core_radius": 0.5,
                          "support_radius": 5.0, "center": [0.0, 0.0]},
            "params": {"loop": {"center": [0.0, 0.0], "radius": 2.0, "t": 0.0, "segments": 512},
                       "expected": [1.0, 0.0], "tolerance": 1e-8}})");
        m["ab-half-flux"] = Json::parse(R"({
            "schema_version": 1, "name": "ab-half-flux", "task": "holonomy", "seed": 0,
            "potential": {"type": "vortex", "flux": 3.141592653589793, "core_radius": 0.5,
                          "support_radius": 5.0, "center": [0.0, 0.0]},
            "params": {"loop": {"center": [0.0, 0.0], "radius": 2.0, "t": 0.0, "segments": 512},
                       "expected": [-1.0, 0.0], "tolerance": 1e-8}})");
        m["shielded-electric"] = Json::parse(R"({
            "schema_version": 1, "name": "shielded-electric", "task": "shielded-demo", "seed": 0,
            "params": {"kind": "electric", "v0": 1.0, "r1": 0.05, "delta": 0.0125,
                       "outer_radius": 6.0, "t_end": 4.0,
                       "profile": {"type": "bump", "amp": 1.0, "tc": 2.0, "eps": 1.0},
                       "x10": [1.6, 2.0, 2.4], "tolerance": 1e-3}})");
        m["shielded-magnetic"] = Json::parse(R"({
            "schema_version": 1, "name": "shielded-magnetic", "task": "shielded-demo", "seed": 0,
            "params": {"kind": "magnetic", "v0": 0.5, "r1": 0.4, "delta": 0.1,
                       "outer_radius": 5.0, "t_end": 4.0, "loop_radius": 1.0,
                       "profile": {"type": "bump", "amp": 6.283185307179586, "tc": 2.0, "eps": 1.5},
                       "times": [1.5, 2.0, 2.5], "tolerance": 1e-8}})");
        m["equivalence-2pi"] = Json::parse(R"({
            "schema_version": 1, "name": "equivalence-2pi", "task": "equivalence", "seed": 0,
            "domain": {"outer": {"type": "disk", "center": [0.0, 0.0], "radius": 5.0},
                       "obstacles": [{"type": "disk", "center": [0.0, 0.0], "radius": 0.5}],
                       "t_end": 1.0},
            "potential_pair": {
                "a": {"type": "vortex", "flux": 6.283185307179586, "core_radius": 0.4,
                      "support_radius": 5.0, "center": [0.0, 0.0]},
                "b": {"type": "vortex", "flux": 12.566370614359172, "core_radius": 0.4,
                      "support_radius": 5.0, "center": [0.0, 0.0]}},
            "params": {"t_samples": [0.0, 0.5, 1.0], "clearance": 0.25,
                       "expect": "equivalent", "expected_windings": [1],
                       "roundtrip_tolerance": 1e-6}})");
        m["equivalence-pi"] = Json::parse(R"({
            "schema_version": 1, "name": "equivalence-pi", "task": "equivalence", "seed": 0,
            "domain": {"outer": {"type": "disk", "center": [0.0, 0.0], "radius": 5.0},
                       "obstacles": [{"type": "disk", "center": [0.0, 0.0], "radius": 0.5}],
                       "t_end": 1.0},
            "potential_pair": {
                "a": {"type": "zero", "support_radius": 5.0},
                "b": {"type": "vortex", "flux": 3.141592653589793, "core_radius": 0.4,
                      "support_radius": 5.0, "center": [0.0, 0.0]}},
            "params": {"t_samples": [0.0, 0.5, 1.0], "clearance": 0.25,
                       "expect": "inequivalent", "witness_expected": [-1.0, 0.0],
                       "witness_tolerance": 1e-6}})");
        m["broken-rays"] = Json::parse(R"({
            "schema_version": 1, "name": "broken-rays", "task": "trace-rays", "seed": 0,
            "domain": {"outer": {"type": "disk", "center": [0.0, 0.0], "radius": 3.0},
                       "obstacles": [{"type": "disk", "center": [0.3, 0.0], "radius": 1.0}],
                       "t_end": 1.0},
            "params": {"n_rays": 25, "t0": 0.0}})");
        m["ray-transform-invariance"] = Json::parse(R"({
            "schema_version": 1, "name": "ray-transform-invariance", "task": "ray-transforms",
            "seed": 0,
            "domain": {"outer": {"type": "disk", "center": [0.0, 0.0], "radius": 4.0},
                       "obstacles": [{"type": "disk", "center": [0.5, 0.0], "radius": 0.8}],
                       "t_end": 1.0},
            "potential_pair": {
                "base": {"type": "vortex", "flux": 6.283185307179586, "core_radius": 0.7,
                         "support_radius": 4.0, "center": [0.5, 0.0]},
                "gauge": {"bump": {"amplitude": 0.9, "center": [-1.5, 0.5], "width": 1.0}}},
            "params": {"n_rays": 60, "t0": 0.0, "tolerance": 1e-6}})");
        m["nonabelian-invariance"] = Json::parse(R"({
            "schema_version": 1, "name": "nonabelian-invariance", "task": "nonabelian-radon",
            "seed": 0,
            "params": {"h": 1e-3, "offsets": [-0.6, -0.3, 0.0, 0.3, 0.6], "tolerance": 1e-7}})");
        m["free-gaussian"] = Json::parse(R"({
            "schema_version": 1, "name": "free-gaussian", "task": "schrodinger-boundary-data",
            "seed": 0,
            "domain": {"outer": {"type": "rect", "lo": [-3.0, -3.0], "hi": [3.0, 3.0]},
                       "t_end": 0.01},
            "potential": {"type": "zero", "support_radius": 3.0},
            "params": {"grid": {"lo": [-3.0, -3.0], "hi": [3.0, 3.0], "nx": 64, "ny": 64,
                                "dt": 2e-4, "nt": 50},
                       "initial": {"type": "gaussian", "center": [0.0, 0.0], "sigma": 0.3,
                                   "k": [2.0, 0.0]},
                       "norm_drift_tolerance": 1e-8}})");
        m["dtn-zero"] = Json::parse(R"({
            "schema_version": 1, "name": "dtn-zero", "task": "dtn", "seed": 0,
            "domain": {"outer": {"type": "rect", "lo": [-1.0, -1.0], "hi": [1.0, 1.0]},
                       "t_end": 0.02},
            "potential": {"type": "zero", "support_radius": 1.0},
            "params": {"grid": {"lo": [-1.0, -1.0], "hi": [1.0, 1.0], "nx": 24, "ny": 24,
                                "dt": 1e-3, "nt": 20},
                       "tolerance": 1e-12}})");
        return m;
    }();
    return corpus;
}

Json resolve_scenario(const std::string& name_or_path) {
    if (fs::exists(name_or_path)) {
        std::ifstream f(name_or_path);
        try {
            return Json::parse(f);
        } catch (const Json::parse_error& e) {
            throw ConfigInvalid(std::string("cannot parse config: ") + e.what());
        }
    }
    const auto& corpus = builtin_scenarios();
    const auto it = corpus.find(name_or_path);
    if (it == corpus.end())
        throw ConfigInvalid("'" + name_or_path + "' is neither a file nor a built-in scenario");
    return it->second;
}

void apply_override(Json& config, const std::string& keyval) {
    const auto eq = keyval.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ConfigInvalid("override must have the form key.path=value: " + keyval);
    const std::string path = keyval.substr(0, eq);
    const std::string value = keyval.substr(eq + 1);
    Json* node = &config;
    size_t pos = 0;
    while (true) {
        const size_t dot = path.find('.', pos);
        const std::string key = path.substr(pos, dot == std::string::npos ? dot : dot - pos);
        if (key.empty()) throw ConfigInvalid("bad override path: " + path);
        if (dot == std::string::npos) {
            Json parsed = Json::parse(value, nullptr, false);
            (*node)[key] = parsed.is_discarded() ? Json(value) : parsed;
            return;
        }
        node = &(*node)[key];
        pos = dot + 1;
    }
}

}  // namespace abflux
