#include "shapley_flow.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>
#include <string>

#include "sf/acceptance.hpp"
#include "sf/analysis.hpp"
#include "sf/coding.hpp"
#include "sf/jitter.hpp"
#include "sf/parallel.hpp"
#include "sf/sampling.hpp"
#include "sf/serialize.hpp"

struct sf_game {
    sf::GamePair g;
};
struct sf_jitter_model {
    sf::JitterModel m;
};

namespace {

using nlohmann::json;
using namespace sf;

thread_local std::string g_last_error;

char* dup(const std::string& s) {
    char* p = static_cast<char*>(std::malloc(s.size() + 1));
    if (!p) throw std::bad_alloc();
    std::memcpy(p, s.c_str(), s.size() + 1);
    return p;
}

void put(char** out, const std::string& s) {
    if (out) *out = dup(s);
}
void put(char** out, const json& j) {
    if (out) *out = dup(dump17(j) + "\n");
}

template <class F>
sf_status guard(F&& f) {
    try {
        f();
        g_last_error.clear();
        return SF_OK;
    } catch (const Error& e) {
        g_last_error = e.what();
        return static_cast<sf_status>(static_cast<int>(e.code()));
    } catch (const json::exception& e) {
        g_last_error = std::string("bad request: ") + e.what();
        return SF_E_INVALID_ARGUMENT;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return SF_E_INTERNAL;
    } catch (...) {
        g_last_error = "unknown failure";
        return SF_E_INTERNAL;
    }
}

json parse_request(const char* text) {
    if (!text || !*text) return json::object();
    json j = json::parse(text);
    if (!j.is_object()) throw Error(Errc::invalid_argument, "request must be a JSON object");
    return j;
}

void need(const void* p, const char* what) {
    if (!p) throw Error(Errc::invalid_argument, std::string(what) + " is null");
}

// ---- value conversions ----

json vec(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }
json mat(const Mat3& m) {
    json out = json::array();
    for (int i = 0; i < 3; ++i) out.push_back(json::array({m(i, 0), m(i, 1), m(i, 2)}));
    return out;
}
json state(const JointState& s) {
    return {{"pA", vec(s.pA)}, {"pB", vec(s.pB)}, {"t", s.time_t}, {"s", s.time_s}};
}
Vec3 to_vec(const json& j) {
    if (!j.is_array() || j.size() != 3) throw Error(Errc::invalid_argument, "expected a 3-vector");
    return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}
Mat3 to_mat(const json& j) {
    if (!j.is_array() || j.size() != 3) throw Error(Errc::invalid_argument, "expected a 3x3 matrix");
    Mat3 m;
    for (int i = 0; i < 3; ++i) m.row(i) = to_vec(j[i]).transpose();
    return m;
}
JointState to_state(const json& j) {
    JointState s;
    s.pA = to_vec(j.at("pA"));
    s.pB = to_vec(j.at("pB"));
    return sanitize(s);
}
json label(const Label& l) { return label_string(l); }
Label to_label(const json& j) {
    Label l;
    if (j.is_number_integer()) {
        l.k = j.get<int>() - 1;
    } else {
        std::string s = j.get<std::string>();
        if (s.empty()) throw Error(Errc::invalid_argument, "empty label");
        l.k = s[0] - '1';
        l.mixed = s.size() > 1 && s[1] == 'b';
    }
    if (l.k < 0 || l.k > 2) throw Error(Errc::invalid_argument, "label out of range");
    return l;
}
json targets(const TargetPair& t) { return json::array({label(t.iA), label(t.iB)}); }
json complex_pair(const std::array<std::complex<double>, 2>& z) {
    json out = json::array();
    for (const auto& c : z) out.push_back({{"re", c.real()}, {"im", c.imag()}, {"abs", std::abs(c)}});
    return out;
}
json landmarks_json(const Landmarks& L) {
    auto arr = [](const std::array<Vec3, 3>& a) { return json::array({vec(a[0]), vec(a[1]), vec(a[2])}); };
    return {{"RA", arr(L.RA)}, {"QA", arr(L.QA)}, {"fA", arr(L.fA)}, {"RB", arr(L.RB)},
            {"QB", arr(L.QB)}, {"fB", arr(L.fB)}, {"sigma", L.sigma}, {"tau_estimate", L.tau_estimate},
            {"pairs", "index 0 = (1,2), 1 = (2,3), 2 = (3,1)"}};
}
json itinerary_json(const Itinerary& it) {
    json out = json::array();
    for (const auto& e : it.entries) out.push_back({{"t", e.t}, {"i", label(e.i)}, {"j", label(e.j)}});
    return out;
}

JointState start_state(const GamePair& g, const json& req, bool boundary) {
    json st = req.value("start", json("random"));
    JointState s;
    if (st.is_string()) {
        std::string k = st.get<std::string>();
        if (k == "random") {
            CounterRng rng(req.value("seed", std::uint64_t(1)));
            s = random_interior_state(rng);
        } else if (k == "gamma") {
            s = gamma_seed(g);
        } else {
            throw Error(Errc::invalid_argument, "unknown start: " + k);
        }
    } else {
        s = to_state(st);
    }
    return boundary && !on_boundary(s) ? project_to_boundary(s, g.equilibrium) : s;
}

Trajectory run_simulation(const GamePair& g, const json& req) {
    SimLimits lim;
    lim.max_events = req.value("events", 1000);
    if (req.contains("max_time")) lim.max_time_t = req["max_time"].get<double>();
    lim.stop_radius_at_E = req.value("stop_radius", 1e-9);
    JointState s = start_state(g, req, false);
    return req.value("constrained_J", false) ? simulate_constrained(g, s, lim) : simulate(g, s, lim);
}

double family_beta(const GamePair& g) {
    if (!g.beta) throw Error(Errc::precondition, "analysis needs a family game (beta)");
    return *g.beta;
}

const char* kTableNames[4] = {"V0R0", "V1R0", "V1R1", "V2R1"};

std::string csv_row(std::initializer_list<std::string> cells) {
    std::string s;
    bool first = true;
    for (const auto& c : cells) {
        if (!first) s += ',';
        first = false;
        s += c;
    }
    return s + "\n";
}

json corner_table_json(double beta, double eps, std::string* csv = nullptr) {
    CornerTable ct = verify_corner_tables(beta, eps);
    json rows = json::array();
    if (csv) *csv = "beta,entry_id,predicted,measured,rel_error\n";
    for (int t = 0; t < 4; ++t)
        for (int m = 0; m < 4; ++m) {
            std::string id = std::string(kTableNames[t]) + "(" + std::to_string(m + 1) + ")";
            rows.push_back({{"entry_id", id}, {"predicted", ct.predicted[t][m]}, {"measured", ct.measured[t][m]},
                            {"rel_error", ct.rel_error[t][m]}, {"flagged", ct.flagged[t][m]}});
            if (csv)
                *csv += csv_row({fmt17(beta), id, fmt17(ct.predicted[t][m]), fmt17(ct.measured[t][m]),
                                 fmt17(ct.rel_error[t][m])});
        }
    return {{"beta", beta}, {"epsilon", eps}, {"entries", rows}, {"derived_V2R1_corner3", ct.derived_v2r1_3}};
}

OrbitId to_orbit(const std::string& s) {
    if (s == "shapley") return OrbitId::shapley;
    if (s == "anti-shapley" || s == "anti_shapley") return OrbitId::anti_shapley;
    if (s == "gamma") return OrbitId::gamma;
    throw Error(Errc::invalid_argument, "unknown orbit: " + s);
}

SectionKind to_section(const std::string& s) {
    if (s == "S") return SectionKind::GlobalS;
    if (s == "V0xB31") return SectionKind::V0xB31;
    if (s == "A12xV1") return SectionKind::A12xV1;
    if (s == "V2xB12") return SectionKind::V2xB12;
    if (s == "transversal") return SectionKind::TransversalAtGamma;
    throw Error(Errc::invalid_argument, "unknown section: " + s);
}

json stability_json(const GamePair& g, OrbitId o) {
    StabilityReport r = classify_stability(g, o);
    json j = {{"orbit", to_string(o)},
              {"classification", to_string(r.classification)},
              {"eigenvalues", complex_pair(r.eigenvalues)},
              {"richardson_consistency", r.richardson_consistency},
              {"fixed_point_residual", r.fixed_point_residual},
              {"section_point", state(r.section_point)}};
    if (o != OrbitId::gamma) {
        CycleLinearization lin = cycle_linearization(g, cycle_of(o));
        j["exact_multipliers"] = complex_pair(lin.multipliers);
    }
    return j;
}

template <class T>
json point_json(const Point2<T>& p) {
    if constexpr (std::is_same_v<T, Big>)
        return {{"x", big_to_string(p.x)}, {"y", big_to_string(p.y)}, {"x_double", double(p.x)},
                {"y_double", double(p.y)}};
    else
        return {{"x", p.x}, {"y", p.y}};
}

std::vector<double> default_ratios(int n) {
    if (n < 1) throw Error(Errc::invalid_argument, "period must be positive");
    std::vector<double> a;
    int pairs = n % 2 ? n - 3 : n;
    if (n == 1) return {1.0};
    for (int i = 0; i < pairs; ++i) a.push_back(i % 2 ? 1 / 1.1 : 1.1);
    if (n % 2) a.insert(a.end(), {1.1, 1.1, 1 / 1.21});
    return a;
}


}  // namespace

extern "C" {

const char* sf_version(void) { return "1.0.0"; }

const char* sf_status_name(sf_status s) {
    switch (s) {
        case SF_OK: return "ok";
        case SF_E_DOMAIN: return "domain";
        case SF_E_NO_EQUILIBRIUM: return "no_equilibrium";
        case SF_E_DEGENERATE: return "degenerate";
        case SF_E_ABSORBED: return "absorbed";
        case SF_E_INTEGRATION: return "integration";
        case SF_E_PRECONDITION: return "precondition";
        case SF_E_NOT_FOUND: return "not_found";
        case SF_E_MODEL_VIOLATION: return "model_violation";
        case SF_E_NON_CLOSURE: return "non_closure";
        case SF_E_INVALID_ARGUMENT: return "invalid_argument";
        case SF_E_INTERNAL: return "internal";
    }
    return "unknown";
}

const char* sf_last_error(void) { return g_last_error.c_str(); }

void sf_string_free(char* s) { std::free(s); }

sf_status sf_game_family(double beta, sf_game** out) {
    return guard([&] {
        need(out, "out");
        *out = new sf_game{shapley_family(beta)};
    });
}

sf_status sf_game_from_matrices(const double A[9], const double B[9], sf_game** out) {
    return guard([&] {
        need(out, "out");
        need(A, "A");
        need(B, "B");
        Mat3 a, b;
        for (int i = 0; i < 9; ++i) a(i / 3, i % 3) = A[i], b(i / 3, i % 3) = B[i];
        *out = new sf_game{game_from_matrices(a, b)};
    });
}

sf_status sf_game_from_json(const char* text, sf_game** out) {
    return guard([&] {
        need(out, "out");
        json j = parse_request(text);
        if (j.contains("family_beta") && !j.contains("A")) j["beta"] = j["family_beta"];
        if (j.contains("beta") && !j.contains("A")) {
            *out = new sf_game{shapley_family(j["beta"].get<double>())};
            return;
        }
        GamePair g = game_from_matrices(to_mat(j.at("A")), to_mat(j.at("B")));
        if (j.contains("beta")) g.beta = j["beta"].get<double>();
        *out = new sf_game{g};
    });
}

void sf_game_free(sf_game* g) { delete g; }

sf_status sf_game_describe(const sf_game* h, char** json_out) {
    return guard([&] {
        need(h, "game");
        const GamePair& g = h->g;
        json j = {{"A", mat(g.A)}, {"B", mat(g.B)}, {"equilibrium", state(g.equilibrium)},
                  {"landmarks", landmarks_json(landmarks(g))}};
        j["beta"] = g.beta ? json(*g.beta) : json(nullptr);
        put(json_out, j);
    });
}

sf_status sf_simulate(const sf_game* h, const char* request, char** json_out, char** csv_out) {
    return guard([&] {
        need(h, "game");
        json req = parse_request(request);
        Trajectory tr = run_simulation(h->g, req);
        json legs = json::array();
        for (const auto& l : tr.legs)
            legs.push_back({{"start", state(l.start)},
                            {"targets", targets(l.targets)},
                            {"duration_t", l.duration_t},
                            {"duration_u", l.duration_u},
                            {"event", {{"player", std::string(1, l.reason.player)}, {"strategy", l.reason.strategy + 1}}}});
        json j = {{"events", tr.legs.size()}, {"terminated_at_E", tr.terminated_at_E}, {"legs", legs}};
        if (!tr.legs.empty()) {
            j["final"] = state(tr.legs.back().end);
            j["final_distance_to_E"] = distance_to_E(h->g, tr.legs.back().end);
        }
        put(json_out, j);
        put(csv_out, trajectory_csv(tr));
    });
}

sf_status sf_code(const sf_game* h, const char* request, char** json_out) {
    return guard([&] {
        json req = parse_request(request);
        Itinerary it;
        if (req.contains("itinerary")) {
            std::vector<ItineraryEntry> e;
            int n = 0;
            for (const auto& p : req["itinerary"]) e.push_back({double(n++), to_label(p.at(0)), to_label(p.at(1))});
            it = make_itinerary(std::move(e));
        } else {
            need(h, "game");
            it = extract_itinerary(run_simulation(h->g, req));
        }
        std::string vname = req.value("variant", std::string("all-I"));
        DitherVariant v = vname == "literal" ? DitherVariant::Literal : DitherVariant::AllI;
        if (vname != "literal" && vname != "all-I") throw Error(Errc::invalid_argument, "unknown variant: " + vname);
        DitherCode code = dither_code(it, v);
        Gaps gaps = decisive_gaps(code);
        json j = {{"itinerary", itinerary_json(it)},
                  {"variant", vname},
                  {"dither_code", code.str()},
                  {"decisive_times", code.decisive_times},
                  {"gaps", {{"consecutive", gaps.consecutive}, {"even_indexed", gaps.even_indexed}}}};
        auto cyc = detect_cycle(it, req.value("min_repeats", 3));
        int period = req.value("period", cyc ? cyc->period : 0);
        if (cyc) j["cycle"] = {{"offset", cyc->offset}, {"period", cyc->period}};
        else j["cycle"] = nullptr;
        if (period > 0) {
            // Count on the cyclic tail only.
            Itinerary tail = it;
            if (cyc) {
                tail.entries.assign(it.entries.begin() + cyc->offset, it.entries.end());
                double t0 = tail.entries.front().t;
                for (auto& e : tail.entries) e.t -= t0;
            }
            j["essential_period"] = essential_period(tail, period, v);
        }
        put(json_out, j);
    });
}

sf_status sf_induced(const sf_game* h, const char* request, char** json_out) {
    return guard([&] {
        need(h, "game");
        const GamePair& g = h->g;
        json req = parse_request(request);
        std::string what = req.value("what", std::string("gamma"));
        json j;
        if (what == "gamma") {
            GammaOrbit o = gamma_orbit(g);
            json pts = json::array(), tg = json::array(), gp = json::array();
            for (const auto& p : o.boundary_points) pts.push_back(state(p));
            for (const auto& t : o.targets) tg.push_back(targets(t));
            for (const auto& p : o.gamma_points) gp.push_back(state(p));
            j = {{"boundary_points", pts}, {"targets", tg},        {"itinerary", itinerary_json(o.itinerary)},
                 {"closure_residual", o.closure_residual},         {"kappa", o.kappa},
                 {"d", o.d},             {"fit_residual", o.fit_residual}, {"has_gamma", o.has_gamma},
                 {"t_star", o.t_star},   {"gamma_points", gp},     {"landmarks", landmarks_json(o.landmarks)}};
        } else if (what == "step") {
            JointState b = start_state(g, req, true);
            bool constrained = req.value("constrained", false);
            json pts = json::array({state(b)});
            for (int k = 0, n = req.value("steps", 6); k < n; ++k) {
                b = induced_step(g, b, constrained);
                pts.push_back(state(b));
            }
            j = {{"points", pts}};
        } else if (what == "landmarks") {
            j = landmarks_json(landmarks(g));
        } else {
            throw Error(Errc::invalid_argument, "unknown induced query: " + what);
        }
        put(json_out, j);
    });
}

sf_status sf_section(const sf_game* h, const char* request, char** json_out, char** csv_out) {
    return guard([&] {
        need(h, "game");
        const GamePair& g = h->g;
        json req = parse_request(request);
        SectionSpec sec = make_section(g, to_section(req.value("section", std::string("S"))));
        JointState b = start_state(g, req, true);
        auto hits = first_return(g, sec, b, req.value("count", 10), req.value("max_events", 2000000));
        json arr = json::array();
        std::string csv = "index,x,y,piece,events_between,winding,direction,pA1,pA2,pA3,pB1,pB2,pB3\n";
        int n = 0;
        for (const auto& s : hits) {
            json slice = json::array();
            for (const auto& p : s.slice) slice.push_back({label(p.first), label(p.second)});
            arr.push_back({{"point", state(s.point)}, {"x", s.x}, {"y", s.y}, {"piece", s.piece},
                           {"events_between", s.events_between}, {"winding", s.winding},
                           {"direction", s.direction}, {"slice", slice}});
            csv += csv_row({std::to_string(n++), fmt17(s.x), fmt17(s.y), std::to_string(s.piece),
                            std::to_string(s.events_between), std::to_string(s.winding), std::to_string(s.direction),
                            fmt17(s.point.pA[0]), fmt17(s.point.pA[1]), fmt17(s.point.pA[2]), fmt17(s.point.pB[0]),
                            fmt17(s.point.pB[1]), fmt17(s.point.pB[2])});
        }
        put(json_out, json{{"section", req.value("section", std::string("S"))}, {"start", state(b)}, {"hits", arr}});
        put(csv_out, csv);
    });
}

sf_status sf_analyze(const sf_game* h, const char* request, char** json_out, char** csv_out) {
    return guard([&] {
        json req = parse_request(request);
        std::string kind = req.value("kind", std::string());
        std::string csv;
        json j;
        if (kind == "ratios") {
            RatioClaims c = check_ratio_claims(req.value("grid", 50));
            j = {{"grid", c.grid},
                 {"set1_third_min", c.set1_third_min},
                 {"set1_third_ge_3.5", c.set1_third_ge_3p5},
                 {"set1_fourth_le_1_low", c.set1_fourth_le_1_low},
                 {"set1_first_le_1_high", c.set1_first_le_1_high},
                 {"set2_max23_min", c.set2_max23_min},
                 {"set2_max23_ge_1.2", c.set2_max23_ge_1p2},
                 {"set2_first_lt_0.8_low", c.set2_first_lt_0p8_low},
                 {"set2_first_max_low", c.set2_first_max_low},
                 {"set2_last_lt_0.8_high", c.set2_last_lt_0p8_high},
                 {"covered_range", {c.lambda, c.mu}},
                 {"all", c.all()}};
            csv = "beta,set,entry,ratio\n";
            for (int k = 1; k <= c.grid; ++k) {
                RatioTables t = ratio_tables(double(k) / (c.grid + 1));
                for (int e = 0; e < 4; ++e) {
                    csv += csv_row({fmt17(t.beta), "1", std::to_string(e + 1), fmt17(t.set1[e])});
                    csv += csv_row({fmt17(t.beta), "2", std::to_string(e + 1), fmt17(t.set2[e])});
                }
            }
            put(json_out, j);
            put(csv_out, csv);
            return;
        }
        if (kind == "tau") {
            TauEstimate t = estimate_tau(req.value("rotate", 0), req.value("width", 1e-7));
            put(json_out, json{{"tau", t.tau}, {"lo", t.lo}, {"hi", t.hi}});
            return;
        }
        need(h, "game");
        const GamePair& g = h->g;
        if (kind == "corner-tables") {
            double beta = family_beta(g);
            j = corner_table_json(beta, req.value("epsilon", 1e-4), &csv);
        } else if (kind == "stability") {
            std::string o = req.value("orbit", std::string("both"));
            if (o == "both") j = json::array({stability_json(g, OrbitId::shapley), stability_json(g, OrbitId::anti_shapley)});
            else j = stability_json(g, to_orbit(o));
        } else if (kind == "spiral") {
            SpiralCheck s = moebius_spiral(g, req.value("r0", 1e-2), req.value("circuits", 50));
            j = {{"a", s.a}, {"theta", s.theta}, {"max_rel_error", s.max_rel_error}, {"radii", s.radii}};
        } else if (kind == "moebius-cone") {
            MoebiusCone m = moebius_cone_map(g, req.value("iterates", 10));
            j = {{"kappa", m.kappa},
                 {"d", m.d},
                 {"fit_residual", m.fit_residual},
                 {"derivative_at_E", m.derivative_at_E},
                 {"E_attracting", m.E_attracting},
                 {"has_fixed_point", m.has_fixed_point},
                 {"t_star", m.t_star},
                 {"fixed_point_residual", m.fixed_point_residual},
                 {"iterate_max_rel_error", m.iterate_max_rel_error}};
        } else if (kind == "winding") {
            std::vector<double> radii = req.value("radii", std::vector<double>{1e-2, 1e-3, 1e-4});
            WindingCheck w = verify_winding(g, radii);
            j = {{"a", w.a},           {"c0", w.c0},           {"K_fit", w.K_fit},
                 {"B0_fit", w.B0_fit}, {"radii", w.radii},     {"measured", w.measured},
                 {"two_point_fit", w.predicted}, {"formula", w.theory}, {"third_strategy", w.third_strategy},
                 {"within2", w.within2}};
        } else if (kind == "cone-lift") {
            ConeLift c = cone_lift(g, gamma_seed(g), req.value("n", 6));
            j = {{"kappa", c.kappa},         {"d", c.d},           {"fit_residual", c.fit_residual},
                 {"reaches_E", c.reaches_E}, {"time_to_E", c.time_to_E}, {"periodic", c.periodic},
                 {"t_star", c.t_star},       {"closure", c.closure}};
        } else if (kind == "entry-maps") {
            EntryMaps em = leg_entry_maps(g, req.value("epsilon", 1e-4), req.value("samples", 16));
            auto rows = [](const std::vector<EntrySample>& v) {
                json a = json::array();
                for (const auto& s : v)
                    a.push_back({{"in", {s.x_in, s.y_in}}, {"out", {s.x_out, s.y_out}}, {"flagged", s.flagged}});
                return a;
            };
            j = {{"R0", rows(em.R0)}, {"R1", rows(em.R1)}};
        } else {
            throw Error(Errc::invalid_argument, "unknown analysis kind: " + kind);
        }
        put(json_out, j);
        if (!csv.empty()) put(csv_out, csv);
        else if (csv_out) *csv_out = nullptr;
    });
}

sf_status sf_jitter_model_game(double beta, sf_jitter_model** out) {
    return guard([&] {
        need(out, "out");
        *out = new sf_jitter_model{game_jitter_model(beta)};
    });
}

sf_status sf_jitter_model_from_json(const char* text, sf_jitter_model** out) {
    return guard([&] {
        need(out, "out");
        need(text, "json");
        *out = new sf_jitter_model{model_from_json(text)};
    });
}

void sf_jitter_model_free(sf_jitter_model* m) { delete m; }

sf_status sf_jitter_model_json(const sf_jitter_model* h, char** json_out) {
    return guard([&] {
        need(h, "model");
        put(json_out, json::parse(model_to_json(h->m)));
    });
}

sf_status sf_jitter(const sf_jitter_model* h, const char* request, char** json_out, char** csv_out) {
    return guard([&] {
        need(h, "model");
        const JitterModel& m = h->m;
        json req = parse_request(request);
        std::string action = req.value("action", std::string());
        json j;
        std::string csv;
        if (action == "fixed-points") {
            auto fps = find_fixed_points(m, req.value("k_lo", 50L), req.value("k_hi", 59L));
            j = json::array();
            csv = "k,found,x,y,residual\n";
            for (const auto& f : fps) {
                j.push_back({{"k", f.k}, {"found", f.found}, {"point", point_json(f.point)},
                             {"residual", f.residual}, {"note", f.note}});
                csv += csv_row({std::to_string(f.k), f.found ? "1" : "0", fmt17(f.point.x), fmt17(f.point.y),
                                fmt17(f.residual)});
            }
        } else if (action == "periodic") {
            std::vector<double> a = req.contains("ratios") ? req["ratios"].get<std::vector<double>>()
                                                           : default_ratios(req.value("n", 3));
            PeriodicOrbit po = find_periodic_orbit(m, a, req.value("k_base", 50L));
            json pts = json::array();
            csv = "index,annulus,x,y\n";
            for (std::size_t i = 0; i < po.points.size(); ++i) {
                pts.push_back(point_json(po.points[i]));
                csv += csv_row({std::to_string(i), std::to_string(po.annuli[i]), big_to_string(po.points[i].x),
                                big_to_string(po.points[i].y)});
            }
            j = {{"ratio_seed", a},      {"points", pts},
                 {"annuli", po.annuli},  {"ratios", po.ratios},
                 {"windings", po.windings}, {"residual", po.residual},
                 {"radius_ratio_error", po.radius_ratio_error}, {"iterations", po.iterations}};
        } else if (action == "realize") {
            std::vector<long> seq = req.at("seq").get<std::vector<long>>();
            Realization r = realize_itinerary(m, seq);
            j = {{"point", point_json(r.z)}, {"requested", r.requested}, {"realized", r.realized},
                 {"delta", r.delta},         {"radii", r.radii},         {"verified", r.verified},
                 {"iterations", r.iterations}};
        } else if (action == "orbit") {
            Point2<double> z{req.at("x").get<double>(), req.at("y").get<double>()};
            int steps = req.value("steps", 50);
            json pts = json::array();
            csv = "index,annulus,x,y\n";
            for (int i = 0; i < steps; ++i) {
                long k = annulus_index(quad_norm(z));
                pts.push_back({{"x", z.x}, {"y", z.y}, {"annulus", k}});
                csv += csv_row({std::to_string(i), std::to_string(k), fmt17(z.x), fmt17(z.y)});
                if (i + 1 < steps) z = jitter_map(m, z);
            }
            j = {{"orbit", pts}};
        } else if (action == "sensitivity") {
            Point2<double> z{req.at("x").get<double>(), req.at("y").get<double>()};
            j = {{"estimate", sensitivity_estimate(m, z, req.value("delta", 1e-12), req.value("steps", 50))}};
        } else if (action == "divergence") {
            DivergenceReport r = itinerary_divergence(m, req.value("k", 50L), req.value("starts", 400),
                                                      req.value("seed", std::uint64_t(1)), req.value("steps", 50),
                                                      req.value("delta", 1e-12));
            j = {{"starts", r.starts}, {"diverged", r.diverged},
                 {"fraction", double(r.diverged) / std::max(1, r.starts)},
                 {"first_disagreement", r.first_disagreement}};
        } else if (action == "scan-n0") {
            j = {{"N0", scan_N0(m, req.value("span", 10), req.value("k_max", 200))}};
        } else {
            throw Error(Errc::invalid_argument, "unknown jitter action: " + action);
        }
        put(json_out, j);
        if (!csv.empty()) put(csv_out, csv);
        else if (csv_out) *csv_out = nullptr;
    });
}

sf_status sf_verify(const char* request, char** json_out, int* all_passed) {
    return guard([&] {
        json req = parse_request(request);
        std::vector<int> only;
        for (const auto& k : req.value("only", json::array()))
            only.push_back(k.is_number() ? k.get<int>() : criterion_id(k.get<std::string>()));
        bool timings = req.value("timings", false);
        auto results = run_acceptance(only, req.value("seed", std::uint64_t(1)));
        json arr = json::array();
        bool all = true;
        for (auto& r : results) {
            all = all && r.passed;
            if (!timings) r.details.erase("within_time_limit");
            json e = {{"id", r.id}, {"name", r.name}, {"passed", r.passed}, {"time_limit_s", r.time_limit},
                      {"details", r.details}};
            if (timings) e["seconds"] = r.seconds;
            arr.push_back(e);
        }
        json report = {{"criteria", arr}, {"all_passed", all}};
        // Corner tables at a caller-chosen beta; at the branch point 1/2 both sides are reported.
        bool corners = std::any_of(results.begin(), results.end(), [](const CriterionResult& r) { return r.id == 4; });
        if (corners && req.contains("corner_beta")) {
            double b = req["corner_beta"].get<double>();
            std::vector<double> betas = b == 0.5 ? std::vector<double>{0.5 - 1e-3, 0.5 + 1e-3} : std::vector<double>{b};
            for (double x : betas) report["requested_beta_tables"].push_back(corner_table_json(x, 1e-4));
        }
        if (all_passed) *all_passed = all ? 1 : 0;
        put(json_out, report);
    });
}

sf_status sf_sweep(const char* request, char** json_out, char** csv_out) {
    return guard([&] {
        json req = parse_request(request);
        double lo = req.value("beta_min", 0.05), hi = req.value("beta_max", 0.95);
        int n = req.value("points", 19);
        if (n < 1 || !(lo > 0 && hi < 1 && lo <= hi)) throw Error(Errc::invalid_argument, "bad beta range");
        std::vector<json> rows(n);
        parallel_for(n, [&](int i) {
            double b = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
            json r = {{"beta", b}};
            try {
                GamePair g = shapley_family(b);
                for (OrbitId o : {OrbitId::shapley, OrbitId::anti_shapley}) {
                    CycleLinearization lin = cycle_linearization(g, cycle_of(o));
                    double m0 = std::abs(lin.multipliers[0]), m1 = std::abs(lin.multipliers[1]);
                    r[to_string(o)] = {{"moduli", {m0, m1}}, {"classification", to_string(classify_moduli(m0, m1))}};
                }
                GammaOrbit go = gamma_orbit(g);
                r["gamma"] = {{"kappa", go.kappa}, {"d", go.d}, {"has_gamma", go.has_gamma}, {"t_star", go.t_star}};
                RatioTables t = ratio_tables(b);
                r["ratios"] = {{"set1", t.set1}, {"set2", t.set2}};
            } catch (const std::exception& e) {
                r["error"] = e.what();
            }
            rows[i] = r;
        });
        std::string csv =
            "beta,shapley_m0,shapley_m1,shapley_class,anti_m0,anti_m1,anti_class,gamma_kappa,gamma_d,has_gamma,t_star\n";
        for (const auto& r : rows) {
            if (r.contains("error")) {
                csv += fmt17(r["beta"].get<double>()) + ",,,,,,,,,,\n";
                continue;
            }
            const json &s = r[to_string(OrbitId::shapley)], &a = r[to_string(OrbitId::anti_shapley)], &gm = r["gamma"];
            csv += csv_row({fmt17(r["beta"].get<double>()), fmt17(s["moduli"][0].get<double>()),
                            fmt17(s["moduli"][1].get<double>()), s["classification"].get<std::string>(),
                            fmt17(a["moduli"][0].get<double>()), fmt17(a["moduli"][1].get<double>()),
                            a["classification"].get<std::string>(), fmt17(gm["kappa"].get<double>()),
                            fmt17(gm["d"].get<double>()), gm["has_gamma"].get<bool>() ? "1" : "0",
                            fmt17(gm["t_star"].get<double>())});
        }
        put(json_out, json{{"rows", rows}});
        put(csv_out, csv);
    });
}

sf_status sf_perturb(const char* request, char** json_out) {
    return guard([&] {
        json req = parse_request(request);
        double beta = req.value("beta", 0.3), norm = req.value("norm", 1e-3);
        std::uint64_t seed = req.value("seed", std::uint64_t(1));
        if (req.contains("trial")) {
            GamePair g = perturbed_family(beta, norm, seed, req["trial"].get<std::uint64_t>());
            put(json_out, json{{"A", mat(g.A)}, {"B", mat(g.B)}, {"beta", beta}, {"equilibrium", state(g.equilibrium)}});
            return;
        }
        RobustnessReport r = robustness_sweep(beta, req.value("trials", 100), norm, seed);
        put(json_out, json{{"beta", beta},
                           {"norm", norm},
                           {"trials", r.trials},
                           {"interior", r.interior},
                           {"gamma_closes", r.gamma_closes},
                           {"shapley_persists", r.shapley_persists},
                           {"anti_shapley_persists", r.anti_shapley_persists},
                           {"cone_lift_ok", r.cone_lift_ok},
                           {"all_ok", r.all_ok},
                           {"shapley_class", to_string(r.shapley_class)},
                           {"anti_shapley_class", to_string(r.anti_shapley_class)}});
    });
}

}  // extern "C"
