// Command-line front end. Talks to the library only through the C interface.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "shapley_flow.h"

using nlohmann::json;

namespace {

struct Failure {
    sf_status status;
    std::string message;
};

void check(sf_status s) {
    if (s != SF_OK) throw Failure{s, sf_last_error()};
}

struct Owned {
    char* p = nullptr;
    ~Owned() { sf_string_free(p); }
    std::string str() const { return p ? std::string(p) : std::string(); }
};

struct Globals {
    std::optional<double> beta;
    std::string game_file;
    std::uint64_t seed = 1;
    std::string out;
    std::string format = "json";
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Failure{SF_E_INVALID_ARGUMENT, "cannot read " + path};
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

// Write to a sibling temporary and rename, so readers never see a partial file.
void write_atomic(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::fwrite(text.data(), 1, text.size(), stdout);
        return;
    }
    std::string tmp = path + ".tmp";
    {
        std::ofstream o(tmp, std::ios::binary);
        if (!o) throw Failure{SF_E_INVALID_ARGUMENT, "cannot write " + path};
        o << text;
    }
    std::filesystem::rename(tmp, path);
}

void emit(const Globals& g, const Owned& js, const Owned* csv) {
    if (g.format == "csv") {
        if (!csv || !csv->p) throw Failure{SF_E_INVALID_ARGUMENT, "this command has no CSV output"};
        write_atomic(g.out, csv->str());
    } else {
        write_atomic(g.out, js.str());
    }
}

struct GameHandle {
    sf_game* h = nullptr;
    ~GameHandle() { sf_game_free(h); }
};

void load_game(const Globals& g, GameHandle& gh, std::optional<double> fallback = std::nullopt) {
    if (!g.game_file.empty()) {
        json j = json::parse(read_file(g.game_file));
        if (g.beta && !j.contains("beta")) j["beta"] = *g.beta;
        check(sf_game_from_json(j.dump().c_str(), &gh.h));
    } else if (g.beta || fallback) {
        check(sf_game_family(g.beta ? *g.beta : *fallback, &gh.h));
    } else {
        throw Failure{SF_E_INVALID_ARGUMENT, "give --beta or --game"};
    }
}

std::vector<double> parse_doubles(const std::string& s, char sep = ',') {
    std::vector<double> v;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, sep);)
        if (!item.empty()) v.push_back(std::stod(item));
    return v;
}

std::vector<long> parse_longs(const std::string& s) {
    std::vector<long> v;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, ',');)
        if (!item.empty()) v.push_back(std::stol(item));
    return v;
}

// Start options shared by commands that run the flow.
struct StartOpts {
    std::string start = "random";
    std::string pA, pB;
    void add(CLI::App* c) {
        c->add_option("--start", start, "random | gamma")->capture_default_str();
        c->add_option("--pA", pA, "explicit start for player A, comma separated");
        c->add_option("--pB", pB, "explicit start for player B, comma separated");
    }
    void fill(json& req, std::uint64_t seed) const {
        if (!pA.empty() || !pB.empty()) {
            if (pA.empty() || pB.empty()) throw Failure{SF_E_INVALID_ARGUMENT, "--pA and --pB go together"};
            req["start"] = {{"pA", parse_doubles(pA)}, {"pB", parse_doubles(pB)}};
        } else {
            req["start"] = start;
        }
        req["seed"] = seed;
    }
};

json parse_itinerary(const std::string& s) {
    // "1,2 2,2 2b,3"
    json out = json::array();
    std::stringstream ss(s);
    for (std::string pair; ss >> pair;) {
        auto c = pair.find(',');
        if (c == std::string::npos) throw Failure{SF_E_INVALID_ARGUMENT, "itinerary entries look like i,j"};
        auto lab = [](const std::string& t) -> json {
            if (t.size() == 1) return std::stoi(t);
            return t;
        };
        out.push_back({lab(pair.substr(0, c)), lab(pair.substr(c + 1))});
    }
    return out;
}

std::pair<long, long> parse_range(const std::string& s) {
    auto d = s.find("..");
    if (d == std::string::npos) {
        long k = std::stol(s);
        return {k, k};
    }
    return {std::stol(s.substr(0, d)), std::stol(s.substr(d + 2))};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fictitious-play flow simulator and analysis toolkit"};
    app.fallthrough();
    app.require_subcommand(1);
    Globals G;
    app.add_option("--beta", G.beta, "family parameter in (0,1)");
    app.add_option("--game", G.game_file, "JSON file with matrices A and B");
    app.add_option("--seed", G.seed, "random seed")->capture_default_str();
    app.add_option("--out", G.out, "output file (default stdout)");
    app.add_option("--format", G.format, "output format")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();

    // simulate
    auto* sim = app.add_subcommand("simulate", "event-driven trajectory");
    StartOpts sim_start;
    sim_start.add(sim);
    int sim_events = 1000;
    std::optional<double> sim_tmax;
    double sim_stop = 1e-9;
    bool sim_constrained = false;
    std::string sim_csv;
    sim->add_option("--events", sim_events, "maximum number of events")->capture_default_str();
    sim->add_option("--max-time", sim_tmax, "stop once t exceeds this");
    sim->add_option("--stop-radius", sim_stop, "stop within this sum-distance of E")->capture_default_str();
    sim->add_flag("--constrained-J", sim_constrained, "follow the constrained flow on J");
    sim->add_option("--csv-out", sim_csv, "also write the event table here");

    // code
    auto* code = app.add_subcommand("code", "itinerary coding, dithering and cycles");
    StartOpts code_start;
    code_start.add(code);
    std::string code_it, code_variant = "all-I";
    int code_events = 300, code_period = 0, code_repeats = 3;
    code->add_option("--itinerary", code_it, "labels such as \"1,2 2,2 2,3\" instead of simulating");
    code->add_option("--variant", code_variant, "dithering variant")->check(CLI::IsMember({"all-I", "literal"}));
    code->add_option("--events", code_events, "events to simulate")->capture_default_str();
    code->add_option("--period", code_period, "period for the essential-period count");
    code->add_option("--min-repeats", code_repeats, "repeats required to call a cycle")->capture_default_str();

    // induced
    auto* ind = app.add_subcommand("induced", "induced boundary flow and orbit analyses");
    StartOpts ind_start;
    ind_start.add(ind);
    std::string ind_what = "gamma", ind_orbit = "both", ind_radii;
    int ind_steps = 6, ind_circuits = 50, ind_iter = 10, ind_rotate = 0;
    double ind_r0 = 1e-2, ind_eps = 1e-4;
    bool ind_constrained = false;
    ind->add_option("--what", ind_what,
                    "gamma | step | landmarks | stability | tau | spiral | moebius-cone | winding | cone-lift | "
                    "corner-tables | ratios | entry-maps")
        ->capture_default_str();
    ind->add_option("--steps", ind_steps, "induced steps")->capture_default_str();
    ind->add_flag("--constrained", ind_constrained, "constrained legs on J");
    ind->add_option("--orbit", ind_orbit, "shapley | anti-shapley | gamma | both")->capture_default_str();
    ind->add_option("--r0", ind_r0, "spiral start radius")->capture_default_str();
    ind->add_option("--circuits", ind_circuits, "spiral circuits")->capture_default_str();
    ind->add_option("--iterates", ind_iter, "cone-map iterates")->capture_default_str();
    ind->add_option("--radii", ind_radii, "winding radii, comma separated");
    ind->add_option("--epsilon", ind_eps, "corner/entry-map offset")->capture_default_str();
    ind->add_option("--rotate", ind_rotate, "section rotation for tau")->capture_default_str();

    // section
    auto* sec = app.add_subcommand("section", "first returns to a Poincare section");
    StartOpts sec_start;
    sec_start.add(sec);
    std::string sec_kind = "S";
    int sec_count = 10, sec_max = 2000000;
    sec->add_option("--section", sec_kind, "S | V0xB31 | A12xV1 | V2xB12 | transversal")->capture_default_str();
    sec->add_option("--count", sec_count, "returns to record")->capture_default_str();
    sec->add_option("--max-events", sec_max, "event budget")->capture_default_str();

    // jitter
    auto* jit = app.add_subcommand("jitter", "jitter map solvers");
    std::string jit_action, jit_model, jit_k = "50..59", jit_seq, jit_ratios;
    int jit_n = 3, jit_steps = 50, jit_starts = 400, jit_span = 10, jit_kmax = 200;
    long jit_kbase = 50;
    double jit_x = 0, jit_y = 0, jit_delta = 1e-12;
    jit->add_option("action", jit_action, "model | fixed-points | periodic | realize | orbit | sensitivity | divergence | scan-n0")
        ->required();
    jit->add_option("--model", jit_model, "model JSON file (default: derived from --beta, 0.5 if absent)");
    jit->add_option("--k", jit_k, "annulus range lo..hi, or one annulus for divergence")->capture_default_str();
    jit->add_option("--seq", jit_seq, "annulus itinerary, comma separated");
    jit->add_option("--n", jit_n, "period")->capture_default_str();
    jit->add_option("--ratios", jit_ratios, "radial ratio seed, comma separated");
    jit->add_option("--k-base", jit_kbase, "first annulus of a periodic orbit")->capture_default_str();
    jit->add_option("--x", jit_x, "start x");
    jit->add_option("--y", jit_y, "start y");
    jit->add_option("--steps", jit_steps, "iterates")->capture_default_str();
    jit->add_option("--delta", jit_delta, "initial separation")->capture_default_str();
    jit->add_option("--starts", jit_starts, "sampled starts")->capture_default_str();
    jit->add_option("--span", jit_span, "consecutive annuli for N0")->capture_default_str();
    jit->add_option("--k-max", jit_kmax, "N0 scan limit")->capture_default_str();

    // verify
    auto* ver = app.add_subcommand("verify", "acceptance suite");
    std::string ver_only;
    bool ver_timings = false;
    ver->add_option("--only", ver_only, "criteria ids or names, comma separated");
    ver->add_flag("--timings", ver_timings, "include wall-clock seconds (output no longer reproducible)");

    // sweep
    auto* swp = app.add_subcommand("sweep", "stability and Gamma data over a beta grid");
    double swp_lo = 0.05, swp_hi = 0.95;
    int swp_n = 19;
    swp->add_option("--beta-min", swp_lo)->capture_default_str();
    swp->add_option("--beta-max", swp_hi)->capture_default_str();
    swp->add_option("--points", swp_n)->capture_default_str();

    // perturb
    auto* per = app.add_subcommand("perturb", "random matrix perturbations");
    int per_trials = 100;
    double per_norm = 1e-3;
    std::optional<std::uint64_t> per_trial;
    per->add_option("--trials", per_trials)->capture_default_str();
    per->add_option("--norm", per_norm, "max-entry norm of the perturbation")->capture_default_str();
    per->add_option("--trial", per_trial, "emit the matrices of this trial instead of a sweep");

    CLI11_PARSE(app, argc, argv);

    try {
        Owned js, csv;
        if (*sim) {
            GameHandle gh;
            load_game(G, gh);
            json req = {{"events", sim_events}, {"stop_radius", sim_stop}, {"constrained_J", sim_constrained}};
            if (sim_tmax) req["max_time"] = *sim_tmax;
            sim_start.fill(req, G.seed);
            check(sf_simulate(gh.h, req.dump().c_str(), &js.p, &csv.p));
            emit(G, js, &csv);
            if (!sim_csv.empty()) write_atomic(sim_csv, csv.str());
        } else if (*code) {
            GameHandle gh;
            json req = {{"variant", code_variant}, {"min_repeats", code_repeats}, {"events", code_events}};
            if (code_period > 0) req["period"] = code_period;
            if (!code_it.empty()) {
                req["itinerary"] = parse_itinerary(code_it);
            } else {
                load_game(G, gh);
                code_start.fill(req, G.seed);
            }
            check(sf_code(gh.h, req.dump().c_str(), &js.p));
            emit(G, js, nullptr);
        } else if (*ind) {
            GameHandle gh;
            static const std::vector<std::string> induced_kinds = {"gamma", "step", "landmarks"};
            bool induced = std::find(induced_kinds.begin(), induced_kinds.end(), ind_what) != induced_kinds.end();
            bool gameless = ind_what == "ratios" || ind_what == "tau";
            if (!gameless) load_game(G, gh);
            if (induced) {
                json req = {{"what", ind_what}, {"steps", ind_steps}, {"constrained", ind_constrained}};
                ind_start.fill(req, G.seed);
                check(sf_induced(gh.h, req.dump().c_str(), &js.p));
                emit(G, js, nullptr);
            } else {
                json req = {{"kind", ind_what}, {"orbit", ind_orbit}, {"r0", ind_r0},
                            {"circuits", ind_circuits}, {"iterates", ind_iter}, {"epsilon", ind_eps},
                            {"rotate", ind_rotate}};
                if (!ind_radii.empty()) req["radii"] = parse_doubles(ind_radii);
                check(sf_analyze(gh.h, req.dump().c_str(), &js.p, &csv.p));
                emit(G, js, &csv);
            }
        } else if (*sec) {
            GameHandle gh;
            load_game(G, gh);
            json req = {{"section", sec_kind}, {"count", sec_count}, {"max_events", sec_max}};
            sec_start.fill(req, G.seed);
            check(sf_section(gh.h, req.dump().c_str(), &js.p, &csv.p));
            emit(G, js, &csv);
        } else if (*jit) {
            sf_jitter_model* m = nullptr;
            if (!jit_model.empty()) check(sf_jitter_model_from_json(read_file(jit_model).c_str(), &m));
            else check(sf_jitter_model_game(G.beta ? *G.beta : 0.5, &m));
            struct Free {
                sf_jitter_model* m;
                ~Free() { sf_jitter_model_free(m); }
            } guard{m};
            if (jit_action == "model") {
                check(sf_jitter_model_json(m, &js.p));
                emit(G, js, nullptr);
            } else {
                auto [klo, khi] = parse_range(jit_k);
                json req = {{"action", jit_action}, {"k_lo", klo},     {"k_hi", khi},         {"k", klo},
                            {"n", jit_n},           {"k_base", jit_kbase}, {"x", jit_x},      {"y", jit_y},
                            {"steps", jit_steps},   {"delta", jit_delta},  {"starts", jit_starts},
                            {"seed", G.seed},       {"span", jit_span},    {"k_max", jit_kmax}};
                if (!jit_seq.empty()) req["seq"] = parse_longs(jit_seq);
                if (!jit_ratios.empty()) req["ratios"] = parse_doubles(jit_ratios);
                check(sf_jitter(m, req.dump().c_str(), &js.p, &csv.p));
                emit(G, js, &csv);
            }
        } else if (*ver) {
            json req = {{"seed", G.seed}, {"timings", ver_timings}};
            json only = json::array();
            std::stringstream ss(ver_only);
            for (std::string item; std::getline(ss, item, ',');)
                if (!item.empty()) only.push_back(item);
            req["only"] = only;
            if (G.beta) req["corner_beta"] = *G.beta;
            int all = 0;
            check(sf_verify(req.dump().c_str(), &js.p, &all));
            emit(G, js, nullptr);
            return all ? 0 : 1;
        } else if (*swp) {
            json req = {{"beta_min", swp_lo}, {"beta_max", swp_hi}, {"points", swp_n}};
            check(sf_sweep(req.dump().c_str(), &js.p, &csv.p));
            emit(G, js, &csv);
        } else if (*per) {
            json req = {{"beta", G.beta ? *G.beta : 0.3}, {"norm", per_norm}, {"trials", per_trials}, {"seed", G.seed}};
            if (per_trial) req["trial"] = *per_trial;
            check(sf_perturb(req.dump().c_str(), &js.p));
            emit(G, js, nullptr);
        }
    } catch (const Failure& f) {
        std::cerr << "error (" << sf_status_name(f.status) << "): " << f.message << "\n";
        return f.status == SF_E_INTEGRATION ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
