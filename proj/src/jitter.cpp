#include "sf/jitter.hpp"

#include <boost/math/tools/roots.hpp>
#include <json.hpp>

#include "sf/analysis.hpp"
#include "sf/rng.hpp"

namespace sf {

using boost::multiprecision::abs;
using boost::multiprecision::floor;
using boost::multiprecision::round;

std::string big_to_string(const Big& v) { return v.str(60, std::ios_base::scientific); }

namespace {

using json = nlohmann::json;

QuadrantLinearMap map_from(const json& j) {
    QuadrantLinearMap q;
    if (!j.is_array() || j.size() != 4) throw Error(Errc::invalid_argument, "map needs 4 scales");
    for (int m = 0; m < 4; ++m) {
        q.scales[m] = j[m].get<double>();
        if (!(q.scales[m] > 0) || !std::isfinite(q.scales[m])) throw Error(Errc::invalid_argument, "scales must be positive");
    }
    return q;
}

Big quarter() { return two_pi<Big>() / 4; }

struct Stage {
    QuadrantLinearMap enter, leave;
};

std::vector<Stage> stages_of(const JitterModel& m) {
    std::vector<Stage> st{{m.A0, m.A1}};
    if (m.A2 && m.A3) st.push_back({*m.A2, *m.A3});
    return st;
}

// Leaving map of one stage followed by the inverse entry map of the next, scale ratios in full precision.
struct Contraction {
    std::array<Big, 4> s;
    Contraction(const QuadrantLinearMap& next_enter, const QuadrantLinearMap& leave) {
        for (int k = 0; k < 4; ++k) s[k] = Big(leave.scales[k]) / Big(next_enter.scales[k]);
    }
    Big min_scale() const { return *std::min_element(s.begin(), s.end()); }
    Big max_scale() const { return *std::max_element(s.begin(), s.end()); }
    Big image_angle(const Big& phi) const {
        Big q = wrap_angle(phi) / quarter();
        int m = std::min(3, int(floor(q)));
        Big f = q - m;
        Big a = (1 - f) * s[m], b = f * s[(m + 1) % 4];
        return (m + b / (a + b)) * quarter();
    }
};

std::vector<Contraction> contractions(const std::vector<Stage>& st) {
    std::vector<Contraction> out;
    for (size_t k = 0; k < st.size(); ++k) out.emplace_back(st[(k + 1) % st.size()].enter, st[k].leave);
    return out;
}

// Angle of a ray with ratio t: first crossing walking clockwise from the smallest-scale axis to the largest.
Big ray_for_ratio(const Contraction& A, const Big& t) {
    const auto& s = A.s;
    int lo = int(std::min_element(s.begin(), s.end()) - s.begin());
    int hi = int(std::max_element(s.begin(), s.end()) - s.begin());
    for (int step = 0; step < 4; ++step) {
        int m = (lo + step) % 4;
        if (t == s[m]) return m * quarter();
        if (m == hi) break;
        Big s0 = s[m], s1 = s[(m + 1) % 4];
        if ((t - s0) * (t - s1) < 0) return (m + (t - s0) / (s1 - s0)) * quarter();
    }
    throw Error(Errc::precondition, "ratio outside the contraction range");
}

std::vector<Big> unit_ratio_rays(const Contraction& A) {
    std::vector<Big> out;
    const auto& s = A.s;
    for (int m = 0; m < 4; ++m) {
        Big s0 = s[m], s1 = s[(m + 1) % 4];
        if (s0 == 1) out.push_back(m * quarter());
        else if ((s0 - 1) * (s1 - 1) < 0) out.push_back((m + (1 - s0) / (s1 - s0)) * quarter());
    }
    return out;
}

double to_d(const Big& v) { return v.convert_to<double>(); }

Point2<double> to_d(const Point2<Big>& p) { return {to_d(p.x), to_d(p.y)}; }

Big distance(const Point2<Big>& a, const Point2<Big>& b) { return abs(a.x - b.x) + abs(a.y - b.y); }

const Big kConverged("1e-170");

// Orbit skeleton through a sequence of rotations. Step j rotates the pre-rotation point w_j (radius rho_j,
// angle chi_j) by 2 pi / rho_j = Y_j = 2 pi n_j + alpha_j onto the ray psi_{j+1} whose contraction ratio
// a_{j+1} = Y_j / Y_{j+1} carries it to w_{j+1}. Every S-th step is a full iterate with an annulus target.
struct Chain {
    int S = 1, J = 0;
    bool cyclic = false;
    std::vector<Big> a, Y, psi, chi, c;
    std::vector<long> wind;
    int iterations = 0;
};

Chain solve_chain(const JitterModel& m, const std::vector<long>& ks, bool cyclic) {
    const std::vector<Stage> st = stages_of(m);
    const std::vector<Contraction> C = contractions(st);
    Chain ch;
    ch.S = int(st.size());
    ch.cyclic = cyclic;
    const int S = ch.S, n = int(ks.size());
    const int J = ch.J = cyclic ? S * n : S * (n - 1) + 1;
    const Big tp = two_pi<Big>();
    auto stage = [&](int j) { return j % S; };
    auto prev = [&](int j) { return (j - 1 + J) % J; };
    auto has_succ = [&](int j) { return cyclic || j + 1 < J; };
    auto succ = [&](int j) { return (j + 1) % J; };
    auto k_of = [&](int i) { return Big(ks[i % n]) + Big(0.5); };
    std::vector<Big> lo(S), hi(S), margin(S);
    for (int s = 0; s < S; ++s) {
        lo[s] = C[s].min_scale();
        hi[s] = C[s].max_scale();
        margin[s] = (hi[s] - lo[s]) * Big("1e-6");
    }
    auto clamp_into = [&](int s, const Big& v) { return std::min(std::max(v, lo[s] + margin[s]), hi[s] - margin[s]); };
    // Split a full-iterate radial ratio R over the two stages, middle of the feasible interval.
    auto split = [&](const Big& R) {
        Big l = std::max(lo[0], R / hi[1]), h = std::min(hi[0], R / lo[1]);
        if (!(l < h)) throw Error(Errc::not_found, "radial ratio not reachable by the two stages");
        return sqrt(l * h);
    };
    ch.a.assign(J, Big(1));
    ch.Y.assign(J, Big(0));
    ch.psi.assign(J, Big(0));
    ch.chi.assign(J, Big(0));
    ch.c.assign(J, Big(1));
    for (int j = cyclic ? 0 : 1; j < J; ++j) {
        int i1 = j / S, i0 = (j - 1 + J) % J / S;  // target indices around the step into j
        if (S == 1) {
            ch.a[j] = clamp_into(0, k_of(i0) / k_of(i1));
        } else if (j % 2 == 1) {
            ch.a[j] = clamp_into(0, split(k_of(i0) / k_of(i0 + 1)));
        } else {
            Big R = k_of(i1 - 1 + n) / k_of(i1);
            ch.a[j] = clamp_into(1, R / ch.a[prev(j)]);
        }
    }
    auto refresh = [&] {
        for (int j = 0; j < J; ++j) {
            if (!cyclic && j == 0) {
                ch.chi[0] = 0;
                ch.c[0] = st[0].enter.ratio_at(Big(0));
                continue;
            }
            const Contraction& Cc = C[stage(prev(j))];
            ch.psi[j] = ray_for_ratio(Cc, ch.a[j]);
            ch.chi[j] = Cc.image_angle(ch.psi[j]);
            ch.c[j] = st[stage(j)].enter.ratio_at(ch.chi[j]);
        }
    };
    // The last point of an open chain has no angle to meet; its phase puts it at the centre of its shell.
    auto alpha = [&](int j) {
        return has_succ(j) ? wrap_angle(ch.psi[succ(j)] - ch.chi[j]) : wrap_angle(tp * ch.c[j] * k_of(j / S));
    };
    auto comfortable = [&](int j) {
        int s = stage(prev(j));
        Big band = (hi[s] - lo[s]) / 20;
        return ch.a[j] > lo[s] + band && ch.a[j] < hi[s] - band;
    };
    ch.wind.assign(J, -1);
    for (int outer = 0; outer < 40; ++outer) {
        refresh();
        std::vector<long> fresh(J, 0);
        for (int j = 0; j < J; ++j) {
            Big al = alpha(j);
            if (j % S == 0) {
                int i = j / S;
                // Keep a winding whose radius already sits well inside its shell; otherwise aim at the centre.
                Big where = outer > 0 ? ch.Y[j] / (tp * ch.c[j]) - ks[i] : Big(-1);
                if (where > 0.15 && where < 0.85) {
                    fresh[j] = ch.wind[j];
                    continue;
                }
                fresh[j] = long(to_d(round(ch.c[j] * k_of(i) - al / tp)));
            } else {
                if (outer > 0 && comfortable(j) && (!has_succ(j) || comfortable(succ(j)))) {
                    fresh[j] = ch.wind[j];
                    continue;
                }
                int i = j / S;
                Big R = ch.c[j - 1] * k_of(i) / (ch.c[succ(j)] * k_of(i + 1));
                Big want = tp * ch.c[j - 1] * k_of(i) / split(R);
                fresh[j] = long(to_d(round((want - al) / tp)));
            }
        }
        if (outer > 0 && fresh == ch.wind) break;
        ch.wind = fresh;
        for (int it = 0; it < 500; ++it, ++ch.iterations) {
            refresh();
            for (int j = 0; j < J; ++j) ch.Y[j] = tp * ch.wind[j] + alpha(j);
            Big change = 0;
            for (int j = 0; j < J; ++j) {
                if (!has_succ(j)) continue;
                Big next = clamp_into(stage(j), ch.Y[j] / ch.Y[succ(j)]);
                change = std::max(change, Big(abs(next - ch.a[succ(j)])));
                ch.a[succ(j)] = next;
            }
            if (change < kConverged) break;
        }
    }
    refresh();
    for (int j = 0; j < J; ++j) ch.Y[j] = tp * ch.wind[j] + alpha(j);
    for (int j = 0; j < J; ++j)
        if (has_succ(j) && abs(ch.Y[j] / ch.Y[succ(j)] - ch.a[succ(j)]) > Big("1e-150"))
            throw Error(Errc::not_found, "orbit needs a ray ratio outside the model range");
    return ch;
}

Point2<Big> chain_point(const JitterModel& m, const Chain& ch, int j) {
    const std::vector<Stage> st = stages_of(m);
    Point2<Big> w = from_quad_polar(QuadPolar<Big>{two_pi<Big>() / ch.Y[j], ch.chi[j]});
    return st[j % ch.S].enter.apply(w);
}

}  // namespace

JitterModel model_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(Errc::invalid_argument, std::string("model JSON: ") + e.what());
    }
    JitterModel m;
    try {
        m.A0 = map_from(j.at("A0"));
        m.A1 = map_from(j.at("A1"));
        if (j.contains("A2") != j.contains("A3")) throw Error(Errc::invalid_argument, "A2 and A3 come together");
        if (j.contains("A2")) {
            m.A2 = map_from(j["A2"]);
            m.A3 = map_from(j["A3"]);
        }
        m.lambda = j.value("lambda", m.lambda);
        m.mu = j.value("mu", m.mu);
        m.N0 = j.value("N0", m.N0);
    } catch (const json::exception& e) {
        throw Error(Errc::invalid_argument, std::string("model JSON: ") + e.what());
    }
    if (!(m.lambda > 0 && m.lambda < m.mu) || m.N0 < 1) throw Error(Errc::invalid_argument, "bad lambda/mu/N0");
    return m;
}

std::string model_to_json(const JitterModel& m) {
    json j;
    j["A0"] = m.A0.scales;
    j["A1"] = m.A1.scales;
    if (m.A2) j["A2"] = m.A2->scales;
    if (m.A3) j["A3"] = m.A3->scales;
    j["lambda"] = m.lambda;
    j["mu"] = m.mu;
    j["N0"] = m.N0;
    return j.dump();
}

std::array<double, 2> radial_ratio_range(const JitterModel& m) {
    double lo = 1, hi = 1;
    for (int s = 0; s < m.stage_count(); ++s) {
        QuadrantLinearMap c = m.contraction(s);
        lo *= c.min_scale();
        hi *= c.max_scale();
    }
    return {lo, hi};
}

void check_contraction_range(const JitterModel& m) {
    auto r = radial_ratio_range(m);
    if (!(r[0] < m.lambda && r[1] > m.mu)) throw Error(Errc::model_violation, "radial ratios do not cover (lambda, mu)");
}

JitterModel game_jitter_model(double beta) {
    Table4 t = corner_formulas(beta, 1.0);
    JitterModel m;
    QuadrantLinearMap set1, set2;
    for (int k = 0; k < 4; ++k) {
        set1.scales[k] = t[1][k] / t[2][k];
        set2.scales[k] = t[3][k] / t[0][k];
    }
    m.A1 = set1;
    m.A2 = QuadrantLinearMap{};
    m.A3 = set2;
    check_contraction_range(m);
    m.N0 = scan_N0(m);
    return m;
}

std::vector<FixedPoint> find_fixed_points(const JitterModel& m, long k_lo, long k_hi) {
    if (k_lo < 1 || k_hi < k_lo) throw Error(Errc::invalid_argument, "bad annulus range");
    std::vector<FixedPoint> out;
    auto finish = [&](FixedPoint& fp, const Point2<Big>& x) {
        if (annulus_index(quad_norm(x)) != fp.k) return false;
        Point2<double> xd = to_d(x);
        Point2<double> fx = jitter_map(m, xd);
        fp.point = xd;
        fp.residual = std::abs(fx.x - xd.x) + std::abs(fx.y - xd.y);
        fp.found = fp.residual <= 1e-9;
        if (!fp.found) fp.note = "residual above 1e-9";
        return fp.found;
    };
    if (m.stage_count() == 2) {
        for (long k = k_lo; k <= k_hi; ++k) {
            FixedPoint fp;
            fp.k = k;
            try {
                Chain ch = solve_chain(m, {k}, true);
                finish(fp, chain_point(m, ch, 0));
                if (!fp.found && fp.note.empty()) fp.note = "chain point left its annulus";
            } catch (const Error& e) {
                fp.note = e.what();
            }
            out.push_back(fp);
        }
        return out;
    }
    Contraction A(m.A0, m.A1);
    std::vector<Big> rays = unit_ratio_rays(A);
    const Big tp = two_pi<Big>();
    for (long k = k_lo; k <= k_hi; ++k) {
        FixedPoint fp;
        fp.k = k;
        if (rays.empty()) fp.note = "no ray with unit ratio";
        for (const Big& psi : rays) {
            Big chi = A.image_angle(psi);
            Big alpha = wrap_angle(psi - chi);
            Big c = m.A0.ratio_at(chi);
            // |x| = c rho in [1/(k+1), 1/k)  <=>  2 pi / rho in (2 pi c k, 2 pi c (k+1)]
            long j_lo = long(to_d(floor((tp * c * k - alpha) / tp))), j_hi = j_lo + long(to_d(c)) + 3;
            for (long j = std::max(0L, j_lo); j <= j_hi && !fp.found; ++j) {
                Big target = alpha + tp * j;
                if (target <= 0) continue;
                auto g = [&](const Big& rho) { return tp / rho - target; };
                Big lo = tp / (target + tp / 2), hi = tp / std::max(Big(target - tp / 2), Big(target / 2));
                boost::uintmax_t iters = 200;
                auto r = boost::math::tools::toms748_solve(g, lo, hi, boost::math::tools::eps_tolerance<Big>(300), iters);
                Big rho = (r.first + r.second) / 2;
                finish(fp, m.A0.apply(from_quad_polar(QuadPolar<Big>{rho, chi})));
            }
            if (fp.found) break;
        }
        if (!fp.found && fp.note.empty()) fp.note = "no root in this annulus";
        out.push_back(fp);
    }
    return out;
}

int scan_N0(const JitterModel& m, int span, int k_max) {
    for (int k = 1; k <= k_max; ++k) {
        auto fps = find_fixed_points(m, k, k + span - 1);
        if (std::all_of(fps.begin(), fps.end(), [](const FixedPoint& f) { return f.found; })) return k;
    }
    throw Error(Errc::not_found, "no annulus range with fixed points up to k_max");
}

PeriodicOrbit find_periodic_orbit(const JitterModel& m, const std::vector<double>& a_seed, long k_base) {
    const int n = int(a_seed.size());
    if (n < 1) throw Error(Errc::invalid_argument, "period must be positive");
    double prod = 1;
    for (double a : a_seed) {
        if (!(a > m.lambda && a < m.mu)) throw Error(Errc::precondition, "ratio seed outside (lambda, mu)");
        prod *= a;
    }
    if (std::abs(prod - 1) > 1e-9) throw Error(Errc::precondition, "ratio seed product must be 1");
    if (k_base < m.N0) throw Error(Errc::precondition, "k below N0");
    for (int attempt = 0; attempt < 4; ++attempt, k_base *= 2) {
        std::vector<long> ks{k_base};
        for (int i = 1; i < n; ++i) ks.push_back(std::max(1L, std::lround(double(ks.back()) / a_seed[i])));
        Chain ch;
        try {
            ch = solve_chain(m, ks, true);
        } catch (const Error&) {
            continue;
        }
        PeriodicOrbit po;
        po.iterations = ch.iterations;
        for (int i = 0; i < n; ++i) po.points.push_back(chain_point(m, ch, i * ch.S));
        for (int j = 0; j < ch.J; ++j) {
            po.ratios.push_back(to_d(ch.a[(j + 1) % ch.J]));
            po.windings.push_back(ch.wind[j]);
        }
        Point2<Big> z = po.points[0];
        Big r0 = quad_norm(m.A0.apply_inverse(z)), prodA = 1;
        for (int i = 0; i < n; ++i) {
            po.annuli.push_back(annulus_index(quad_norm(po.points[i])));
            if (i > 0) po.residual = std::max(po.residual, to_d(distance(z, po.points[i])));
            z = jitter_map(m, z);
            for (int s = 0; s < ch.S; ++s) prodA *= ch.a[((i + 1) * ch.S - s) % ch.J];
            Big ri = quad_norm(m.A0.apply_inverse(z));
            po.radius_ratio_error = std::max(po.radius_ratio_error, to_d(abs(ri / r0 - prodA) / prodA));
        }
        po.residual = std::max(po.residual, to_d(distance(z, po.points[0])));
        if (po.residual > 1e-8) throw Error(Errc::not_found, "periodic orbit failed verification");
        return po;
    }
    throw Error(Errc::not_found, "torus iteration did not settle");
}

Realization realize_itinerary(const JitterModel& m, const std::vector<long>& ks) {
    const int n = int(ks.size());
    if (n < 1) throw Error(Errc::invalid_argument, "empty itinerary");
    for (int i = 0; i < n; ++i) {
        if (ks[i] < m.N0) throw Error(Errc::precondition, "annulus index below N0");
        if (i + 1 < n) {
            // Radii scale like 1/k, so the radial ratio of step i is k_i / k_{i+1}.
            double q = double(ks[i]) / double(ks[i + 1]);
            if (q < m.lambda || q > m.mu) throw Error(Errc::precondition, "itinerary step outside (lambda, mu)");
        }
    }
    Chain ch = solve_chain(m, ks, false);
    Realization out;
    out.requested = ks;
    out.iterations = ch.iterations;
    out.z = chain_point(m, ch, 0);
    Point2<Big> z = out.z;
    for (int i = 0; i < n; ++i) {
        Big r = quad_norm(z);
        out.radii.push_back(to_d(r));
        out.realized.push_back(annulus_index(r));
        Big inv = 1 / r;
        out.delta.push_back(to_d((inv - floor(inv)) / 2));
        if (i + 1 < n) z = jitter_map(m, z);
    }
    out.verified = out.realized == out.requested;
    return out;
}

double sensitivity_estimate(const JitterModel& m, const Point2<double>& z, double delta, int steps) {
    if (!(delta > 0)) throw Error(Errc::invalid_argument, "delta must be positive");
    Point2<double> p = z, q{z.x + delta, z.y};
    double worst = 0;
    for (int i = 0; i < steps; ++i) {
        p = jitter_map(m, p);
        q = jitter_map(m, q);
        worst = std::max(worst, (std::abs(p.x - q.x) + std::abs(p.y - q.y)) / delta);
    }
    return worst;
}

DivergenceReport itinerary_divergence(const JitterModel& m, long k, int starts, std::uint64_t seed, int steps,
                                      double delta) {
    if (k < 1 || starts < 0 || steps < 1) throw Error(Errc::invalid_argument, "bad divergence parameters");
    DivergenceReport rep;
    rep.starts = starts;
    CounterRng rng(seed);
    for (int s = 0; s < starts; ++s) {
        CounterRng r = rng.split(std::uint64_t(s));
        double rad = r.uniform(1.0 / (k + 1), 1.0 / k);
        double phi = r.uniform(0, two_pi<double>());
        Point2<double> z = from_quad_polar(QuadPolar<double>{rad, phi});
        Point2<double> w{z.x + delta, z.y};
        int first = -1;
        try {
            auto ia = annulus_itinerary(m, z, steps), ib = annulus_itinerary(m, w, steps);
            for (int i = 0; i < steps; ++i)
                if (ia[i] != ib[i]) {
                    first = i;
                    break;
                }
        } catch (const Error&) {
            first = -1;
        }
        rep.first_disagreement.push_back(first);
        if (first >= 0) ++rep.diverged;
    }
    return rep;
}

}  // namespace sf
