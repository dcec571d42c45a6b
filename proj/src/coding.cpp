#include "sf/coding.hpp"

namespace sf {

const std::vector<std::pair<int, int>> kShapleyCycle{{1, 2}, {2, 2}, {2, 3}, {3, 3}, {3, 1}, {1, 1}};
const std::vector<std::pair<int, int>> kAntiShapleyCycle{{1, 3}, {1, 2}, {3, 2}, {3, 1}, {2, 1}, {2, 3}};

namespace {

bool same(const ItineraryEntry& a, const ItineraryEntry& b) { return a.i == b.i && a.j == b.j; }

void require_pure(const Itinerary& it) {
    for (const auto& e : it.entries)
        if (e.i.mixed || e.j.mixed) throw Error(Errc::precondition, "coding undefined on J (mixed labels)");
}

// Indecisive window ending at position k of a label sequence accessed through `at`.
template <class At>
bool indecisive(At at, int k, DitherVariant v) {
    unsigned si = 0, sj = 0;
    for (int d = 3; d >= 0; --d) {
        const ItineraryEntry& e = at(k - d);
        si |= 1u << ((v == DitherVariant::Literal && d == 1) ? e.j.k : e.i.k);
        sj |= 1u << e.j.k;
    }
    return si != 7u && sj != 7u;
}

}  // namespace

Itinerary make_itinerary(std::vector<ItineraryEntry> entries) {
    for (size_t n = 0; n < entries.size(); ++n) {
        if (n == 0 && entries[0].t != 0.0) throw Error(Errc::invalid_argument, "itinerary must start at t=0");
        if (n > 0 && !(entries[n].t > entries[n - 1].t)) throw Error(Errc::invalid_argument, "itinerary times must increase");
        if (n > 0 && same(entries[n], entries[n - 1])) throw Error(Errc::invalid_argument, "consecutive itinerary entries repeat");
    }
    return Itinerary{std::move(entries)};
}

Itinerary itinerary_from_labels(const std::vector<std::pair<int, int>>& one_based) {
    std::vector<ItineraryEntry> e;
    for (size_t n = 0; n < one_based.size(); ++n)
        e.push_back({double(n), {one_based[n].first - 1, false}, {one_based[n].second - 1, false}});
    return make_itinerary(std::move(e));
}

Itinerary extract_itinerary(const Trajectory& tr) {
    std::vector<ItineraryEntry> e;
    double t0 = tr.legs.empty() ? 0.0 : tr.legs.front().start.time_t;
    for (const auto& leg : tr.legs) e.push_back({leg.start.time_t - t0, leg.targets.iA, leg.targets.iB});
    return make_itinerary(std::move(e));
}

DitherCode dither_code(const Itinerary& it, DitherVariant v) {
    if (it.entries.size() < 4) throw Error(Errc::precondition, "itinerary needs at least 4 entries");
    require_pure(it);
    DitherCode c;
    auto at = [&](int k) -> const ItineraryEntry& { return it.entries[k]; };
    for (int k = 3; k < int(it.entries.size()); ++k) {
        bool ind = indecisive(at, k, v);
        c.flags.push_back(ind ? 'I' : 'D');
        if (!ind) c.decisive_times.push_back(k);
    }
    return c;
}

int essential_period(const Itinerary& it, int n, DitherVariant v) {
    int len = int(it.entries.size());
    if (n <= 0 || len < n) throw Error(Errc::precondition, "itinerary shorter than the period");
    for (int k = n; k < len; ++k)
        if (!same(it.entries[k], it.entries[k - n])) throw Error(Errc::precondition, "itinerary is not cyclic with this period");
    require_pure(it);
    auto at = [&](int k) -> const ItineraryEntry& { return it.entries[k]; };
    // Steps 0..n-1 of the first period; steps before the first full window count as decisive.
    int count = 0;
    for (int k = 0; k < n; ++k)
        if (k < 3 || !indecisive(at, k, v)) ++count;
    return count;
}

std::optional<Cycle> detect_cycle(const Itinerary& it, int min_repeats) {
    if (min_repeats < 2) throw Error(Errc::precondition, "min_repeats must be at least 2");
    int len = int(it.entries.size());
    for (int n = 1; n * min_repeats <= len; ++n) {
        for (int off = 0; off + n * min_repeats <= len; ++off) {
            bool ok = true;
            for (int k = off; k + n < off + n * min_repeats && ok; ++k) ok = same(it.entries[k], it.entries[k + n]);
            if (ok) return Cycle{off, n};
        }
    }
    return std::nullopt;
}

Gaps decisive_gaps(const DitherCode& code) {
    const auto& N = code.decisive_times;
    if (N.size() < 3) throw Error(Errc::precondition, "need at least 3 decisive times");
    Gaps g;
    for (size_t s = 0; s + 1 < N.size(); ++s) g.consecutive.push_back(N[s + 1] - N[s]);
    for (size_t s = 0; s + 2 < N.size(); s += 2) g.even_indexed.push_back(N[s + 2] - N[s]);
    return g;
}

bool follows_cycle(const Itinerary& it, int from, const std::vector<std::pair<int, int>>& cycle) {
    int len = int(it.entries.size()), n = int(cycle.size());
    if (from < 0 || from >= len) return false;
    const auto& e0 = it.entries[from];
    if (e0.i.mixed || e0.j.mixed) return false;
    int phase = -1;
    for (int c = 0; c < n; ++c)
        if (cycle[c].first - 1 == e0.i.k && cycle[c].second - 1 == e0.j.k) phase = c;
    if (phase < 0) return false;
    for (int k = from; k < len; ++k) {
        const auto& e = it.entries[k];
        const auto& c = cycle[(phase + k - from) % n];
        if (e.i.mixed || e.j.mixed || e.i.k != c.first - 1 || e.j.k != c.second - 1) return false;
    }
    return true;
}

}  // namespace sf
