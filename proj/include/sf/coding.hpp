#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sf/flow.hpp"

namespace sf {

struct ItineraryEntry {
    double t = 0.0;
    Label i, j;
};

struct Itinerary {
    std::vector<ItineraryEntry> entries;
};

// Validates t_0 = 0, increasing times and that consecutive entries differ.
Itinerary make_itinerary(std::vector<ItineraryEntry> entries);
Itinerary itinerary_from_labels(const std::vector<std::pair<int, int>>& one_based);
Itinerary extract_itinerary(const Trajectory& tr);

enum class DitherVariant { AllI, Literal };

struct DitherCode {
    std::vector<char> flags;  // flags[n] is R_{n+3}, 'D' or 'I'
    std::vector<int> decisive_times;
    std::string str() const { return std::string(flags.begin(), flags.end()); }
};

DitherCode dither_code(const Itinerary& it, DitherVariant v = DitherVariant::AllI);

// Decisive steps k = 0..n-1 of the first period; k < 3 has no window and is decisive.
int essential_period(const Itinerary& it, int n, DitherVariant v = DitherVariant::AllI);

struct Cycle {
    int offset = 0;
    int period = 0;
};
std::optional<Cycle> detect_cycle(const Itinerary& it, int min_repeats);

struct Gaps {
    std::vector<int> consecutive;
    std::vector<int> even_indexed;
};
Gaps decisive_gaps(const DitherCode& code);

// True when the labels from `from` on cycle through a rotation of `cycle` (1-based pairs).
bool follows_cycle(const Itinerary& it, int from, const std::vector<std::pair<int, int>>& cycle);

extern const std::vector<std::pair<int, int>> kShapleyCycle;
extern const std::vector<std::pair<int, int>> kAntiShapleyCycle;

}  // namespace sf
