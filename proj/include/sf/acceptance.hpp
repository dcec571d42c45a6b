#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace sf {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    double seconds = 0;
    double time_limit = 0;
    nlohmann::json details;
};

// Criteria 1..12; `only` restricts the run (empty = all).
std::vector<CriterionResult> run_acceptance(const std::vector<int>& only = {}, std::uint64_t seed = 1);
CriterionResult run_criterion(int id, std::uint64_t seed = 1);
// Accepts ids or names such as "corner-tables".
int criterion_id(const std::string& key);
std::vector<std::string> criterion_names();

}  // namespace sf
