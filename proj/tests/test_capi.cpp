#include <doctest.h>

#include <cstring>
#include <string>

#include <json.hpp>

#include "sf/serialize.hpp"
#include "shapley_flow.h"

namespace {
std::string take(char* s) {
    std::string out = s ? s : "";
    sf_string_free(s);
    return out;
}
}  // namespace

TEST_CASE("17-digit serialization") {
    CHECK(sf::fmt17(0.1) == "0.10000000000000001");
    nlohmann::json j = {{"b", 1.0}, {"a", {0.5, 2}}, {"c", std::nan("")}};
    std::string s = sf::dump17(j);
    CHECK(s.find("\"a\"") < s.find("\"b\""));
    CHECK(s.find("1.0") != std::string::npos);
    CHECK(s.find("null") != std::string::npos);
    CHECK(nlohmann::json::parse(s)["b"].get<double>() == 1.0);
}

TEST_CASE("game handles and status codes") {
    sf_game* g = nullptr;
    CHECK(sf_game_family(1.5, &g) == SF_E_DOMAIN);
    CHECK(g == nullptr);
    CHECK(std::strlen(sf_last_error()) > 0);
    CHECK(sf_game_family(0.5, nullptr) == SF_E_INVALID_ARGUMENT);
    REQUIRE(sf_game_family(0.5, &g) == SF_OK);
    char* js = nullptr;
    REQUIRE(sf_game_describe(g, &js) == SF_OK);
    auto d = nlohmann::json::parse(take(js));
    CHECK(d.contains("A"));
    sf_game_free(g);

    sf_game* h = nullptr;
    CHECK(sf_game_from_json("{", &h) == SF_E_INVALID_ARGUMENT);
    CHECK(sf_game_from_json("{\"beta\": 0.3}", &h) == SF_OK);
    sf_game_free(h);
    double z[9] = {0};
    CHECK(sf_game_from_matrices(z, z, &h) != SF_OK);
    CHECK(std::string(sf_status_name(SF_E_INTEGRATION)).size() > 0);
    sf_game_free(nullptr);
}

TEST_CASE("simulation output is deterministic for a seed") {
    sf_game* g = nullptr;
    REQUIRE(sf_game_family(0.3, &g) == SF_OK);
    const char* req = R"({"start":"random","seed":7,"events":200})";
    char *j1 = nullptr, *c1 = nullptr, *j2 = nullptr, *c2 = nullptr;
    REQUIRE(sf_simulate(g, req, &j1, &c1) == SF_OK);
    REQUIRE(sf_simulate(g, req, &j2, &c2) == SF_OK);
    std::string a = take(j1), b = take(j2), ca = take(c1), cb = take(c2);
    CHECK(a == b);
    CHECK(ca == cb);
    char* j3 = nullptr;
    REQUIRE(sf_simulate(g, R"({"start":"random","seed":8,"events":200})", &j3, nullptr) == SF_OK);
    CHECK(take(j3) != a);
    CHECK(sf_simulate(g, "[1,2", &j3, nullptr) == SF_E_INVALID_ARGUMENT);
    sf_game_free(g);
}

TEST_CASE("jitter model handles") {
    sf_jitter_model* m = nullptr;
    REQUIRE(sf_jitter_model_game(0.5, &m) == SF_OK);
    char* js = nullptr;
    REQUIRE(sf_jitter_model_json(m, &js) == SF_OK);
    std::string text = take(js);
    sf_jitter_model* m2 = nullptr;
    REQUIRE(sf_jitter_model_from_json(text.c_str(), &m2) == SF_OK);
    char *a = nullptr, *b = nullptr;
    const char* req = R"({"action":"fixed-points","k_lo":50,"k_hi":52})";
    REQUIRE(sf_jitter(m, req, &a, nullptr) == SF_OK);
    REQUIRE(sf_jitter(m2, req, &b, nullptr) == SF_OK);
    CHECK(take(a) == take(b));
    CHECK(sf_jitter(m, R"({"action":"nope"})", &a, nullptr) == SF_E_INVALID_ARGUMENT);
    sf_jitter_model_free(m);
    sf_jitter_model_free(m2);
}

TEST_CASE("verify selects criteria by id or name") {
    char* js = nullptr;
    int ok = 0;
    REQUIRE(sf_verify(R"({"only":[3,"moebius"],"timings":false})", &js, &ok) == SF_OK);
    auto r = nlohmann::json::parse(take(js));
    CHECK(ok == 1);
    CHECK(r.dump().find("seconds") == std::string::npos);
    CHECK(sf_verify(R"({"only":["unknown"]})", &js, &ok) != SF_OK);
}
