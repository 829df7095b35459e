#include <catch_amalgamated.hpp>

#include "autoopt/catalog.hpp"

#include <sstream>

using namespace autoopt;

TEST_CASE("catalog sizes: 4 choose + 17 search + 5 update continuous, 17 discrete") {
    const auto& cont = Catalog::for_kind(Kind::continuous);
    const auto& disc = Catalog::for_kind(Kind::discrete);
    REQUIRE(cont.size() == 26);
    REQUIRE(disc.size() == 17);
    REQUIRE(cont.ids_with_role(Role::choose).size() == 4);
    REQUIRE(cont.ids_with_role(Role::search).size() == 17);
    REQUIRE(cont.ids_with_role(Role::update).size() == 5);
    REQUIRE(disc.ids_with_role(Role::search).size() == 8);
}

TEST_CASE("full operator roster") {
    const auto& cont = Catalog::for_kind(Kind::continuous);
    for (const char* id :
         {"choose_traverse", "choose_roulette_wheel", "choose_tournament", "choose_cluster",
          "cross_arithmetic", "cross_sim_binary", "cross_point_one", "cross_point_two",
          "cross_point_n", "cross_point_uniform", "search_cma", "search_eda", "search_mu_cauchy",
          "search_mu_gaussian", "search_mu_polynomial", "search_mu_uniform", "search_pso",
          "search_de_random", "search_de_current", "search_de_current_best", "reinit_continuous",
          "update_always", "update_greedy", "update_pairwise", "update_round_robin",
          "update_simulated_annealing"})
        REQUIRE(cont.contains(id));
    const auto& disc = Catalog::for_kind(Kind::discrete);
    for (const char* id : {"cross_point_one", "cross_point_two", "cross_point_n",
                           "cross_point_uniform", "search_reset_one", "search_reset_rand",
                           "search_reset_creep", "reinit_discrete"})
        REQUIRE(disc.contains(id));
    REQUIRE_FALSE(disc.contains("search_pso"));
    REQUIRE_FALSE(disc.contains("search_cma"));
    REQUIRE_FALSE(cont.contains("search_reset_one"));
}

TEST_CASE("operator indices are stable and define the attribute layout") {
    const auto& cont = Catalog::for_kind(Kind::continuous);
    REQUIRE(cont.index_of("choose_traverse") == 0);
    REQUIRE(cont.index_of("search_pso") == cont.index_of("search_pso"));
    std::size_t expected_offset = 0;
    for (std::size_t i = 0; i < cont.size(); ++i) {
        REQUIRE(cont.attribute_offset(i) == expected_offset);
        expected_offset += cont.entry(i).params.size();
    }
    REQUIRE(cont.attribute_length() == expected_offset);
    REQUIRE(cont.attribute_length() == 31);
    // raw encoding dimension stays over the 600 mark for the shipped space
    REQUIRE(cont.size() * cont.size() + cont.attribute_length() > 600);
}

TEST_CASE("defaults sit inside their declared ranges") {
    for (const auto& entry : Catalog::master())
        for (const auto& p : entry.params) {
            REQUIRE(p.min < p.max);
            REQUIRE(p.def >= p.min);
            REQUIRE(p.def <= p.max);
        }
}

TEST_CASE("niching choose resolves to the clustering operator") {
    const auto& disc = Catalog::for_kind(Kind::discrete);
    REQUIRE(disc.contains("choose_nich"));
    REQUIRE(disc.entry("choose_nich").op_id == "choose_cluster");
}

TEST_CASE("unknown operator lookups throw") {
    REQUIRE_THROWS_AS(Catalog::for_kind(Kind::continuous).index_of("search_quantum"),
                      std::invalid_argument);
}

TEST_CASE("catalog dump lists every operator") {
    std::ostringstream os;
    Catalog::for_kind(Kind::continuous).dump(os);
    const std::string text = os.str();
    for (const auto& entry : Catalog::for_kind(Kind::continuous).entries())
        REQUIRE(text.find(entry.op_id) != std::string::npos);
    REQUIRE(text.find("attr_offset") != std::string::npos);
}
