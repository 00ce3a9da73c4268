#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "opiniondrift/errors.hpp"
#include "opiniondrift/oracle.hpp"
#include "opiniondrift/simulate.hpp"

using namespace opiniondrift;

TEST_CASE("quantile sampling places agents at mass midpoints") {
    const auto uni = OpinionPartition::from_uniform(-1, 1, 1, 100);
    const auto two = sample_agents(uni, 2);
    REQUIRE(two.opinions.size() == 2);
    CHECK(two.opinions[0] == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(two.opinions[1] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(two.agent_mass == doctest::Approx(0.5));

    const auto unit = OpinionPartition::from_uniform(0, 1, 1, 64);
    const auto four = sample_agents(unit, 4);
    const std::vector<double> expect{0.125, 0.375, 0.625, 0.875};
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(four.opinions[i] == doctest::Approx(expect[i]).epsilon(1e-12));
    }

    const OpinionPartition atom({0.3, 0.3}, {1.0});
    const auto three = sample_agents(atom, 3);
    for (double x : three.opinions) CHECK(x == 0.3);

    CHECK_THROWS_AS(sample_agents(uni, 0), InvalidArgument);
}

TEST_CASE("synchronous update averages visible neighbors") {
    AgentPopulation pop{{-1.0, 0.0, 1.0}, 1.0};
    const auto next = agent_step(pop, std::nullopt, 1.5);
    REQUIRE(next.opinions.size() == 3);
    CHECK(next.opinions[0] == doctest::Approx(-0.5).epsilon(1e-14));
    CHECK(next.opinions[1] == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));
    CHECK(next.opinions[2] == doctest::Approx(0.5).epsilon(1e-14));

    // one more step and everyone sees everyone
    const auto final_pop = agent_step(next, std::nullopt, 1.5);
    for (double x : final_pop.opinions) {
        CHECK(x == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));
    }

    AgentPopulation lone{{0.42}, 0.7};
    const auto still = agent_step(lone, std::nullopt, 0.1);
    CHECK(still.opinions[0] == 0.42);

    CHECK(next.total_mass() == pop.total_mass());
    CHECK(std::is_sorted(next.opinions.begin(), next.opinions.end()));
}

TEST_CASE("asymmetric neighborhoods shift the global mean") {
    // neighborhood sizes differ between interacting agents, so only mass is
    // conserved, not the average opinion
    AgentPopulation pop{{0.0, 0.1, 0.18, 0.5}, 1.0};
    const auto next = agent_step(pop, std::nullopt, 0.15);
    const auto mean = [](const AgentPopulation& p) {
        double s = 0;
        for (double x : p.opinions) s += x;
        return s / static_cast<double>(p.opinions.size());
    };
    CHECK(std::abs(mean(next) - mean(pop)) > 1e-4);
    CHECK(next.total_mass() == pop.total_mass());
}

TEST_CASE("input moments enter the agent update") {
    AgentPopulation pop{{0.0}, 1.0};
    const auto u = make_truncated_gaussian(0.05, 0.01, 1.0);
    const auto next = agent_step(pop, u, 0.5);
    // agent and input weigh equally, so the agent moves halfway to the mean
    CHECK(next.opinions[0] == doctest::Approx(0.025).epsilon(1e-12));
}

TEST_CASE("agent run freezes narrow symmetric populations at zero") {
    const auto mu0 = OpinionPartition::from_uniform(-0.4, 0.4, 1, 512);
    const auto res = agent_run(sample_agents(mu0, 2000), InputSchedule::none(), 0.5, 100);
    REQUIRE(res.clusters.size() == 1);
    CHECK(std::abs(res.clusters[0].position) <= 1e-9);
    CHECK(res.clusters[0].mass == doctest::Approx(1.0));

    AgentPopulation lone{{0.42}, 0.7};
    const auto single = agent_run(lone, InputSchedule::none(), 0.1, 10);
    REQUIRE(single.clusters.size() == 1);
    CHECK(single.clusters[0].position == 0.42);
}

TEST_CASE("agent run reports truncation") {
    const auto mu0 = OpinionPartition::from_uniform(-1, 1, 1, 256);
    CHECK_THROWS_AS(
        agent_run(sample_agents(mu0, 500), InputSchedule::none(), 0.1, 1),
        NotConverged);
}

TEST_CASE("cluster splitting at gaps wider than r") {
    AgentPopulation pop{{-0.5, -0.49, 0.2, 0.21, 0.22, 0.9}, 0.1};
    const auto clusters = cluster_agents(pop, 0.1);
    REQUIRE(clusters.size() == 3);
    CHECK(clusters[0].mass == doctest::Approx(0.2));
    CHECK(clusters[1].mass == doctest::Approx(0.3));
    CHECK(clusters[2].mass == doctest::Approx(0.1));
    CHECK(clusters[1].position == doctest::Approx(0.21));
}

TEST_CASE("two discretizations agree on the clustered endstate") {
    const auto mu0 = OpinionPartition::from_uniform(-1, 1, 1, 1000);
    const auto agents =
        agent_run(sample_agents(mu0, 4000), InputSchedule::none(), 0.1, 1000);

    SimulationConfig cfg;
    cfg.r = 0.1;
    cfg.max_steps = 500;
    const auto euler = run(mu0, cfg, InputSchedule::none());

    const auto significant = [](const std::vector<ClusterMass>& cs) {
        std::vector<ClusterMass> out;
        for (const auto& c : cs) {
            if (c.mass >= 0.01) out.push_back(c);
        }
        return out;
    };
    const auto ce = significant(euler.final_clusters.clusters);
    const auto ca = significant(agents.clusters);
    REQUIRE(ce.size() == ca.size());
    for (std::size_t i = 0; i < ce.size(); ++i) {
        CHECK(std::abs(ce[i].position - ca[i].position) < 0.02);
        CHECK(std::abs(ce[i].mass - ca[i].mass) < 0.03);
    }
}
