#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "opiniondrift/errors.hpp"
#include "opiniondrift/measure.hpp"

using namespace opiniondrift;

namespace {

// Random gap-free partition with strictly positive masses (density bounds
// exist everywhere on the support).
OpinionPartition random_partition(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> n_dist(1, 40);
    std::uniform_real_distribution<double> width_dist(0.01, 0.5);
    std::uniform_real_distribution<double> mass_dist(0.05, 2.0);
    std::uniform_real_distribution<double> start_dist(-2.0, 2.0);
    const int n = n_dist(rng);
    std::vector<double> edges{start_dist(rng)};
    std::vector<double> masses;
    for (int i = 0; i < n; ++i) {
        edges.push_back(edges.back() + width_dist(rng));
        masses.push_back(mass_dist(rng));
    }
    return OpinionPartition(std::move(edges), std::move(masses));
}

}  // namespace

TEST_CASE("from_uniform splits mass into equal cells") {
    const auto part = OpinionPartition::from_uniform(-1, 1, 1, 4);
    REQUIRE(part.n_cells() == 4);
    const std::vector<double> expect_edges{-1, -0.5, 0, 0.5, 1};
    for (std::size_t i = 0; i < expect_edges.size(); ++i) {
        CHECK(part.edges()[i] == doctest::Approx(expect_edges[i]).epsilon(1e-15));
    }
    for (double m : part.masses()) CHECK(m == 0.25);

    const auto one = OpinionPartition::from_uniform(0, 1, 2, 1);
    CHECK(one.n_cells() == 1);
    CHECK(one.total_mass() == 2.0);
    CHECK(one.cell(0).mass / one.cell(0).width() == doctest::Approx(2.0));

    const auto fine = OpinionPartition::from_uniform(-1, 1, 1, 2000);
    CHECK(fine.total_mass() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("from_uniform rejects bad arguments") {
    CHECK_THROWS_AS(OpinionPartition::from_uniform(1, 1, 1, 4), InvalidArgument);
    CHECK_THROWS_AS(OpinionPartition::from_uniform(2, 1, 1, 4), InvalidArgument);
    CHECK_THROWS_AS(OpinionPartition::from_uniform(0, 1, 0, 4), InvalidArgument);
    CHECK_THROWS_AS(OpinionPartition::from_uniform(0, 1, -1, 4), InvalidArgument);
    CHECK_THROWS_AS(OpinionPartition::from_uniform(0, 1, 1, 0), InvalidArgument);
}

TEST_CASE("partition construction validates and normalizes") {
    CHECK_THROWS_AS(OpinionPartition({0, 1}, {0.0}), InvalidArgument);
    CHECK_THROWS_AS(OpinionPartition({1, 0}, {1.0}), InvalidArgument);
    CHECK_THROWS_AS(OpinionPartition({0, 1}, {-1.0}), InvalidArgument);
    CHECK_THROWS_AS(OpinionPartition({0, 1, 2}, {1.0}), InvalidArgument);

    // leading/trailing zero-mass cells are trimmed off the support
    const OpinionPartition p({-3, -1, 0, 1, 5}, {0, 0.5, 0.5, 0});
    CHECK(p.support().lo == -1.0);
    CHECK(p.support().hi == 1.0);
    CHECK(p.total_mass() == 1.0);

    // interior zero-mass runs collapse into a single gap cell
    const OpinionPartition q({0, 1, 2, 3, 4}, {0.5, 0, 0, 0.5});
    CHECK(q.n_cells() == 3);
    CHECK(q.cell(1).mass == 0.0);
    CHECK(q.cell(1).left == 1.0);
    CHECK(q.cell(1).right == 3.0);
}

TEST_CASE("window moments on uniform and step densities") {
    const auto uni = OpinionPartition::from_uniform(-1, 1, 1, 1000);
    const auto w = window_moments(uni, -1.0, -0.8);
    CHECK(w.mass == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(w.average() == doctest::Approx(-0.9).epsilon(1e-12));

    // density 1 on [0, 0.5), 3 on [0.5, 1]
    const OpinionPartition step({0, 0.5, 1}, {0.5, 1.5});
    const auto ws = window_moments(step, 0, 1);
    CHECK(ws.mass == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(ws.first_moment == doctest::Approx(1.25).epsilon(1e-15));
    CHECK(ws.average() == doctest::Approx(0.625).epsilon(1e-15));

    const auto all = window_moments(step, -10, 10);
    CHECK(all.mass == doctest::Approx(step.total_mass()).epsilon(1e-15));

    CHECK_THROWS_AS(window_moments(step, 1, 0), InvalidArgument);
}

TEST_CASE("atoms on the window boundary count fully") {
    const OpinionPartition atoms({-0.3, -0.3, 0.4, 0.4}, {0.5, 0, 0.5});
    CHECK(window_moments(atoms, -0.3, 0.0).mass == doctest::Approx(0.5));
    CHECK(window_moments(atoms, 0.0, 0.4).mass == doctest::Approx(0.5));
    CHECK(window_moments(atoms, -0.3, 0.4).mass == doctest::Approx(1.0));
    CHECK(window_moments(atoms, -0.2, 0.3).mass == doctest::Approx(0.0));
}

TEST_CASE("window decomposition conserves mass and moment") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 2000; ++trial) {
        const auto part = random_partition(rng);
        const Support sup = part.support();
        std::uniform_real_distribution<double> pos(sup.lo - 0.2, sup.hi + 0.2);
        double a = pos(rng), b = pos(rng), c = pos(rng);
        if (a > b) std::swap(a, b);
        const double mid = std::clamp(c, a, b);

        const auto whole = window_moments(part, a, b);
        const auto left = window_moments(part, a, mid);
        const auto right = window_moments(part, mid, b);
        CHECK(left.mass + right.mass ==
              doctest::Approx(whole.mass).epsilon(1e-12));
        CHECK(left.first_moment + right.first_moment ==
              doctest::Approx(whole.first_moment).epsilon(1e-12));
    }
}

TEST_CASE("moment table agrees with the direct scan") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 2000; ++trial) {
        const auto part = random_partition(rng);
        const MomentTable table(part);
        const Support sup = part.support();
        std::uniform_real_distribution<double> pos(sup.lo - 0.3, sup.hi + 0.3);
        double a = pos(rng), b = pos(rng);
        if (a > b) std::swap(a, b);
        const auto direct = window_moments(part, a, b);
        const auto fast = table.window_moments(a, b);
        CHECK(fast.mass == doctest::Approx(direct.mass).epsilon(1e-12));
        CHECK(fast.first_moment ==
              doctest::Approx(direct.first_moment).epsilon(1e-12));
    }
}

TEST_CASE("moment table handles atom stacks at window ends") {
    const OpinionPartition atoms({-0.3, -0.3, -0.3, 0.4, 0.4}, {0.25, 0.25, 0, 0.5});
    const MomentTable table(atoms);
    CHECK(table.window_moments(-0.3, -0.3).mass == doctest::Approx(0.5));
    CHECK(table.window_moments(-0.3, 0.4).mass == doctest::Approx(1.0));
    CHECK(table.window_moments(-0.29, 0.39).mass == doctest::Approx(0.0));
}

TEST_CASE("density bounds over positive-width cells") {
    const auto uni = OpinionPartition::from_uniform(-1, 1, 1, 64);
    const auto b = density_bounds(uni);
    CHECK(b.rho_min == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(b.rho_max == doctest::Approx(0.5).epsilon(1e-12));
    CHECK_FALSE(b.has_atoms);

    const OpinionPartition step({0, 0.5, 1}, {0.5, 1.5});
    const auto bs = density_bounds(step);
    CHECK(bs.rho_min == doctest::Approx(1.0));
    CHECK(bs.rho_max == doctest::Approx(3.0));

    const OpinionPartition atom({0.3, 0.3}, {1.0});
    CHECK_THROWS_AS(density_bounds(atom), AllAtomic);

    const OpinionPartition mixed({0, 0, 1, 2}, {0.5, 0.25, 0.25});
    CHECK(density_bounds(mixed).has_atoms);
}

TEST_CASE("window average bounds") {
    const auto sym = window_average_bounds(0, 1, 2.0, 2.0);
    CHECK(sym.lower == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(sym.upper == doctest::Approx(0.5).epsilon(1e-15));

    const auto skew = window_average_bounds(0, 1, 1.0, 3.0);
    CHECK(skew.lower == doctest::Approx(0.36603).epsilon(1e-5));
    CHECK(skew.upper == doctest::Approx(0.63397).epsilon(1e-5));

    // the step-density average from above sits inside these bounds
    const OpinionPartition step({0, 0.5, 1}, {0.5, 1.5});
    const double avg = window_moments(step, 0, 1).average();
    CHECK(avg >= skew.lower);
    CHECK(avg <= skew.upper);

    CHECK_THROWS_AS(window_average_bounds(1, 1, 1, 2), InvalidArgument);
    CHECK_THROWS_AS(window_average_bounds(0, 1, 0, 2), InvalidArgument);
    CHECK_THROWS_AS(window_average_bounds(0, 1, 3, 2), InvalidArgument);
}

TEST_CASE("window averages always respect the density-ratio bounds") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 2000; ++trial) {
        const auto part = random_partition(rng);
        const auto rho = density_bounds(part);
        const Support sup = part.support();
        std::uniform_real_distribution<double> pos(sup.lo, sup.hi);
        double a = pos(rng), b = pos(rng);
        if (a > b) std::swap(a, b);
        if (b - a < 1e-9) continue;
        const auto w = window_moments(part, a, b);
        REQUIRE(w.mass > 0.0);
        const double avg = w.average();
        const auto bounds = window_average_bounds(a, b, rho.rho_min, rho.rho_max);
        CHECK(avg > a);
        CHECK(avg < b);
        CHECK(avg >= bounds.lower - 1e-12);
        CHECK(avg <= bounds.upper + 1e-12);
    }
}

TEST_CASE("cluster extraction") {
    const OpinionPartition atoms({-0.3, -0.3, 0.4, 0.4}, {0.5, 0, 0.5});
    const auto cs = extract_clusters(atoms, 1e-6, 0.1);
    REQUIRE(cs.clusters.size() == 2);
    CHECK(cs.clusters[0].position == doctest::Approx(-0.3));
    CHECK(cs.clusters[0].mass == doctest::Approx(0.5));
    CHECK(cs.clusters[1].position == doctest::Approx(0.4));
    CHECK(cs.clusters[1].mass == doctest::Approx(0.5));
    CHECK(cs.converged);
    CHECK(cs.clustered_mass == doctest::Approx(1.0));

    const auto uni = OpinionPartition::from_uniform(-1, 1, 1, 256);
    CHECK_FALSE(extract_clusters(uni, 1e-6, 0.1).converged);

    // atoms closer than gap_min: structure present but not converged
    const OpinionPartition close({0.0, 0.0, 0.05, 0.05}, {0.5, 0, 0.5});
    CHECK_FALSE(extract_clusters(close, 1e-6, 0.1).converged);

    CHECK_THROWS_AS(extract_clusters(atoms, 0.0, 0.1), InvalidArgument);
    CHECK_THROWS_AS(extract_clusters(atoms, 1e-6, 0.0), InvalidArgument);
}

TEST_CASE("total mass accumulates left to right") {
    const auto part = OpinionPartition::from_uniform(-1, 1, 1, 777);
    const double direct =
        std::accumulate(part.masses().begin(), part.masses().end(), 0.0);
    CHECK(part.total_mass() == direct);
}
