#include <doctest.h>

#include <cmath>

#include "opiniondrift/analysis.hpp"
#include "opiniondrift/errors.hpp"

using namespace opiniondrift;

TEST_CASE("a symmetric interior input attracts the whole narrow population") {
    const auto mu0 = OpinionPartition::from_uniform(-0.4, 0.4, 1, 512);
    SimulationConfig cfg;
    cfg.r = 0.5;
    cfg.max_steps = 200;
    const auto res =
        attraction_range(mu0, make_truncated_gaussian(0.0, 0.1, 1.0), cfg, 0.0);
    CHECK(res.y == doctest::Approx(-0.4));
    CHECK(res.z == doctest::Approx(0.4));
    CHECK(res.attracted_mass == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(res.converged_center) <= res.tol_used);
}

TEST_CASE("attraction range rejects means outside the initial support") {
    const auto mu0 = OpinionPartition::from_uniform(-1, 1, 1, 64);
    SimulationConfig cfg;
    cfg.r = 0.1;
    CHECK_THROWS_AS(
        attraction_range(mu0, make_truncated_gaussian(1.5, 0.1, 1.0), cfg, 0.0),
        InvalidArgument);
}

TEST_CASE("attraction range surfaces truncated runs") {
    const auto mu0 = OpinionPartition::from_uniform(-1, 1, 1, 512);
    SimulationConfig cfg;
    cfg.r = 0.1;
    cfg.max_steps = 3;
    CHECK_THROWS_AS(
        attraction_range(mu0, make_truncated_gaussian(0.0, 0.04, 1.0), cfg, 0.0),
        NotConverged);
}

TEST_CASE("a negligible input owns no basin") {
    const auto mu0 = OpinionPartition::from_uniform(-1, 1, 1, 512);
    SimulationConfig cfg;
    cfg.r = 0.1;
    cfg.max_steps = 500;
    // weightless input far from any natural cluster position
    CHECK_THROWS_AS(
        attraction_range(mu0, make_truncated_gaussian(0.9, 0.01, 1e-12), cfg, 0.0),
        NoBasin);
}

TEST_CASE("attraction range grows with the input spread") {
    const auto mu0 = OpinionPartition::from_uniform(-1, 1, 1, 512);
    SimulationConfig cfg;
    cfg.r = 0.1;
    cfg.max_steps = 800;
    const auto narrow =
        attraction_range(mu0, make_truncated_gaussian(0.0, 0.04, 1.0), cfg, 0.0);
    const auto wide =
        attraction_range(mu0, make_truncated_gaussian(0.0, 0.08, 1.0), cfg, 0.0);
    CHECK(narrow.length() > 0.0);
    CHECK(narrow.length() < 2.0);
    CHECK(wide.length() > narrow.length());
    CHECK(narrow.attracted_mass ==
          window_moments(mu0, narrow.y, narrow.z).mass);
}

TEST_CASE("a nonempty basin always brackets the input mean") {
    const auto mu0 = OpinionPartition::from_uniform(-1, 1, 1, 512);
    SimulationConfig cfg;
    cfg.r = 0.1;
    cfg.max_steps = 800;
    // off-center inputs anchor their cluster a little off the mean (the
    // surrounding mass pulls one way), so give those a looser tolerance than
    // the centered default
    for (double mean : {-0.55, -0.2, 0.0, 0.37}) {
        const auto res = attraction_range(
            mu0, make_truncated_gaussian(mean, 0.05, 1.0), cfg, 5e-3);
        CHECK(res.y <= mean);
        CHECK(mean <= res.z);
        CHECK(std::abs(res.converged_center - mean) <= res.tol_used);
    }
}

TEST_CASE("refinement sharpens the basin boundary within coarse cells") {
    const auto mu0 = OpinionPartition::from_uniform(-1, 1, 1, 256);
    SimulationConfig cfg;
    cfg.r = 0.1;
    cfg.max_steps = 800;
    const auto u = make_truncated_gaussian(0.0, 0.05, 1.0);
    const auto coarse = attraction_range(mu0, u, cfg, 0.0);
    const auto refined = attraction_range_refined(mu0, u, cfg, 0.0, 2, 16);
    const double cell = 2.0 / 256.0;
    CHECK(std::abs(refined.y - coarse.y) <= 2 * cell);
    CHECK(std::abs(refined.z - coarse.z) <= 2 * cell);

    // doubling the base grid moves the estimate by at most two coarse cells
    const auto fine_mu0 = OpinionPartition::from_uniform(-1, 1, 1, 512);
    const auto fine = attraction_range(fine_mu0, u, cfg, 0.0);
    CHECK(std::abs(fine.length() - coarse.length()) <= 2 * cell);
}

TEST_CASE("range-law fit recovers exact linear data") {
    // y = 2 sigma + 3 r + 0.1 over a non-degenerate grid
    std::vector<SweepPoint> pts;
    for (double s : {0.01, 0.05, 0.09}) {
        for (double r : {0.1, 0.3}) {
            pts.push_back({s, r, 2.0 * s + 3.0 * r + 0.1, 0.0, true});
        }
    }
    const auto fit = fit_range_law(pts);
    CHECK(fit.a == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(fit.b == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(fit.c == doctest::Approx(0.1).epsilon(1e-9));
    CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fit.a_active);
    CHECK(fit.b_active);
}

TEST_CASE("range-law fit folds constant regressors into the intercept") {
    std::vector<SweepPoint> pts;
    for (double s : {0.02, 0.04, 0.06, 0.08}) {
        pts.push_back({s, 0.1, 5.0 * s + 0.2, 0.0, true});
    }
    const auto fit = fit_range_law(pts);
    CHECK(fit.a == doctest::Approx(5.0).epsilon(1e-9));
    CHECK(fit.a_active);
    CHECK_FALSE(fit.b_active);
    CHECK(fit.b == 0.0);
    CHECK(fit.c == doctest::Approx(0.2).epsilon(1e-9));
    CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));

    CHECK_THROWS_AS(fit_range_law({pts[0], pts[1]}), InsufficientPoints);
}

TEST_CASE("collinear sigma-r grids fall back to a sigma-only fit") {
    std::vector<SweepPoint> pts;
    for (int i = 1; i <= 5; ++i) {
        const double s = 0.01 * i;
        pts.push_back({s, 3.0 * s, 4.0 * s + 0.05, 0.0, true});
    }
    const auto fit = fit_range_law(pts);
    CHECK(fit.a_active);
    CHECK_FALSE(fit.b_active);
    CHECK(fit.a == doctest::Approx(4.0).epsilon(1e-6));
}

TEST_CASE("sweep filter drops runaway ranges before fitting") {
    UniformFamily fam{-1, 1, 1, 400};
    SimulationConfig cfg;
    cfg.max_steps = 1500;
    SweepOptions opts;
    opts.refine_rounds = 0;
    // large r values attract the full support; the cap keeps them out
    std::vector<std::pair<double, double>> grid{
        {0.04, 0.06}, {0.04, 0.12}, {0.04, 0.18}, {0.04, 0.24}, {0.04, 0.45}};
    const auto res = sweep_fit(fam, grid, cfg, opts);
    CHECK(res.points.size() == 5);
    CHECK(res.fit.filtered_out >= 1);
    CHECK(res.fit.b > 0.0);
    for (std::size_t i = 0; i + 1 < res.points.size(); ++i) {
        if (res.points[i].converged && res.points[i + 1].converged) {
            CHECK(res.points[i + 1].range_length >=
                  res.points[i].range_length - 1e-9);
        }
    }
}

TEST_CASE("positive mass reads the unit window") {
    CHECK(positive_mass(OpinionPartition::from_uniform(-1, 1, 1, 64)) ==
          doctest::Approx(0.5).epsilon(1e-12));
    CHECK(positive_mass(OpinionPartition({0.2, 0.2}, {1.0})) == doctest::Approx(1.0));
    const OpinionPartition atoms({-0.5, -0.5, 0.2, 0.2}, {0.3, 0, 0.7});
    CHECK(positive_mass(atoms) == doctest::Approx(0.7));
}

TEST_CASE("identical strategy arms tie exactly") {
    const auto mu0 = OpinionPartition::from_uniform(-1, 1, 1, 256);
    SimulationConfig cfg;
    cfg.r = 0.2;
    cfg.max_steps = 15;
    const auto sched = InputSchedule::constant(make_truncated_gaussian(0.2, 0.1, 1.0));
    const auto rep = compare_strategies(mu0, cfg, sched, sched);
    CHECK(rep.direct.objective == rep.distracting.objective);
    CHECK(rep.direct.attracted_to_center == rep.distracting.attracted_to_center);
    CHECK(rep.winner == "tie");
}

TEST_CASE("strategy comparison validates its preconditions") {
    const auto mu0 = OpinionPartition::from_uniform(-1, 1, 1, 64);
    SimulationConfig cfg;
    cfg.r = 0.2;
    cfg.max_steps = 10;
    const auto a = InputSchedule::constant(make_truncated_gaussian(0.2, 0.1, 1.0));
    const auto b = InputSchedule::constant(make_truncated_gaussian(0.2, 0.05, 1.0));
    CHECK_THROWS_AS(compare_strategies(mu0, cfg, a, b), InvalidArgument);

    // sigma must stay below one twelfth of the support width
    const auto fat = InputSchedule::constant(make_truncated_gaussian(0.2, 0.2, 1.0));
    CHECK_THROWS_AS(compare_strategies(mu0, cfg, fat, fat), InvalidArgument);

    const auto none = InputSchedule::none();
    CHECK_THROWS_AS(compare_strategies(mu0, cfg, none, none), InvalidArgument);
}
