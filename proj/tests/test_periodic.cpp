#include <catch2/catch_amalgamated.hpp>

#include "henon/periodic.hpp"
#include "oracles.hpp"

using namespace henon;

TEST_CASE("n=1 enumeration matches the quadratic oracle") {
    HenonMap m = oracles::quad_map();
    FindResult fr = find_periodic(m, 1, standard_seeds(m, 1), {});
    REQUIRE(fr.orbits.size() == 2);
    auto fps = oracles::fixed_points_closed_form(cplx(0.5, 0), cplx(0, 0));
    for (const auto& p : fps) {
        double best = 1e300;
        for (const auto& o : fr.orbits) best = std::min(best, dist(o.points[0], p));
        CHECK(best < 1e-10);
    }
    for (const auto& o : fr.orbits) {
        CHECK(o.residual < 1e-12);
        CHECK(orbit_residual_dd(m, o) < 1e-12);
        // eigenvalue product = jacobian^n
        cplx prod = o.lambda_u * o.lambda_s;
        CHECK(std::abs(prod - m.jacobian()) < 1e-8 * std::abs(m.jacobian()));
    }
}

TEST_CASE("classification and multipliers at the closed-form fixed points") {
    HenonMap m = oracles::quad_map();
    FindResult fr = find_periodic(m, 1, standard_seeds(m, 1), {});
    const PeriodicOrbit* saddle = nullptr;
    const PeriodicOrbit* sink = nullptr;
    for (const auto& o : fr.orbits) {
        if (o.cls == OrbitClass::saddle) saddle = &o;
        if (o.cls == OrbitClass::sink) sink = &o;
    }
    REQUIRE(saddle);
    REQUIRE(sink);
    // saddle (0.5, 0.5): eigenvalues (1 +- sqrt(3))/2
    const double lu = (1.0 + std::sqrt(3.0)) / 2.0; // 1.3660254037844386
    const double ls = (1.0 - std::sqrt(3.0)) / 2.0; // -0.3660254037844386
    CHECK(std::abs(saddle->lambda_u - cplx(lu, 0)) < 1e-10);
    CHECK(std::abs(saddle->lambda_s - cplx(ls, 0)) < 1e-10);
    // chi^u from the oracle: ln((1+sqrt 3)/2) = 0.31190535818243564
    CHECK(saddle->chi_u == Catch::Approx(0.31190535818243564).margin(1e-12));
    // sink (0,0): eigenvalues +-sqrt(0.5) ~= +-0.70710678
    CHECK(std::abs(std::abs(sink->lambda_u) - std::sqrt(0.5)) < 1e-10);
    CHECK(std::abs(std::abs(sink->lambda_s) - std::sqrt(0.5)) < 1e-10);
}

TEST_CASE("horseshoe enumeration is complete for n <= 5") {
    HenonMap hs = oracles::horseshoe();
    SeedOptions so;
    so.grid = 8;
    for (int n = 1; n <= 5; ++n) {
        FindResult fr = find_periodic(hs, n, standard_seeds(hs, n, so), {});
        long long pts = 0;
        for (const auto& o : fr.orbits) {
            pts += o.period;
            CHECK(o.cls == OrbitClass::saddle);
            CHECK(o.residual < 1e-12);
        }
        CHECK(pts == (1LL << n));
        CHECK(fr.completeness == Catch::Approx(1.0));
    }
}

TEST_CASE("dedup is idempotent under seed-set union") {
    HenonMap m = oracles::quad_map();
    SeedOptions a, b;
    a.grid = 10;
    b.grid = 17;
    SeedSet sa = standard_seeds(m, 2, a);
    SeedSet sb = standard_seeds(m, 2, b);
    SeedSet uni = sa;
    uni.points.insert(uni.points.end(), sb.points.begin(), sb.points.end());
    uni.cycles.insert(uni.cycles.end(), sb.cycles.begin(), sb.cycles.end());
    FindResult r1 = find_periodic(m, 2, sa, {});
    FindResult r2 = find_periodic(m, 2, uni, {});
    REQUIRE(r1.orbits.size() == r2.orbits.size());
    for (size_t i = 0; i < r1.orbits.size(); ++i)
        CHECK(dist(r1.orbits[i].points[0], r2.orbits[i].points[0]) < 1e-9);
}

TEST_CASE("lower-period orbits are flagged and counted once") {
    HenonMap hs = oracles::horseshoe();
    SeedOptions so;
    so.grid = 8;
    FindResult fr = find_periodic(hs, 4, standard_seeds(hs, 4, so), {});
    int fixed_seen = 0, exact4 = 0;
    for (const auto& o : fr.orbits) {
        if (o.period == 1) {
            CHECK(o.lower_period);
            ++fixed_seen;
        }
        if (o.period == 4) {
            CHECK_FALSE(o.lower_period);
            ++exact4;
        }
    }
    CHECK(fixed_seen == 2);
    CHECK(exact4 == 3); // (16 - 4 - 2) / 4 ... exact period-4 orbits

    // period minimality: each flagged orbit reappears unflagged at its
    // true period's own enumeration
    FindResult level1 = find_periodic(hs, 1, standard_seeds(hs, 1, so), {});
    for (const auto& o : fr.orbits) {
        if (o.period != 1) continue;
        bool matched = false;
        for (const auto& q : level1.orbits)
            if (!q.lower_period && dist(q.points[0], o.points[0]) < 1e-9) matched = true;
        CHECK(matched);
    }
}

TEST_CASE("census rows: divisor sums, ratios, flags") {
    HenonMap m = oracles::quad_map();
    CensusConfig cc;
    cc.seeds.grid = 24;
    CensusResult cen = census(m, 3, cc);
    REQUIRE(cen.rows.size() == 3);
    CHECK(cen.rows[0].fix_count == 2);
    CHECK(cen.rows[0].sper_count == 1);
    CHECK(cen.rows[0].ratio == Catch::Approx(0.5));
    // census consistency when enumeration is complete: sum over divisors
    for (const auto& row : cen.rows) {
        long long total = 0;
        for (const auto& o : cen.by_n[static_cast<size_t>(row.n - 1)].orbits) total += o.period;
        CHECK(total == row.fix_count);
    }

    HenonMap hs = oracles::horseshoe();
    CensusConfig hc;
    hc.seeds.grid = 8;
    CensusResult hcen = census(hs, 5, hc);
    for (const auto& row : hcen.rows) {
        CHECK(row.sper_count == (1LL << row.n));
        CHECK(row.ratio == Catch::Approx(1.0));
        CHECK_FALSE(row.low_confidence);
    }
    // weighted exponent sums converge (Cauchy differences shrink)
    double d1 = std::abs(hcen.rows[2].weighted_chi_u - hcen.rows[1].weighted_chi_u);
    double d2 = std::abs(hcen.rows[4].weighted_chi_u - hcen.rows[3].weighted_chi_u);
    CHECK(d2 < d1);
}

TEST_CASE("elimination oracle matches found orbits for n <= 3") {
    HenonMap hs = oracles::horseshoe();
    SeedOptions so;
    so.grid = 8;
    for (int n = 1; n <= 3; ++n) {
        FindResult fr = find_periodic(hs, n, standard_seeds(hs, n, so), {});
        auto roots = oracles::periodic_z_values(cplx(0.1, 0), cplx(-6, 0), n);
        // every orbit point z-value appears among the companion roots
        for (const auto& o : fr.orbits) {
            for (const auto& p : o.points) {
                double best = 1e300;
                for (const auto& r : roots) best = std::min(best, std::abs(p.z - r));
                CHECK(best < 1e-6);
            }
        }
        // and the counts agree with d^n
        long long pts = 0;
        for (const auto& o : fr.orbits) pts += o.period;
        CHECK(pts == (1LL << n));
    }
}

TEST_CASE("degree-3 factor: complete enumeration through n = 3") {
    // p(z) = z^3 - 8z + 1: all three inverse branches stay well separated
    HenonMap cubic({HenonFactor(cplx(0.05, 0), {cplx(1.0, 0), cplx(-8.0, 0)})});
    REQUIRE(cubic.degree() == 3);
    SeedOptions so;
    so.grid = 10;
    for (int n = 1; n <= 3; ++n) {
        FindResult fr = find_periodic(cubic, n, standard_seeds(cubic, n, so), {});
        long long pts = 0;
        for (const auto& o : fr.orbits) {
            pts += o.period;
            CHECK(o.residual < 1e-12);
        }
        long long want = 1;
        for (int i = 0; i < n; ++i) want *= 3;
        CHECK(pts == want);
    }
}

TEST_CASE("two-factor maps: fixed points honor the residual and determinant contracts") {
    HenonMap m({HenonFactor(cplx(0.2, 0), {cplx(-1.1, 0)}),
                HenonFactor(cplx(0.15, 0), {cplx(0.3, 0)})});
    CHECK(m.degree() == 4);
    SeedOptions so;
    so.grid = 32;
    FindResult fr = find_periodic(m, 1, standard_seeds(m, 1, so), {});
    REQUIRE(fr.orbits.size() >= 2);
    for (const auto& o : fr.orbits) {
        CHECK(o.residual < 1e-12);
        CHECK(dist(evaluate(m, o.points[0]), o.points[0]) < 1e-11);
        double lg = o.log_abs_lambda_u + o.log_abs_lambda_s -
                    o.period * std::log(std::abs(m.jacobian()));
        CHECK(std::abs(lg) < 1e-8);
    }
    // inverse round-trip on the composition
    auto rng = oracles::seeded_rng(123);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 50; ++i) {
        C2 x{cplx(u(rng), u(rng)), cplx(u(rng), u(rng))};
        CHECK(dist(evaluate_inverse(m, evaluate(m, x)), x) < 1e-10);
    }
}

TEST_CASE("neutral eigenvalues are flagged, not force-classified") {
    // a = 1, c = 0: fixed point (0,0) has monodromy [[0,1],[1,0]], eigenvalues +-1
    HenonMap m({HenonFactor(cplx(1, 0), {cplx(0, 0)})});
    PeriodicOrbit orb;
    orb.found_period = 1;
    orb.period = 1;
    orb.points = {{cplx(0, 0), cplx(0, 0)}};
    classify_orbit(m, orb);
    CHECK(orb.neutral_flagged);
    CHECK(orb.cls == OrbitClass::neutral);
}

TEST_CASE("direct-Newton fallback finds the same fixed points") {
    HenonMap m = oracles::quad_map();
    NewtonConfig nc;
    nc.direct = true;
    FindResult fr = find_periodic(m, 1, standard_seeds(m, 1), nc);
    CHECK(fr.orbits.size() == 2);
}

TEST_CASE("incomplete enumeration marks the row low_confidence") {
    HenonMap hs = oracles::horseshoe();
    CensusConfig cc;
    cc.seeds.grid = 2;            // two real fixed points only
    cc.seeds.itineraries = false; // no symbolic completion
    CensusResult cen = census(hs, 2, cc);
    CHECK(cen.rows[1].fix_count < 4);
    CHECK(cen.rows[1].low_confidence);
}

TEST_CASE("orbits re-verify under extended precision") {
    HenonMap hs = oracles::horseshoe();
    SeedOptions so;
    so.grid = 4;
    FindResult fr = find_periodic(hs, 6, standard_seeds(hs, 6, so), {});
    for (const auto& o : fr.orbits) CHECK(orbit_residual_dd(hs, o) < 1e-11);
}
