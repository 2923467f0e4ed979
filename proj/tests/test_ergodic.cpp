#include <catch2/catch_amalgamated.hpp>

#include "henon/ergodic.hpp"
#include "oracles.hpp"

using namespace henon;

namespace {

const CensusResult& horseshoe_census() {
    static CensusResult cen = [] {
        CensusConfig cc;
        cc.seeds.grid = 8;
        return census(oracles::horseshoe(), 8, cc);
    }();
    return cen;
}

} // namespace

TEST_CASE("saddle averages: single saddle, horseshoe, near-solenoid") {
    HenonMap m = oracles::quad_map();
    CensusConfig cc;
    cc.seeds.grid = 24;
    CensusResult cen = census(m, 1, cc);
    ExponentEstimate est = lyapunov_saddle_average(m, cen, 1);
    CHECK(est.count_normalized == Catch::Approx(0.31190535818243564).margin(1e-10));

    HenonMap hs = oracles::horseshoe();
    ExponentEstimate hest = lyapunov_saddle_average(hs, horseshoe_census(), 8);
    CHECK(hest.value > std::log(2.0) + 0.05); // disconnected-J regime
    CHECK_FALSE(hest.low_confidence);

    HenonMap sol = oracles::solenoid();
    CensusConfig sc;
    sc.seeds.grid = 8;
    CensusResult scen = census(sol, 8, sc);
    ExponentEstimate sest = lyapunov_saddle_average(sol, scen, 8);
    CHECK(sest.value == Catch::Approx(std::log(2.0)).margin(0.05)); // connected-J regime
}

TEST_CASE("birkhoff transport reproduces periodic exponents exactly") {
    HenonMap hs = oracles::horseshoe();
    const auto& level6 = horseshoe_census().by_n[5];
    const PeriodicOrbit* orb = nullptr;
    for (const auto& o : level6.orbits)
        if (o.period == 6) orb = &o;
    REQUIRE(orb);
    ExponentEstimate be =
        lyapunov_birkhoff(hs, orb->points[0], unstable_direction(*orb), {6, 2});
    CHECK(be.value == Catch::Approx(orb->chi_u).margin(1e-10));

    // re-alignment: the transported direction returns to the eigendirection
    C2 v = unstable_direction(*orb);
    C2 x = orb->points[0];
    for (int i = 0; i < 6; ++i) {
        Mat2 D = derivative(hs, x);
        v = mat_apply(D, v);
        double g = norm_c2(v);
        v = {v.z / g, v.w / g};
        x = evaluate(hs, x);
    }
    C2 eu = unstable_direction(*orb);
    // compare as complex lines
    double cross = std::abs(v.z * eu.w - v.w * eu.z);
    CHECK(cross < 1e-6);
}

TEST_CASE("birkhoff ensemble agrees with the saddle average") {
    HenonMap hs = oracles::horseshoe();
    const auto& top = horseshoe_census().by_n.back();
    double sum = 0.0;
    long count = 0;
    for (const auto& o : top.orbits) {
        if (o.cls != OrbitClass::saddle) continue;
        ExponentEstimate be = lyapunov_birkhoff(
            hs, o.points[0], unstable_direction(o), {static_cast<long>(o.period), 2});
        sum += o.period * be.value;
        count += o.period;
    }
    double ensemble = sum / double(count);
    ExponentEstimate sa = lyapunov_saddle_average(hs, horseshoe_census(), 8);
    CHECK(ensemble == Catch::Approx(sa.dn_normalized).margin(1e-8));
}

TEST_CASE("phi_0 Birkhoff sums equal chi^u through an independent route") {
    HenonMap hs = oracles::horseshoe();
    for (const auto& o : horseshoe_census().by_n[4].orbits) {
        if (o.cls != OrbitClass::saddle) continue;
        CHECK(birkhoff_phi0(hs, o) == Catch::Approx(o.chi_u).margin(1e-8));
    }
}

TEST_CASE("spectrum basics: S_1 phi = phi, dispersion zero iff constant") {
    HenonMap hs = oracles::horseshoe();
    auto fns = default_test_functions();
    const auto& level1 = horseshoe_census().by_n[0];
    std::vector<double> ref(fns.size(), 0.0);
    BirkhoffSpectrum sp = birkhoff_spectrum(hs, 1, level1, fns, ref, 1.0, 0);
    for (const auto& row : sp.rows) REQUIRE(row.sums.size() == fns.size());
    for (size_t oi = 0; oi < level1.orbits.size(); ++oi) {
        const C2& p = level1.orbits[oi].points[0];
        for (size_t i = 0; i < fns.size(); ++i)
            CHECK(sp.rows[oi].sums[i] == Catch::Approx(fns[i].fn(p)).margin(1e-14));
    }
    // im_z vanishes identically on the real horseshoe: dispersion exactly 0
    BirkhoffSpectrum sp4 = birkhoff_spectrum(hs, 4, horseshoe_census().by_n[3], fns, ref, 1.0, 0);
    CHECK(sp4.dispersion[1] == 0.0);
    CHECK(sp4.dispersion[0] > 0.0);
}

TEST_CASE("dispersion nonincreasing and mask ratio nondecreasing, n = 2..8") {
    HenonMap hs = oracles::horseshoe();
    auto spectra = spectrum_series(hs, horseshoe_census(), default_test_functions());
    REQUIRE(spectra.size() == 7);
    for (size_t i = 1; i < spectra.size(); ++i) {
        for (size_t f = 0; f < spectra[i].dispersion.size(); ++f)
            CHECK(spectra[i].dispersion[f] <= spectra[i - 1].dispersion[f] + 1e-12);
        CHECK(spectra[i].mask_ratio >= spectra[i - 1].mask_ratio - 1e-12);
    }
    // trend toward 1
    CHECK(spectra.back().mask_ratio > spectra.front().mask_ratio);
    CHECK(spectra.back().mask_ratio > 0.9);
}

TEST_CASE("mask is monotone under loosening rho") {
    HenonMap hs = oracles::horseshoe();
    auto fns = default_test_functions();
    const auto& level = horseshoe_census().by_n[4];
    // normalized functions as in the series driver
    std::vector<double> ref(fns.size(), 0.0);
    BirkhoffSpectrum tight = birkhoff_spectrum(hs, 5, level, fns, ref, 0.4, 5);
    BirkhoffSpectrum loose = birkhoff_spectrum(hs, 5, level, fns, ref, 1.2, 5);
    CHECK(loose.mask_points >= tight.mask_points);
    // row-wise: every tight-mask orbit stays in the loose mask
    for (size_t i = 0; i < tight.rows.size(); ++i)
        if (tight.rows[i].in_mask) CHECK(loose.rows[i].in_mask);
}

TEST_CASE("gap report: horseshoe gap_81 via the closed-form fixed points") {
    HenonMap hs = oracles::horseshoe();
    GapReport rep = lyapunov_gap_report(hs, horseshoe_census());
    CHECK(rep.gap_81);
    // fixed-point exponents from the closed form
    auto fps = oracles::fixed_points_closed_form(cplx(0.1, 0), cplx(-6, 0));
    double chi_hi = 0.0, chi_lo = 1e300;
    for (const auto& p : fps) {
        auto [lu, ls] = oracles::fixed_point_multipliers(cplx(0.1, 0), p.z);
        chi_hi = std::max(chi_hi, std::log(std::abs(lu)));
        chi_lo = std::min(chi_lo, std::log(std::abs(lu)));
    }
    CHECK(rep.chi_max == Catch::Approx(chi_hi).margin(1e-9));
    CHECK(rep.chi_min <= chi_lo + 1e-9);
    CHECK(rep.chi_max - rep.chi_mu_hat > 0.0);

    // single-saddle degenerate report
    HenonMap m = oracles::quad_map();
    CensusConfig cc;
    cc.seeds.grid = 24;
    CensusResult cen1 = census(m, 1, cc);
    GapReport rep1 = lyapunov_gap_report(m, cen1);
    CHECK_FALSE(rep1.gap_81);
    CHECK(rep1.chi_min == rep1.chi_max);
}

TEST_CASE("gap report on the near-solenoid is internally consistent") {
    HenonMap sol = oracles::solenoid();
    CensusConfig sc;
    sc.seeds.grid = 8;
    CensusResult cen = census(sol, 8, sc);
    GapReport rep = lyapunov_gap_report(sol, cen);
    // booleans follow their defining formulas; reported, not presumed
    CHECK(rep.gap_81 == ((rep.chi_max - rep.chi_min) > 2.0 * rep.multiplier_allowance));
    CHECK(rep.gap_82 == ((rep.chi_max - rep.chi_mu_hat) >
                         (rep.chi_mu_uncertainty + rep.multiplier_allowance)));
    // exponents cluster at log 2
    CHECK(rep.chi_mu_hat == Catch::Approx(std::log(2.0)).margin(0.05));
}

TEST_CASE("birkhoff on an escaping seed reports partial length") {
    HenonMap hs = oracles::horseshoe();
    ExponentEstimate est = lyapunov_birkhoff(hs, {cplx(3.2, 0), cplx(0, 0)}, {cplx(1, 0), cplx(0, 0)},
                                             {2000, 10});
    CHECK(est.low_confidence);
    CHECK(est.n < 2000);
}

TEST_CASE("estimator consistency: count- vs d^n-normalized averages") {
    HenonMap hs = oracles::horseshoe();
    const auto& cen = horseshoe_census();
    for (int n = 4; n <= 8; ++n) {
        ExponentEstimate est = lyapunov_saddle_average(hs, cen, n);
        double dn = std::pow(2.0, n);
        double deficit = std::abs(1.0 - double(cen.rows[n - 1].sper_count) / dn);
        double chi_max = 0.0;
        for (const auto& o : cen.by_n[n - 1].orbits) chi_max = std::max(chi_max, o.chi_u);
        CHECK(std::abs(est.count_normalized - est.dn_normalized) <= deficit * chi_max + 1e-12);
    }
}
