#include <doctest.h>

#include <cmath>
#include <random>

#include "matchid/indices.hpp"
#include "support.hpp"

using namespace matchid;

namespace {

// Golden-section minimum of n_m D(mu_m, x) + n_k D(mu_k, x).
double numeric_index(Family f, double n_m, double n_k, double a, double b) {
    auto obj = [&](double x) { return n_m * kl(f, a, x) + n_k * kl(f, b, x); };
    double lo = std::min(a, b), hi = std::max(a, b);
    const double phi = (std::sqrt(5.0) - 1) / 2;
    for (int it = 0; it < 300; ++it) {
        double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
        if (obj(x1) < obj(x2))
            hi = x2;
        else
            lo = x1;
    }
    return obj(0.5 * (lo + hi));
}

}  // namespace

TEST_CASE("allocation state updates") {
    AllocationState s(2, 2, false);
    s.update(0, 0, 2.0);
    CHECK(s.N(0, 0) == 1);
    CHECK(s.means_x()(0, 0) == 2.0);
    CHECK(std::isnan(s.means_x()(1, 1)));
    s.update(0, 0, 4.0);
    CHECK(s.means_x()(0, 0) == 3.0);
    CHECK(s.t == 2);
    CHECK(s.player_count(0) == 2);
    CHECK_THROWS(s.update(0, 1, 1.0, 2.0));

    AllocationState two(2, 2, true);
    CHECK_THROWS(two.update(0, 0, 1.0));
    two.update(1, 0, 1.0, 5.0);
    CHECK(two.means_y()(1, 0) == 5.0);
}

TEST_CASE("player and arm index closed forms") {
    CHECK(player_index(Family::Gaussian, 1, 1, 2, 1) == doctest::Approx(0.25));
    CHECK(player_index(Family::Gaussian, 3, 3, 2, 2) == 0.0);
    CHECK(player_index(Family::Gaussian, 0, 5, 2, 1) == 0.0);
    CHECK(arm_index(Family::Gaussian, 1, 1, 2, 1) == doctest::Approx(0.25));
    CHECK(arm_index(Family::Gaussian, 3, 1, 2, 1) == doctest::Approx(0.375));
    CHECK(arm_index(Family::Gaussian, 3, 1, 2, 1) == doctest::Approx(numeric_index(Family::Gaussian, 3, 1, 2, 1)));
    CHECK_THROWS(player_index(Family::Gaussian, 0, 0, 2, 1));
}

TEST_CASE("property: index equals the numeric infimum and is 1-homogeneous") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.05, 0.95), w(0.1, 20.0), c(0.1, 10.0);
    for (Family f : {Family::Gaussian, Family::Bernoulli}) {
        for (int n = 0; n < 500; ++n) {
            double a = u(rng), b = u(rng), nm = w(rng), nk = w(rng), s = c(rng);
            double idx = player_index(f, nm, nk, a, b);
            CHECK(idx == doctest::Approx(numeric_index(f, nm, nk, a, b)).epsilon(1e-8));
            CHECK(player_index(f, s * nm, s * nk, a, b) == doctest::Approx(s * idx).epsilon(1e-12));
        }
    }
}

TEST_CASE("one-sided anchor") {
    std::vector<double> mu{2, 1};
    CHECK(anchor_one_sided(Family::Gaussian, mu, 0, {1}, {5, 5}) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(anchor_one_sided(Family::Gaussian, mu, 0, {1}, {1e9, 1}) == doctest::Approx(-1.0).epsilon(1e-6));
    CHECK(anchor_one_sided(Family::Gaussian, mu, 0, {1}, {1, 1e9}) > 1e6);
    CHECK_THROWS(anchor_one_sided(Family::Gaussian, mu, 0, {}, {1, 1}));
    CHECK_THROWS_WITH(anchor_one_sided(Family::Gaussian, mu, 0, {1}, {0, 0}), "undefined mixture");
}

TEST_CASE("property: anchor monotone in counts") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(1.0, 5.0), w(0.5, 10.0);
    for (int n = 0; n < 300; ++n) {
        std::vector<double> mu{u(rng) + 5, u(rng), u(rng), u(rng)};
        std::vector<double> cnt{w(rng), w(rng), w(rng), w(rng)};
        std::vector<int> E{1, 2, 3};
        double g = anchor_one_sided(Family::Gaussian, mu, 0, E, cnt);
        auto more_lead = cnt;
        more_lead[0] *= 1.5;
        CHECK(anchor_one_sided(Family::Gaussian, mu, 0, E, more_lead) < g);
        auto more_chal = cnt;
        more_chal[2] *= 1.5;
        CHECK(anchor_one_sided(Family::Gaussian, mu, 0, E, more_chal) > g);
    }
}

TEST_CASE("two-sided anchor on Example 1 with unit counts") {
    auto inst = example1(2, 2);
    auto m = Matching::from_assignment({0, 1}, 2);
    auto part = partition_B123(inst, m);
    Mat w(2, 2, 1.0);
    // Each B3 constraint: leader term 0.125 over challenger terms 0.125 + 0.125.
    CHECK(anchor_two_sided(inst, m, part, w, 0) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(anchor_two_sided(inst, m, part, w, 1) == doctest::Approx(0.0).epsilon(1e-14));
    Mat z = w;
    z(0, 1) = 0;
    CHECK_THROWS(anchor_two_sided(inst, m, part, z, 0));
}

TEST_CASE("two-sided anchor on a serial-dictatorship instance has no B3 terms") {
    // Both sides share one ordering: p1 > p2, a1 > a2.
    MarketInstance inst;
    inst.M = 2;
    inst.K = 2;
    inst.mu = Mat::from_rows({{3, 1}, {2.5, 1.5}});
    inst.eta = Mat::from_rows({{3, 2.5}, {1, 1.5}});
    inst.validate();
    auto m = deferred_acceptance(prefs_from_means(inst), Side::Arms);
    CHECK(m.arm_of == std::vector<int>{0, 1});
    auto part = partition_B123(inst, m);
    CHECK(part.B3.empty());
    Mat w(2, 2, 1.0);
    // Recompute the anchors term by term.
    auto cs = two_sided_constraints(m, part, 2);
    auto ev = evaluate(cs, inst.model(), w, {&inst.mu, &*inst.eta}, false);
    double g0 = -1, g1 = -1;
    for (std::size_t n = 0; n < cs.items.size(); ++n) {
        const auto& c = cs.items[n];
        const auto& e = ev.items[n];
        if (c.player_term()) (c.i == 0 ? g0 : g1) += e.leader_d / e.challenger_d;
        if (c.arm_term()) (c.incumbent == 0 ? g0 : g1) += e.incumbent_d / e.challenger_d;
    }
    CHECK(anchor_two_sided(inst, m, part, w, 0) == doctest::Approx(g0));
    CHECK(anchor_two_sided(inst, m, part, w, 1) == doctest::Approx(g1));
}

TEST_CASE("a player with no constraints has anchor -1") {
    auto inst = example1(2, 2);
    ConstraintSet empty;
    empty.M = 2;
    empty.K = 2;
    empty.matching = Matching::from_assignment({0, 1}, 2);
    auto ev = evaluate(empty, inst.model(), Mat(2, 2, 1.0), {&inst.mu, nullptr});
    CHECK(ev.anchor == std::vector<double>{-1.0, -1.0});
    CHECK(min_index(empty, ev).empty);
}

TEST_CASE("min index tie-breaking and classes") {
    // Symmetric players with equal counts: lower index wins.
    Mat sym = Mat::from_rows({{2, 1}, {1, 2}});
    auto cs = one_sided_all_constraints(Matching::from_assignment({0, 1}, 2), 2);
    auto ev = evaluate(cs, Family::Gaussian, Mat(2, 2, 1.0), {&sym, nullptr});
    CHECK(ev.items[0].value == ev.items[1].value);
    CHECK(min_index(cs, ev).i == 0);

    // Exhaustive oracle on the serial fixture with unit counts.
    auto serial = to_one_sided(generate_instance(ProfileKind::Serial, 5, 5, {2, 2.5, 3.5, 5, 7}, 0));
    auto ps = prefs_from_means(serial);
    auto ms = deferred_acceptance(ps, Side::Arms);
    auto bs = probable_blocking_sets(ps, ms);
    AllocationState u(5, 5, false);
    for (int i = 0; i < 5; ++i)
        for (int k = 0; k < 5; ++k) u.update(i, k, 0.0);
    auto got = min_index_one_sided(u, ms, bs, Family::Gaussian, serial.mu);
    double best = kInf;
    int bi = -1, bk = -1;
    for (int i = 0; i < 5; ++i)
        for (int k : bs.E[i]) {
            double d = serial.mu(i, ms.arm_of[i]) - serial.mu(i, k);
            double v = 2 * 0.5 * (d / 2) * (d / 2);
            if (v < best - 1e-15) {
                best = v;
                bi = i;
                bk = k;
            }
        }
    CHECK(got.value == doctest::Approx(best));
    CHECK(got.i == bi);
    CHECK(got.k == bk);

    // No challengers anywhere: nothing to verify.
    auto distinct = to_one_sided(generate_instance(ProfileKind::Distinct, 5, 5, {2, 2.5, 3.5, 5, 7}, 0));
    auto pd = prefs_from_means(distinct);
    auto md = deferred_acceptance(pd, Side::Arms);
    CHECK(min_index_one_sided(u, md, probable_blocking_sets(pd, md), Family::Gaussian, distinct.mu).empty);
}

TEST_CASE("two-sided min index") {
    auto inst = example1(2, 2);
    auto m = Matching::from_assignment({0, 1}, 2);
    auto part = partition_B123(inst, m);
    AllocationState s(2, 2, true);
    for (int i = 0; i < 2; ++i)
        for (int k = 0; k < 2; ++k) s.update(i, k, 0.0, 0.0);
    auto mi = ts_min_index(s, m, part, Family::Gaussian, inst.mu, *inst.eta);
    CHECK(mi.kind == ConstraintKind::B3);
    CHECK(mi.i == 0);
    CHECK(mi.value == doctest::Approx(0.5));  // 0.25 player side + 0.25 arm side

    Mat mu_eq = inst.mu;
    mu_eq(0, 1) = mu_eq(0, 0);
    Mat eta_eq = *inst.eta;
    eta_eq(0, 1) = eta_eq(1, 1);
    CHECK(ts_min_index(s, m, part, Family::Gaussian, mu_eq, eta_eq).value == 0.0);
}

TEST_CASE("zero counts map to +inf before warmup") {
    auto inst = example1(2, 2);
    auto m = Matching::from_assignment({0, 1}, 2);
    auto cs = two_sided_constraints(m, partition_B123(inst, m), 2);
    Mat w(2, 2, 1.0);
    w(0, 1) = 0;
    auto ev = evaluate(cs, inst.model(), w, {&inst.mu, &*inst.eta});
    CHECK(ev.items[0].value == kInf);
    CHECK(std::isfinite(ev.items[1].value));
}

TEST_CASE("property: analytic anchor jacobian matches finite differences") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> w(0.2, 3.0);
    for (ProfileKind kind : {ProfileKind::Distinct, ProfileKind::Serial, ProfileKind::Spc}) {
        auto inst = generate_instance(kind, 5, 5, {2, 2.5, 3.5, 5, 7}, 0);
        auto cs = [&] {
            auto p = prefs_from_means(inst);
            auto m = deferred_acceptance(p, Side::Arms);
            return two_sided_constraints(m, partition_B123(p, m), 5);
        }();
        Means means{&inst.mu, &*inst.eta};
        for (int rep = 0; rep < 5; ++rep) {
            Mat x(5, 5);
            for (double& v : x.data) v = w(rng);
            Mat J = anchor_jacobian(cs, inst.model(), x, means);
            for (int q = 0; q < 25; ++q) {
                double h = 1e-6;
                Mat xp = x, xm = x;
                xp.data[q] += h;
                xm.data[q] -= h;
                auto gp = evaluate(cs, inst.model(), xp, means, false).anchor;
                auto gm = evaluate(cs, inst.model(), xm, means, false).anchor;
                for (int l = 0; l < 5; ++l) {
                    double fd = (gp[l] - gm[l]) / (2 * h);
                    CHECK(J(l, q) == doctest::Approx(fd).epsilon(1e-5).scale(1.0));
                }
            }
        }
    }
}
