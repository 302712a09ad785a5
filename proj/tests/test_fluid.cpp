#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "matchid/algorithms.hpp"
#include "matchid/fluid.hpp"
#include "support.hpp"

using namespace matchid;

namespace {

const std::vector<double> kLevels{2, 2.5, 3.5, 5, 7};

struct Fixture {
    std::string name;
    FluidModel fm;
    OracleSolution sol;
};

MarketInstance both_sides_serial() {
    auto inst = generate_instance(ProfileKind::Serial, 5, 5, kLevels, 0);
    for (int i = 0; i < 5; ++i)
        for (int k = 0; k < 5; ++k) inst.mu(i, k) = std::vector<double>{7, 5, 3.5, 2.5, 2}[k];
    inst.validate();
    return inst;
}

std::vector<Fixture> fixtures() {
    std::vector<Fixture> out;
    for (auto kind : {ProfileKind::Serial, ProfileKind::Spc})
        for (auto rule : {ChallengerRule::Blocking, ChallengerRule::Full}) {
            auto one = to_one_sided(generate_instance(kind, 5, 5, kLevels, 0));
            out.push_back({to_string(kind), FluidModel::one_sided(one, rule), solve_one_sided(one, rule)});
        }
    auto serial = both_sides_serial();
    out.push_back({"serial-both", FluidModel::two_sided_serial(serial), solve_two_sided(serial)});
    return out;
}

double sum(const Mat& m) {
    double s = 0;
    for (double v : m.data) s += v;
    return s;
}

double min_positive(const Mat& m) {
    double r = kInf;
    for (double v : m.data)
        if (v > 0) r = std::min(r, v);
    return r;
}

}  // namespace

TEST_CASE("fluid model construction") {
    CHECK_THROWS_WITH(FluidModel::two_sided_serial(example1(2, 2)), "unsupported configuration: B3 is nonempty");
    CHECK_THROWS(FluidModel::one_sided(example1(2, 2)));
    auto fm = FluidModel::one_sided(to_one_sided(generate_instance(ProfileKind::Distinct, 5, 5, kLevels, 0)));
    CHECK(fm.cs.items.empty());
    CHECK_THROWS(integrate(fm, Mat(5, 5, 1.0), 100));
}

TEST_CASE("classification at the start") {
    auto one = to_one_sided(generate_instance(ProfileKind::Serial, 5, 5, kLevels, 0));
    auto fm = FluidModel::one_sided(one);
    auto p = classify(fm, Mat(5, 5, 1.0));
    CHECK(std::isfinite(p.C_min));
    int in_min = 0;
    for (int i = 0; i < 5; ++i)
        if (p.cls[i] != FluidClass::Idle) {
            ++in_min;
            CHECK_FALSE(p.A_min[i].empty());
        }
    CHECK(in_min >= 1);
    auto rates = fluid_rhs(fm, Mat(5, 5, 1.0), p);
    CHECK(sum(rates.alloc_dot) == doctest::Approx(1.0).epsilon(1e-12));
    for (double v : rates.alloc_dot.data) CHECK(v >= -1e-15);
    CHECK(rates.C_dot > 0);
}

TEST_CASE("trajectories: conservation, monotone C_min, t* bound, convergence") {
    for (const auto& fx : fixtures()) {
        CAPTURE(fx.name);
        Mat a0(5, 5, 1.0);
        const double t0 = 25, horizon = 1e5;
        auto tr = integrate(fx.fm, a0, horizon);
        REQUIRE(tr.ok);
        CHECK(std::abs(sum(tr.final_alloc) - horizon) < 1e-8 * horizon);
        for (const auto& row : tr.rows) CHECK(std::abs(sum(row.alloc) - row.t) < 1e-8 * row.t);
        for (std::size_t n = 1; n < tr.rows.size(); ++n) CHECK(tr.rows[n].C_min >= tr.rows[n - 1].C_min * (1 - 1e-12));
        REQUIRE(tr.t_star.has_value());
        CHECK(*tr.t_star <= t0 / min_positive(fx.sol.w));
        double sup = 0;
        for (std::size_t q = 0; q < fx.sol.w.data.size(); ++q)
            sup = std::max(sup, std::abs(tr.final_alloc.data[q] / horizon - fx.sol.w.data[q]));
        CHECK(sup < 1e-3);
        bool steady = false;
        for (const auto& e : tr.events) steady |= e.kind == FluidEventKind::Steady;
        CHECK(steady);
    }
}

TEST_CASE("ray invariance from the optimal allocation") {
    for (const auto& fx : fixtures()) {
        CAPTURE(fx.name);
        const double t0 = 25;
        Mat a0 = fx.sol.w;
        for (double& v : a0.data) v *= t0;
        auto tr = integrate(fx.fm, a0, 1e4);
        REQUIRE(tr.ok);
        for (const auto& row : tr.rows)
            for (std::size_t q = 0; q < a0.data.size(); ++q)
                CHECK(std::abs(row.alloc.data[q] / row.t - fx.sol.w.data[q]) < 1e-8);
    }
}

TEST_CASE("anchors are stationary along the merged flow") {
    int checked = 0;
    for (const auto& fx : fixtures()) {
        CAPTURE(fx.name);
        Mat a = fx.sol.w;
        for (double& v : a.data) v *= 100;
        auto part = classify(fx.fm, a);
        auto rates = fluid_rhs(fx.fm, a, part);
        Mat J = anchor_jacobian(fx.fm.cs, fx.fm.model, a, fx.fm.means());
        auto ev = evaluate(fx.fm.cs, fx.fm.model, a, fx.fm.means(), false);
        for (int l = 0; l < 5; ++l) {
            if (part.cls[l] != FluidClass::Zero) continue;
            double dg = 0;
            for (int q = 0; q < 25; ++q) dg += J(l, q) * rates.alloc_dot.data[q];
            CHECK(std::abs(dg) < 1e-8);
            CHECK(std::abs(ev.anchor[l]) < 1e-8);
            ++checked;
        }
    }
    CHECK(checked > 0);
}

TEST_CASE("local and global time scales") {
    for (const auto& fx : fixtures()) {
        CAPTURE(fx.name);
        auto tr = integrate(fx.fm, Mat(5, 5, 1.0), 1e4);
        REQUIRE(tr.ok);
        auto rep = local_global_check(fx.fm, tr.rows[tr.rows.size() / 2].alloc);
        CHECK(rep.discrepancy() < 1e-6);
    }
}

TEST_CASE("noise-free ATT1 tracks the fluid allocation") {
    auto one = to_one_sided(generate_instance(ProfileKind::Spc, 5, 5, kLevels, 0));
    auto fm = FluidModel::one_sided(one);
    const double horizon = 2e4;
    auto tr = integrate(fm, Mat(5, 5, 1.0), horizon);
    RunConfig c;
    c.noise_free = true;
    c.disable_stopping = true;
    c.max_rounds = static_cast<long long>(horizon);
    auto r = run_att1(one, c);
    double sup = 0;
    for (int i = 0; i < 5; ++i)
        for (int k = 0; k < 5; ++k) sup = std::max(sup, std::abs(r.counts(i, k) - tr.final_alloc(i, k)) / horizon);
    CHECK(sup < 0.01);
}

TEST_CASE("2x2 case machine") {
    CHECK_THROWS(two_sided_2x2_step(example1(2, 2), Mat(2, 2, 0.0)));
    CHECK_THROWS(two_sided_2x2_step(generate_instance(ProfileKind::Spc, 5, 5, kLevels, 0), Mat(5, 5, 1.0)));

    // At w* with every weight positive the machine follows w*.
    auto inst = example1(3, 3);
    auto w = solve_two_sided(inst).w;
    Mat a = w;
    for (double& v : a.data) v *= 50;
    auto st = two_sided_2x2_step(inst, a, 1e-7);
    CHECK(st.case_id == 4);
    for (std::size_t q = 0; q < 4; ++q) CHECK(st.rates.data[q] == doctest::Approx(w.data[q]).epsilon(1e-9));

    auto sym = two_sided_2x2_step(example1(2, 2), Mat(2, 2, 1.0));
    CHECK(sym.I12 == doctest::Approx(sym.I21));
    CHECK(std::abs(sym.g[0]) < 1e-12);
}

TEST_CASE("property: 2x2 rates are a distribution and derivatives match finite differences") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(1.2, 4.0), w(0.2, 5.0);
    std::set<int> cases;
    for (int n = 0; n < 400; ++n) {
        auto inst = example1(u(rng), u(rng));
        Mat a(2, 2);
        for (double& v : a.data) v = w(rng);
        auto st = two_sided_2x2_step(inst, a);
        cases.insert(st.case_id);
        CHECK(sum(st.rates) == doctest::Approx(1.0).epsilon(1e-12));
        for (double v : st.rates.data) CHECK(v >= -1e-12);

        auto m = Matching::from_assignment({0, 1}, 2);
        auto cs = two_sided_constraints(m, partition_B123(inst, m), 2);
        Means means{&inst.mu, &*inst.eta};
        const double h = 1e-6;
        Mat ap = a, am = a;
        for (int q = 0; q < 4; ++q) {
            ap.data[q] += h * st.rates.data[q];
            am.data[q] -= h * st.rates.data[q];
        }
        auto ep = evaluate(cs, inst.model(), ap, means, false);
        auto em = evaluate(cs, inst.model(), am, means, false);
        for (int l = 0; l < 2; ++l)
            CHECK(st.g_dot[l] == doctest::Approx((ep.anchor[l] - em.anchor[l]) / (2 * h)).epsilon(1e-5).scale(1.0));
        // Items are sorted (0,1), (1,0).
        CHECK(st.I12_dot == doctest::Approx((ep.items[0].value - em.items[0].value) / (2 * h)).epsilon(1e-5).scale(1.0));
        CHECK(st.I21_dot == doctest::Approx((ep.items[1].value - em.items[1].value) / (2 * h)).epsilon(1e-5).scale(1.0));

        if (st.label.rfind("case1:h<0", 0) == 0) CHECK(st.rates(0, 0) + st.rates(1, 1) == 0.0);
    }
    CHECK(cases.count(1) == 1);
}
