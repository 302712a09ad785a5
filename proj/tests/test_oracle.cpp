#include <doctest.h>

#include <cmath>
#include <random>

#include "matchid/oracle.hpp"
#include "support.hpp"

using namespace matchid;

namespace {

MarketInstance single_player(std::vector<double> mu_row) {
    MarketInstance inst;
    inst.M = 1;
    inst.K = static_cast<int>(mu_row.size());
    inst.mu = Mat::from_rows({mu_row});
    inst.arm_prefs = Ordering(inst.K, std::vector<int>{0});
    inst.validate();
    return inst;
}

// Two players with mirrored means and aligned arm preferences.
MarketInstance mirrored_pair() {
    MarketInstance inst;
    inst.M = 2;
    inst.K = 2;
    inst.mu = Mat::from_rows({{2, 1}, {1, 2}});
    inst.arm_prefs = Ordering{{0, 1}, {1, 0}};
    inst.validate();
    return inst;
}

// Best D(w) over the 4-point simplex grid with the given step.
double grid_best_2x2(const ConstraintSet& cs, RewardModel f, Means means, double h) {
    const int n = static_cast<int>(std::lround(1.0 / h));
    double best = 0;
    Mat w(2, 2);
    for (int a = 0; a <= n; ++a)
        for (int b = 0; a + b <= n; ++b)
            for (int c = 0; a + b + c <= n; ++c) {
                w(0, 0) = a * h;
                w(0, 1) = b * h;
                w(1, 0) = c * h;
                w(1, 1) = (n - a - b - c) * h;
                best = std::max(best, characteristic_time(cs, f, w, means));
            }
    return best;
}

Mat random_simplex(int M, int K, std::mt19937_64& rng) {
    std::exponential_distribution<double> e(1.0);
    Mat w(M, K);
    double s = 0;
    for (double& v : w.data) s += (v = e(rng));
    for (double& v : w.data) v /= s;
    return w;
}

std::vector<MarketInstance> one_sided_fixtures() {
    std::vector<MarketInstance> out;
    for (auto kind : {ProfileKind::Serial, ProfileKind::Spc})
        out.push_back(to_one_sided(generate_instance(kind, 5, 5, {2, 2.5, 3.5, 5, 7}, 0)));
    out.push_back(single_player({2, 1}));
    out.push_back(single_player({3, 2, 1.5, 1}));
    return out;
}

std::vector<MarketInstance> two_sided_fixtures() {
    std::vector<MarketInstance> out;
    for (auto kind : {ProfileKind::Distinct, ProfileKind::Serial, ProfileKind::Spc})
        out.push_back(generate_instance(kind, 5, 5, {2, 2.5, 3.5, 5, 7}, 0));
    for (double v : {1.5, 2.5, 4.0}) out.push_back(example1(v, 4.0));
    out.push_back(example1(4.0, 1.5));
    return out;
}

}  // namespace

TEST_CASE("local BAI") {
    auto one = solve_local_bai(Family::Gaussian, {2, 1}, 0, {1});
    CHECK(one.w[0] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(one.w[1] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(one.level == doctest::Approx(0.125).epsilon(1e-9));

    // The closer challenger needs more mass; mirrored rows swap the weights.
    auto sym = solve_local_bai(Family::Gaussian, {3, 2, 4}, 2, {0, 1});
    CHECK(sym.w[0] > sym.w[1]);
    auto eq = solve_local_bai(Family::Gaussian, {3, 1, 5}, 2, {0, 1});
    auto eq2 = solve_local_bai(Family::Gaussian, {1, 3, 5}, 2, {0, 1});
    CHECK(eq.w[0] == doctest::Approx(eq2.w[1]).epsilon(1e-9));

    CHECK_THROWS(solve_local_bai(Family::Gaussian, {2, 1}, 0, {}));
    CHECK_THROWS(solve_local_bai(Family::Gaussian, {1, 2}, 0, {1}));
}

TEST_CASE("local BAI against the 2-simplex grid") {
    std::vector<double> mu{3, 2, 1};
    auto sol = solve_local_bai(Family::Gaussian, mu, 0, {1, 2});
    double best = 0;
    const int n = 1000;
    for (int a = 0; a <= n; ++a)
        for (int b = 0; a + b <= n; ++b) {
            double wl = a / double(n), w1 = b / double(n), w2 = 1 - wl - w1;
            if (wl + w1 <= 0 || wl + w2 <= 0) continue;
            double v = std::min(player_index(Family::Gaussian, wl, w1, mu[0], mu[1]),
                                player_index(Family::Gaussian, wl, w2, mu[0], mu[2]));
            best = std::max(best, v);
        }
    CHECK(sol.level >= best - 1e-12);
    CHECK(sol.level <= best + 2e-3);
    CHECK(anchor_one_sided(Family::Gaussian, mu, 0, {1, 2}, sol.w) == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
}

TEST_CASE("one-sided solve: closed forms") {
    auto m1 = solve_one_sided(single_player({2, 1}));
    CHECK(m1.T_star == doctest::Approx(8.0).epsilon(1e-9));
    CHECK(characteristic_time(single_player({2, 1}), Mat::from_rows({{0.5, 0.5}})) == doctest::Approx(0.125));
    CHECK(characteristic_time(single_player({2, 1}), Mat::from_rows({{1.0, 0.0}})) == 0.0);

    auto pair = mirrored_pair();
    auto s = solve_one_sided(pair, ChallengerRule::AllOthers);
    for (double v : s.w.data) CHECK(v == doctest::Approx(0.25).epsilon(1e-9));
    CHECK(s.T_star == doctest::Approx(16.0).epsilon(1e-9));
    auto cs = true_constraints(pair, ChallengerRule::AllOthers);
    CHECK(1.0 / grid_best_2x2(cs, pair.model(), {&pair.mu, nullptr}, 1e-2) == doctest::Approx(16.0).epsilon(1e-9));

    CHECK_THROWS(solve_one_sided(to_one_sided(generate_instance(ProfileKind::Distinct, 5, 5, {2, 2.5, 3.5, 5, 7}, 0))));
    CHECK_THROWS(solve_one_sided(example1(2, 2)));
}

TEST_CASE("one-sided first-order conditions on fixtures") {
    for (const auto& inst : one_sided_fixtures()) {
        for (auto rule : {ChallengerRule::Blocking, ChallengerRule::Full, ChallengerRule::AllOthers}) {
            auto cs = true_constraints(inst, rule);
            if (cs.items.empty()) continue;
            auto sol = solve_one_sided(inst, rule);
            double sum = 0;
            for (double v : sol.w.data) sum += v;
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
            auto rep = first_order_report(cs, inst.model(), sol.w, {&inst.mu, nullptr});
            CHECK(rep.index_spread < 1e-8);
            CHECK(rep.max_abs_anchor < 1e-8);
            CHECK(characteristic_time(inst, sol.w, rule) * sol.T_star == doctest::Approx(1.0).epsilon(1e-9));
        }
    }
}

TEST_CASE("one-sided solve agrees with the generic and supergradient solvers") {
    auto inst = to_one_sided(generate_instance(ProfileKind::Serial, 5, 5, {2, 2.5, 3.5, 5, 7}, 0));
    auto cs = true_constraints(inst);
    Means means{&inst.mu, nullptr};
    auto a = solve_one_sided(inst);
    auto b = solve_constraints(cs, inst.model(), means);
    auto c = solve_supergradient(cs, inst.model(), means);
    CHECK(b.T_star == doctest::Approx(a.T_star).epsilon(1e-8));
    for (std::size_t q = 0; q < a.w.data.size(); ++q) CHECK(std::abs(a.w.data[q] - b.w.data[q]) < 1e-6);
    CHECK(c.T_star == doctest::Approx(a.T_star).epsilon(1e-2));
}

TEST_CASE("property: D(w*) dominates random allocations") {
    std::mt19937_64 rng(41);
    for (const auto& inst : one_sided_fixtures()) {
        auto sol = solve_one_sided(inst);
        double d = 1.0 / sol.T_star;
        for (int n = 0; n < 100; ++n) CHECK(characteristic_time(inst, random_simplex(inst.M, inst.K, rng)) <= d + 1e-12);
    }
    for (const auto& inst : two_sided_fixtures()) {
        auto sol = solve_two_sided(inst);
        double d = 1.0 / sol.T_star;
        for (int n = 0; n < 100; ++n) CHECK(characteristic_time(inst, random_simplex(inst.M, inst.K, rng)) <= d + 1e-12);
    }
}

TEST_CASE("two-sided first-order conditions and complementary slackness") {
    for (const auto& inst : two_sided_fixtures()) {
        auto cs = true_constraints(inst);
        auto sol = solve_two_sided(inst);
        auto rep = first_order_report(cs, inst.model(), sol.w, {&inst.mu, &*inst.eta});
        CHECK(rep.index_spread < 1e-8);
        CHECK(rep.max_abs_anchor < 1e-8);
        CHECK(rep.max_slackness < 1e-6);
        CHECK(rep.max_positive_anchor < 1e-6);
        CHECK(characteristic_time(inst, sol.w) * sol.T_star == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("two-sided 2x2 against grid search and supergradient") {
    for (auto [m11, e11] : {std::pair{4.0, 4.0}, std::pair{1.5, 4.0}, std::pair{4.0, 1.5}, std::pair{2.0, 3.0}}) {
        auto inst = example1(m11, e11);
        auto cs = true_constraints(inst);
        Means means{&inst.mu, &*inst.eta};
        auto sol = solve_two_sided(inst);
        double d = 1.0 / sol.T_star;
        double grid = grid_best_2x2(cs, inst.model(), means, 1e-2);
        CHECK(d >= grid - 1e-12);
        CHECK(d <= grid * (1 + 0.05));
        auto sg = solve_two_sided(inst, TwoSidedMethod::Supergradient);
        CHECK(1.0 / sg.T_star == doctest::Approx(d).epsilon(1e-3));
    }
    auto mid = solve_two_sided(example1(3, 3));
    CHECK(mid.w(0, 0) > 1e-3);
    CHECK(mid.w(1, 1) > 1e-3);
    // At (4, 4) the second leader is already starved; both solvers agree.
    auto big = solve_two_sided(example1(4, 4));
    CHECK(big.w(1, 1) == 0.0);
    CHECK(big.w(0, 0) == doctest::Approx(std::sqrt(2.0) - 1).epsilon(1e-8));
}

TEST_CASE("two-sided solve supports exact zero leader weights") {
    int zero1 = 0, zero2 = 0;
    for (double m = 1.25; m <= 4.0; m += 0.25)
        for (double e = 1.25; e <= 4.0; e += 0.25) {
            auto sol = solve_two_sided(example1(m, e));
            if (sol.w(0, 0) == 0.0 && sol.w(1, 1) > 0) ++zero1;
            if (sol.w(1, 1) == 0.0 && sol.w(0, 0) > 0) ++zero2;
        }
    CHECK(zero1 > 0);
    CHECK(zero2 > 0);
}

TEST_CASE("serial dictatorship on both sides decouples") {
    auto inst = generate_instance(ProfileKind::Serial, 5, 5, {2, 2.5, 3.5, 5, 7}, 0);
    for (int i = 0; i < 5; ++i)
        for (int k = 0; k < 5; ++k) inst.mu(i, k) = std::vector<double>{7, 5, 3.5, 2.5, 2}[k];
    inst.validate();
    auto cs = true_constraints(inst);
    for (const auto& c : cs.items) CHECK(c.kind != ConstraintKind::B3);
    auto sol = solve_two_sided(inst);
    auto sg = solve_two_sided(inst, TwoSidedMethod::Supergradient);
    CHECK(1.0 / sg.T_star == doctest::Approx(1.0 / sol.T_star).epsilon(1e-3));
}

TEST_CASE("beta characteristic time") {
    for (const auto& inst : one_sided_fixtures()) {
        auto cs = true_constraints(inst);
        auto sol = solve_one_sided(inst);
        auto beta_star = leader_fractions(cs, sol.w);
        for (int i = 0; i < inst.M; ++i)
            if (beta_star[i] == 0) beta_star[i] = 0.5;  // players without challengers
        CHECK(beta_characteristic_time(inst, beta_star) == doctest::Approx(1.0 / sol.T_star).epsilon(1e-8));
        double half = beta_characteristic_time(inst, std::vector<double>(inst.M, 0.5));
        CHECK(half <= 1.0 / sol.T_star * (1 + 1e-12));
        CHECK(1.0 / half <= 2 * sol.T_star);
        double tiny = beta_characteristic_time(inst, std::vector<double>(inst.M, 1e-6));
        CHECK(tiny < 1e-2 / sol.T_star);
    }
    CHECK_THROWS(beta_characteristic_time(single_player({2, 1}), {1.0}));
}

TEST_CASE("property: top-two is 2-competitive on random one-sided instances") {
    std::mt19937_64 rng(77);
    std::uniform_int_distribution<int> sz(1, 4);
    int done = 0;
    while (done < 50) {
        int M = sz(rng), K = sz(rng) + 1;
        if (M > K) std::swap(M, K);
        MarketInstance inst;
        inst.M = M;
        inst.K = K;
        inst.mu = testsupport::random_means(M, K, rng);
        Ordering ap(K);
        for (auto& o : ap) o = testsupport::random_perm(M, rng);
        inst.arm_prefs = ap;
        try {
            inst.validate();
            auto sol = solve_one_sided(inst, ChallengerRule::AllOthers);
            double half = beta_characteristic_time(inst, std::vector<double>(M, 0.5), ChallengerRule::AllOthers);
            CHECK(1.0 / half <= 2 * sol.T_star * (1 + 1e-9));
            ++done;
        } catch (const std::invalid_argument&) {
        }
    }
}
