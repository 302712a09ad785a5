#include "matchid/indices.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace matchid {

AllocationState::AllocationState(int M_, int K_, bool two)
    : M(M_), K(K_), two_sided(two), N(M_, K_, 0), sum_x(M_, K_, 0.0), sum_y(M_, K_, 0.0) {}

void AllocationState::update(int i, int k, double x, std::optional<double> y) {
    if (y.has_value() != two_sided) throw std::invalid_argument(two_sided ? "missing arm reward" : "unexpected arm reward");
    N(i, k) += 1;
    sum_x(i, k) += x;
    if (y) sum_y(i, k) += *y;
    ++t;
}

long long AllocationState::player_count(int i) const {
    long long s = 0;
    for (int k = 0; k < K; ++k) s += N(i, k);
    return s;
}

Mat AllocationState::means_x() const {
    Mat out(M, K, std::nan(""));
    for (int i = 0; i < M; ++i)
        for (int k = 0; k < K; ++k)
            if (N(i, k) > 0) out(i, k) = sum_x(i, k) / static_cast<double>(N(i, k));
    return out;
}

Mat AllocationState::means_y() const {
    Mat out(M, K, std::nan(""));
    for (int i = 0; i < M; ++i)
        for (int k = 0; k < K; ++k)
            if (N(i, k) > 0) out(i, k) = sum_y(i, k) / static_cast<double>(N(i, k));
    return out;
}

Mat AllocationState::counts() const {
    Mat out(M, K);
    for (int i = 0; i < M; ++i)
        for (int k = 0; k < K; ++k) out(i, k) = static_cast<double>(N(i, k));
    return out;
}

namespace {

struct TermEval {
    double value = 0, top_d = 0, bot_d = 0, z = 0;
};

// n_top * D(top, z) + n_bot * D(bot, z) at the mixture z.
TermEval term(const RewardModel& model, double n_top, double n_bot, double top, double bot) {
    TermEval r;
    double s = n_top + n_bot;
    r.z = s > 0 ? (n_top * top + n_bot * bot) / s : 0.5 * (top + bot);
    r.top_d = model.kl(top, r.z);
    r.bot_d = model.kl(bot, r.z);
    r.value = n_top * r.top_d + n_bot * r.bot_d;
    return r;
}

}  // namespace

double player_index(RewardModel f, double n_m, double n_k, double mu_m, double mu_k) {
    if (!(n_m + n_k > 0)) throw std::invalid_argument("index needs positive total weight");
    return term(RewardModel{f}, n_m, n_k, mu_m, mu_k).value;
}

double arm_index(RewardModel f, double n_jk, double n_ik, double eta_j, double eta_i) {
    return player_index(f, n_jk, n_ik, eta_j, eta_i);
}

double anchor_one_sided(RewardModel f, const std::vector<double>& means_row, int matched, const std::vector<int>& E,
                        const std::vector<double>& counts_row) {
    if (E.empty()) throw std::invalid_argument("anchor needs a nonempty challenger set");
    RewardModel model{f};
    double g = -1.0;
    for (int k : E) {
        if (!(counts_row[matched] + counts_row[k] > 0)) throw std::invalid_argument("undefined mixture");
        auto t = term(model, counts_row[matched], counts_row[k], means_row[matched], means_row[k]);
        g += t.bot_d > 0 ? t.top_d / t.bot_d : kInf;
    }
    return g;
}

ConstraintSet one_sided_constraints(const Matching& m, const BlockingSets& b, int K) {
    ConstraintSet cs;
    cs.M = static_cast<int>(m.arm_of.size());
    cs.K = K;
    cs.matching = m;
    for (int i = 0; i < cs.M; ++i)
        for (int k : b.E[i]) cs.items.push_back({i, k, m.player_of[k], ConstraintKind::Player});
    return cs;
}

ConstraintSet one_sided_full_constraints(const PreferenceProfile& p, const Matching& m) {
    ConstraintSet cs;
    cs.M = p.M;
    cs.K = p.K;
    cs.matching = m;
    for (int i = 0; i < p.M; ++i)
        for (int k = 0; k < p.K; ++k)
            if (k != m.arm_of[i] && p.player_prefers(i, m.arm_of[i], k))
                cs.items.push_back({i, k, m.player_of[k], ConstraintKind::Player});
    return cs;
}

ConstraintSet one_sided_all_constraints(const Matching& m, int K) {
    ConstraintSet cs;
    cs.M = static_cast<int>(m.arm_of.size());
    cs.K = K;
    cs.matching = m;
    for (int i = 0; i < cs.M; ++i)
        for (int k = 0; k < K; ++k)
            if (k != m.arm_of[i]) cs.items.push_back({i, k, m.player_of[k], ConstraintKind::Player});
    return cs;
}

ConstraintSet two_sided_constraints(const Matching& m, const B123Partition& part, int K) {
    ConstraintSet cs;
    cs.M = static_cast<int>(m.arm_of.size());
    cs.K = K;
    cs.two_sided = true;
    cs.matching = m;
    auto add = [&](const std::vector<std::pair<int, int>>& v, ConstraintKind kind) {
        for (auto [i, k] : v) cs.items.push_back({i, k, m.player_of[k], kind});
    };
    add(part.B1, ConstraintKind::B1);
    add(part.B2, ConstraintKind::B2);
    add(part.B3, ConstraintKind::B3);
    for (int i = 0; i < cs.M; ++i)
        for (int k = 0; k < K; ++k)
            if (m.player_of[k] == -1) cs.items.push_back({i, k, -1, ConstraintKind::Unmatched});
    std::sort(cs.items.begin(), cs.items.end(),
              [](const Constraint& a, const Constraint& b) { return a.i != b.i ? a.i < b.i : a.k < b.k; });
    return cs;
}

ConstraintEval evaluate_constraint(const Constraint& c, const Matching& m, RewardModel f, const Mat& w, Means means) {
    RewardModel model{f};
    ConstraintEval e;
    double wc = w(c.i, c.k);
    if (c.player_term()) {
        int lead = m.arm_of[c.i];
        auto t = term(model, w(c.i, lead), wc, (*means.mu)(c.i, lead), (*means.mu)(c.i, c.k));
        e.value += t.value;
        e.leader_d = t.top_d;
        e.challenger_d += t.bot_d;
    }
    if (c.arm_term()) {
        int j = c.incumbent;
        auto t = term(model, w(j, c.k), wc, (*means.eta)(j, c.k), (*means.eta)(c.i, c.k));
        e.value += t.value;
        e.incumbent_d = t.top_d;
        e.challenger_d += t.bot_d;
    }
    return e;
}

Evaluation evaluate(const ConstraintSet& cs, RewardModel f, const Mat& w, Means means, bool zero_is_inf) {
    Evaluation ev;
    ev.items.resize(cs.items.size());
    ev.anchor.assign(cs.M, -1.0);
    for (std::size_t n = 0; n < cs.items.size(); ++n) {
        const auto& c = cs.items[n];
        auto& e = ev.items[n];
        e = evaluate_constraint(c, cs.matching, f, w, means);
        if (zero_is_inf) {
            bool empty = w(c.i, c.k) <= 0;
            if (c.player_term() && w(c.i, cs.matching.arm_of[c.i]) <= 0) empty = true;
            if (c.arm_term() && w(c.incumbent, c.k) <= 0) empty = true;
            if (empty) e.value = kInf;
        }
        double inv = e.challenger_d > 0 ? 1.0 / e.challenger_d : kInf;
        if (c.player_term()) ev.anchor[c.i] += e.leader_d > 0 ? e.leader_d * inv : 0.0;
        if (c.arm_term()) ev.anchor[c.incumbent] += e.incumbent_d > 0 ? e.incumbent_d * inv : 0.0;
        if (e.value < ev.min_value) {
            ev.min_value = e.value;
            ev.argmin = static_cast<int>(n);
        }
    }
    return ev;
}

double anchor_two_sided(const MarketInstance& inst, const Matching& m, const B123Partition& part, const Mat& w,
                        int player) {
    if (!inst.two_sided()) throw std::invalid_argument("anchor_two_sided needs eta");
    auto cs = two_sided_constraints(m, part, inst.K);
    for (const auto& c : cs.items) {
        bool involved = (c.player_term() && c.i == player) || (c.arm_term() && c.incumbent == player);
        if (!involved) continue;
        if (w(c.i, c.k) <= 0) throw std::invalid_argument("zero-count involved pair");
        if (c.player_term() && w(c.i, m.arm_of[c.i]) <= 0) throw std::invalid_argument("zero-count involved pair");
        if (c.arm_term() && w(c.incumbent, c.k) <= 0) throw std::invalid_argument("zero-count involved pair");
    }
    return evaluate(cs, inst.model(), w, {&inst.mu, &*inst.eta}, false).anchor[player];
}

MinIndex min_index(const ConstraintSet& cs, const Evaluation& ev) {
    MinIndex r;
    r.empty = cs.items.empty();
    if (ev.argmin >= 0) {
        const auto& c = cs.items[ev.argmin];
        r.value = ev.min_value;
        r.i = c.i;
        r.k = c.k;
        r.kind = c.kind;
    } else if (!cs.items.empty()) {
        // Every constraint is still +inf: report the first pair.
        r.i = cs.items[0].i;
        r.k = cs.items[0].k;
        r.kind = cs.items[0].kind;
    }
    return r;
}

MinIndex min_index_one_sided(const AllocationState& s, const Matching& m, const BlockingSets& b, RewardModel f,
                             const Mat& mu) {
    auto cs = one_sided_constraints(m, b, s.K);
    auto ev = evaluate(cs, f, s.counts(), {&mu, nullptr});
    return min_index(cs, ev);
}

MinIndex ts_min_index(const AllocationState& s, const Matching& m, const B123Partition& part, RewardModel f, const Mat& mu,
                      const Mat& eta) {
    auto cs = two_sided_constraints(m, part, s.K);
    auto ev = evaluate(cs, f, s.counts(), {&mu, &eta});
    return min_index(cs, ev);
}

Mat anchor_jacobian(const ConstraintSet& cs, RewardModel f, const Mat& w, Means means) {
    RewardModel model{f};
    const int K = cs.K;
    Mat jac(cs.M, cs.M * K, 0.0);
    const auto& m = cs.matching;
    for (const auto& c : cs.items) {
        // Mixture sensitivities; unused entries stay zero.
        double x = 0, dx_lead = 0, dx_chal = 0, y = 0, dy_inc = 0, dy_chal = 0;
        double a = 0, b = 0, ej = 0, ei = 0;
        int lead = m.arm_of[c.i];
        double tp = w(c.i, c.k);
        if (c.player_term()) {
            a = (*means.mu)(c.i, lead);
            b = (*means.mu)(c.i, c.k);
            double tl = w(c.i, lead), s = tl + tp;
            x = (tl * a + tp * b) / s;
            dx_lead = tp * (a - b) / (s * s);
            dx_chal = -tl * (a - b) / (s * s);
        }
        if (c.arm_term()) {
            ej = (*means.eta)(c.incumbent, c.k);
            ei = (*means.eta)(c.i, c.k);
            double uj = w(c.incumbent, c.k), s = uj + tp;
            y = (uj * ej + tp * ei) / s;
            dy_inc = tp * (ej - ei) / (s * s);
            dy_chal = -uj * (ej - ei) / (s * s);
        }
        double Q = 0, dQ_dx = 0, dQ_dy = 0;
        if (c.player_term()) {
            Q += model.kl(b, x);
            dQ_dx = model.dkl_dx(b, x);
        }
        if (c.arm_term()) {
            Q += model.kl(ei, y);
            dQ_dy = model.dkl_dx(ei, y);
        }
        // d/dv of P/Q with P depending on one mixture.
        auto add = [&](int row, double P, double dP_dz, bool via_x) {
            struct V {
                int col;
                double dx, dy;
            };
            V vars[3] = {{c.i * K + lead, dx_lead, 0.0},
                         {c.i * K + c.k, dx_chal, dy_chal},
                         {c.incumbent >= 0 ? c.incumbent * K + c.k : -1, 0.0, dy_inc}};
            for (const auto& v : vars) {
                if (v.col < 0) continue;
                double dP = dP_dz * (via_x ? v.dx : v.dy);
                double dQ = dQ_dx * v.dx + dQ_dy * v.dy;
                jac(row, v.col) += (dP * Q - P * dQ) / (Q * Q);
            }
        };
        if (c.player_term()) add(c.i, model.kl(a, x), model.dkl_dx(a, x), true);
        if (c.arm_term()) add(c.incumbent, model.kl(ej, y), model.dkl_dx(ej, y), false);
    }
    return jac;
}

}  // namespace matchid
