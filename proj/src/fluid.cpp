#include "matchid/fluid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace matchid {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Pair {
    int i, k;
};

// Leader pair, challenger pair and the two means of one constraint.
struct Term {
    int l;
    Pair lead, chal;
    double top, bot;
};

Term term_of(const FluidModel& fm, const Constraint& c) {
    const auto& m = fm.cs.matching;
    if (c.kind == ConstraintKind::B2)
        return {c.incumbent, {c.incumbent, c.k}, {c.i, c.k}, (*fm.eta)(c.incumbent, c.k), (*fm.eta)(c.i, c.k)};
    int lead = m.arm_of[c.i];
    return {c.i, {c.i, lead}, {c.i, c.k}, fm.mu(c.i, lead), fm.mu(c.i, c.k)};
}

struct TermVal {
    double I, Dt, Db, z, tL, tP;
};

TermVal eval_term(const RewardModel& model, const Term& tm, const Mat& alloc) {
    TermVal v;
    v.tL = alloc(tm.lead.i, tm.lead.k);
    v.tP = alloc(tm.chal.i, tm.chal.k);
    v.z = (v.tL * tm.top + v.tP * tm.bot) / (v.tL + v.tP);
    v.Dt = model.kl(tm.top, v.z);
    v.Db = model.kl(tm.bot, v.z);
    v.I = v.tL * v.Dt + v.tP * v.Db;
    return v;
}

// h = f t_L^2 Delta / (t_L + t_P)^2 with f = -d/dz [D(top, z) / D(bot, z)].
double h_term(const RewardModel& model, const Term& tm, const TermVal& v) {
    double dnum = model.dkl_dx(tm.top, v.z), dden = model.dkl_dx(tm.bot, v.z);
    double f = -(dnum * v.Db - v.Dt * dden) / (v.Db * v.Db);
    double s = v.tL + v.tP;
    return f * v.tL * v.tL * (tm.top - tm.bot) / (s * s);
}

struct Frame {
    std::vector<Term> terms;
    std::vector<std::vector<int>> by_leader;  // constraint ids per leader player
};

Frame frame_of(const FluidModel& fm) {
    Frame fr;
    fr.by_leader.resize(fm.cs.M);
    for (std::size_t n = 0; n < fm.cs.items.size(); ++n) {
        fr.terms.push_back(term_of(fm, fm.cs.items[n]));
        fr.by_leader[fr.terms.back().l].push_back(static_cast<int>(n));
    }
    return fr;
}

std::vector<TermVal> eval_all(const FluidModel& fm, const Frame& fr, const Mat& alloc) {
    std::vector<TermVal> out;
    out.reserve(fr.terms.size());
    for (const auto& tm : fr.terms) out.push_back(eval_term(fm.model, tm, alloc));
    return out;
}

void check_positive(const Frame& fr, const Mat& alloc) {
    for (const auto& tm : fr.terms)
        if (!(alloc(tm.lead.i, tm.lead.k) > 0) || !(alloc(tm.chal.i, tm.chal.k) > 0))
            throw std::invalid_argument("fluid state needs positive allocations on every constrained pair");
}

}  // namespace

char to_char(FluidClass c) {
    switch (c) {
        case FluidClass::Plus: return '+';
        case FluidClass::Minus: return '-';
        case FluidClass::Zero: return '0';
        default: return '.';
    }
}

std::string to_string(FluidEventKind k) {
    switch (k) {
        case FluidEventKind::IndexCatchUp: return "index-catch-up";
        case FluidEventKind::AnchorZero: return "anchor-zero-crossing";
        case FluidEventKind::AnchorSeparation: return "anchor-separation";
        default: return "steady";
    }
}

int FluidModel::leader_of(const Constraint& c) const {
    return c.kind == ConstraintKind::B2 ? c.incumbent : c.i;
}

FluidModel FluidModel::one_sided(const MarketInstance& inst, ChallengerRule rule) {
    if (inst.two_sided()) throw std::invalid_argument("one-sided fluid needs a one-sided instance");
    FluidModel fm;
    fm.cs = true_constraints(inst, rule);
    fm.model = inst.model();
    fm.mu = inst.mu;
    for (const auto& c : fm.cs.items)
        if (!(fm.mu(c.i, fm.cs.matching.arm_of[c.i]) > fm.mu(c.i, c.k)))
            throw std::invalid_argument("fluid needs every challenger below its leader");
    return fm;
}

FluidModel FluidModel::two_sided_serial(const MarketInstance& inst) {
    if (!inst.two_sided()) throw std::invalid_argument("two-sided fluid needs eta");
    FluidModel fm;
    fm.cs = true_constraints(inst);
    for (const auto& c : fm.cs.items)
        if (c.kind == ConstraintKind::B3)
            throw std::invalid_argument("unsupported configuration: B3 is nonempty");
    fm.model = inst.model();
    fm.mu = inst.mu;
    fm.eta = inst.eta;
    return fm;
}

FluidPartition classify(const FluidModel& fm, const Mat& alloc, const FluidOptions& opt, const FluidPartition* prev) {
    Frame fr = frame_of(fm);
    check_positive(fr, alloc);
    auto vals = eval_all(fm, fr, alloc);
    const int M = fm.cs.M;
    FluidPartition p;
    p.index.resize(vals.size());
    for (std::size_t n = 0; n < vals.size(); ++n) {
        p.index[n] = vals[n].I;
        p.C_min = std::min(p.C_min, vals[n].I);
    }
    p.anchor.assign(M, kNaN);
    p.cls.assign(M, FluidClass::Idle);
    p.A_min.assign(M, {});
    p.k_t.assign(M, -1);
    const double join = p.C_min * (1 + opt.eps_part);
    const double stay = p.C_min * (1 + opt.hysteresis * opt.eps_part);
    for (int l = 0; l < M; ++l) {
        if (fr.by_leader[l].empty()) continue;
        double g = -1.0;
        for (int n : fr.by_leader[l]) {
            g += vals[n].Dt / vals[n].Db;
            bool was = prev && std::find(prev->A_min[l].begin(), prev->A_min[l].end(), n) != prev->A_min[l].end();
            if (vals[n].I <= join || (was && vals[n].I <= stay)) p.A_min[l].push_back(n);
        }
        p.anchor[l] = g;
        if (p.A_min[l].empty()) continue;
        bool was_zero = prev && prev->cls[l] == FluidClass::Zero;
        if (std::abs(g) <= opt.eps_part || (was_zero && std::abs(g) <= opt.hysteresis * opt.eps_part))
            p.cls[l] = FluidClass::Zero;
        else
            p.cls[l] = g > 0 ? FluidClass::Plus : FluidClass::Minus;
        if (p.cls[l] == FluidClass::Plus) {
            // The slowest-growing minimum pair keeps the player's minimum.
            int best = p.A_min[l][0];
            for (int n : p.A_min[l])
                if (vals[n].Dt < vals[best].Dt) best = n;
            p.k_t[l] = best;
        }
    }
    return p;
}

FluidRates fluid_rhs(const FluidModel& fm, const Mat& alloc, const FluidPartition& part) {
    Frame fr = frame_of(fm);
    auto vals = eval_all(fm, fr, alloc);
    const int M = fm.cs.M;
    FluidRates r;
    r.alloc_dot = Mat(alloc.rows, alloc.cols, 0.0);
    r.budget_per_C.assign(M, 0.0);
    double total = 0.0;
    for (int l = 0; l < M; ++l) {
        const auto& A = part.A_min[l];
        if (part.cls[l] == FluidClass::Idle) continue;
        double S = 0.0;
        if (part.cls[l] == FluidClass::Plus) {
            const auto& tm = fr.terms[part.k_t[l]];
            double v = 1.0 / vals[part.k_t[l]].Dt;
            r.alloc_dot(tm.lead.i, tm.lead.k) += v;
            S = v;
        } else if (part.cls[l] == FluidClass::Minus) {
            for (int n : A) {
                double v = 1.0 / vals[n].Db;
                r.alloc_dot(fr.terms[n].chal.i, fr.terms[n].chal.k) += v;
                S += v;
            }
        } else {
            // Keep the anchor flat while every minimum pair rises with C_min.
            double h_min = 0.0, h_IC = 0.0, h_w = 0.0;
            for (int n : fr.by_leader[l]) {
                double h = h_term(fm.model, fr.terms[n], vals[n]);
                if (std::find(A.begin(), A.end(), n) != A.end()) {
                    h_min += h / vals[n].Db;
                    h_IC += h * vals[n].I / vals[n].Db;
                } else {
                    h_w += h * vals[n].tP;
                }
            }
            const auto& lead = fr.terms[fr.by_leader[l][0]].lead;
            double tm_dot = alloc(lead.i, lead.k) * h_min / (h_IC + h_w);
            r.alloc_dot(lead.i, lead.k) += tm_dot;
            S = tm_dot;
            for (int n : A) {
                double v = (1.0 - vals[n].Dt * tm_dot) / vals[n].Db;
                r.alloc_dot(fr.terms[n].chal.i, fr.terms[n].chal.k) += v;
                S += v;
            }
        }
        r.budget_per_C[l] = S;
        total += S;
    }
    if (!(total > 0)) throw std::domain_error("no player at the minimum index");
    r.C_dot = 1.0 / total;
    for (double& v : r.alloc_dot.data) v *= r.C_dot;
    return r;
}

FluidRates one_sided_rhs(const FluidModel& fm, const Mat& alloc, const FluidPartition& part) {
    if (fm.cs.two_sided) throw std::invalid_argument("one_sided_rhs needs a one-sided model");
    return fluid_rhs(fm, alloc, part);
}

FluidRates two_sided_serial_rhs(const FluidModel& fm, const Mat& alloc, const FluidPartition& part) {
    if (!fm.cs.two_sided) throw std::invalid_argument("two_sided_serial_rhs needs a two-sided model");
    for (const auto& c : fm.cs.items)
        if (c.kind == ConstraintKind::B3) throw std::invalid_argument("unsupported configuration: B3 is nonempty");
    return fluid_rhs(fm, alloc, part);
}

namespace {

Mat rk4(const FluidModel& fm, const Mat& x, const FluidPartition& part, double dt) {
    auto axpy = [](const Mat& a, const Mat& b, double s) {
        Mat out = a;
        for (std::size_t n = 0; n < out.data.size(); ++n) out.data[n] += s * b.data[n];
        return out;
    };
    Mat k1 = fluid_rhs(fm, x, part).alloc_dot;
    Mat k2 = fluid_rhs(fm, axpy(x, k1, dt / 2), part).alloc_dot;
    Mat k3 = fluid_rhs(fm, axpy(x, k2, dt / 2), part).alloc_dot;
    Mat k4 = fluid_rhs(fm, axpy(x, k3, dt), part).alloc_dot;
    Mat out = x;
    for (std::size_t n = 0; n < out.data.size(); ++n)
        out.data[n] += dt / 6 * (k1.data[n] + 2 * k2.data[n] + 2 * k3.data[n] + k4.data[n]);
    return out;
}

// Events the frozen partition cannot see: a pair reaching the minimum or a
// P+/P- anchor reaching zero. Returns the triggered (kind, player, constraint).
struct Trigger {
    FluidEventKind kind;
    int player;
    int constraint;
};

std::vector<Trigger> triggered(const FluidModel& fm, const Frame& fr, const Mat& x, const FluidPartition& part,
                               double eps) {
    auto vals = eval_all(fm, fr, x);
    double cm = kInf;
    std::vector<char> in_min(vals.size(), 0);
    for (int l = 0; l < fm.cs.M; ++l)
        for (int n : part.A_min[l]) {
            in_min[n] = 1;
            cm = std::min(cm, vals[n].I);
        }
    std::vector<Trigger> out;
    for (std::size_t n = 0; n < vals.size(); ++n)
        if (!in_min[n] && vals[n].I - cm * (1 + eps / 2) <= 0)
            out.push_back({FluidEventKind::IndexCatchUp, fr.terms[n].chal.i, static_cast<int>(n)});
    for (int l = 0; l < fm.cs.M; ++l) {
        if (part.cls[l] != FluidClass::Plus && part.cls[l] != FluidClass::Minus) continue;
        double g = -1.0;
        for (int n : fr.by_leader[l]) g += vals[n].Dt / vals[n].Db;
        double phi = part.cls[l] == FluidClass::Plus ? g - eps / 2 : -g - eps / 2;
        if (phi <= 0) out.push_back({FluidEventKind::AnchorZero, l, -1});
    }
    return out;
}

bool all_steady(const FluidPartition& p) {
    std::size_t merged = 0;
    for (std::size_t l = 0; l < p.cls.size(); ++l) {
        if (std::isnan(p.anchor[l])) continue;
        if (p.cls[l] != FluidClass::Zero) return false;
        merged += p.A_min[l].size();
    }
    return merged == p.index.size();
}

FluidRow make_row(double t, const Mat& x, const FluidPartition& p) {
    FluidRow row;
    row.t = t;
    row.alloc = x;
    row.anchor = p.anchor;
    row.C_min = p.C_min;
    for (auto c : p.cls) row.labels.push_back(to_char(c));
    return row;
}

}  // namespace

FluidTrajectory integrate(const FluidModel& fm, const Mat& alloc0, double horizon, const FluidOptions& opt) {
    Frame fr = frame_of(fm);
    if (fr.terms.empty()) throw std::invalid_argument("nothing to integrate: no constraints");
    check_positive(fr, alloc0);
    FluidTrajectory tr;
    Mat x = alloc0;
    double t = 0.0;
    for (double v : x.data) t += v;
    if (!(horizon >= t)) throw std::invalid_argument("horizon below the initial budget");

    FluidPartition part = classify(fm, x, opt);
    tr.rows.push_back(make_row(t, x, part));
    if (all_steady(part)) {
        tr.t_star = t;
        tr.events.push_back({FluidEventKind::Steady, t, -1, -1});
        tr.rows.back().event = to_string(FluidEventKind::Steady);
    }
    long long steps = 0;
    while (t < horizon * (1 - 1e-15)) {
        if (++steps > opt.max_steps) {
            tr.ok = false;
            tr.error = "step limit reached";
            break;
        }
        double dt = std::min(opt.rel_step * t, horizon - t);
        Mat next = rk4(fm, x, part, dt);
        auto trig = triggered(fm, fr, next, part, opt.eps_part);
        bool event = !trig.empty();
        if (event) {
            double lo = 0.0, hi = dt;
            while (hi - lo > opt.event_tol * t) {
                double mid = 0.5 * (lo + hi);
                if (triggered(fm, fr, rk4(fm, x, part, mid), part, opt.eps_part).empty())
                    lo = mid;
                else
                    hi = mid;
            }
            if (!(hi > 0)) {
                tr.ok = false;
                tr.error = "step size underflow near an event";
                break;
            }
            dt = hi;
            next = rk4(fm, x, part, dt);
            trig = triggered(fm, fr, next, part, opt.eps_part);
        }
        x = std::move(next);
        t += dt;
        FluidPartition np = classify(fm, x, opt, &part);
        std::string marks;
        auto note = [&](FluidEventKind k, int player, int arm) {
            tr.events.push_back({k, t, player, arm});
            if (!marks.empty()) marks += ";";
            marks += to_string(k);
        };
        for (const auto& e : trig)
            note(e.kind, e.player, e.constraint >= 0 ? fr.terms[e.constraint].chal.k : -1);
        for (int l = 0; l < fm.cs.M; ++l) {
            bool left_zero = part.cls[l] == FluidClass::Zero && np.cls[l] != FluidClass::Zero;
            bool dropped = np.A_min[l].size() < part.A_min[l].size() && np.cls[l] != FluidClass::Idle;
            if (left_zero || dropped) note(FluidEventKind::AnchorSeparation, l, -1);
        }
        part = std::move(np);
        if (!tr.t_star && all_steady(part)) {
            tr.t_star = t;
            note(FluidEventKind::Steady, -1, -1);
        }
        if (!marks.empty() || steps % opt.record_every == 0 || t >= horizon * (1 - 1e-15)) {
            tr.rows.push_back(make_row(t, x, part));
            tr.rows.back().event = marks;
        }
    }
    tr.final_alloc = x;
    return tr;
}

FluidTrajectory integrate_one_sided(const MarketInstance& inst, const Mat& alloc0, double horizon, ChallengerRule rule,
                                    const FluidOptions& opt) {
    return integrate(FluidModel::one_sided(inst, rule), alloc0, horizon, opt);
}

double LocalGlobalReport::discrepancy() const {
    return std::max(std::abs(global_rate - harmonic_local), max_share_error);
}

LocalGlobalReport local_global_check(const FluidModel& fm, const Mat& alloc, const FluidOptions& opt) {
    Frame fr = frame_of(fm);
    auto part = classify(fm, alloc, opt);
    auto rates = fluid_rhs(fm, alloc, part);
    LocalGlobalReport rep;
    rep.global_rate = rates.C_dot;
    rep.local_rate.assign(fm.cs.M, kNaN);
    double t = 0.0;
    for (double v : alloc.data) t += v;
    double inv_sum = 0.0;
    for (int l = 0; l < fm.cs.M; ++l) {
        if (part.cls[l] == FluidClass::Idle) continue;
        // The group's own direction, normalized to unit budget.
        Mat dir(alloc.rows, alloc.cols, 0.0);
        double budget = 0.0;
        for (int n : fr.by_leader[l]) {
            const auto& tm = fr.terms[n];
            dir(tm.lead.i, tm.lead.k) = rates.alloc_dot(tm.lead.i, tm.lead.k);
            dir(tm.chal.i, tm.chal.k) = rates.alloc_dot(tm.chal.i, tm.chal.k);
        }
        for (double v : dir.data) budget += v;
        for (double& v : dir.data) v /= budget;
        int rep_n = part.cls[l] == FluidClass::Plus ? part.k_t[l] : part.A_min[l][0];
        auto index_at = [&](double s) {
            Mat y = alloc;
            for (std::size_t q = 0; q < y.data.size(); ++q) y.data[q] += s * dir.data[q];
            return eval_term(fm.model, fr.terms[rep_n], y).I;
        };
        auto central = [&](double e) { return (index_at(e) - index_at(-e)) / (2 * e); };
        double e = 1e-3 * t;
        double rate = (4 * central(e / 2) - central(e)) / 3;
        rep.local_rate[l] = rate;
        inv_sum += 1.0 / rate;
        rep.max_share_error = std::max(rep.max_share_error, std::abs(budget - rates.C_dot / rate));
    }
    rep.harmonic_local = 1.0 / inv_sum;
    return rep;
}

TwoByTwoStep two_sided_2x2_step(const MarketInstance& inst, const Mat& alloc, double eps) {
    if (!inst.two_sided() || inst.M != 2 || inst.K != 2)
        throw std::invalid_argument("2x2 case machine needs a 2x2 two-sided instance");
    const Mat& mu = inst.mu;
    const Mat& eta = *inst.eta;
    if (!(mu(0, 0) > mu(0, 1) && mu(1, 1) > mu(1, 0) && eta(0, 0) > eta(1, 0) && eta(1, 1) > eta(0, 1)))
        throw std::invalid_argument("instance is outside the distinct-preference 2x2 family");
    for (double v : alloc.data)
        if (!(v > 0)) throw std::invalid_argument("2x2 case machine needs positive allocations");
    RewardModel model = inst.model();
    Matching m = Matching::from_assignment({0, 1}, 2);
    ConstraintSet cs = two_sided_constraints(m, partition_B123(inst, m), 2);
    Means means{&mu, &eta};
    auto ev = evaluate(cs, model, alloc, means, false);
    Mat J = anchor_jacobian(cs, model, alloc, means);

    TwoByTwoStep s;
    for (int l = 0; l < 2; ++l) {
        s.g[l] = ev.anchor[l];
        s.a[l] = J(l, 1);
        s.b[l] = J(l, 2);
        s.c[l] = -J(l, 0);
        s.d[l] = -J(l, 3);
    }
    for (std::size_t n = 0; n < cs.items.size(); ++n) {
        if (cs.items[n].i == 0 && cs.items[n].k == 1) s.I12 = ev.items[n].value;
        if (cs.items[n].i == 1 && cs.items[n].k == 0) s.I21 = ev.items[n].value;
    }
    auto mix = [](double wa, double a, double wb, double b) { return (wa * a + wb * b) / (wa + wb); };
    double x12 = mix(alloc(0, 0), mu(0, 0), alloc(0, 1), mu(0, 1));
    double x21 = mix(alloc(1, 1), mu(1, 1), alloc(1, 0), mu(1, 0));
    double y1 = mix(alloc(0, 0), eta(0, 0), alloc(1, 0), eta(1, 0));
    double y2 = mix(alloc(1, 1), eta(1, 1), alloc(0, 1), eta(0, 1));
    s.dd11 = model.kl(mu(0, 0), x12);
    s.dd12 = model.kl(mu(0, 1), x12);
    s.dd21 = model.kl(mu(1, 0), x21);
    s.dd22 = model.kl(mu(1, 1), x21);
    s.bb11 = model.kl(eta(0, 0), y1);
    s.bb21 = model.kl(eta(1, 0), y1);
    s.bb22 = model.kl(eta(1, 1), y2);
    s.bb12 = model.kl(eta(0, 1), y2);

    s.rates = Mat(2, 2, 0.0);
    auto& R = s.rates;
    const auto &a = s.a, &b = s.b, &c = s.c, &d = s.d;
    const double g1 = s.g[0], g2 = s.g[1];
    const double h = std::max(g1, g2);
    const bool h_zero = std::abs(h) <= eps;
    const bool g_tie = std::abs(g1 - g2) <= eps;
    const bool I_tie = std::abs(s.I12 - s.I21) <= eps * std::max(s.I12, s.I21);
    // The minimum challenger; its anchor partials are a (t12) or b (t21).
    const bool chal12 = s.I12 <= s.I21;
    const auto& e = chal12 ? a : b;
    double& tc = chal12 ? R(0, 1) : R(1, 0);
    const std::string side = chal12 ? "" : ":mirror";

    auto leader_by_anchor = [&](const std::string& prefix) {
        if (!g_tie) {
            (g1 > g2 ? R(0, 0) : R(1, 1)) = 1.0;
            s.label = prefix + (g1 > g2 ? ":g1" : ":g2");
            return;
        }
        double kappa = c[1] - c[0] + d[0] - d[1];
        double r11 = kappa != 0 ? (d[0] - d[1]) / kappa : -1;
        double r22 = kappa != 0 ? (c[1] - c[0]) / kappa : -1;
        if (r11 >= 0 && r22 >= 0) {
            R(0, 0) = r11;
            R(1, 1) = r22;
            s.label = prefix + ":maintain";
        } else if (c[0] <= c[1]) {
            R(0, 0) = 1.0;
            s.label = prefix + ":dominate-g1";
        } else {
            R(1, 1) = 1.0;
            s.label = prefix + ":dominate-g2";
        }
    };
    auto hold_g1 = [&](const std::string& label) {
        tc = c[0] / (e[0] + c[0]);
        R(0, 0) = e[0] / (e[0] + c[0]);
        s.label = label;
    };
    auto hold_g2 = [&](const std::string& label) {
        tc = d[1] / (e[1] + d[1]);
        R(1, 1) = e[1] / (e[1] + d[1]);
        s.label = label;
    };

    if (!h_zero && !I_tie) {
        s.case_id = 1;
        if (h < 0) {
            tc = 1.0;
            s.label = "case1:h<0" + side;
        } else {
            leader_by_anchor("case1:h>0");
        }
    } else if (!h_zero) {
        s.case_id = 2;
        if (h < 0) {
            double u = s.bb21 + s.dd21, v = s.bb12 + s.dd12;
            R(0, 1) = u / (u + v);
            R(1, 0) = v / (u + v);
            s.label = "case2:h<0";
        } else {
            leader_by_anchor("case2:h>0:separation");
        }
    } else if (!I_tie) {
        s.case_id = 3;
        if (!g_tie) {
            if (g1 > g2)
                hold_g1("case3:g1" + side);
            else
                hold_g2("case3:g2" + side);
        } else {
            // Keep g1 = g2 = 0 with (t11, t22, challenger); else a bracket decides.
            double n11 = e[0] * d[1] - d[0] * e[1];
            double n22 = e[1] * c[0] - e[0] * c[1];
            double n12 = c[0] * d[1] - d[0] * c[1];
            double den = n11 + n22 + n12;
            bool valid = den != 0 && n11 / den >= 0 && n22 / den >= 0 && n12 / den >= 0;
            if (valid) {
                R(0, 0) = n11 / den;
                R(1, 1) = n22 / den;
                tc = n12 / den;
                s.label = "case3:maintain" + side;
            } else if (n22 <= 0) {
                hold_g1("case3:dominate-g1" + side);
            } else {
                hold_g2("case3:dominate-g2" + side);
            }
        }
    } else {
        s.case_id = 4;
        auto sol = solve_two_sided(inst);
        R = sol.w;
        s.label = "case4";
    }

    for (int l = 0; l < 2; ++l) s.g_dot[l] = a[l] * R(0, 1) + b[l] * R(1, 0) - c[l] * R(0, 0) - d[l] * R(1, 1);
    s.I12_dot = s.dd11 * R(0, 0) + (s.dd12 + s.bb12) * R(0, 1) + s.bb22 * R(1, 1);
    s.I21_dot = s.bb11 * R(0, 0) + (s.dd21 + s.bb21) * R(1, 0) + s.dd22 * R(1, 1);
    return s;
}

}  // namespace matchid
