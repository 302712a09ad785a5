#include "matchid/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <stdexcept>
#include <thread>

#include "matchid/oracle.hpp"

namespace matchid {

void ExperimentSpec::validate() const {
    if (replications < 1) throw std::invalid_argument("replications must be at least 1");
    if (algorithms.empty()) throw std::invalid_argument("no algorithm selected");
    if (deltas.empty()) throw std::invalid_argument("no delta selected");
    for (double d : deltas)
        if (!(d > 0 && d < 1)) throw std::invalid_argument("deltas must lie in (0,1)");
    instance.validate();
    config.validate();
}

int default_parallelism() {
    unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : static_cast<int>(n);
}

void parallel_for(int n, int parallelism, const std::function<void(int)>& body) {
    if (parallelism <= 0) parallelism = default_parallelism();
    parallelism = std::min(parallelism, std::max(n, 1));
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::atomic<bool> failed{false};
    auto worker = [&] {
        for (int idx = next++; idx < n; idx = next++) {
            try {
                body(idx);
            } catch (...) {
                if (!failed.exchange(true)) first_error = std::current_exception();
            }
        }
    };
    if (parallelism == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int p = 0; p < parallelism; ++p) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (first_error) std::rethrow_exception(first_error);
}

AggregateRow aggregate(std::string algorithm, double delta, std::vector<RepOutcome> reps) {
    AggregateRow row;
    row.algorithm = std::move(algorithm);
    row.delta = delta;
    row.replications = static_cast<int>(reps.size());
    double sum = 0, sq = 0;
    int n = 0, wrong = 0;
    for (const auto& r : reps) {
        if (r.failed) {
            ++row.failures;
            continue;
        }
        if (r.hit_cap) {
            ++row.hit_cap;
            continue;
        }
        ++n;
        sum += static_cast<double>(r.tau);
        if (!r.correct) ++wrong;
    }
    if (n > 0) {
        row.mean_tau = sum / n;
        for (const auto& r : reps)
            if (!r.failed && !r.hit_cap) sq += (r.tau - row.mean_tau) * (r.tau - row.mean_tau);
        row.sd_tau = n > 1 ? std::sqrt(sq / (n - 1)) : 0.0;
        row.se_tau = row.sd_tau / std::sqrt(static_cast<double>(n));
        row.error_rate = static_cast<double>(wrong) / n;
    }
    row.reps = std::move(reps);
    return row;
}

namespace {

MarketInstance instance_for(Algo a, const MarketInstance& inst) {
    bool two = a == Algo::Att2 || a == Algo::AlphaBetaDelta;
    if (two && !inst.two_sided()) throw std::invalid_argument(to_string(a) + " needs a two-sided instance");
    return (!two && inst.two_sided()) ? to_one_sided(inst) : inst;
}

}  // namespace

std::vector<AggregateRow> run_experiment(const ExperimentSpec& spec, int parallelism) {
    spec.validate();
    std::vector<AggregateRow> out;
    for (Algo a : spec.algorithms) {
        MarketInstance inst = instance_for(a, spec.instance);
        for (double delta : spec.deltas) {
            std::vector<RepOutcome> reps(spec.replications);
            parallel_for(spec.replications, parallelism, [&](int r) {
                RunConfig cfg = spec.config;
                cfg.delta = delta;
                cfg.seed = derive_seed(spec.master_seed, spec.name, static_cast<std::uint64_t>(r));
                try {
                    auto res = run_algorithm(a, inst, cfg);
                    reps[r] = {res.tau, res.correct, res.hit_cap, false, {}};
                } catch (const std::exception& e) {
                    reps[r].failed = true;
                    reps[r].error = e.what();
                }
            });
            out.push_back(aggregate(to_string(a), delta, std::move(reps)));
        }
    }
    return out;
}

std::vector<Fig1Point> sweep_fig1(double step, double lo, double hi, int parallelism) {
    if (!(step > 0) || !(hi > lo)) throw std::invalid_argument("bad sweep grid");
    int n = static_cast<int>(std::floor((hi - lo) / step + 1e-9));
    if (n < 1) throw std::invalid_argument("sweep grid is empty");
    std::vector<Fig1Point> pts(static_cast<std::size_t>(n) * n);
    parallel_for(n * n, parallelism, [&](int idx) {
        auto& p = pts[idx];
        p.mu11 = lo + step * (idx / n + 1);
        p.eta11 = lo + step * (idx % n + 1);
        try {
            auto sol = solve_two_sided(example1(p.mu11, p.eta11));
            p.w11 = sol.w(0, 0);
            p.w12 = sol.w(0, 1);
            p.w21 = sol.w(1, 0);
            p.w22 = sol.w(1, 1);
            p.T_star = sol.T_star;
        } catch (const std::exception& e) {
            p.ok = false;
            p.error = e.what();
        }
    });
    return pts;
}

std::vector<double> table1_levels() { return {2, 2.5, 3.5, 5, 7}; }

std::vector<ProfileKind> table1_profiles() { return {ProfileKind::Distinct, ProfileKind::Serial, ProfileKind::Spc}; }

double table1_published_value(ProfileKind kind, Algo algo) {
    static const double v[3][4] = {
        // att1, att2, btt, abd
        {1008.31, 337.20, 1029.36, 345.59},
        {1459.37, 1213.9, 1518.94, 1298.89},
        {1917.97, 1433.01, 2015.82, 1472.29},
    };
    return v[static_cast<int>(kind)][static_cast<int>(algo)];
}

Table1Setup table1_setup_from_string(const std::string& s) {
    if (s == "literal") return Table1Setup::Literal;
    if (s == "reference") return Table1Setup::Reference;
    throw std::invalid_argument("unknown table1 setup: " + s);
}

std::string to_string(Table1Setup s) { return s == Table1Setup::Literal ? "literal" : "reference"; }

RunConfig table1_config(Table1Setup setup) {
    RunConfig cfg;
    cfg.gamma = 0.25;
    cfg.delta = 0.001;
    if (setup == Table1Setup::Reference) {
        cfg.challengers = ChallengerRule::AllOthers;
        cfg.model_variance = 0.5;
    }
    return cfg;
}

std::vector<Table1Row> table1(int replications, std::uint64_t master_seed, Table1Setup setup, int parallelism) {
    std::vector<Table1Row> rows;
    RunConfig cfg = table1_config(setup);
    for (ProfileKind kind : table1_profiles()) {
        MarketInstance two = generate_instance(kind, 5, 5, table1_levels(), 0);
        MarketInstance learner = two;
        learner.variance = cfg.model_variance.value_or(two.variance);
        ExperimentSpec spec;
        spec.name = "table1/" + to_string(kind);
        spec.instance = two;
        spec.algorithms = {Algo::Att1, Algo::BetaTopTwo, Algo::Att2, Algo::AlphaBetaDelta};
        spec.deltas = {cfg.delta};
        spec.replications = replications;
        spec.master_seed = master_seed;
        spec.config = cfg;
        auto aggs = run_experiment(spec, parallelism);
        for (std::size_t n = 0; n < aggs.size(); ++n) {
            Table1Row row;
            row.profile = kind;
            row.algorithm = spec.algorithms[n];
            row.published = table1_published_value(kind, row.algorithm);
            bool two_sided = row.algorithm == Algo::Att2 || row.algorithm == Algo::AlphaBetaDelta;
            try {
                row.T_star = two_sided ? solve_two_sided(learner).T_star
                                       : solve_one_sided(to_one_sided(learner), cfg.challengers).T_star;
            } catch (const std::invalid_argument&) {
                row.T_star = 0.0;  // nothing to verify
            }
            row.agg = std::move(aggs[n]);
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

SlopeResult slope_experiment(ProfileKind profile, Algo algo, const std::vector<double>& deltas, int replications,
                             std::uint64_t master_seed, int parallelism) {
    if (deltas.size() < 2) throw std::invalid_argument("slope needs at least two deltas");
    SlopeResult res;
    res.profile = profile;
    res.algorithm = algo;
    ExperimentSpec spec;
    spec.name = "slope/" + to_string(profile) + "/" + to_string(algo);
    spec.instance = generate_instance(profile, 5, 5, table1_levels(), 0);
    spec.algorithms = {algo};
    spec.deltas = deltas;
    spec.replications = replications;
    spec.master_seed = master_seed;
    spec.config.gamma = 0.0;
    spec.config.threshold_variant = ThresholdVariant::Light;
    res.rows = run_experiment(spec, parallelism);

    bool two_sided = algo == Algo::Att2 || algo == Algo::AlphaBetaDelta;
    res.T_star = two_sided ? solve_two_sided(spec.instance).T_star
                           : solve_one_sided(to_one_sided(spec.instance), spec.config.challengers).T_star;
    double mx = 0, my = 0;
    const double n = static_cast<double>(deltas.size());
    for (const auto& r : res.rows) {
        mx += std::log(1.0 / r.delta) / n;
        my += r.mean_tau / n;
    }
    double sxy = 0, sxx = 0;
    for (const auto& r : res.rows) {
        double x = std::log(1.0 / r.delta) - mx;
        sxy += x * (r.mean_tau - my);
        sxx += x * x;
    }
    res.slope = sxy / sxx;
    res.intercept = my - res.slope * mx;
    return res;
}

}  // namespace matchid
