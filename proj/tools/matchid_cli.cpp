#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "matchid/algorithms.hpp"
#include "matchid/fluid.hpp"
#include "matchid/harness.hpp"
#include "matchid/io.hpp"
#include "matchid/oracle.hpp"

using namespace matchid;

namespace {

const std::map<std::string, ChallengerRule> kRules{
    {"blocking", ChallengerRule::Blocking}, {"full", ChallengerRule::Full}, {"all", ChallengerRule::AllOthers}};
const std::map<std::string, ThresholdVariant> kThresholds{{"paper", ThresholdVariant::Paper},
                                                          {"light", ThresholdVariant::Light}};
const std::map<std::string, Exploration> kExploration{
    {"gamma", Exploration::Gamma}, {"gamma-sq", Exploration::GammaSq}, {"sqrt-player", Exploration::SqrtPlayer}};

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    return out;
}

std::string join(const std::vector<double>& v) {
    std::string s;
    for (double x : v) s += (s.empty() ? "" : " ") + fmt(x);
    return s;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stable-matching identification: oracles, sampling algorithms, fluid dynamics, experiments"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "Worker threads (0 = hardware concurrency)");

    // generate
    auto* gen = app.add_subcommand("generate", "Write an instance JSON");
    std::string gen_kind = "distinct", gen_out;
    int gen_M = 5, gen_K = 5;
    std::uint64_t gen_seed = 0;
    bool gen_one = false;
    double mu11 = 2, eta11 = 2, gen_var = 1.0;
    gen->add_option("--kind", gen_kind, "distinct|serial|spc|example1")->capture_default_str();
    gen->add_option("--M", gen_M)->capture_default_str();
    gen->add_option("--K", gen_K)->capture_default_str();
    gen->add_option("--seed", gen_seed, "0 at 5x5 gives the canonical profile")->capture_default_str();
    gen->add_option("--mu11", mu11, "example1 only")->capture_default_str();
    gen->add_option("--eta11", eta11, "example1 only")->capture_default_str();
    gen->add_option("--variance", gen_var, "Gaussian noise variance")->capture_default_str();
    gen->add_flag("--one-sided", gen_one, "Drop eta, keep the arm orderings");
    gen->add_option("--out", gen_out)->required();

    // run
    auto* run = app.add_subcommand("run", "Monte Carlo replications of one algorithm");
    std::string run_algo = "att1", run_inst, run_out, run_trace, run_trace_out;
    RunConfig cfg;
    int reps = 100;
    std::uint64_t seed = 1;
    double model_var = 0;
    run->add_option("--algo", run_algo, "att1|att2|btt|abd")->capture_default_str();
    run->add_option("--instance", run_inst)->required()->check(CLI::ExistingFile);
    run->add_option("--delta", cfg.delta)->capture_default_str();
    run->add_option("--gamma", cfg.gamma)->capture_default_str();
    run->add_option("--reps", reps)->capture_default_str();
    run->add_option("--seed", seed)->capture_default_str();
    run->add_option("--max-rounds", cfg.max_rounds)->capture_default_str();
    run->add_option("--threshold", cfg.threshold_variant)->transform(CLI::CheckedTransformer(kThresholds));
    run->add_option("--challengers", cfg.challengers, "One-sided challenger sets")
        ->transform(CLI::CheckedTransformer(kRules));
    run->add_option("--exploration", cfg.exploration)->transform(CLI::CheckedTransformer(kExploration));
    run->add_option("--model-variance", model_var, "Gaussian variance assumed by the learner (default: instance)");
    run->add_flag("--noise-free", cfg.noise_free, "Observations equal the true means");
    run->add_flag("--no-stop", cfg.disable_stopping, "Run to --max-rounds");
    run->add_option("--out", run_out, "Results CSV")->required();
    run->add_option("--trace", run_trace, "every=N: trace replication 0 every N rounds");
    run->add_option("--trace-out", run_trace_out, "Trace CSV (default: <out>.trace.csv)");

    // oracle solve
    auto* oracle = app.add_subcommand("oracle", "Lower-bound allocation solvers");
    oracle->require_subcommand(1);
    auto* solve = oracle->add_subcommand("solve", "Solve for w* and T*");
    std::string sol_inst, sol_out, side = "auto", method = "reduced";
    ChallengerRule sol_rule = ChallengerRule::Blocking;
    solve->add_option("--instance", sol_inst)->required()->check(CLI::ExistingFile);
    solve->add_option("--side", side, "one|two|auto")->capture_default_str();
    solve->add_option("--rule", sol_rule, "One-sided challenger sets")->transform(CLI::CheckedTransformer(kRules));
    solve->add_option("--method", method, "Two-sided: reduced|supergradient")->capture_default_str();
    solve->add_option("--out", sol_out, "Solution JSON (default: stdout)");

    // fluid run
    auto* fluid = app.add_subcommand("fluid", "Fluid-limit dynamics");
    fluid->require_subcommand(1);
    auto* frun = fluid->add_subcommand("run", "Integrate the fluid ODEs");
    std::string fl_inst, fl_alloc, fl_out;
    double horizon = 1e5;
    ChallengerRule fl_rule = ChallengerRule::Blocking;
    FluidOptions fopt;
    frun->add_option("--instance", fl_inst)->required()->check(CLI::ExistingFile);
    frun->add_option("--t0-alloc", fl_alloc, "Initial allocation JSON (default: all ones)");
    frun->add_option("--horizon", horizon)->capture_default_str();
    frun->add_option("--rule", fl_rule, "One-sided challenger sets")->transform(CLI::CheckedTransformer(kRules));
    frun->add_option("--rel-step", fopt.rel_step)->capture_default_str();
    frun->add_option("--record-every", fopt.record_every)->capture_default_str();
    frun->add_option("--out", fl_out)->required();

    // sweep-fig1
    auto* sweep = app.add_subcommand("sweep-fig1", "w* leader weights over the (mu11, eta11) grid of Example 1");
    double step = 0.05;
    std::string sw_out;
    sweep->add_option("--step", step)->capture_default_str();
    sweep->add_option("--out", sw_out)->required();

    // table1
    auto* tab = app.add_subcommand("table1", "Stopping times on the 5x5 profiles");
    int tab_reps = 1000;
    std::uint64_t tab_seed = 1;
    std::string tab_setup = "reference", tab_out;
    tab->add_option("--reps", tab_reps)->capture_default_str();
    tab->add_option("--seed", tab_seed)->capture_default_str();
    tab->add_option("--setup", tab_setup, "literal|reference")->capture_default_str();
    tab->add_option("--out", tab_out)->required();

    // slope
    auto* slope = app.add_subcommand("slope", "Mean stopping time against log(1/delta)");
    std::string sl_profile = "all", sl_algo = "att2", sl_out;
    std::vector<double> deltas{1e-1, 1e-2, 1e-3, 1e-4, 1e-5};
    int sl_reps = 1000;
    std::uint64_t sl_seed = 1;
    slope->add_option("--profile", sl_profile, "distinct|serial|spc|all")->capture_default_str();
    slope->add_option("--algo", sl_algo)->capture_default_str();
    slope->add_option("--deltas", deltas)->capture_default_str();
    slope->add_option("--reps", sl_reps)->capture_default_str();
    slope->add_option("--seed", sl_seed)->capture_default_str();
    slope->add_option("--out", sl_out)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            MarketInstance inst;
            if (gen_kind == "example1") {
                inst = example1(mu11, eta11);
            } else {
                std::vector<double> levels = table1_levels();
                if (gen_K != 5) {
                    levels.clear();
                    for (int r = 0; r < gen_K; ++r) levels.push_back(2.0 + r);
                }
                inst = generate_instance(profile_kind_from_string(gen_kind), gen_M, gen_K, levels, gen_seed);
            }
            inst.variance = gen_var;
            if (gen_one) inst = to_one_sided(inst);
            inst.validate();
            save_instance(inst, gen_out);
        } else if (*run) {
            MarketInstance inst = load_instance(run_inst);
            if (model_var > 0) cfg.model_variance = model_var;
            ExperimentSpec spec;
            spec.name = "run/" + run_algo;
            spec.instance = inst;
            spec.algorithms = {algo_from_string(run_algo)};
            spec.deltas = {cfg.delta};
            spec.replications = reps;
            spec.master_seed = seed;
            spec.config = cfg;
            auto rows = run_experiment(spec, threads);
            const auto& agg = rows.front();
            Meta meta{{"command", "run"},
                      {"algo", run_algo},
                      {"instance", run_inst},
                      {"delta", fmt(cfg.delta)},
                      {"gamma", fmt(cfg.gamma)},
                      {"reps", std::to_string(reps)},
                      {"master_seed", std::to_string(seed)},
                      {"seed_rule", "derive_seed(master, \"" + spec.name + "\", rep)"}};
            std::vector<RunResult> results;
            for (const auto& r : agg.reps) {
                RunResult rr;
                rr.tau = r.tau;
                rr.correct = r.correct;
                rr.hit_cap = r.hit_cap;
                results.push_back(rr);
            }
            auto out = open_out(run_out);
            write_results_csv(out, results, meta);
            if (!run_trace.empty()) {
                std::string v = run_trace.rfind("every=", 0) == 0 ? run_trace.substr(6) : run_trace;
                RunConfig tcfg = cfg;
                tcfg.trace_period = std::stoll(v);
                tcfg.seed = derive_seed(seed, spec.name, 0);
                bool two = spec.algorithms[0] == Algo::Att2 || spec.algorithms[0] == Algo::AlphaBetaDelta;
                MarketInstance tinst = (!two && inst.two_sided()) ? to_one_sided(inst) : inst;
                auto res = run_algorithm(spec.algorithms[0], tinst, tcfg);
                auto tout = open_out(run_trace_out.empty() ? run_out + ".trace.csv" : run_trace_out);
                meta.emplace_back("trace_period", v);
                write_trace_csv(tout, res, inst.M, inst.K, meta);
            }
            std::cout << run_algo << " reps=" << agg.replications << " mean_tau=" << fmt(agg.mean_tau)
                      << " sd=" << fmt(agg.sd_tau) << " se=" << fmt(agg.se_tau) << " error_rate=" << fmt(agg.error_rate)
                      << " hit_cap=" << agg.hit_cap << " failures=" << agg.failures << "\n";
        } else if (*solve) {
            MarketInstance inst = load_instance(sol_inst);
            bool two = side == "two" || (side == "auto" && inst.two_sided());
            if (side != "one" && side != "two" && side != "auto") throw std::invalid_argument("--side must be one|two|auto");
            OracleSolution sol;
            if (two) {
                if (!inst.two_sided()) throw std::invalid_argument("--side two needs eta in the instance");
                if (method != "reduced" && method != "supergradient")
                    throw std::invalid_argument("--method must be reduced|supergradient");
                sol = solve_two_sided(inst, method == "reduced" ? TwoSidedMethod::Reduced : TwoSidedMethod::Supergradient);
            } else {
                sol = solve_one_sided(inst.two_sided() ? to_one_sided(inst) : inst, sol_rule);
            }
            Json j = solution_to_json(sol);
            if (sol_out.empty())
                std::cout << j.dump(2) << "\n";
            else
                write_json_file(j, sol_out);
        } else if (*frun) {
            MarketInstance inst = load_instance(fl_inst);
            FluidModel fm = inst.two_sided() ? FluidModel::two_sided_serial(inst) : FluidModel::one_sided(inst, fl_rule);
            Mat a0 = fl_alloc.empty() ? Mat(inst.M, inst.K, 1.0) : load_alloc(fl_alloc);
            auto tr = integrate(fm, a0, horizon, fopt);
            auto out = open_out(fl_out);
            write_trajectory_csv(out, tr,
                                 {{"command", "fluid run"},
                                  {"instance", fl_inst},
                                  {"horizon", fmt(horizon)},
                                  {"t_star", tr.t_star ? fmt(*tr.t_star) : "none"},
                                  {"status", tr.ok ? "ok" : tr.error}});
            std::cout << "rows=" << tr.rows.size() << " events=" << tr.events.size()
                      << " t_star=" << (tr.t_star ? fmt(*tr.t_star) : "none") << (tr.ok ? "" : " error=" + tr.error)
                      << "\n";
            if (!tr.ok) return 2;
        } else if (*sweep) {
            auto pts = sweep_fig1(step, 1.0, 4.0, threads);
            auto out = open_out(sw_out);
            write_meta(out, {{"command", "sweep-fig1"}, {"step", fmt(step)}, {"range", "(1,4]"}});
            out << "mu11,eta11,w11,w12,w21,w22,T_star,ok\n";
            for (const auto& p : pts)
                out << fmt(p.mu11) << "," << fmt(p.eta11) << "," << fmt(p.w11) << "," << fmt(p.w12) << ","
                    << fmt(p.w21) << "," << fmt(p.w22) << "," << fmt(p.T_star) << "," << (p.ok ? 1 : 0) << "\n";
        } else if (*tab) {
            Table1Setup setup = table1_setup_from_string(tab_setup);
            auto rows = table1(tab_reps, tab_seed, setup, threads);
            auto out = open_out(tab_out);
            write_meta(out, {{"command", "table1"},
                             {"setup", to_string(setup)},
                             {"reps", std::to_string(tab_reps)},
                             {"master_seed", std::to_string(tab_seed)},
                             {"levels", join(table1_levels())},
                             {"gamma", "0.25"},
                             {"delta", "0.001"}});
            out << "profile,algorithm,published,mean_tau,sd,se,rel_dev,error_rate,hit_cap,failures,T_star\n";
            for (const auto& r : rows) {
                double dev = r.agg.mean_tau / r.published - 1.0;
                out << to_string(r.profile) << "," << r.agg.algorithm << "," << fmt(r.published) << ","
                    << fmt(r.agg.mean_tau) << "," << fmt(r.agg.sd_tau) << "," << fmt(r.agg.se_tau) << "," << fmt(dev)
                    << "," << fmt(r.agg.error_rate) << "," << r.agg.hit_cap << "," << r.agg.failures << ","
                    << fmt(r.T_star) << "\n";
                std::cout << to_string(r.profile) << " " << r.agg.algorithm << " mean=" << fmt(r.agg.mean_tau)
                          << " published=" << fmt(r.published) << " dev=" << fmt(dev) << "\n";
            }
        } else if (*slope) {
            std::vector<ProfileKind> profiles =
                sl_profile == "all" ? table1_profiles() : std::vector<ProfileKind>{profile_kind_from_string(sl_profile)};
            auto out = open_out(sl_out);
            write_meta(out, {{"command", "slope"},
                             {"algo", sl_algo},
                             {"threshold", "light"},
                             {"gamma", "0"},
                             {"reps", std::to_string(sl_reps)},
                             {"master_seed", std::to_string(sl_seed)}});
            out << "profile,algorithm,delta,log_inv_delta,mean_tau,sd,se,error_rate,hit_cap,slope,intercept,T_star\n";
            for (ProfileKind p : profiles) {
                auto res = slope_experiment(p, algo_from_string(sl_algo), deltas, sl_reps, sl_seed, threads);
                for (const auto& r : res.rows)
                    out << to_string(p) << "," << r.algorithm << "," << fmt(r.delta) << "," << fmt(std::log(1 / r.delta))
                        << "," << fmt(r.mean_tau) << "," << fmt(r.sd_tau) << "," << fmt(r.se_tau) << ","
                        << fmt(r.error_rate) << "," << r.hit_cap << "," << fmt(res.slope) << "," << fmt(res.intercept)
                        << "," << fmt(res.T_star) << "\n";
                std::cout << to_string(p) << " slope=" << fmt(res.slope) << " T_star=" << fmt(res.T_star)
                          << " ratio=" << fmt(res.slope / res.T_star) << "\n";
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
