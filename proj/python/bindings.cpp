#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "matchid/algorithms.hpp"
#include "matchid/fluid.hpp"
#include "matchid/harness.hpp"
#include "matchid/io.hpp"
#include "matchid/market.hpp"
#include "matchid/oracle.hpp"

namespace py = pybind11;
using namespace matchid;

namespace {

using Rows = std::vector<std::vector<double>>;

Rows rows(const Mat& m) { return m.to_rows(); }
Mat mat(const Rows& r) { return Mat::from_rows(r); }

ChallengerRule rule_from(const std::string& s) {
    if (s == "blocking") return ChallengerRule::Blocking;
    if (s == "full") return ChallengerRule::Full;
    if (s == "all") return ChallengerRule::AllOthers;
    throw std::invalid_argument("unknown challenger rule: " + s);
}

py::dict solution_dict(const OracleSolution& s) {
    py::dict d;
    d["w"] = rows(s.w);
    d["T_star"] = s.T_star;
    d["level"] = s.level;
    d["residual"] = s.residual;
    d["anchors"] = s.anchors;
    d["method"] = s.method;
    return d;
}

py::dict aggregate_dict(const AggregateRow& a) {
    py::dict d;
    d["algorithm"] = a.algorithm;
    d["delta"] = a.delta;
    d["replications"] = a.replications;
    d["mean_tau"] = a.mean_tau;
    d["sd_tau"] = a.sd_tau;
    d["se_tau"] = a.se_tau;
    d["error_rate"] = a.error_rate;
    d["hit_cap"] = a.hit_cap;
    d["failures"] = a.failures;
    std::vector<long long> taus;
    for (const auto& r : a.reps) taus.push_back(r.tau);
    d["taus"] = taus;
    return d;
}

RunConfig make_config(double delta, double gamma, std::uint64_t seed, long long max_rounds,
                      const std::string& threshold, const std::string& challengers,
                      std::optional<double> model_variance, bool noise_free) {
    RunConfig c;
    c.delta = delta;
    c.gamma = gamma;
    c.seed = seed;
    c.max_rounds = max_rounds;
    if (threshold == "light")
        c.threshold_variant = ThresholdVariant::Light;
    else if (threshold != "paper")
        throw std::invalid_argument("unknown threshold: " + threshold);
    c.challengers = rule_from(challengers);
    c.model_variance = model_variance;
    c.noise_free = noise_free;
    return c;
}

}  // namespace

PYBIND11_MODULE(_matchid, m) {
    m.doc() = "Stable-matching identification under bandit feedback";

    py::register_exception<std::invalid_argument>(m, "InvalidArgument", PyExc_ValueError);
    py::register_exception<std::domain_error>(m, "DomainError", PyExc_ValueError);

    py::class_<MarketInstance>(m, "MarketInstance")
        .def(py::init<>())
        .def_readwrite("kind", &MarketInstance::kind)
        .def_readwrite("M", &MarketInstance::M)
        .def_readwrite("K", &MarketInstance::K)
        .def_readwrite("variance", &MarketInstance::variance)
        .def_property(
            "mu", [](const MarketInstance& i) { return rows(i.mu); },
            [](MarketInstance& i, const Rows& r) { i.mu = mat(r); })
        .def_property(
            "eta",
            [](const MarketInstance& i) -> std::optional<Rows> {
                if (!i.eta) return std::nullopt;
                return rows(*i.eta);
            },
            [](MarketInstance& i, const std::optional<Rows>& r) {
                if (r)
                    i.eta = mat(*r);
                else
                    i.eta.reset();
            })
        .def_readwrite("arm_prefs", &MarketInstance::arm_prefs)
        .def_property_readonly("two_sided", &MarketInstance::two_sided)
        .def("validate", &MarketInstance::validate)
        .def("to_json", [](const MarketInstance& i) { return instance_to_json(i).dump(); })
        .def_static("from_json", [](const std::string& s) { return instance_from_json(Json::parse(s)); })
        .def("__repr__", [](const MarketInstance& i) {
            return "<MarketInstance " + i.kind + " " + std::to_string(i.M) + "x" + std::to_string(i.K) +
                   (i.two_sided() ? " two-sided>" : " one-sided>");
        });

    m.def(
        "generate_instance",
        [](const std::string& kind, int M, int K, const std::vector<double>& levels, std::uint64_t seed) {
            return generate_instance(profile_kind_from_string(kind), M, K, levels, seed);
        },
        py::arg("kind"), py::arg("M") = 5, py::arg("K") = 5,
        py::arg("levels") = std::vector<double>{2, 2.5, 3.5, 5, 7}, py::arg("seed") = 0);
    m.def("example1", &example1, py::arg("mu11"), py::arg("eta11"));
    m.def("to_one_sided", &to_one_sided);

    m.def(
        "stable_matching",
        [](const MarketInstance& inst, const std::string& proposing) {
            Side s = proposing == "players" ? Side::Players : Side::Arms;
            return deferred_acceptance(prefs_from_means(inst), s).arm_of;
        },
        py::arg("instance"), py::arg("proposing") = "arms", "Player -> arm assignment from deferred acceptance");
    m.def(
        "is_unique_stable", [](const MarketInstance& inst) { return is_unique_stable(prefs_from_means(inst)); });
    m.def(
        "partition_B123",
        [](const MarketInstance& inst) {
            auto p = prefs_from_means(inst);
            auto part = partition_B123(p, deferred_acceptance(p, Side::Arms));
            py::dict d;
            d["B1"] = part.B1;
            d["B2"] = part.B2;
            d["B3"] = part.B3;
            return d;
        });

    m.def(
        "kl", [](double a, double b, const std::string& family, double variance) {
            return RewardModel(family_from_string(family), variance).kl(a, b);
        },
        py::arg("mu1"), py::arg("mu2"), py::arg("family") = "gaussian", py::arg("variance") = 1.0);
    m.def(
        "threshold",
        [](double t, double delta, double M_count, int P, int A, const std::string& variant) {
            return threshold(t, delta, M_count, P, A,
                             variant == "light" ? ThresholdVariant::Light : ThresholdVariant::Paper);
        },
        py::arg("t"), py::arg("delta"), py::arg("M_count"), py::arg("P"), py::arg("A"), py::arg("variant") = "paper");

    m.def(
        "solve_one_sided",
        [](const MarketInstance& inst, const std::string& rule) { return solution_dict(solve_one_sided(inst, rule_from(rule))); },
        py::arg("instance"), py::arg("rule") = "blocking");
    m.def(
        "solve_two_sided",
        [](const MarketInstance& inst, const std::string& method) {
            auto meth = method == "supergradient" ? TwoSidedMethod::Supergradient : TwoSidedMethod::Reduced;
            return solution_dict(solve_two_sided(inst, meth));
        },
        py::arg("instance"), py::arg("method") = "reduced");
    m.def(
        "characteristic_time",
        [](const MarketInstance& inst, const Rows& w, const std::string& rule) {
            return characteristic_time(inst, mat(w), rule_from(rule));
        },
        py::arg("instance"), py::arg("w"), py::arg("rule") = "blocking");
    m.def(
        "beta_characteristic_time",
        [](const MarketInstance& inst, const std::vector<double>& beta, const std::string& rule) {
            return beta_characteristic_time(inst, beta, rule_from(rule));
        },
        py::arg("instance"), py::arg("beta"), py::arg("rule") = "blocking");

    m.def(
        "run",
        [](const std::string& algo, const MarketInstance& inst, double delta, double gamma, std::uint64_t seed,
           long long max_rounds, const std::string& threshold, const std::string& challengers,
           std::optional<double> model_variance, bool noise_free) {
            auto cfg = make_config(delta, gamma, seed, max_rounds, threshold, challengers, model_variance, noise_free);
            RunResult r;
            {
                py::gil_scoped_release release;
                r = run_algorithm(algo_from_string(algo), inst, cfg);
            }
            py::dict d;
            d["tau"] = r.tau;
            d["correct"] = r.correct;
            d["hit_cap"] = r.hit_cap;
            d["announced"] = r.announced.arm_of;
            return d;
        },
        py::arg("algo"), py::arg("instance"), py::arg("delta") = 0.001, py::arg("gamma") = 0.25, py::arg("seed") = 1,
        py::arg("max_rounds") = 1000000, py::arg("threshold") = "paper", py::arg("challengers") = "blocking",
        py::arg("model_variance") = py::none(), py::arg("noise_free") = false);

    m.def(
        "run_experiment",
        [](const MarketInstance& inst, const std::vector<std::string>& algos, const std::vector<double>& deltas,
           int reps, std::uint64_t seed, const std::string& name, double gamma, const std::string& threshold,
           const std::string& challengers, std::optional<double> model_variance, int threads) {
            ExperimentSpec spec;
            spec.name = name;
            spec.instance = inst;
            spec.algorithms.clear();
            for (const auto& a : algos) spec.algorithms.push_back(algo_from_string(a));
            spec.deltas = deltas;
            spec.replications = reps;
            spec.master_seed = seed;
            spec.config = make_config(deltas.at(0), gamma, 1, 1000000, threshold, challengers, model_variance, false);
            std::vector<AggregateRow> out;
            {
                py::gil_scoped_release release;
                out = run_experiment(spec, threads);
            }
            py::list l;
            for (const auto& a : out) l.append(aggregate_dict(a));
            return l;
        },
        py::arg("instance"), py::arg("algorithms"), py::arg("deltas"), py::arg("reps") = 100, py::arg("seed") = 1,
        py::arg("name") = "experiment", py::arg("gamma") = 0.25, py::arg("threshold") = "paper",
        py::arg("challengers") = "blocking", py::arg("model_variance") = py::none(), py::arg("threads") = 0);

    m.def(
        "sweep_fig1",
        [](double step, int threads) {
            std::vector<Fig1Point> pts;
            {
                py::gil_scoped_release release;
                pts = sweep_fig1(step, 1.0, 4.0, threads);
            }
            py::list l;
            for (const auto& p : pts) {
                py::dict d;
                d["mu11"] = p.mu11;
                d["eta11"] = p.eta11;
                d["w"] = Rows{{p.w11, p.w12}, {p.w21, p.w22}};
                d["T_star"] = p.T_star;
                d["ok"] = p.ok;
                l.append(d);
            }
            return l;
        },
        py::arg("step") = 0.05, py::arg("threads") = 0);

    m.def(
        "integrate_one_sided",
        [](const MarketInstance& inst, const std::optional<Rows>& alloc0, double horizon, const std::string& rule) {
            Mat a0 = alloc0 ? mat(*alloc0) : Mat(inst.M, inst.K, 1.0);
            auto tr = integrate_one_sided(inst, a0, horizon, rule_from(rule));
            py::dict d;
            d["ok"] = tr.ok;
            d["error"] = tr.error;
            d["t_star"] = tr.t_star;
            d["final_alloc"] = rows(tr.final_alloc);
            std::vector<double> t, c;
            for (const auto& r : tr.rows) {
                t.push_back(r.t);
                c.push_back(r.C_min);
            }
            d["t"] = t;
            d["C_min"] = c;
            std::vector<std::string> ev;
            for (const auto& e : tr.events) ev.push_back(to_string(e.kind));
            d["events"] = ev;
            return d;
        },
        py::arg("instance"), py::arg("alloc0") = py::none(), py::arg("horizon") = 1e5, py::arg("rule") = "blocking");

    m.attr("__version__") = version_string();
}
