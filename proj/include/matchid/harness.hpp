#pragma once
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "matchid/algorithms.hpp"
#include "matchid/market.hpp"

namespace matchid {

struct ExperimentSpec {
    std::string name = "experiment";
    // Two-sided instances are reduced to one-sided for att1/btt.
    MarketInstance instance;
    std::vector<Algo> algorithms{Algo::Att1};
    std::vector<double> deltas{0.001};
    int replications = 100;
    std::uint64_t master_seed = 1;
    RunConfig config;  // delta and seed are overwritten per run
    void validate() const;
};

struct RepOutcome {
    long long tau = 0;
    bool correct = false;
    bool hit_cap = false;
    bool failed = false;
    std::string error;
};

struct AggregateRow {
    std::string algorithm;
    double delta = 0;
    int replications = 0;
    double mean_tau = 0;
    double sd_tau = 0;
    double se_tau = 0;
    double error_rate = 0;
    int hit_cap = 0;
    int failures = 0;
    std::vector<RepOutcome> reps;  // in replication order
};

// Replication r of every algorithm uses derive_seed(master, name, r).
std::vector<AggregateRow> run_experiment(const ExperimentSpec& spec, int parallelism = 0);

// Calls body(0..n-1) on a pool; results must be written by index.
void parallel_for(int n, int parallelism, const std::function<void(int)>& body);
int default_parallelism();

AggregateRow aggregate(std::string algorithm, double delta, std::vector<RepOutcome> reps);

struct Fig1Point {
    double mu11 = 0, eta11 = 0;
    double w11 = 0, w12 = 0, w21 = 0, w22 = 0;
    double T_star = 0;
    bool ok = true;
    std::string error;
};

// Grid over (lo, hi] with the given step on both axes, in row-major (mu11, eta11) order.
std::vector<Fig1Point> sweep_fig1(double step, double lo = 1.0, double hi = 4.0, int parallelism = 0);

// Levels, profile names and reported means of the 5x5 table.
std::vector<double> table1_levels();
std::vector<ProfileKind> table1_profiles();
double table1_published_value(ProfileKind kind, Algo algo);

enum class Table1Setup {
    Literal,       // unit variance throughout, blocking challenger sets
    Reference // unit-variance noise, learner KL (mu - lambda)^2, all-other-arms challengers
};
Table1Setup table1_setup_from_string(const std::string& s);
std::string to_string(Table1Setup s);
RunConfig table1_config(Table1Setup setup);

struct Table1Row {
    ProfileKind profile = ProfileKind::Distinct;
    Algo algorithm = Algo::Att1;
    double published = 0;
    double T_star = 0;  // oracle characteristic time of the statistics the learner uses
    AggregateRow agg;
};

std::vector<Table1Row> table1(int replications, std::uint64_t master_seed, Table1Setup setup, int parallelism = 0);

struct SlopeResult {
    ProfileKind profile = ProfileKind::Distinct;
    Algo algorithm = Algo::Att2;
    std::vector<AggregateRow> rows;  // one per delta
    double slope = 0;                // OLS of mean tau on log(1/delta)
    double intercept = 0;
    double T_star = 0;
};

// Light threshold, gamma = 0, unit variance.
SlopeResult slope_experiment(ProfileKind profile, Algo algo, const std::vector<double>& deltas, int replications,
                             std::uint64_t master_seed, int parallelism = 0);

}  // namespace matchid
