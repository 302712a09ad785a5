#pragma once
#include <optional>
#include <cstdint>
#include <string>
#include <vector>

#include "matchid/indices.hpp"
#include "matchid/market.hpp"
#include "matchid/oracle.hpp"

namespace matchid {

enum class ThresholdVariant { Paper, Light };

// beta(t, delta): paper variant log((M_count - 1)/delta) + 3 P A log(1 + log t),
// light variant log((1 + log t)/delta).
double threshold(double t, double delta, double M_count, int P, int A, ThresholdVariant v);

enum class Exploration {
    Gamma,      // min_i N^(i) < N^gamma, then min_k N^(i)_k < (N^(i))^gamma
    GammaSq,    // alternative sets with exponent gamma^2 on the arm level
    SqrtPlayer  // sum_k N^(i)_k <= sqrt(N)
};

struct RunConfig {
    double gamma = 0.25;
    double delta = 0.001;
    ThresholdVariant threshold_variant = ThresholdVariant::Paper;
    long long max_rounds = 1000000;
    std::uint64_t seed = 1;
    long long trace_period = 0;  // 0 disables tracing
    Exploration exploration = Exploration::Gamma;
    ChallengerRule challengers = ChallengerRule::Blocking;  // one-sided only
    bool noise_free = false;       // observations equal the true means
    bool disable_stopping = false; // run to max_rounds
    // Gaussian variance assumed by the learner's statistics; unset means the instance's.
    std::optional<double> model_variance;
    void validate() const;
};

struct TraceRow {
    long long t = 0;
    int i = -1;
    int k = -1;
    double min_index = 0;
    std::vector<double> anchors;
    std::vector<double> alloc;  // row-major N / t
};

struct RunResult {
    long long tau = 0;
    Matching announced;
    bool correct = false;
    bool hit_cap = false;
    std::vector<TraceRow> trace;
    Grid<long long> counts;
};

RunResult run_att1(const MarketInstance& inst, const RunConfig& cfg);
RunResult run_att2(const MarketInstance& inst, const RunConfig& cfg);
RunResult run_beta_top_two(const MarketInstance& inst, const std::vector<double>& beta, const RunConfig& cfg);
RunResult run_alpha_beta_delta(const MarketInstance& inst, const std::vector<double>& alpha,
                               const std::vector<double>& beta, const Grid<double>& delta_coins,
                               const RunConfig& cfg);

enum class Algo { Att1, Att2, BetaTopTwo, AlphaBetaDelta };
Algo algo_from_string(const std::string& s);
std::string to_string(Algo a);
// Runs `a` with all coins at 1/2 for the baselines.
RunResult run_algorithm(Algo a, const MarketInstance& inst, const RunConfig& cfg);

bool stopping_check(bool unique, double min_index, double t, const RunConfig& cfg, double M_count, int P, int A);

}  // namespace matchid
