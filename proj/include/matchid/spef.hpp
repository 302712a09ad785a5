#pragma once
#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace matchid {

enum class Family { Gaussian, Bernoulli };

Family family_from_string(std::string_view s);
std::string to_string(Family f);

// Clamp window for Bernoulli means produced by empirical averaging.
inline constexpr double kBernoulliEps = 1e-9;

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t hash_string(std::string_view s);
// Replication seed = hash(master, experiment name, rep).
std::uint64_t derive_seed(std::uint64_t master, std::string_view name, std::uint64_t rep);

struct RewardModel {
    Family family = Family::Gaussian;
    double variance = 1.0;  // Gaussian only

    RewardModel(Family f = Family::Gaussian, double var = 1.0) : family(f), variance(var) {}

    // Rejects constants outside the family's domain.
    void check_mean(double mu) const;
    // Maps an empirical average into the KL domain.
    double clamp(double mu) const;

    double kl(double mu1, double mu2) const;
    // d/dx D(mu, x)
    double dkl_dx(double mu, double x) const;
    double sample(double mu, Rng& rng) const;
};

double kl(Family f, double mu1, double mu2);
double mixture_mean(double w_a, double mu_a, double w_b, double mu_b);
// -d/dx [D(mu_top, x) / D(mu_bot, x)]
double kl_ratio_derivative(Family f, double mu_top, double mu_bot, double x);

}  // namespace matchid
