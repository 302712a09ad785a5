#include "matchid/spef.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace matchid {

Family family_from_string(std::string_view s) {
    if (s == "gaussian" || s == "Gaussian") return Family::Gaussian;
    if (s == "bernoulli" || s == "Bernoulli") return Family::Bernoulli;
    throw std::invalid_argument("unknown reward family: " + std::string(s));
}

std::string to_string(Family f) { return f == Family::Gaussian ? "gaussian" : "bernoulli"; }

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t hash_string(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view name, std::uint64_t rep) {
    return splitmix64(splitmix64(master ^ hash_string(name)) + rep);
}

void RewardModel::check_mean(double mu) const {
    if (!(variance > 0)) throw std::domain_error("variance must be positive");
    if (!std::isfinite(mu)) throw std::domain_error("mean is not finite");
    if (family == Family::Bernoulli && (mu <= 0.0 || mu >= 1.0))
        throw std::domain_error("Bernoulli mean outside (0,1)");
}

double RewardModel::clamp(double mu) const {
    if (family == Family::Bernoulli) return std::clamp(mu, kBernoulliEps, 1.0 - kBernoulliEps);
    return mu;
}

double RewardModel::kl(double mu1, double mu2) const {
    if (family == Family::Gaussian) {
        double d = mu1 - mu2;
        return 0.5 * d * d / variance;
    }
    if (mu1 < kBernoulliEps * 0.5 || mu1 > 1.0 - kBernoulliEps * 0.5 || mu2 < kBernoulliEps * 0.5 ||
        mu2 > 1.0 - kBernoulliEps * 0.5)
        throw std::domain_error("Bernoulli mean outside clamping window");
    double r = 0.0;
    if (mu1 > 0) r += mu1 * std::log(mu1 / mu2);
    if (mu1 < 1) r += (1 - mu1) * std::log((1 - mu1) / (1 - mu2));
    return std::max(r, 0.0);
}

double RewardModel::dkl_dx(double mu, double x) const {
    if (family == Family::Gaussian) return (x - mu) / variance;
    return (x - mu) / (x * (1 - x));
}

double RewardModel::sample(double mu, Rng& rng) const {
    if (family == Family::Gaussian) {
        std::normal_distribution<double> n(mu, std::sqrt(variance));
        return n(rng);
    }
    std::bernoulli_distribution b(mu);
    return b(rng) ? 1.0 : 0.0;
}

double kl(Family f, double mu1, double mu2) { return RewardModel{f}.kl(mu1, mu2); }

double mixture_mean(double w_a, double mu_a, double w_b, double mu_b) {
    double s = w_a + w_b;
    if (!(s > 0)) throw std::invalid_argument("empty mixture");
    return (w_a * mu_a + w_b * mu_b) / s;
}

double kl_ratio_derivative(Family f, double mu_top, double mu_bot, double x) {
    RewardModel m{f};
    double den = m.kl(mu_bot, x);
    if (!(den > 0)) throw std::domain_error("kl ratio singular at x = mu_bot");
    double num = m.kl(mu_top, x);
    double dnum = m.dkl_dx(mu_top, x);
    double dden = m.dkl_dx(mu_bot, x);
    return -(dnum * den - num * dden) / (den * den);
}

}  // namespace matchid
