#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cookbench/rng.hpp"

namespace cookbench::evalpol {

enum class Policy { random_action, greedy, epsilon, sampling, linucb };

const char* to_string(Policy p);
std::optional<Policy> policy_from_string(const std::string& s);

inline constexpr double kDefaultEvalEpsilon = 0.05;
inline constexpr double kDefaultTemperature = 0.01;
inline constexpr double kBoundCoefficient = 0.2;

// argmax with lowest-index tie break
std::size_t greedy_select(std::span<const double> q);

std::size_t eps_select(std::span<const double> q, double epsilon, Rng& rng);

// argmax_i(q_i / T + g_i) with standard Gumbel noise; equivalent to sampling
// from softmax(q / T)
std::size_t gumbel_select(std::span<const double> q, double temperature, Rng& rng);

// Per-action ridge design matrices V_a = lambda*I + sum h h^T with maintained
// inverses. Keys are the exact encoded action strings.
class BanditState {
public:
    explicit BanditState(int dim, double lambda = 1.0);

    int dim() const { return dim_; }
    double lambda() const { return lambda_; }
    bool has(const std::string& key) const { return arms_.count(key) != 0; }
    std::size_t arm_count() const { return arms_.size(); }

    // sqrt(h^T V_a^{-1} h); never-seen actions fall back to the lambda*I prior
    double raw_bound(const std::string& key, std::span<const double> h) const;

    // V_a += h h^T with a rank-1 (Sherman-Morrison) inverse update
    void update(const std::string& key, std::span<const double> h);

    // row-major dim x dim matrices, for tests and diagnostics
    const std::vector<double>& covariance(const std::string& key) const;
    const std::vector<double>& covariance_inverse(const std::string& key) const;

private:
    struct Arm {
        std::vector<double> v;
        std::vector<double> vinv;
    };
    const Arm& arm_or_prior(const std::string& key) const;

    int dim_;
    double lambda_;
    Arm prior_;
    std::map<std::string, Arm> arms_;
};

// Bound-normalized LinUCB action choice: raw bounds are scaled so the largest
// equals kBoundCoefficient, then argmax(q + bound) decides.
std::size_t linucb_select(std::span<const double> q, std::span<const double> h_s,
                          const std::vector<std::string>& action_keys, const BanditState& bandit,
                          double coefficient = kBoundCoefficient);

}  // namespace cookbench::evalpol
