#include "cookbench/evalpol.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

namespace cookbench::evalpol {

const char* to_string(Policy p) {
    switch (p) {
        case Policy::random_action: return "random";
        case Policy::greedy: return "greedy";
        case Policy::epsilon: return "eps";
        case Policy::sampling: return "sampling";
        case Policy::linucb: return "linucb";
    }
    return "?";
}

std::optional<Policy> policy_from_string(const std::string& s) {
    if (s == "random") return Policy::random_action;
    if (s == "greedy") return Policy::greedy;
    if (s == "eps") return Policy::epsilon;
    if (s == "sampling") return Policy::sampling;
    if (s == "linucb") return Policy::linucb;
    return std::nullopt;
}

std::size_t greedy_select(std::span<const double> q) {
    if (q.empty()) throw std::logic_error("greedy_select: empty Q-vector");
    std::size_t best = 0;
    for (std::size_t i = 1; i < q.size(); ++i) {
        if (q[i] > q[best]) best = i;
    }
    return best;
}

std::size_t eps_select(std::span<const double> q, double epsilon, Rng& rng) {
    if (q.empty()) throw std::logic_error("eps_select: empty Q-vector");
    if (rng.uniform_real() < epsilon) return rng.uniform_u64(q.size());
    return greedy_select(q);
}

std::size_t gumbel_select(std::span<const double> q, double temperature, Rng& rng) {
    if (q.empty()) throw std::logic_error("gumbel_select: empty Q-vector");
    if (temperature <= 0.0) throw std::logic_error("gumbel_select: temperature must be positive");
    std::size_t best = 0;
    double best_v = -1e300;
    for (std::size_t i = 0; i < q.size(); ++i) {
        double v = q[i] / temperature + rng.gumbel();
        if (v > best_v) {
            best_v = v;
            best = i;
        }
    }
    return best;
}

BanditState::BanditState(int dim, double lambda) : dim_(dim), lambda_(lambda) {
    if (dim < 1) throw std::logic_error("BanditState: dim must be positive");
    if (lambda <= 0.0) throw std::logic_error("BanditState: lambda must be positive");
    prior_.v.assign(static_cast<std::size_t>(dim) * static_cast<std::size_t>(dim), 0.0);
    prior_.vinv = prior_.v;
    for (int i = 0; i < dim; ++i) {
        prior_.v[static_cast<std::size_t>(i * dim + i)] = lambda;
        prior_.vinv[static_cast<std::size_t>(i * dim + i)] = 1.0 / lambda;
    }
}

const BanditState::Arm& BanditState::arm_or_prior(const std::string& key) const {
    auto it = arms_.find(key);
    return it == arms_.end() ? prior_ : it->second;
}

double BanditState::raw_bound(const std::string& key, std::span<const double> h) const {
    if (static_cast<int>(h.size()) != dim_) throw std::logic_error("raw_bound: feature size mismatch");
    const Arm& arm = arm_or_prior(key);
    // h^T Vinv h
    double acc = 0.0;
    for (int i = 0; i < dim_; ++i) {
        const double* row = arm.vinv.data() + static_cast<std::size_t>(i * dim_);
        double dot = 0.0;
        for (int j = 0; j < dim_; ++j) dot += row[j] * h[static_cast<std::size_t>(j)];
        acc += h[static_cast<std::size_t>(i)] * dot;
    }
    // V is positive definite for any lambda > 0, so the quadratic form is
    // nonnegative up to rounding
    assert(acc > -1e-9);
    return std::sqrt(std::max(0.0, acc));
}

void BanditState::update(const std::string& key, std::span<const double> h) {
    if (static_cast<int>(h.size()) != dim_) throw std::logic_error("update: feature size mismatch");
    auto it = arms_.find(key);
    if (it == arms_.end()) it = arms_.emplace(key, prior_).first;
    Arm& arm = it->second;

    const std::size_t n = static_cast<std::size_t>(dim_);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            arm.v[i * n + j] += h[i] * h[j];
        }
    }
    // Sherman-Morrison: (V + h h^T)^-1 = Vinv - (Vinv h)(h^T Vinv) / (1 + h^T Vinv h)
    std::vector<double> u(n, 0.0);  // Vinv h (Vinv symmetric)
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = arm.vinv.data() + i * n;
        double dot = 0.0;
        for (std::size_t j = 0; j < n; ++j) dot += row[j] * h[j];
        u[i] = dot;
    }
    double denom = 1.0;
    for (std::size_t i = 0; i < n; ++i) denom += h[i] * u[i];
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            arm.vinv[i * n + j] -= u[i] * u[j] / denom;
        }
    }
}

const std::vector<double>& BanditState::covariance(const std::string& key) const {
    return arm_or_prior(key).v;
}

const std::vector<double>& BanditState::covariance_inverse(const std::string& key) const {
    return arm_or_prior(key).vinv;
}

std::size_t linucb_select(std::span<const double> q, std::span<const double> h_s,
                          const std::vector<std::string>& action_keys, const BanditState& bandit,
                          double coefficient) {
    if (q.size() != action_keys.size()) throw std::logic_error("linucb_select: q/key size mismatch");
    if (q.empty()) throw std::logic_error("linucb_select: empty Q-vector");
    std::vector<double> bounds(q.size());
    double largest = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        bounds[i] = bandit.raw_bound(action_keys[i], h_s);
        largest = std::max(largest, bounds[i]);
    }
    std::size_t best = 0;
    double best_v = -1e300;
    for (std::size_t i = 0; i < q.size(); ++i) {
        double normalized = largest > 0.0 ? coefficient * bounds[i] / largest : 0.0;
        double v = q[i] + normalized;
        if (v > best_v) {
            best_v = v;
            best = i;
        }
    }
    return best;
}

}  // namespace cookbench::evalpol
