#include "gpbound/sim/signals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gpbound::sim {

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return std::mt19937_64(seq);
}

namespace {

// Interval index with a small tolerance so that switch instants belong to the new interval.
std::size_t interval(double t, double hold, std::size_t count)
{
    const double k = std::floor(t / hold + 1e-9);
    if (k <= 0) return 0;
    return std::min(static_cast<std::size_t>(k), count - 1);
}

std::size_t interval_count(double duration, double hold)
{
    return static_cast<std::size_t>(std::ceil(duration / hold + 1e-9)) + 1;
}

} // namespace

FilteredSteps::FilteredSteps(std::vector<double> targets, double hold, double T1)
    : targets_(std::move(targets)), hold_(hold), T1_(T1)
{
    if (targets_.empty()) throw std::invalid_argument("FilteredSteps: no targets");
    if (!(hold > 0)) throw std::invalid_argument("FilteredSteps: hold must be positive");
    if (!(T1 >= 0)) throw std::invalid_argument("FilteredSteps: T1 must be non-negative");
    starts_.assign(targets_.size(), 0.0);
    starts_[0] = targets_[0];
    const double decay = T1_ > 0 ? std::exp(-hold_ / T1_) : 0.0;
    for (std::size_t k = 1; k < targets_.size(); ++k)
        starts_[k] = targets_[k - 1] + (starts_[k - 1] - targets_[k - 1]) * decay;
}

FilteredSteps FilteredSteps::uniform(std::mt19937_64& rng, double lo, double hi, double hold, double T1, double duration)
{
    if (!(lo < hi)) throw std::invalid_argument("FilteredSteps::uniform: need lo < hi");
    std::uniform_real_distribution<double> dist(lo, hi);
    std::vector<double> targets(interval_count(duration, hold));
    for (auto& v : targets) v = dist(rng);
    return FilteredSteps(std::move(targets), hold, T1);
}

FilteredSteps FilteredSteps::constant(double value) { return FilteredSteps({value}, 1.0, 0.0); }

std::size_t FilteredSteps::index(double t) const { return interval(t, hold_, targets_.size()); }

double FilteredSteps::target(double t) const { return targets_[index(t)]; }

double FilteredSteps::value(double t, double anchor) const
{
    const std::size_t k = index(anchor);
    if (T1_ == 0.0) return targets_[k];
    const double tau = std::max(0.0, t - static_cast<double>(k) * hold_);
    return targets_[k] + (starts_[k] - targets_[k]) * std::exp(-tau / T1_);
}

double FilteredSteps::rate(double t, double anchor) const
{
    if (T1_ == 0.0) return 0.0;
    return (targets_[index(anchor)] - value(t, anchor)) / T1_;
}

GaussianRamp::GaussianRamp(std::mt19937_64& rng, double sigma, double hold, double rate_limit, double duration,
                           double start)
    : hold_(hold), rate_(rate_limit)
{
    if (!(hold > 0)) throw std::invalid_argument("GaussianRamp: hold must be positive");
    if (!(rate_limit > 0)) throw std::invalid_argument("GaussianRamp: rate_limit must be positive");
    if (!(sigma >= 0)) throw std::invalid_argument("GaussianRamp: sigma must be non-negative");
    const std::size_t n = interval_count(duration, hold);
    std::normal_distribution<double> dist(0.0, 1.0);
    targets_.resize(n);
    for (auto& v : targets_) v = sigma * dist(rng);
    starts_.assign(n, start);
    for (std::size_t k = 1; k < n; ++k) {
        const double gap = targets_[k - 1] - starts_[k - 1];
        const double travel = std::isinf(rate_) ? std::abs(gap) : std::min(std::abs(gap), rate_ * hold_);
        starts_[k] = starts_[k - 1] + std::copysign(travel, gap);
    }
}

std::size_t GaussianRamp::index(double t) const { return interval(t, hold_, targets_.size()); }

double GaussianRamp::value(double t, double anchor) const
{
    const std::size_t k = index(anchor);
    const double gap = targets_[k] - starts_[k];
    if (std::isinf(rate_)) return targets_[k];
    const double tau = std::max(0.0, t - static_cast<double>(k) * hold_);
    return starts_[k] + std::copysign(std::min(std::abs(gap), rate_ * tau), gap);
}

double GaussianRamp::rate(double t, double anchor) const
{
    const std::size_t k = index(anchor);
    if (std::isinf(rate_)) return 0.0;
    const double gap = targets_[k] - starts_[k];
    const double tau = std::max(0.0, t - static_cast<double>(k) * hold_);
    return rate_ * tau < std::abs(gap) ? std::copysign(rate_, gap) : 0.0;
}

ReferenceSamples generate_reference(std::uint64_t seed, double T_y, double T1, double lo, double hi, double T_s,
                                    double duration)
{
    if (!(T_s > 0) || !(duration > 0)) throw std::invalid_argument("generate_reference: T_s and duration must be positive");
    auto rng = make_rng(seed, 1);
    const auto sig = FilteredSteps::uniform(rng, lo, hi, T_y, T1, duration);
    ReferenceSamples out;
    const auto n = static_cast<std::size_t>(std::floor(duration / T_s + 1e-9)) + 1;
    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) * T_s;
        out.t.push_back(t);
        out.y_r.push_back(sig.value(t));
        out.ydot_r.push_back(sig.rate(t));
    }
    return out;
}

std::vector<double> generate_disturbance(std::uint64_t seed, double T_z, double sigma, double rate_limit, double T_s,
                                         double duration)
{
    if (!(T_s > 0) || !(duration > 0)) throw std::invalid_argument("generate_disturbance: T_s and duration must be positive");
    auto rng = make_rng(seed, 2);
    const GaussianRamp sig(rng, sigma, T_z, rate_limit, duration);
    const auto n = static_cast<std::size_t>(std::floor(duration / T_s + 1e-9)) + 1;
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = sig.value(static_cast<double>(k) * T_s);
    return out;
}

} // namespace gpbound::sim
