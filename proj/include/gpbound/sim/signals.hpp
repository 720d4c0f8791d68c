#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace gpbound::sim {

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream);

// Piecewise-constant targets every `hold` seconds passed through 1/(T1 s + 1); evaluated in closed form.
class FilteredSteps {
public:
    FilteredSteps() = default;
    FilteredSteps(std::vector<double> targets, double hold, double T1);

    static FilteredSteps uniform(std::mt19937_64& rng, double lo, double hi, double hold, double T1, double duration);
    static FilteredSteps constant(double value);

    double value(double t) const { return value(t, t); }
    double rate(double t) const { return rate(t, t); }
    // Evaluated on the interval containing `anchor`, so an integration step ending on a switch instant sees the left limit.
    double value(double t, double anchor) const;
    double rate(double t, double anchor) const;
    double target(double t) const;
    double hold() const { return hold_; }

private:
    std::size_t index(double t) const;

    std::vector<double> targets_{0.0};
    std::vector<double> starts_{0.0};
    double hold_ = 1.0;
    double T1_ = 0.0;
};

// Gaussian targets every `hold` seconds, approached along ramps of slope `rate_limit`.
class GaussianRamp {
public:
    GaussianRamp() = default;
    GaussianRamp(std::mt19937_64& rng, double sigma, double hold, double rate_limit, double duration, double start = 0.0);

    double value(double t) const { return value(t, t); }
    double rate(double t) const { return rate(t, t); }
    double value(double t, double anchor) const;
    double rate(double t, double anchor) const;
    const std::vector<double>& targets() const { return targets_; }

private:
    std::size_t index(double t) const;

    std::vector<double> targets_{0.0};
    std::vector<double> starts_{0.0};
    double hold_ = 1.0;
    double rate_ = 0.0;
};

struct ReferenceSamples {
    std::vector<double> t;
    std::vector<double> y_r;
    std::vector<double> ydot_r;
};

ReferenceSamples generate_reference(std::uint64_t seed, double T_y, double T1, double lo, double hi, double T_s,
                                    double duration);

std::vector<double> generate_disturbance(std::uint64_t seed, double T_z, double sigma, double rate_limit, double T_s,
                                         double duration);

} // namespace gpbound::sim
