#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "gpbound/derl.hpp"

using namespace gpbound;

TEST_CASE("no change passes through")
{
    auto s = DerlState::from_probability(1.0, 0.99, 1e-3, 3.0);
    const auto out = derl_step(s, 3.0, 0.5, 0.5);
    CHECK(out.z_hat == 3.0);
    CHECK(s.z_hat == 3.0);
}

TEST_CASE("large step is ramped at z_lim")
{
    auto s = DerlState::from_probability(1.0, 0.99, 1e-3, 0.0);
    auto out = derl_step(s, 10.0, 1.0, 1.0);
    CHECK(out.branch == DerlBranch::Deterministic);
    CHECK(out.z_hat == doctest::Approx(0.001));
    int steps = 1;
    while (s.z_hat < 10.0 - 1e-9 && steps < 20000) {
        derl_step(s, 10.0, 1.0, 1.0);
        ++steps;
    }
    CHECK(steps == doctest::Approx(10000).epsilon(1e-3));
}

TEST_CASE("quantile mapping")
{
    CHECK(two_sided_gaussian_quantile(0.99) == doctest::Approx(2.5758293035489));
    CHECK(two_sided_gaussian_quantile(0.95) == doctest::Approx(1.959963984540));
    CHECK(two_sided_gaussian_probability(two_sided_gaussian_quantile(0.9)) == doctest::Approx(0.9));
    const auto s = DerlState::from_sigma_factor(1.0, 5.0, 1e-3);
    CHECK(s.sigma_fac == 5.0);
    CHECK(s.p_lim == doctest::Approx(0.99999942669686));
    CHECK_THROWS_AS(two_sided_gaussian_quantile(1.0), std::invalid_argument);
    CHECK_THROWS_AS(DerlState::from_probability(-1.0, 0.9, 1e-3), std::invalid_argument);
    CHECK_THROWS_AS(DerlState::from_probability(1.0, 0.9, 0.0), std::invalid_argument);
}

TEST_CASE("compute_zlim")
{
    CHECK(compute_zlim(0.05, 0.024, 0.0) == doctest::Approx(2.0833333333));
    CHECK(compute_zlim(0.05, 0.024, 5.0) == 0.0);
    CHECK(compute_zlim(0.1061, 0.2653, 0.2) == doctest::Approx(0.2).epsilon(1e-3));
}

TEST_CASE("probabilistic branch: Monte Carlo rate bound holds with at least p_lim")
{
    for (double p_lim : {0.95, 0.99}) {
        const double T_s = 1e-3, z_lim = 2.0;
        const double sf = two_sided_gaussian_quantile(p_lim);
        // std of each prediction error chosen so the certified spread uses half the rate budget
        const double sd = 0.5 * z_lim * T_s / (sf * std::sqrt(2.0));
        std::mt19937_64 rng(p_lim > 0.97 ? 2 : 1);
        std::normal_distribution<double> N(0.0, sd);
        long certified = 0, within = 0, raw_within = 0;
        const long samples = 100000;
        for (long i = 0; i < samples; ++i) {
            const double z = 4.0; // stationary hidden value
            const double eps_prev = N(rng), eps_next = N(rng);
            auto s = DerlState::from_probability(z_lim, p_lim, T_s, z + eps_prev);
            const auto out = derl_step(s, z + eps_next, sd * sd, sd * sd);
            const double zdot_e = ((out.z_hat - z) - eps_prev) / T_s;
            if (std::abs(eps_next - eps_prev) <= sf * sd * std::sqrt(2.0)) ++raw_within;
            if (out.branch == DerlBranch::Probabilistic) {
                ++certified;
                if (std::abs(zdot_e) <= z_lim) ++within;
            }
        }
        REQUIRE(certified > samples / 2);
        const double p_emp = static_cast<double>(within) / static_cast<double>(certified);
        MESSAGE("p_lim " << p_lim << ": certified " << certified << ", empirical " << p_emp);
        CHECK(p_emp >= p_lim);
        // the quantile itself: unconditional coverage of the spread within 4 standard errors
        const double p_raw = static_cast<double>(raw_within) / samples;
        CHECK(std::abs(p_raw - p_lim) < 4 * std::sqrt(p_lim * (1 - p_lim) / samples));
    }
}

TEST_CASE("deterministic window respects z_lim exactly and stays bounded")
{
    std::mt19937_64 rng(4);
    std::normal_distribution<double> N(0.0, 3.0);
    const double T_s = 1e-3, z_lim = 0.7;
    auto s = DerlState::from_probability(z_lim, 0.99, T_s, 0.0);
    double lo = 0.0, hi = 0.0, max_rate = 0.0;
    bool all_det = true;
    const int n = 5000;
    for (int k = 0; k < n; ++k) {
        const double zt = N(rng);
        lo = std::min(lo, zt);
        hi = std::max(hi, zt);
        const double prev = s.z_hat;
        const auto out = derl_step(s, zt, 0.25, 0.25);
        all_det = all_det && out.branch == DerlBranch::Deterministic;
        max_rate = std::max(max_rate, std::abs(out.z_hat - prev) / T_s);
        CHECK(out.z_hat >= lo - z_lim * n * T_s);
        CHECK(out.z_hat <= hi + z_lim * n * T_s);
    }
    REQUIRE(all_det);
    CHECK(max_rate <= z_lim * (1 + 1e-12));
}

TEST_CASE("replay gives identical outputs")
{
    std::vector<double> zt, var;
    std::mt19937_64 rng(8);
    std::normal_distribution<double> N;
    for (int i = 0; i < 1000; ++i) {
        zt.push_back(N(rng));
        var.push_back(std::abs(N(rng)) * 1e-8);
    }
    auto run = [&] {
        auto s = DerlState::from_sigma_factor(300.0, 5.0, 1e-3);
        std::vector<double> out;
        for (std::size_t i = 1; i < zt.size(); ++i) out.push_back(derl_step(s, zt[i], var[i], var[i - 1]).z_hat);
        return out;
    };
    CHECK(run() == run());
}
