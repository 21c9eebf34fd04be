#include "doctest.h"

#include <random>

#include "carleson/measure.hpp"
#include "test_util.hpp"

using namespace carleson;

namespace {

DiscreteMeasure uniform_grid4() {
    return DiscreteMeasure({{"a0", 0.25, {}}, {"a1", 0.25, {}}, {"a2", 0.25, {}},
                            {"a3", 0.25, {}}},
                           MeasureMode::divisible);
}

}  // namespace

TEST_CASE("total_mass") {
    CHECK(total_mass(DiscreteMeasure({}, MeasureMode::divisible)) == 0.0);
    CHECK(total_mass(uniform_grid4()) == doctest::Approx(1.0));
    DiscreteMeasure two({{"a", 1.5, {}}, {"b", 2.5, {}}}, MeasureMode::divisible);
    CHECK(total_mass(two) == doctest::Approx(4.0));
}

TEST_CASE("mass_of") {
    auto mu = uniform_grid4();
    CHECK(mass_of(mu, std::vector<std::string>{}) == 0.0);
    CHECK(mass_of(mu, std::vector<std::string>{"a0", "a1", "a2", "a3"}) ==
          doctest::Approx(1.0));
    CHECK(mass_of(mu, std::vector<std::string>{"a1", "a3"}) == doctest::Approx(0.5));
    CHECK_THROWS_WITH_AS(mass_of(mu, std::vector<std::string>{"nope"}),
                         "unknown atom id 'nope'", std::invalid_argument);
}

TEST_CASE("construction rejects bad atoms") {
    CHECK_THROWS_AS(DiscreteMeasure({{"a", -1.0, {}}}, MeasureMode::divisible),
                    std::invalid_argument);
    CHECK_THROWS_AS(DiscreteMeasure({{"a", 1.0, {}}, {"a", 2.0, {}}},
                                    MeasureMode::divisible),
                    std::invalid_argument);
}

TEST_CASE("direct_integral") {
    auto mu = uniform_grid4();
    CHECK(direct_integral(mu, StepFunction{}) == 0.0);
    StepFunction ones;
    for (const auto& a : mu.atoms()) ones.values[a.id] = 1.0;
    CHECK(direct_integral(mu, ones) == doctest::Approx(total_mass(mu)));
    StepFunction f;
    f.values["a1"] = 2.0;
    CHECK(direct_integral(mu, f) == doctest::Approx(0.5));
    StepFunction bad;
    bad.values["missing"] = 1.0;
    CHECK_THROWS_AS(direct_integral(mu, bad), std::invalid_argument);
}

TEST_CASE("layer_cake_integral matches the spec examples") {
    DiscreteMeasure mu({{"a1", 0.5, {}}, {"a2", 0.5, {}}}, MeasureMode::divisible);
    CHECK(layer_cake_integral(mu, StepFunction{}) == 0.0);
    StepFunction flat;
    flat.values = {{"a1", 1.0}, {"a2", 1.0}};
    CHECK(layer_cake_integral(mu, flat) == doctest::Approx(1.0));

    DiscreteMeasure quarter({{"a1", 0.25, {}}, {"a2", 0.25, {}}}, MeasureMode::divisible);
    StepFunction steps;
    steps.values = {{"a1", 2.0}, {"a2", 1.0}};
    double direct = direct_integral(quarter, steps);
    CHECK(direct == doctest::Approx(0.75));
    CHECK(layer_cake_integral(quarter, steps) == doctest::Approx(direct));
}

TEST_CASE("distribution formula agrees with the direct sum on random functions") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        std::size_t n = 1 + rng() % 30;
        std::vector<Atom> atoms;
        for (std::size_t i = 0; i < n; ++i)
            atoms.push_back({"a" + std::to_string(i), test_util::uniform01(rng), {}});
        DiscreteMeasure mu(std::move(atoms), MeasureMode::divisible);
        StepFunction f;
        for (std::size_t i = 0; i < n; ++i)
            if (rng() % 2) {
                // repeated values exercise the level-set grouping
                double v = (rng() % 5) * 0.5 + test_util::uniform01(rng) * (rng() % 2);
                f.values["a" + std::to_string(i)] = v;
            }
        double direct = direct_integral(mu, f);
        double cake = layer_cake_integral(mu, f);
        CHECK(std::abs(cake - direct) <= 1e-12 * (1.0 + direct));
    }
}

TEST_CASE("mass_of is finitely additive over disjoint id sets") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        std::size_t n = 1 + rng() % 20;
        std::vector<Atom> atoms;
        for (std::size_t i = 0; i < n; ++i)
            atoms.push_back({"a" + std::to_string(i), test_util::uniform01(rng), {}});
        DiscreteMeasure mu(std::move(atoms), MeasureMode::divisible);
        std::vector<std::string> left, right, all;
        for (std::size_t i = 0; i < n; ++i) {
            all.push_back("a" + std::to_string(i));
            (rng() % 2 ? left : right).push_back("a" + std::to_string(i));
        }
        CHECK(mass_of(mu, left) + mass_of(mu, right) == doctest::Approx(mass_of(mu, all)));
        CHECK(mass_of(mu, all) == doctest::Approx(total_mass(mu)));
    }
}
