#include "doctest.h"

#include <cmath>
#include <random>
#include <variant>

#include "carleson/sparse.hpp"
#include "test_util.hpp"

using namespace carleson;

TEST_CASE("disjoint sets saturate at C = 1") {
    DiscreteMeasure mu({{"a", 0.5, {}}, {"b", 0.5, {}}}, MeasureMode::divisible);
    SetSystem system(std::move(mu), {{"S1", {"a"}, ""}, {"S2", {"b"}, ""}});
    CoefficientFamily lambda{{{"S1", 0.5}, {"S2", 0.5}}};
    auto result = sparse_witness_fractional(system, lambda, 1.0);
    REQUIRE(std::holds_alternative<SparseWitness>(result));
    const auto& w = std::get<SparseWitness>(result);
    CHECK(w.fraction("S1", "a") == doctest::Approx(1.0));
    CHECK(w.fraction("S2", "b") == doctest::Approx(1.0));
    CHECK(verify_witness(system, lambda, 1.0, w).feasible);
}

TEST_CASE("depth-2 tree splits each atom a third per ancestor") {
    auto tree = gen_dyadic_cubes(1, 2);
    auto lambda = test_util::lambda_equal_mass(tree);
    auto result = sparse_witness_fractional(tree, lambda, 3.0);
    REQUIRE(std::holds_alternative<SparseWitness>(result));
    const auto& w = std::get<SparseWitness>(result);
    auto report = verify_witness(tree, lambda, 3.0, w);
    CHECK(report.feasible);
    // every set gets exactly lambda / C of mass
    for (const auto& row : report.rows)
        CHECK(row.witness_mass == doctest::Approx(row.lambda / 3.0));
}

TEST_CASE("infeasible constant yields a strictly violating cut") {
    auto dirac = test_util::dirac_instance(MeasureMode::divisible);
    auto result = sparse_witness_fractional(dirac.system, dirac.lambda, 1.5);
    REQUIRE(std::holds_alternative<CutCertificate>(result));
    const auto& cert = std::get<CutCertificate>(result);
    CHECK(cert.kind == CertificateKind::violation);
    CHECK(cert.subcollection.set_ids == std::vector<std::string>{"S1", "S2"});
    CHECK(cert.ratio == doctest::Approx(2.0));
}

TEST_CASE("fractional witness rejects indivisible measures and bad C") {
    auto dirac = test_util::dirac_instance(MeasureMode::indivisible);
    CHECK_THROWS_AS(sparse_witness_fractional(dirac.system, dirac.lambda, 2.0),
                    std::invalid_argument);
    auto div = test_util::dirac_instance(MeasureMode::divisible);
    CHECK_THROWS_AS(sparse_witness_fractional(div.system, div.lambda, 0.0),
                    std::invalid_argument);
}

TEST_CASE("integral mode: the point mass cannot be divided") {
    auto dirac = test_util::dirac_instance(MeasureMode::indivisible);
    for (double C : {2.0, 10.0, 1000.0})
        CHECK(!sparse_witness_integral(dirac.system, dirac.lambda, C).has_value());
}

TEST_CASE("integral mode: disjoint singletons take their atoms") {
    DiscreteMeasure mu({{"a", 0.3, {}}, {"b", 0.7, {}}}, MeasureMode::indivisible);
    SetSystem system(std::move(mu), {{"S1", {"a"}, ""}, {"S2", {"b"}, ""}});
    CoefficientFamily lambda{{{"S1", 0.3}, {"S2", 0.7}}};
    auto w = sparse_witness_integral(system, lambda, 1.0);
    REQUIRE(w.has_value());
    CHECK(w->fraction("S1", "a") == 1.0);
    CHECK(w->fraction("S2", "b") == 1.0);
    CHECK(verify_witness(system, lambda, 1.0, *w).feasible);
}

TEST_CASE("mode gap: three demands on two atoms") {
    // depth-1 tree: 3 sets, 2 atoms of mass 1/2; lambda = mass, C = 2
    auto tree = gen_dyadic_cubes(1, 1);
    auto lambda = test_util::lambda_equal_mass(tree);
    auto frac = sparse_witness_fractional(tree, lambda, 2.0);
    CHECK(std::holds_alternative<SparseWitness>(frac));
    CHECK(!sparse_witness_integral(tree, lambda, 2.0).has_value());
}

TEST_CASE("mode gap vanishes when the Dirac masses become divisible") {
    auto dirac = test_util::dirac_instance(MeasureMode::divisible);
    CHECK(!sparse_witness_integral(dirac.system, dirac.lambda, 2.0).has_value());
    auto frac = sparse_witness_fractional(dirac.system, dirac.lambda, 2.0);
    REQUIRE(std::holds_alternative<SparseWitness>(frac));
    const auto& w = std::get<SparseWitness>(frac);
    CHECK(w.fraction("S1", "x") == doctest::Approx(0.5));
    CHECK(w.fraction("S2", "x") == doctest::Approx(0.5));
}

TEST_CASE("verify_witness reports every violation") {
    DiscreteMeasure mu({{"a", 1.0, {}}, {"b", 1.0, {}}}, MeasureMode::divisible);
    SetSystem system(std::move(mu), {{"S1", {"a"}, ""}, {"S2", {"a", "b"}, ""}});
    CoefficientFamily lambda{{{"S1", 1.0}, {"S2", 1.0}}};

    SparseWitness overlapping;
    overlapping.assignment["S1"]["a"] = 1.0;
    overlapping.assignment["S2"]["a"] = 0.5;
    auto report = verify_witness(system, lambda, 1.0, overlapping);
    CHECK(!report.feasible);
    bool mentions_atom = false;
    for (const auto& v : report.violations)
        if (v.find("'a'") != std::string::npos) mentions_atom = true;
    CHECK(mentions_atom);

    SparseWitness outside;
    outside.assignment["S1"]["b"] = 1.0;  // b is not a member of S1
    CHECK(!verify_witness(system, lambda, 1.0, outside).feasible);

    SparseWitness empty;
    CHECK(verify_witness(system, CoefficientFamily{}, 1.0, empty).feasible);
}

TEST_CASE("sparse_implies_carleson_check on constructed witnesses") {
    std::mt19937_64 rng(53);
    for (int trial = 0; trial < 40; ++trial) {
        auto inst = test_util::random_instance(rng, 10, 20);
        auto [c, cert] = carleson_constant(inst.system, inst.lambda);
        (void)cert;
        if (c == 0.0 || std::isinf(c)) continue;
        auto result = sparse_witness_fractional(inst.system, inst.lambda, c);
        REQUIRE(std::holds_alternative<SparseWitness>(result));
        const auto& w = std::get<SparseWitness>(result);
        CHECK(verify_witness(inst.system, inst.lambda, c, w).feasible);
        CHECK(sparse_implies_carleson_check(inst.system, inst.lambda, c, w));
    }
}

TEST_CASE("witness conservation") {
    std::mt19937_64 rng(59);
    for (int trial = 0; trial < 30; ++trial) {
        auto inst = test_util::random_instance(rng, 10, 20);
        auto [c, cert] = carleson_constant(inst.system, inst.lambda);
        (void)cert;
        if (c == 0.0 || std::isinf(c)) continue;
        auto result = sparse_witness_fractional(inst.system, inst.lambda, c);
        REQUIRE(std::holds_alternative<SparseWitness>(result));
        const auto& w = std::get<SparseWitness>(result);
        double assigned = 0.0;
        for (const auto& [sid, row] : w.assignment) {
            double set_mass = 0.0;
            for (const auto& [aid, frac] : row)
                set_mass += frac * inst.system.measure().mass_at(
                                       inst.system.measure().index_of(aid));
            assigned += set_mass;
            CHECK(c * set_mass >= inst.lambda.at(sid) - 1e-9 * (1.0 + inst.lambda.at(sid)));
        }
        CHECK(assigned <= total_mass(inst.system.measure()) + 1e-9);
    }
}

TEST_CASE("minimal_sparse_constant equals the Carleson constant") {
    auto dirac = test_util::dirac_instance(MeasureMode::divisible);
    CHECK(minimal_sparse_constant(dirac.system, dirac.lambda) == doctest::Approx(2.0));

    auto tree = gen_dyadic_cubes(1, 2);
    CHECK(minimal_sparse_constant(tree, test_util::lambda_equal_mass(tree)) ==
          doctest::Approx(3.0));
    CHECK(minimal_sparse_constant(tree, CoefficientFamily{}) == 0.0);

    std::mt19937_64 rng(61);
    for (int trial = 0; trial < 30; ++trial) {
        auto inst = test_util::random_instance(rng, 10, 20);
        auto [c, cert] = carleson_constant_exact(inst.system, inst.lambda);
        (void)cert;
        double minimal = minimal_sparse_constant(inst.system, inst.lambda);
        CHECK(std::abs(minimal - c) <= 1e-9 * (1.0 + c));
        // strictly below the constant, no witness exists
        if (c > 0.0 && !std::isinf(c)) {
            auto below = sparse_witness_fractional(inst.system, inst.lambda,
                                                   c * (1.0 - 1e-6));
            CHECK(std::holds_alternative<CutCertificate>(below));
            if (std::holds_alternative<CutCertificate>(below)) {
                const auto& cut = std::get<CutCertificate>(below);
                CHECK(cut.ratio > c * (1.0 - 1e-6));
            }
        }
    }
}
