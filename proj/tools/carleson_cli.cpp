// Command-line front end: instance ingestion, dyadic generators, Carleson
// constant computation, sparse witness construction and verification, dual
// estimate sampling, and the point-mass obstruction demo.
//
// Exit codes: 0 success, 1 input error, 2 mathematical infeasibility,
// 3 internal assertion (oracle disagreement).

#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <limits>
#include <random>
#include <string>
#include <variant>

#include "CLI11.hpp"

#include "carleson/carleson.hpp"
#include "carleson/json_io.hpp"
#include "carleson/measure.hpp"
#include "carleson/set_system.hpp"
#include "carleson/sparse.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

using carleson::json;

struct GlobalOpts {
    std::string output = "json";  // json | csv
    std::uint64_t seed = 0;
    double tolerance = 1e-9;
    std::size_t budget = 20;
};

// Deterministic uniform draw on [0,1); avoids the library distribution so
// that reports are reproducible across standard library implementations.
double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

json digest(const carleson::SetSystem& system) {
    return {{"atoms", system.measure().size()},
            {"sets", system.set_count()},
            {"total_mass", carleson::total_mass(system.measure())}};
}

json run_report(const std::string& command, const carleson::SetSystem& system,
                json results, double ms) {
    return {{"command", command},
            {"instance", digest(system)},
            {"results", std::move(results)},
            {"timing_ms", ms},
            {"version", kVersion}};
}

class Timer {
  public:
    double ms() const {
        return std::chrono::duration<double, std::milli>(
                   std::chrono::steady_clock::now() - start_)
            .count();
    }

  private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

int run_constant(const GlobalOpts& g, const std::string& path, const std::string& method,
                 bool unions) {
    Timer timer;
    auto inst = carleson::load_instance(path);
    json results;
    double flow_c = 0.0, exact_c = 0.0;
    carleson::CutCertificate cert;

    if (method == "exact" || method == "both") {
        auto [c, ce] = carleson::carleson_constant_exact(inst.system, inst.lambda, g.budget);
        exact_c = c;
        cert = ce;
        results["exact"] = carleson::certificate_to_json(c, ce);
    }
    if (method == "flow" || method == "both") {
        auto [c, ce] = carleson::carleson_constant(inst.system, inst.lambda);
        flow_c = c;
        cert = ce;
        results["flow"] = carleson::certificate_to_json(c, ce);
    }
    if (unions) {
        double c = carleson::carleson_constant_via_unions(inst.system, inst.lambda, g.budget);
        results["unions"] = carleson::number_or_inf(c);
        double ref = method == "flow" ? flow_c : exact_c;
        if (std::isinf(c) != std::isinf(ref) ||
            (!std::isinf(c) && std::abs(c - ref) > g.tolerance * (1.0 + std::abs(ref)))) {
            std::cerr << "oracle disagreement: unions " << c << " vs " << ref << "\n";
            return 3;
        }
    }
    if (method == "both") {
        if (std::isinf(exact_c) != std::isinf(flow_c) ||
            (!std::isinf(exact_c) &&
             std::abs(exact_c - flow_c) > g.tolerance * (1.0 + std::abs(exact_c)))) {
            std::cerr << "oracle disagreement: exact " << exact_c << " vs flow " << flow_c
                      << "\n";
            return 3;
        }
    }

    if (g.output == "csv") {
        double c = method == "exact" ? exact_c : flow_c;
        std::cout << "constant,kind\n"
                  << (std::isinf(c) ? std::string("inf") : std::to_string(c)) << ","
                  << (cert.kind == carleson::CertificateKind::extremal ? "extremal"
                                                                       : "violation")
                  << "\n";
    } else {
        std::cout << run_report("constant", inst.system, results, timer.ms()).dump(2) << "\n";
    }
    return 0;
}

int run_witness(const GlobalOpts& g, const std::string& path, double C, bool auto_c,
                const std::string& mode) {
    Timer timer;
    auto inst = carleson::load_instance(path);
    if (auto_c) {
        C = carleson::minimal_sparse_constant(inst.system, inst.lambda);
        if (C == 0.0) {
            json results = {{"C", 0.0}, {"note", "all coefficients zero; empty witness"}};
            std::cout << run_report("witness", inst.system, results, timer.ms()).dump(2)
                      << "\n";
            return 0;
        }
        if (std::isinf(C)) {
            std::cerr << "no finite constant: a zero-mass set carries positive lambda\n";
            return 2;
        }
    }

    if (mode == "integral") {
        auto witness =
            carleson::sparse_witness_integral(inst.system, inst.lambda, C);
        if (!witness) {
            json results = {{"C", C}, {"feasible", false},
                            {"note", "no integral witness exists at this constant"}};
            std::cout << run_report("witness", inst.system, results, timer.ms()).dump(2)
                      << "\n";
            return 2;
        }
        auto report = carleson::verify_witness(inst.system, inst.lambda, C, *witness);
        json results = {{"witness", carleson::witness_to_json(*witness, C)},
                        {"report", carleson::witness_report_to_json(report)}};
        std::cout << run_report("witness", inst.system, results, timer.ms()).dump(2) << "\n";
        return report.feasible ? 0 : 3;
    }

    auto result = carleson::sparse_witness_fractional(inst.system, inst.lambda, C);
    if (std::holds_alternative<carleson::CutCertificate>(result)) {
        const auto& cert = std::get<carleson::CutCertificate>(result);
        json results = {{"C", C},
                        {"feasible", false},
                        {"certificate", carleson::certificate_to_json(cert.ratio, cert)}};
        std::cout << run_report("witness", inst.system, results, timer.ms()).dump(2) << "\n";
        return 2;
    }
    const auto& witness = std::get<carleson::SparseWitness>(result);
    auto report = carleson::verify_witness(inst.system, inst.lambda, C, witness);
    json results = {{"witness", carleson::witness_to_json(witness, C)},
                    {"report", carleson::witness_report_to_json(report)}};
    std::cout << run_report("witness", inst.system, results, timer.ms()).dump(2) << "\n";
    return report.feasible ? 0 : 3;
}

int run_dual_check(const GlobalOpts& g, const std::string& path, int samples) {
    Timer timer;
    auto inst = carleson::load_instance(path);
    auto [constant, cert] = carleson::carleson_constant(inst.system, inst.lambda);
    if (std::isinf(constant)) {
        std::cerr << "constant is infinite; dual check undefined\n";
        return 2;
    }

    std::mt19937_64 rng(g.seed);
    json rows = json::array();
    double max_ratio = 0.0;

    auto evaluate = [&](const carleson::TestFamily& a, const std::string& tag) {
        double lhs = carleson::dual_pairing(inst.lambda, a);
        double integral = carleson::layer_cake_integral(
            inst.system.measure(), carleson::upper_envelope(inst.system, a));
        double ratio = lhs == 0.0 ? 0.0
                       : integral == 0.0 ? std::numeric_limits<double>::infinity()
                                         : lhs / integral;
        max_ratio = std::max(max_ratio, ratio);
        rows.push_back({{"family", tag},
                        {"lhs", lhs},
                        {"integral", integral},
                        {"ratio", carleson::number_or_inf(ratio)}});
        return ratio;
    };

    // canonical maximizer: indicator of the extremal subcollection
    carleson::TestFamily canonical;
    for (const auto& sid : cert.subcollection.set_ids) canonical.a[sid] = 1.0;
    double canonical_ratio = evaluate(canonical, "extremal-indicator");

    static const double magnitudes[] = {1.0, 10.0, 100.0};
    for (int i = 0; i < samples; ++i) {
        carleson::TestFamily a;
        double mag = magnitudes[rng() % 3];
        for (const auto& s : inst.system.sets()) a.a[s.id] = mag * uniform01(rng);
        evaluate(a, "random-" + std::to_string(i));
    }

    bool attained =
        std::abs(canonical_ratio - constant) <= g.tolerance * (1.0 + std::abs(constant));
    bool bounded = max_ratio <= constant + g.tolerance * (1.0 + std::abs(constant));

    if (g.output == "csv") {
        std::cout << "family,lhs,integral,ratio\n";
        for (const auto& r : rows)
            std::cout << r["family"].get<std::string>() << "," << r["lhs"].get<double>()
                      << "," << r["integral"].get<double>() << "," << r["ratio"].dump()
                      << "\n";
    } else {
        json results = {{"constant", constant},
                        {"max_ratio", carleson::number_or_inf(max_ratio)},
                        {"canonical_attains", attained},
                        {"bounded", bounded},
                        {"rows", rows}};
        std::cout << run_report("dual-check", inst.system, results, timer.ms()).dump(2)
                  << "\n";
    }
    if (!attained || !bounded) {
        std::cerr << "dual estimate falsified: max ratio " << max_ratio << " vs constant "
                  << constant << "\n";
        return 3;
    }
    return 0;
}

int run_gen(const GlobalOpts& g, const std::string& kind, int dimension, int depth,
            int depth_x, int depth_y, const std::string& lambda_rule,
            const std::string& out_path) {
    carleson::SetSystem system = kind == "cubes"
                                     ? carleson::gen_dyadic_cubes(dimension, depth)
                                     : carleson::gen_dyadic_rectangles(depth_x, depth_y);
    carleson::CoefficientFamily lambda;
    std::mt19937_64 rng(g.seed);
    for (const auto& s : system.sets()) {
        double v;
        if (lambda_rule == "mass")
            v = system.mask_mass(system.mask(system.set_index(s.id)));
        else if (lambda_rule == "unit")
            v = 1.0;
        else
            v = uniform01(rng);
        lambda.lambda[s.id] = v;
    }
    json doc = carleson::instance_to_json(system, lambda);
    if (out_path.empty() || out_path == "-") {
        std::cout << doc.dump(2) << "\n";
    } else {
        std::ofstream out(out_path);
        if (!out) {
            std::cerr << "cannot write '" << out_path << "'\n";
            return 1;
        }
        out << doc.dump(2) << "\n";
    }
    return 0;
}

carleson::Instance dirac_instance(carleson::MeasureMode mode) {
    carleson::DiscreteMeasure mu({{"x", 1.0, {}}}, mode);
    std::vector<carleson::SetEntry> sets = {{"S1", {"x"}, ""}, {"S2", {"x"}, ""}};
    carleson::CoefficientFamily lambda;
    lambda.lambda = {{"S1", 1.0}, {"S2", 1.0}};
    return {carleson::SetSystem(std::move(mu), std::move(sets)), std::move(lambda)};
}

int run_demo_pointmass(const GlobalOpts& g) {
    Timer timer;
    auto indiv = dirac_instance(carleson::MeasureMode::indivisible);
    auto div = dirac_instance(carleson::MeasureMode::divisible);

    auto [c_indiv, cert_indiv] = carleson::carleson_constant_exact(indiv.system, indiv.lambda);
    auto [c_div, cert_div] = carleson::carleson_constant_exact(div.system, div.lambda);

    json integral_rows = json::array();
    bool all_infeasible = true;
    for (double C : {2.0, 10.0, 1000.0}) {
        auto w = carleson::sparse_witness_integral(indiv.system, indiv.lambda, C);
        integral_rows.push_back({{"C", C}, {"feasible", w.has_value()}});
        if (w) all_infeasible = false;
    }

    auto frac = carleson::sparse_witness_fractional(div.system, div.lambda, c_div);
    bool frac_feasible = std::holds_alternative<carleson::SparseWitness>(frac);

    if (g.output == "json") {
        json results = {{"carleson_constant_indivisible", c_indiv},
                        {"carleson_constant_divisible", c_div},
                        {"integral_witness", integral_rows},
                        {"fractional_feasible_at_constant", frac_feasible}};
        if (frac_feasible)
            results["fractional_witness"] = carleson::witness_to_json(
                std::get<carleson::SparseWitness>(frac), c_div);
        std::cout << run_report("demo-pointmass", indiv.system, results, timer.ms()).dump(2)
                  << "\n";
    } else {
        std::cout << "Dirac example: one atom of mass 1, two sets S1 = S2 = {x}, "
                     "lambda = 1 each\n\n";
        std::cout << "  measure mode  Carleson constant  sparse witness\n";
        std::cout << "  indivisible   " << c_indiv << "                ";
        for (const auto& row : integral_rows)
            std::cout << "C=" << row["C"].get<double>() << ": infeasible  ";
        std::cout << "\n";
        std::cout << "  divisible     " << c_div << "                C=" << c_div
                  << ": feasible (mass split 0.5 / 0.5)\n";
    }
    return (c_indiv == 2.0 && c_div == 2.0 && all_infeasible && frac_feasible) ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Carleson / sparse coefficient equivalence toolkit"};
    app.require_subcommand(1);
    GlobalOpts g;
    app.add_option("--output", g.output, "Report format")
        ->check(CLI::IsMember({"json", "csv"}));
    app.add_option("--seed", g.seed, "Random seed for sampled reports");
    app.add_option("--tolerance", g.tolerance, "Comparison tolerance");
    app.add_option("--budget", g.budget, "Max enumerated sets for exact methods");

    std::string instance_path;
    std::string method = "flow";
    bool unions = false;
    auto* constant = app.add_subcommand("constant", "Compute the Carleson constant");
    constant->add_option("instance", instance_path, "Instance JSON file")->required();
    bool use_exact = false, use_flow = false, use_both = false;
    constant->add_flag("--exact", use_exact, "Enumerate all subcollections");
    constant->add_flag("--flow", use_flow, "Dinkelbach min-cut iteration");
    constant->add_flag("--both", use_both, "Run both and assert agreement");
    constant->add_flag("--unions", unions, "Also cross-check via the union formulation");

    double C = 0.0;
    bool auto_c = false;
    std::string wmode = "fractional";
    auto* witness = app.add_subcommand("witness", "Construct and verify a sparse witness");
    witness->add_option("instance", instance_path, "Instance JSON file")->required();
    auto* copt = witness->add_option("--C", C, "Candidate constant");
    witness->add_flag("--auto", auto_c, "Use the minimal sparse constant");
    witness->add_option("--mode", wmode, "Witness mode")
        ->check(CLI::IsMember({"fractional", "integral"}));

    int samples = 100;
    auto* dual = app.add_subcommand("dual-check", "Sample the dual estimate");
    dual->add_option("instance", instance_path, "Instance JSON file")->required();
    dual->add_option("--samples", samples, "Number of random test families");

    std::string kind, lambda_rule = "mass", out_path;
    int dimension = 1, depth = 0, depth_x = 0, depth_y = 0;
    auto* gen = app.add_subcommand("gen", "Generate a dyadic instance");
    gen->add_option("kind", kind, "cubes or rectangles")
        ->required()
        ->check(CLI::IsMember({"cubes", "rectangles"}));
    gen->add_option("--dimension", dimension, "Cube dimension");
    gen->add_option("--depth", depth, "Cube depth");
    gen->add_option("--depth-x", depth_x, "Rectangle depth in x");
    gen->add_option("--depth-y", depth_y, "Rectangle depth in y");
    gen->add_option("--lambda", lambda_rule, "Coefficient rule")
        ->check(CLI::IsMember({"mass", "unit", "random"}));
    gen->add_option("-o,--out", out_path, "Output file (default stdout)");

    auto* demo = app.add_subcommand("demo-pointmass",
                                    "Point-mass obstruction demonstration");
    (void)demo;

    CLI11_PARSE(app, argc, argv);

    try {
        if (constant->parsed()) {
            if (use_both)
                method = "both";
            else if (use_exact)
                method = "exact";
            else
                method = "flow";
            (void)use_flow;
            return run_constant(g, instance_path, method, unions);
        }
        if (witness->parsed()) {
            if (!auto_c && copt->count() == 0) {
                std::cerr << "witness requires --C <value> or --auto\n";
                return 1;
            }
            return run_witness(g, instance_path, C, auto_c, wmode);
        }
        if (dual->parsed()) return run_dual_check(g, instance_path, samples);
        if (gen->parsed())
            return run_gen(g, kind, dimension, depth, depth_x, depth_y, lambda_rule, out_path);
        if (demo->parsed()) return run_demo_pointmass(g);
    } catch (const std::invalid_argument& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 1;
    } catch (const std::logic_error& e) {
        std::cerr << "internal assertion: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
