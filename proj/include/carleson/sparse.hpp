#ifndef CARLESON_SPARSE_HPP
#define CARLESON_SPARSE_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "carleson/carleson.hpp"
#include "carleson/flow.hpp"
#include "carleson/set_system.hpp"

namespace carleson {

enum class WitnessMode { fractional, integral };

/// Pairwise-disjoint assignment of atom mass to sets: fraction(S, a) of
/// atom a's mass belongs to E_S.
struct SparseWitness {
    WitnessMode mode = WitnessMode::fractional;
    std::map<std::string, std::map<std::string, double>> assignment;

    double fraction(const std::string& set_id, const std::string& atom_id) const {
        auto it = assignment.find(set_id);
        if (it == assignment.end()) return 0.0;
        auto jt = it->second.find(atom_id);
        return jt == it->second.end() ? 0.0 : jt->second;
    }
};

struct WitnessRow {
    std::string set_id;
    double lambda = 0.0;
    double witness_mass = 0.0;  // mu(E_S)
    double slack = 0.0;         // C * mu(E_S) - lambda_S
};

struct WitnessReport {
    bool feasible = false;
    std::vector<WitnessRow> rows;
    std::vector<std::string> violations;  // human-readable, one per failed check
};

/// Result of a fractional witness construction: either a witness or a
/// violating subcollection proving no witness exists at this constant.
using FractionalResult = std::variant<SparseWitness, CutCertificate>;

/// Builds the disjoint sets E_S by max flow; infeasibility yields the min
/// cut's violating subcollection.
inline FractionalResult sparse_witness_fractional(const SetSystem& system,
                                                  const CoefficientFamily& lambda,
                                                  double C) {
    if (!(C > 0.0)) throw std::invalid_argument("C must be positive");
    if (system.measure().mode() != MeasureMode::divisible)
        throw std::invalid_argument(
            "fractional witness requires a divisible measure; use the integral variant");
    validate_family(system, lambda);

    CutCertificate inf_cert;
    if (detail::infinite_certificate(system, lambda, inf_cert)) {
        inf_cert.ratio = std::numeric_limits<double>::infinity();
        return inf_cert;
    }

    auto solve = detail::solve_witness_flow(system, lambda, C);
    if (!solve.feasible) {
        CutCertificate cert;
        cert.subcollection = std::move(solve.violation);
        cert.ratio = solve.violation_ratio;
        cert.kind = CertificateKind::violation;
        return cert;
    }
    const auto& w = solve.network;
    const auto& res = solve.flow;

    SparseWitness witness;
    witness.mode = WitnessMode::fractional;
    for (std::size_t k = 0; k < w.active_sets.size(); ++k) {
        const std::string& sid = system.sets()[w.active_sets[k]].id;
        auto& row = witness.assignment[sid];
        for (const auto& [atom_idx, arc_idx] : w.set_atom_arcs[k]) {
            double mass = system.measure().mass_at(atom_idx);
            double flow = res.arc_flow[arc_idx];
            if (mass <= 0.0 || flow <= 0.0) continue;
            row[system.measure().atoms()[atom_idx].id] =
                std::clamp(flow / mass, 0.0, 1.0);
        }
    }
    return witness;
}

/// Exhaustive search over whole-atom assignments. Atoms are assigned to at
/// most one set; feasible iff every positive demand lambda_S / C is covered.
inline std::optional<SparseWitness> sparse_witness_integral(
    const SetSystem& system, const CoefficientFamily& lambda, double C,
    std::size_t atom_budget = 20, std::size_t set_budget = 12) {
    if (!(C > 0.0)) throw std::invalid_argument("C must be positive");
    validate_family(system, lambda);
    const std::size_t atom_count = system.measure().size();
    if (atom_count > atom_budget && system.set_count() > set_budget)
        throw std::invalid_argument("integral search budget exceeded (" +
                                    std::to_string(atom_count) + " atoms, " +
                                    std::to_string(system.set_count()) + " sets)");

    // demands per set with positive lambda
    std::vector<std::size_t> active;
    std::vector<double> demand;
    for (std::size_t i = 0; i < system.set_count(); ++i) {
        double lam = lambda.at(system.sets()[i].id);
        if (lam > 0.0) {
            active.push_back(i);
            demand.push_back(lam / C);
        }
    }
    const std::size_t m = active.size();
    if (m == 0) {
        SparseWitness w;
        w.mode = WitnessMode::integral;
        return w;
    }

    // per atom: which active sets may take it, and remaining availability per set
    std::vector<std::vector<std::size_t>> choices(atom_count);
    std::vector<double> avail(m, 0.0);
    for (std::size_t k = 0; k < m; ++k) {
        const auto& mask = system.mask(active[k]);
        for (std::size_t a = 0; a < atom_count; ++a)
            if (mask[a / 64] >> (a % 64) & 1) {
                choices[a].push_back(k);
                avail[k] += system.measure().mass_at(a);
            }
    }
    const double tol = kTolerance;
    for (std::size_t k = 0; k < m; ++k)
        if (avail[k] + tol * (1.0 + demand[k]) < demand[k]) return std::nullopt;

    std::vector<double> remaining = demand;  // demand still uncovered
    std::vector<double> future = avail;      // mass of unprocessed atoms per set
    std::vector<int> pick(atom_count, -1);

    auto satisfied = [&](std::size_t k) {
        return remaining[k] <= tol * (1.0 + demand[k]);
    };

    std::function<bool(std::size_t)> dfs = [&](std::size_t a) -> bool {
        bool all_done = true;
        for (std::size_t k = 0; k < m; ++k)
            if (!satisfied(k)) {
                if (remaining[k] > future[k] + tol * (1.0 + demand[k])) return false;
                all_done = false;
            }
        if (all_done) return true;
        if (a == atom_count) return false;

        double mass = system.measure().mass_at(a);
        for (std::size_t k : choices[a]) {
            future[k] -= mass;
        }
        // try giving the atom to each candidate set, then to none
        for (std::size_t k : choices[a]) {
            if (mass <= 0.0 || satisfied(k)) continue;
            remaining[k] -= mass;
            pick[a] = static_cast<int>(k);
            if (dfs(a + 1)) return true;
            pick[a] = -1;
            remaining[k] += mass;
        }
        bool ok = dfs(a + 1);
        if (!ok)
            for (std::size_t k : choices[a]) future[k] += mass;
        return ok;
    };

    if (!dfs(0)) return std::nullopt;

    SparseWitness w;
    w.mode = WitnessMode::integral;
    for (std::size_t a = 0; a < atom_count; ++a)
        if (pick[a] >= 0)
            w.assignment[system.sets()[active[pick[a]]].id]
                        [system.measure().atoms()[a].id] = 1.0;
    return w;
}

/// Checks containment, per-atom disjointness, and the coverage inequality
/// lambda_S <= C * mu(E_S); reports every violation.
inline WitnessReport verify_witness(const SetSystem& system, const CoefficientFamily& lambda,
                                    double C, const SparseWitness& witness) {
    WitnessReport report;
    report.feasible = true;

    std::map<std::string, double> atom_total;
    for (const auto& [sid, row] : witness.assignment) {
        if (!system.has_set(sid)) {
            report.violations.push_back("witness references unknown set '" + sid + "'");
            report.feasible = false;
            continue;
        }
        const auto& mask = system.mask(system.set_index(sid));
        for (const auto& [aid, frac] : row) {
            std::size_t idx = system.measure().index_of(aid);
            if (!(mask[idx / 64] >> (idx % 64) & 1)) {
                report.violations.push_back("atom '" + aid + "' assigned to set '" + sid +
                                            "' but is not a member");
                report.feasible = false;
            }
            if (frac < -1e-12 || frac > 1.0 + 1e-12) {
                report.violations.push_back("fraction of atom '" + aid + "' in set '" + sid +
                                            "' outside [0,1]");
                report.feasible = false;
            }
            if (witness.mode == WitnessMode::integral && frac != 0.0 && frac != 1.0) {
                report.violations.push_back("integral witness has fractional assignment of "
                                            "atom '" + aid + "' in set '" + sid + "'");
                report.feasible = false;
            }
            atom_total[aid] += frac;
        }
    }
    for (const auto& [aid, total] : atom_total)
        if (total > 1.0 + 1e-12) {
            report.violations.push_back("atom '" + aid + "' overassigned: fractions sum to " +
                                        std::to_string(total));
            report.feasible = false;
        }

    for (const auto& s : system.sets()) {
        WitnessRow row;
        row.set_id = s.id;
        row.lambda = lambda.at(s.id);
        auto it = witness.assignment.find(s.id);
        if (it != witness.assignment.end())
            for (const auto& [aid, frac] : it->second)
                row.witness_mass += frac * system.measure().mass_at(system.measure().index_of(aid));
        row.slack = C * row.witness_mass - row.lambda;
        if (row.slack < -kTolerance * (1.0 + row.lambda)) {
            report.violations.push_back("set '" + s.id + "' undercovered: lambda " +
                                        std::to_string(row.lambda) + " > C*mu(E_S) " +
                                        std::to_string(C * row.witness_mass));
            report.feasible = false;
        }
        report.rows.push_back(row);
    }
    return report;
}

/// Confirms the sparse => Carleson chain over every enumerable union:
/// sum over S inside Omega of lambda_S <= C * sum mu(E_S) <= C * mu(Omega).
inline bool sparse_implies_carleson_check(const SetSystem& system,
                                          const CoefficientFamily& lambda, double C,
                                          const SparseWitness& witness,
                                          std::size_t budget = kDefaultEnumerationBudget) {
    const std::size_t n = system.set_count();
    if (n > budget)
        throw std::invalid_argument("union enumeration budget exceeded");

    std::vector<double> witness_mass(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        auto it = witness.assignment.find(system.sets()[i].id);
        if (it != witness.assignment.end())
            for (const auto& [aid, frac] : it->second)
                witness_mass[i] +=
                    frac * system.measure().mass_at(system.measure().index_of(aid));
    }

    const std::size_t blocks = system.mask_blocks();
    std::vector<std::uint64_t> acc(blocks);
    for (std::uint64_t sub = 1; sub < (std::uint64_t(1) << n); ++sub) {
        std::fill(acc.begin(), acc.end(), 0);
        for (std::size_t i = 0; i < n; ++i)
            if (sub >> i & 1) {
                const auto& m = system.mask(i);
                for (std::size_t b = 0; b < blocks; ++b) acc[b] |= m[b];
            }
        double lam_inside = 0.0, wit_inside = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            if (SetSystem::mask_subset(system.mask(i), acc)) {
                lam_inside += lambda.at(system.sets()[i].id);
                wit_inside += witness_mass[i];
            }
        double omega_mass = system.mask_mass(acc);
        if (lam_inside > C * wit_inside + kTolerance * (1.0 + C * wit_inside)) return false;
        if (C * wit_inside > C * omega_mass + kTolerance * (1.0 + C * omega_mass))
            return false;
    }
    return true;
}

/// Least constant admitting a fractional witness. Equals the Carleson
/// constant (the same-constant theorem); the equality is asserted by
/// re-solving the boundary flow.
inline double minimal_sparse_constant(const SetSystem& system,
                                      const CoefficientFamily& lambda) {
    if (system.measure().mode() != MeasureMode::divisible)
        throw std::invalid_argument("minimal_sparse_constant requires a divisible measure");
    auto [constant, cert] = carleson_constant(system, lambda);
    (void)cert;
    if (constant == 0.0 || std::isinf(constant)) return constant;
    auto result = sparse_witness_fractional(system, lambda, constant);
    if (!std::holds_alternative<SparseWitness>(result))
        throw std::logic_error(
            "internal: witness flow infeasible at the computed Carleson constant");
    return constant;
}

}  // namespace carleson

#endif
