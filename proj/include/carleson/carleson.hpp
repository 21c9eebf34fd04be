#ifndef CARLESON_CARLESON_HPP
#define CARLESON_CARLESON_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "carleson/flow.hpp"
#include "carleson/measure.hpp"
#include "carleson/set_system.hpp"

namespace carleson {

constexpr double kTolerance = 1e-9;
constexpr std::size_t kDefaultEnumerationBudget = 20;

/// Nonnegative coefficient per set; missing ids read as 0.
struct CoefficientFamily {
    std::map<std::string, double> lambda;

    double at(const std::string& set_id) const {
        auto it = lambda.find(set_id);
        return it == lambda.end() ? 0.0 : it->second;
    }
};

/// Nonnegative test coefficients a_S for the dual estimate.
struct TestFamily {
    std::map<std::string, double> a;

    double at(const std::string& set_id) const {
        auto it = a.find(set_id);
        return it == a.end() ? 0.0 : it->second;
    }
};

enum class CertificateKind { extremal, violation };

/// Extremal (or violating) subcollection together with its ratio.
struct CutCertificate {
    Subcollection subcollection;
    double ratio = 0.0;  // sum of lambda over mass of the union; may be +inf
    CertificateKind kind = CertificateKind::extremal;
};

inline void validate_family(const SetSystem& system, const CoefficientFamily& lambda) {
    for (const auto& [sid, v] : lambda.lambda) {
        if (!system.has_set(sid))
            throw std::invalid_argument("coefficient references unknown set id '" + sid + "'");
        if (!(v >= 0.0) || !std::isfinite(v))
            throw std::invalid_argument("coefficient of set '" + sid +
                                        "' is negative or non-finite");
    }
}

inline double carleson_ratio(const SetSystem& system, const CoefficientFamily& lambda,
                             const Subcollection& sub) {
    if (sub.set_ids.empty())
        throw std::invalid_argument("carleson_ratio requires a nonempty subcollection");
    std::vector<std::uint64_t> acc(system.mask_blocks(), 0);
    double num = 0.0;
    for (const std::string& sid : sub.set_ids) {
        std::size_t i = system.set_index(sid);
        num += lambda.at(sid);
        const auto& m = system.mask(i);
        for (std::size_t b = 0; b < acc.size(); ++b) acc[b] |= m[b];
    }
    double den = system.mask_mass(acc);
    if (num == 0.0) return 0.0;
    if (den == 0.0) return std::numeric_limits<double>::infinity();
    return num / den;
}

namespace detail {

inline bool lex_less(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::vector<std::string> sa = a, sb = b;
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    return sa < sb;
}

inline CutCertificate zero_certificate(const SetSystem& system) {
    CutCertificate cert;
    cert.kind = CertificateKind::extremal;
    cert.ratio = 0.0;
    if (!system.sets().empty()) {
        std::string smallest = system.sets().front().id;
        for (const auto& s : system.sets()) smallest = std::min(smallest, s.id);
        cert.subcollection.set_ids = {smallest};
    }
    return cert;
}

// Zero-mass set carrying positive lambda: no finite constant exists.
inline bool infinite_certificate(const SetSystem& system, const CoefficientFamily& lambda,
                                 CutCertificate& cert) {
    for (std::size_t i = 0; i < system.set_count(); ++i) {
        const std::string& sid = system.sets()[i].id;
        if (lambda.at(sid) > 0.0 && system.mask_mass(system.mask(i)) == 0.0) {
            cert.subcollection.set_ids = {sid};
            cert.ratio = std::numeric_limits<double>::infinity();
            cert.kind = CertificateKind::violation;
            return true;
        }
    }
    return false;
}

}  // namespace detail

/// Supremum of subcollection ratios by enumeration of all 2^n - 1 nonempty
/// subcollections. Ties broken toward the lexicographically smallest id set.
inline std::pair<double, CutCertificate> carleson_constant_exact(
    const SetSystem& system, const CoefficientFamily& lambda,
    std::size_t budget = kDefaultEnumerationBudget) {
    validate_family(system, lambda);
    const std::size_t n = system.set_count();
    if (n > budget)
        throw std::invalid_argument("instance has " + std::to_string(n) +
                                    " sets, over the enumeration budget of " +
                                    std::to_string(budget) +
                                    "; use the flow method (carleson_constant)");
    if (n == 0) return {0.0, detail::zero_certificate(system)};

    std::vector<double> lam(n);
    std::vector<double> set_mass(n);
    for (std::size_t i = 0; i < n; ++i) {
        lam[i] = lambda.at(system.sets()[i].id);
        set_mass[i] = system.mask_mass(system.mask(i));
    }

    double best = -1.0;
    std::uint64_t best_mask = 0;
    const std::size_t blocks = system.mask_blocks();
    std::vector<std::uint64_t> acc(blocks);
    for (std::uint64_t sub = 1; sub < (std::uint64_t(1) << n); ++sub) {
        std::fill(acc.begin(), acc.end(), 0);
        double num = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            if (sub >> i & 1) {
                num += lam[i];
                const auto& m = system.mask(i);
                for (std::size_t b = 0; b < blocks; ++b) acc[b] |= m[b];
            }
        double den = system.mask_mass(acc);
        double ratio;
        if (num == 0.0)
            ratio = 0.0;
        else if (den == 0.0)
            ratio = std::numeric_limits<double>::infinity();
        else
            ratio = num / den;
        if (ratio > best) {
            best = ratio;
            best_mask = sub;
        } else if (ratio == best) {
            Subcollection cand, cur;
            for (std::size_t i = 0; i < n; ++i) {
                if (sub >> i & 1) cand.set_ids.push_back(system.sets()[i].id);
                if (best_mask >> i & 1) cur.set_ids.push_back(system.sets()[i].id);
            }
            if (detail::lex_less(cand.set_ids, cur.set_ids)) best_mask = sub;
        }
    }

    CutCertificate cert;
    cert.ratio = best;
    cert.kind = std::isinf(best) ? CertificateKind::violation : CertificateKind::extremal;
    for (std::size_t i = 0; i < n; ++i)
        if (best_mask >> i & 1) cert.subcollection.set_ids.push_back(system.sets()[i].id);
    return {best, cert};
}

/// Same supremum expressed over unions: maximizes the total coefficient of
/// sets inside Omega over the mass of Omega, Omega ranging over all unions.
inline double carleson_constant_via_unions(const SetSystem& system,
                                           const CoefficientFamily& lambda,
                                           std::size_t budget = kDefaultEnumerationBudget) {
    validate_family(system, lambda);
    const std::size_t n = system.set_count();
    if (n > budget)
        throw std::invalid_argument("instance has " + std::to_string(n) +
                                    " sets, over the enumeration budget of " +
                                    std::to_string(budget));
    if (n == 0) return 0.0;

    const std::size_t blocks = system.mask_blocks();
    std::vector<double> lam(n);
    for (std::size_t i = 0; i < n; ++i) lam[i] = lambda.at(system.sets()[i].id);

    double best = 0.0;
    std::vector<std::uint64_t> acc(blocks);
    for (std::uint64_t sub = 1; sub < (std::uint64_t(1) << n); ++sub) {
        std::fill(acc.begin(), acc.end(), 0);
        for (std::size_t i = 0; i < n; ++i)
            if (sub >> i & 1) {
                const auto& m = system.mask(i);
                for (std::size_t b = 0; b < blocks; ++b) acc[b] |= m[b];
            }
        double num = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            if (SetSystem::mask_subset(system.mask(i), acc)) num += lam[i];
        double den = system.mask_mass(acc);
        double ratio;
        if (num == 0.0)
            ratio = 0.0;
        else if (den == 0.0)
            ratio = std::numeric_limits<double>::infinity();
        else
            ratio = num / den;
        best = std::max(best, ratio);
    }
    return best;
}

namespace detail {

// Flow network coupling sets (supply lambda_S / C) to the atoms they contain
// (capacity = atom mass into the sink). Sets with lambda_S = 0 are skipped.
struct WitnessNetwork {
    FlowNetwork net;
    std::vector<std::size_t> active_sets;     // system set indices with lambda > 0
    std::vector<std::size_t> source_arcs;     // arc index per active set
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>>
        set_atom_arcs;                        // per active set: (atom index, arc index)
    double target = 0.0;                      // sum of lambda / C
};

inline WitnessNetwork build_witness_network(const SetSystem& system,
                                            const CoefficientFamily& lambda, double C) {
    WitnessNetwork w;
    const auto& sets = system.sets();
    for (std::size_t i = 0; i < sets.size(); ++i)
        if (lambda.at(sets[i].id) > 0.0) w.active_sets.push_back(i);

    const std::size_t m = w.active_sets.size();
    const std::size_t atom_count = system.measure().size();
    w.net.node_count = static_cast<int>(2 + m + atom_count);
    w.net.source = 0;
    w.net.sink = w.net.node_count - 1;
    auto set_node = [](std::size_t k) { return static_cast<int>(1 + k); };
    auto atom_node = [m](std::size_t a) { return static_cast<int>(1 + m + a); };

    for (std::size_t k = 0; k < m; ++k) {
        double lam = lambda.at(sets[w.active_sets[k]].id);
        w.source_arcs.push_back(w.net.add_arc(w.net.source, set_node(k), lam / C));
        w.target += lam / C;
    }
    w.set_atom_arcs.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
        const auto& mask = system.mask(w.active_sets[k]);
        for (std::size_t a = 0; a < atom_count; ++a)
            if (mask[a / 64] >> (a % 64) & 1)
                w.set_atom_arcs[k].emplace_back(a, w.net.add_arc(set_node(k), atom_node(a),
                                                                 kUnbounded));
    }
    for (std::size_t a = 0; a < atom_count; ++a)
        w.net.add_arc(atom_node(a), w.net.sink, system.measure().mass_at(a));
    return w;
}

inline bool witness_feasible(const WitnessNetwork& w, const FlowResult& res) {
    return res.value >= w.target - kTolerance * (1.0 + w.target);
}

}  // namespace detail

/// Subcollection of active sets on the source side of the min cut; violates
/// the candidate constant strictly when the flow is short of its target.
inline Subcollection cut_subcollection(const SetSystem& system,
                                       const detail::WitnessNetwork& w,
                                       const FlowResult& result) {
    if (detail::witness_feasible(w, result))
        throw std::logic_error("cut_subcollection called on a feasible result");
    Subcollection sub;
    for (std::size_t k = 0; k < w.active_sets.size(); ++k)
        if (result.source_side[1 + k])
            sub.set_ids.push_back(system.sets()[w.active_sets[k]].id);
    return sub;
}

namespace detail {

struct WitnessSolve {
    WitnessNetwork network;
    FlowResult flow;
    bool feasible = true;
    Subcollection violation;
    double violation_ratio = 0.0;
};

// Decides feasibility by the cut itself: the source-side subcollection
// violates C iff its exactly-recomputed ratio exceeds C. This is immune to
// the flow value's accumulated rounding.
inline WitnessSolve solve_witness_flow(const SetSystem& system,
                                       const CoefficientFamily& lambda, double C) {
    WitnessSolve s;
    s.network = build_witness_network(system, lambda, C);
    s.flow = max_flow(s.network.net);
    Subcollection sub;
    for (std::size_t k = 0; k < s.network.active_sets.size(); ++k)
        if (s.flow.source_side[1 + k])
            sub.set_ids.push_back(system.sets()[s.network.active_sets[k]].id);
    if (!sub.set_ids.empty()) {
        double r = carleson_ratio(system, lambda, sub);
        if (r > C * (1.0 + 1e-12)) {
            s.feasible = false;
            s.violation = std::move(sub);
            s.violation_ratio = r;
        }
    }
    return s;
}

}  // namespace detail

/// Carleson constant by Dinkelbach iteration over min cuts: raise the
/// candidate constant to the ratio of each violating subcollection until
/// the witness flow saturates.
inline std::pair<double, CutCertificate> carleson_constant(const SetSystem& system,
                                                           const CoefficientFamily& lambda,
                                                           std::size_t* iterations = nullptr) {
    validate_family(system, lambda);
    if (iterations) *iterations = 0;
    CutCertificate cert;
    if (detail::infinite_certificate(system, lambda, cert))
        return {std::numeric_limits<double>::infinity(), cert};

    // start from the best singleton ratio (lex-smallest among ties)
    double c0 = 0.0;
    std::string arg;
    for (const auto& s : system.sets()) {
        double lam = lambda.at(s.id);
        if (lam <= 0.0) continue;
        double r = lam / system.mask_mass(system.mask(system.set_index(s.id)));
        if (r > c0 || (r == c0 && (arg.empty() || s.id < arg))) {
            c0 = r;
            arg = s.id;
        }
    }
    if (c0 == 0.0) return {0.0, detail::zero_certificate(system)};

    double C = c0;
    Subcollection extremal{{arg}};
    while (true) {
        if (iterations) ++*iterations;
        auto solve = detail::solve_witness_flow(system, lambda, C);
        if (solve.feasible) break;
        C = solve.violation_ratio;
        extremal = std::move(solve.violation);
    }
    cert.subcollection = std::move(extremal);
    cert.ratio = C;
    cert.kind = CertificateKind::extremal;
    return {C, cert};
}

/// Pass iff the family is Carleson at constant C; otherwise one violating
/// subcollection.
struct CheckResult {
    bool pass = false;
    CutCertificate violation;  // meaningful only when !pass
};

inline CheckResult check_carleson(const SetSystem& system, const CoefficientFamily& lambda,
                                  double C) {
    if (!(C >= 0.0)) throw std::invalid_argument("C must be nonnegative");
    auto [constant, cert] = carleson_constant(system, lambda);
    CheckResult result;
    if (constant <= C + kTolerance) {
        result.pass = true;
    } else {
        result.pass = false;
        result.violation = cert;
        result.violation.kind = CertificateKind::violation;
    }
    return result;
}

inline double dual_pairing(const CoefficientFamily& lambda, const TestFamily& a) {
    double sum = 0.0;
    for (const auto& [sid, v] : a.a) sum += lambda.at(sid) * v;
    return sum;
}

/// Pointwise supremum of a_S over the sets containing each atom.
inline StepFunction upper_envelope(const SetSystem& system, const TestFamily& a) {
    const std::size_t atom_count = system.measure().size();
    std::vector<double> env(atom_count, 0.0);
    for (const auto& [sid, v] : a.a) {
        if (v <= 0.0) continue;
        const auto& mask = system.mask(system.set_index(sid));
        for (std::size_t i = 0; i < atom_count; ++i)
            if (mask[i / 64] >> (i % 64) & 1) env[i] = std::max(env[i], v);
    }
    StepFunction f;
    for (std::size_t i = 0; i < atom_count; ++i)
        if (env[i] > 0.0) f.values[system.measure().atoms()[i].id] = env[i];
    return f;
}

struct DualCheckResult {
    bool pass = false;
    double lhs = 0.0;
    double rhs = 0.0;
};

/// Checks sum lambda_S a_S <= C * integral of the upper envelope.
inline DualCheckResult dual_estimate_check(const SetSystem& system,
                                           const CoefficientFamily& lambda,
                                           const TestFamily& a, double C) {
    if (!(C >= 0.0)) throw std::invalid_argument("C must be nonnegative");
    DualCheckResult r;
    r.lhs = dual_pairing(lambda, a);
    r.rhs = C * layer_cake_integral(system.measure(), upper_envelope(system, a));
    r.pass = r.lhs <= r.rhs + kTolerance * (1.0 + r.rhs);
    return r;
}

namespace detail {

inline void require_nested_or_disjoint(const SetSystem& system) {
    for (std::size_t i = 0; i < system.set_count(); ++i)
        for (std::size_t j = i + 1; j < system.set_count(); ++j) {
            const auto& a = system.mask(i);
            const auto& b = system.mask(j);
            if (SetSystem::mask_intersects(a, b) && !SetSystem::mask_subset(a, b) &&
                !SetSystem::mask_subset(b, a))
                throw std::invalid_argument("sets '" + system.sets()[i].id + "' and '" +
                                            system.sets()[j].id +
                                            "' overlap without nesting; not a dyadic-cube "
                                            "family");
        }
}

}  // namespace detail

/// Discrete f^{infty,1} norm: sup over cubes Q of
/// (1 / mu(Q)) * sum over R contained in Q of lambda_R * mu(R).
inline double f_infty_1_norm(const SetSystem& system, const CoefficientFamily& lambda) {
    validate_family(system, lambda);
    detail::require_nested_or_disjoint(system);
    const std::size_t n = system.set_count();
    std::vector<double> set_mass(n);
    for (std::size_t i = 0; i < n; ++i) set_mass[i] = system.mask_mass(system.mask(i));

    double best = 0.0;
    for (std::size_t q = 0; q < n; ++q) {
        if (set_mass[q] <= 0.0)
            throw std::invalid_argument("cube '" + system.sets()[q].id + "' has zero mass");
        double sum = 0.0;
        for (std::size_t r = 0; r < n; ++r)
            if (SetSystem::mask_subset(system.mask(r), system.mask(q)))
                sum += lambda.at(system.sets()[r].id) * set_mass[r];
        best = std::max(best, sum / set_mass[q]);
    }
    return best;
}

/// For dyadic-cube families the per-cube supremum already equals the full
/// Carleson constant: every union splits into maximal cubes.
inline bool remark_b_check(const SetSystem& system, const CoefficientFamily& lambda) {
    validate_family(system, lambda);
    detail::require_nested_or_disjoint(system);
    double per_cube = 0.0;
    for (std::size_t q = 0; q < system.set_count(); ++q) {
        Subcollection inside;
        for (std::size_t r = 0; r < system.set_count(); ++r)
            if (SetSystem::mask_subset(system.mask(r), system.mask(q)))
                inside.set_ids.push_back(system.sets()[r].id);
        per_cube = std::max(per_cube, carleson_ratio(system, lambda, inside));
    }
    auto [constant, cert] = carleson_constant(system, lambda);
    (void)cert;
    return std::abs(per_cube - constant) <= kTolerance * (1.0 + std::abs(constant));
}

}  // namespace carleson

#endif
