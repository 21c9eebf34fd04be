#ifndef CARLESON_JSON_IO_HPP
#define CARLESON_JSON_IO_HPP

#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>

#include "json.hpp"

#include "carleson/carleson.hpp"
#include "carleson/measure.hpp"
#include "carleson/set_system.hpp"
#include "carleson/sparse.hpp"

namespace carleson {

using json = nlohmann::json;

namespace detail {

inline void reject_unknown_fields(const json& obj, std::initializer_list<const char*> allowed,
                                  const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const char* k : allowed)
            if (key == k) ok = true;
        if (!ok)
            throw std::invalid_argument("unknown field '" + key + "' in " + where);
    }
}

}  // namespace detail

inline json measure_to_json(const DiscreteMeasure& mu) {
    json atoms = json::array();
    for (const Atom& a : mu.atoms()) {
        json atom = {{"id", a.id}, {"mass", a.mass}};
        if (!a.coords.empty()) atom["coords"] = a.coords;
        atoms.push_back(std::move(atom));
    }
    return {{"mode", mu.mode() == MeasureMode::divisible ? "divisible" : "indivisible"},
            {"atoms", std::move(atoms)}};
}

inline DiscreteMeasure measure_from_json(const json& doc) {
    if (!doc.is_object()) throw std::invalid_argument("measure must be a JSON object");
    detail::reject_unknown_fields(doc, {"mode", "atoms"}, "measure");
    std::string mode_str = doc.at("mode").get<std::string>();
    MeasureMode mode;
    if (mode_str == "divisible")
        mode = MeasureMode::divisible;
    else if (mode_str == "indivisible")
        mode = MeasureMode::indivisible;
    else
        throw std::invalid_argument("measure mode '" + mode_str +
                                    "' is not divisible or indivisible");
    std::vector<Atom> atoms;
    for (const json& a : doc.at("atoms")) {
        detail::reject_unknown_fields(a, {"id", "mass", "coords"}, "atom");
        Atom atom;
        atom.id = a.at("id").get<std::string>();
        atom.mass = a.at("mass").get<double>();
        if (!(atom.mass >= 0.0) || !std::isfinite(atom.mass))
            throw std::invalid_argument("atom '" + atom.id + "' has invalid mass");
        if (a.contains("coords")) atom.coords = a.at("coords").get<std::vector<double>>();
        atoms.push_back(std::move(atom));
    }
    return DiscreteMeasure(std::move(atoms), mode);
}

struct Instance {
    SetSystem system;
    CoefficientFamily lambda;
};

inline json instance_to_json(const SetSystem& system, const CoefficientFamily& lambda) {
    json sets = json::array();
    for (const SetEntry& s : system.sets()) {
        json entry = {{"id", s.id}, {"atoms", s.members}, {"lambda", lambda.at(s.id)}};
        if (!s.label.empty()) entry["label"] = s.label;
        sets.push_back(std::move(entry));
    }
    return {{"measure", measure_to_json(system.measure())}, {"sets", std::move(sets)}};
}

inline Instance instance_from_json(const json& doc) {
    if (!doc.is_object()) throw std::invalid_argument("instance must be a JSON object");
    detail::reject_unknown_fields(doc, {"measure", "sets"}, "instance");
    DiscreteMeasure measure = measure_from_json(doc.at("measure"));
    std::vector<SetEntry> sets;
    CoefficientFamily lambda;
    for (const json& s : doc.at("sets")) {
        detail::reject_unknown_fields(s, {"id", "label", "atoms", "lambda"}, "set entry");
        SetEntry entry;
        entry.id = s.at("id").get<std::string>();
        if (s.contains("label")) entry.label = s.at("label").get<std::string>();
        entry.members = s.at("atoms").get<std::vector<std::string>>();
        double lam = s.at("lambda").get<double>();
        if (!(lam >= 0.0) || !std::isfinite(lam))
            throw std::invalid_argument("set '" + entry.id +
                                        "' has negative or non-finite lambda");
        lambda.lambda[entry.id] = lam;
        sets.push_back(std::move(entry));
    }
    return {SetSystem(std::move(measure), std::move(sets)), std::move(lambda)};
}

inline Instance load_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open instance file '" + path + "'");
    json doc;
    try {
        in >> doc;
    } catch (const json::parse_error& e) {
        throw std::invalid_argument("malformed JSON in '" + path + "': " + e.what());
    }
    return instance_from_json(doc);
}

inline json number_or_inf(double v) {
    if (std::isinf(v)) return "inf";
    return v;
}

inline json certificate_to_json(double constant, const CutCertificate& cert) {
    return {{"constant", number_or_inf(constant)},
            {"subcollection", cert.subcollection.set_ids},
            {"ratio", number_or_inf(cert.ratio)},
            {"kind", cert.kind == CertificateKind::extremal ? "extremal" : "violation"}};
}

inline json witness_to_json(const SparseWitness& w, double C) {
    json assignment = json::object();
    for (const auto& [sid, row] : w.assignment) {
        json atoms = json::object();
        for (const auto& [aid, frac] : row) atoms[aid] = frac;
        assignment[sid] = std::move(atoms);
    }
    return {{"mode", w.mode == WitnessMode::fractional ? "fractional" : "integral"},
            {"C", C},
            {"assignment", std::move(assignment)}};
}

inline SparseWitness witness_from_json(const json& doc) {
    detail::reject_unknown_fields(doc, {"mode", "C", "assignment"}, "witness");
    SparseWitness w;
    std::string mode = doc.at("mode").get<std::string>();
    if (mode == "fractional")
        w.mode = WitnessMode::fractional;
    else if (mode == "integral")
        w.mode = WitnessMode::integral;
    else
        throw std::invalid_argument("witness mode '" + mode + "' is not recognized");
    for (const auto& [sid, row] : doc.at("assignment").items())
        for (const auto& [aid, frac] : row.items())
            w.assignment[sid][aid] = frac.get<double>();
    return w;
}

inline json witness_report_to_json(const WitnessReport& report) {
    json rows = json::array();
    for (const WitnessRow& r : report.rows)
        rows.push_back({{"set", r.set_id},
                        {"lambda", r.lambda},
                        {"witness_mass", r.witness_mass},
                        {"slack", r.slack}});
    return {{"feasible", report.feasible},
            {"rows", std::move(rows)},
            {"violations", report.violations}};
}

}  // namespace carleson

#endif
