#ifndef CARLESON_MEASURE_HPP
#define CARLESON_MEASURE_HPP

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace carleson {

/// Ground atom of a finite discrete measure.
struct Atom {
    std::string id;
    double mass = 0.0;
    std::vector<double> coords;  // optional geometric position
};

enum class MeasureMode { divisible, indivisible };

/// Finite discrete measure. `divisible` models an atomless measure
/// (atom mass may be split between sets); `indivisible` models point masses.
class DiscreteMeasure {
  public:
    DiscreteMeasure() = default;

    DiscreteMeasure(std::vector<Atom> atoms, MeasureMode mode)
        : atoms_(std::move(atoms)), mode_(mode) {
        for (std::size_t i = 0; i < atoms_.size(); ++i) {
            const Atom& a = atoms_[i];
            if (!(a.mass >= 0.0))
                throw std::invalid_argument("atom '" + a.id + "' has negative mass");
            if (!index_.emplace(a.id, i).second)
                throw std::invalid_argument("duplicate atom id '" + a.id + "'");
        }
    }

    const std::vector<Atom>& atoms() const { return atoms_; }
    MeasureMode mode() const { return mode_; }
    std::size_t size() const { return atoms_.size(); }

    bool contains(const std::string& id) const { return index_.count(id) != 0; }

    std::size_t index_of(const std::string& id) const {
        auto it = index_.find(id);
        if (it == index_.end())
            throw std::invalid_argument("unknown atom id '" + id + "'");
        return it->second;
    }

    double mass_at(std::size_t i) const { return atoms_[i].mass; }

  private:
    std::vector<Atom> atoms_;
    MeasureMode mode_ = MeasureMode::divisible;
    std::unordered_map<std::string, std::size_t> index_;
};

/// Nonnegative step function on the atom universe; absent ids read as 0.
struct StepFunction {
    std::map<std::string, double> values;

    double at(const std::string& id) const {
        auto it = values.find(id);
        return it == values.end() ? 0.0 : it->second;
    }
};

inline double total_mass(const DiscreteMeasure& mu) {
    double sum = 0.0;
    for (const Atom& a : mu.atoms()) sum += a.mass;
    return sum;
}

template <typename IdRange>
double mass_of(const DiscreteMeasure& mu, const IdRange& atom_ids) {
    double sum = 0.0;
    for (const auto& id : atom_ids) sum += mu.mass_at(mu.index_of(id));
    return sum;
}

inline double direct_integral(const DiscreteMeasure& mu, const StepFunction& f) {
    for (const auto& [id, v] : f.values) {
        if (!mu.contains(id))
            throw std::invalid_argument("step function references unknown atom id '" + id + "'");
        if (!(v >= 0.0))
            throw std::invalid_argument("step function value at '" + id + "' is negative");
    }
    double sum = 0.0;
    for (const Atom& a : mu.atoms()) sum += f.at(a.id) * a.mass;
    return sum;
}

/// Distribution-formula evaluation: sorts the distinct values t_1 < ... < t_m
/// and sums (t_j - t_{j-1}) * mu(f > t_{j-1}), with t_0 = 0.
inline double layer_cake_integral(const DiscreteMeasure& mu, const StepFunction& f) {
    for (const auto& [id, v] : f.values) {
        if (!mu.contains(id))
            throw std::invalid_argument("step function references unknown atom id '" + id + "'");
        if (!(v >= 0.0))
            throw std::invalid_argument("step function value at '" + id + "' is negative");
    }
    std::vector<double> levels;
    levels.reserve(f.values.size());
    for (const auto& [id, v] : f.values)
        if (v > 0.0) levels.push_back(v);
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

    double integral = 0.0;
    double prev = 0.0;
    for (double t : levels) {
        double mass_above = 0.0;
        for (const Atom& a : mu.atoms())
            if (f.at(a.id) > prev) mass_above += a.mass;
        integral += (t - prev) * mass_above;
        prev = t;
    }
    return integral;
}

}  // namespace carleson

#endif
