#ifndef CARLESON_SET_SYSTEM_HPP
#define CARLESON_SET_SYSTEM_HPP

#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "carleson/measure.hpp"

namespace carleson {

struct SetEntry {
    std::string id;
    std::vector<std::string> members;  // atom ids, file order
    std::string label;
};

/// Subset of a system's set ids.
struct Subcollection {
    std::vector<std::string> set_ids;
};

/// Finite collection of sets over the atom universe of a discrete measure.
class SetSystem {
  public:
    SetSystem() = default;

    SetSystem(DiscreteMeasure measure, std::vector<SetEntry> sets)
        : measure_(std::move(measure)), sets_(std::move(sets)) {
        for (std::size_t i = 0; i < sets_.size(); ++i) {
            const SetEntry& s = sets_[i];
            if (!set_index_.emplace(s.id, i).second)
                throw std::invalid_argument("duplicate set id '" + s.id + "'");
            for (const std::string& a : s.members)
                if (!measure_.contains(a))
                    throw std::invalid_argument("set '" + s.id +
                                                "' references unknown atom '" + a + "'");
        }
        build_masks();
    }

    const DiscreteMeasure& measure() const { return measure_; }
    const std::vector<SetEntry>& sets() const { return sets_; }
    std::size_t set_count() const { return sets_.size(); }

    bool has_set(const std::string& id) const { return set_index_.count(id) != 0; }

    std::size_t set_index(const std::string& id) const {
        auto it = set_index_.find(id);
        if (it == set_index_.end())
            throw std::invalid_argument("unknown set id '" + id + "'");
        return it->second;
    }

    // Atom-index bitmask of a set, one uint64 block per 64 atoms.
    const std::vector<std::uint64_t>& mask(std::size_t set_idx) const {
        return masks_[set_idx];
    }

    std::size_t mask_blocks() const { return blocks_; }

    double mask_mass(const std::vector<std::uint64_t>& m) const {
        double sum = 0.0;
        for (std::size_t b = 0; b < m.size(); ++b) {
            std::uint64_t bits = m[b];
            while (bits) {
                int k = __builtin_ctzll(bits);
                sum += measure_.mass_at(b * 64 + static_cast<std::size_t>(k));
                bits &= bits - 1;
            }
        }
        return sum;
    }

    static bool mask_subset(const std::vector<std::uint64_t>& a,
                            const std::vector<std::uint64_t>& b) {
        for (std::size_t i = 0; i < a.size(); ++i)
            if (a[i] & ~b[i]) return false;
        return true;
    }

    static bool mask_intersects(const std::vector<std::uint64_t>& a,
                                const std::vector<std::uint64_t>& b) {
        for (std::size_t i = 0; i < a.size(); ++i)
            if (a[i] & b[i]) return true;
        return false;
    }

  private:
    void build_masks() {
        blocks_ = (measure_.size() + 63) / 64;
        masks_.assign(sets_.size(), std::vector<std::uint64_t>(blocks_, 0));
        for (std::size_t i = 0; i < sets_.size(); ++i)
            for (const std::string& a : sets_[i].members) {
                std::size_t idx = measure_.index_of(a);
                masks_[i][idx / 64] |= std::uint64_t(1) << (idx % 64);
            }
    }

    DiscreteMeasure measure_;
    std::vector<SetEntry> sets_;
    std::unordered_map<std::string, std::size_t> set_index_;
    std::vector<std::vector<std::uint64_t>> masks_;
    std::size_t blocks_ = 0;
};

/// Union of the member sets of a subcollection, as atom ids in measure order.
inline std::set<std::string> union_of(const SetSystem& system, const Subcollection& sub) {
    std::vector<std::uint64_t> acc(system.mask_blocks(), 0);
    for (const std::string& sid : sub.set_ids) {
        const auto& m = system.mask(system.set_index(sid));
        for (std::size_t b = 0; b < acc.size(); ++b) acc[b] |= m[b];
    }
    std::set<std::string> result;
    const auto& atoms = system.measure().atoms();
    for (std::size_t i = 0; i < atoms.size(); ++i)
        if (acc[i / 64] >> (i % 64) & 1) result.insert(atoms[i].id);
    return result;
}

/// All sets entirely contained in omega.
inline Subcollection maximal_subcollection_inside(const SetSystem& system,
                                                  const std::set<std::string>& omega) {
    std::vector<std::uint64_t> om(system.mask_blocks(), 0);
    for (const std::string& a : omega) {
        std::size_t idx = system.measure().index_of(a);
        om[idx / 64] |= std::uint64_t(1) << (idx % 64);
    }
    Subcollection sub;
    for (std::size_t i = 0; i < system.set_count(); ++i)
        if (SetSystem::mask_subset(system.mask(i), om))
            sub.set_ids.push_back(system.sets()[i].id);
    return sub;
}

namespace detail {

inline std::string interval_label(int level, std::uint64_t pos) {
    // half-open dyadic interval [pos/2^level, (pos+1)/2^level)
    return "L" + std::to_string(level) + "." + std::to_string(pos);
}

}  // namespace detail

constexpr std::size_t kDefaultAtomBudget = 1u << 20;

/// Dyadic cubes of [0,1)^dimension, levels 0..depth. Atoms are the
/// finest-level grid cells; masses uniform unless overridden.
inline SetSystem gen_dyadic_cubes(int dimension, int depth,
                                  const std::vector<double>& cell_masses = {}) {
    if (dimension < 1) throw std::invalid_argument("dimension must be positive");
    if (depth < 0) throw std::invalid_argument("depth must be nonnegative");
    if (static_cast<std::size_t>(dimension) * static_cast<std::size_t>(depth) > 20)
        throw std::invalid_argument("grid of 2^" + std::to_string(dimension * depth) +
                                    " atoms exceeds budget");
    const std::uint64_t side = std::uint64_t(1) << depth;
    std::uint64_t cell_count = 1;
    for (int d = 0; d < dimension; ++d) cell_count *= side;
    if (cell_count > kDefaultAtomBudget)
        throw std::invalid_argument("grid of " + std::to_string(cell_count) +
                                    " atoms exceeds budget");
    if (!cell_masses.empty() && cell_masses.size() != cell_count)
        throw std::invalid_argument("cell mass override has wrong length");

    const double uniform = 1.0 / static_cast<double>(cell_count);
    std::vector<Atom> atoms;
    atoms.reserve(cell_count);
    // row-major over dimensions, first coordinate slowest
    for (std::uint64_t c = 0; c < cell_count; ++c) {
        Atom a;
        a.id = "c" + std::to_string(c);
        a.mass = cell_masses.empty() ? uniform : cell_masses[c];
        std::uint64_t rem = c;
        a.coords.resize(dimension);
        for (int d = dimension - 1; d >= 0; --d) {
            a.coords[d] = static_cast<double>(rem % side) / static_cast<double>(side);
            rem /= side;
        }
        atoms.push_back(std::move(a));
    }

    std::vector<SetEntry> sets;
    for (int level = 0; level <= depth; ++level) {
        const std::uint64_t n = std::uint64_t(1) << level;
        const std::uint64_t per_axis = side >> level;  // finest cells per cube edge
        std::uint64_t cube_count = 1;
        for (int d = 0; d < dimension; ++d) cube_count *= n;
        for (std::uint64_t q = 0; q < cube_count; ++q) {
            std::vector<std::uint64_t> pos(dimension);
            std::uint64_t rem = q;
            for (int d = dimension - 1; d >= 0; --d) {
                pos[d] = rem % n;
                rem /= n;
            }
            SetEntry e;
            e.id = "Q" + std::to_string(level);
            e.label = "Q";
            for (int d = 0; d < dimension; ++d) {
                e.id += "_" + std::to_string(pos[d]);
                e.label += (d ? "x" : "[") + detail::interval_label(level, pos[d]);
            }
            e.label += "]";
            // enumerate finest cells of the cube in atom order
            std::vector<std::uint64_t> cell(dimension, 0);
            while (true) {
                std::uint64_t flat = 0;
                for (int d = 0; d < dimension; ++d)
                    flat = flat * side + (pos[d] * per_axis + cell[d]);
                e.members.push_back("c" + std::to_string(flat));
                int d = dimension - 1;
                while (d >= 0 && ++cell[d] == per_axis) cell[d--] = 0;
                if (d < 0) break;
            }
            sets.push_back(std::move(e));
        }
    }
    return SetSystem(DiscreteMeasure(std::move(atoms), MeasureMode::divisible),
                     std::move(sets));
}

/// All dyadic rectangles I x J of [0,1)^2 with level(I) <= depth_x and
/// level(J) <= depth_y, over the finest grid cells.
inline SetSystem gen_dyadic_rectangles(int depth_x, int depth_y,
                                       const std::vector<double>& cell_masses = {}) {
    if (depth_x < 0 || depth_y < 0) throw std::invalid_argument("depths must be nonnegative");
    if (depth_x + depth_y > 20)
        throw std::invalid_argument("grid of 2^" + std::to_string(depth_x + depth_y) +
                                    " atoms exceeds budget");
    const std::uint64_t nx = std::uint64_t(1) << depth_x;
    const std::uint64_t ny = std::uint64_t(1) << depth_y;
    const std::uint64_t cell_count = nx * ny;
    if (!cell_masses.empty() && cell_masses.size() != cell_count)
        throw std::invalid_argument("cell mass override has wrong length");

    const double uniform = 1.0 / static_cast<double>(cell_count);
    std::vector<Atom> atoms;
    atoms.reserve(cell_count);
    for (std::uint64_t ix = 0; ix < nx; ++ix)
        for (std::uint64_t iy = 0; iy < ny; ++iy) {
            Atom a;
            a.id = "c" + std::to_string(ix * ny + iy);
            a.mass = cell_masses.empty() ? uniform : cell_masses[ix * ny + iy];
            a.coords = {static_cast<double>(ix) / static_cast<double>(nx),
                        static_cast<double>(iy) / static_cast<double>(ny)};
            atoms.push_back(std::move(a));
        }

    std::vector<SetEntry> sets;
    for (int lx = 0; lx <= depth_x; ++lx)
        for (std::uint64_t px = 0; px < (std::uint64_t(1) << lx); ++px)
            for (int ly = 0; ly <= depth_y; ++ly)
                for (std::uint64_t py = 0; py < (std::uint64_t(1) << ly); ++py) {
                    SetEntry e;
                    e.id = "R" + std::to_string(lx) + "_" + std::to_string(px) + "x" +
                           std::to_string(ly) + "_" + std::to_string(py);
                    e.label = "R[" + detail::interval_label(lx, px) + "x" +
                              detail::interval_label(ly, py) + "]";
                    const std::uint64_t wx = nx >> lx;
                    const std::uint64_t wy = ny >> ly;
                    for (std::uint64_t cx = px * wx; cx < (px + 1) * wx; ++cx)
                        for (std::uint64_t cy = py * wy; cy < (py + 1) * wy; ++cy)
                            e.members.push_back("c" + std::to_string(cx * ny + cy));
                    sets.push_back(std::move(e));
                }
    return SetSystem(DiscreteMeasure(std::move(atoms), MeasureMode::divisible),
                     std::move(sets));
}

}  // namespace carleson

#endif
