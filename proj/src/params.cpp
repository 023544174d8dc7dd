#include "cmm/params.hpp"

#include <algorithm>
#include <limits>

#include "cmm/error.hpp"

namespace cmm {

namespace {
constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

std::size_t dim_product(const std::vector<std::size_t>& dims) {
    std::size_t n = 1;
    for (std::size_t d : dims) n *= d;
    return n;
}
} // namespace

std::size_t ParamSet::add_block(std::string name, std::vector<std::size_t> dims) {
    if (find(name) != npos)
        throw ShapeError("duplicate block name '" + name + "'");
    BlockInfo b;
    b.name = std::move(name);
    b.offset = data_.size();
    b.size = dim_product(dims);
    b.dims = std::move(dims);
    data_.grow(b.size);
    blocks_.push_back(std::move(b));
    return blocks_.size() - 1;
}

std::size_t ParamSet::add_block(std::string name, std::vector<std::size_t> dims,
                                std::span<const double> vals) {
    const std::size_t i = add_block(std::move(name), std::move(dims));
    if (vals.size() != blocks_[i].size)
        throw ShapeError("block '" + blocks_[i].name + "': value count " +
                         std::to_string(vals.size()) + " does not match shape size " +
                         std::to_string(blocks_[i].size));
    std::copy(vals.begin(), vals.end(), data_.data() + blocks_[i].offset);
    return i;
}

std::size_t ParamSet::find(std::string_view name) const {
    for (std::size_t i = 0; i < blocks_.size(); ++i)
        if (blocks_[i].name == name) return i;
    return npos;
}

std::span<double> ParamSet::values(std::string_view name) {
    const std::size_t i = find(name);
    if (i == npos) throw ShapeError("no block named '" + std::string(name) + "'");
    return values(i);
}

std::span<const double> ParamSet::values(std::string_view name) const {
    const std::size_t i = find(name);
    if (i == npos) throw ShapeError("no block named '" + std::string(name) + "'");
    return values(i);
}

bool ParamSet::has_block(std::string_view name) const { return find(name) != npos; }

bool ParamSet::layout_compatible(const ParamSet& o) const {
    if (blocks_.size() != o.blocks_.size()) return false;
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
        if (blocks_[i].name != o.blocks_[i].name) return false;
        if (blocks_[i].dims != o.blocks_[i].dims) return false;
    }
    return true;
}

ParamSet ParamSet::zeros_like() const {
    ParamSet z;
    for (const auto& b : blocks_) z.add_block(b.name, b.dims);
    return z;
}

void ParamSet::require_compatible(const ParamSet& a, const ParamSet& b,
                                  std::string_view context) {
    if (a.blocks_.size() != b.blocks_.size())
        throw ShapeError(std::string(context) + ": block count mismatch (" +
                         std::to_string(a.blocks_.size()) + " vs " +
                         std::to_string(b.blocks_.size()) + ")");
    for (std::size_t i = 0; i < a.blocks_.size(); ++i) {
        const auto& x = a.blocks_[i];
        const auto& y = b.blocks_[i];
        if (x.name != y.name)
            throw ShapeError(std::string(context) + ": block " + std::to_string(i) +
                             " name mismatch ('" + x.name + "' vs '" + y.name + "')");
        if (x.dims != y.dims)
            throw ShapeError(std::string(context) + ": block '" + x.name +
                             "' shape mismatch");
    }
}

} // namespace cmm
