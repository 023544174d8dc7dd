#pragma once

#include <atomic>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cmm {

namespace detail {

// Storage for ParamSet values with global live/peak accounting. The counters
// back the memory-contract checks: the harness must hold a number of
// parameter-sized buffers that does not grow with the task count.
class ParamStorage {
public:
    ParamStorage() = default;
    ~ParamStorage() { debit(v_.size()); }

    ParamStorage(const ParamStorage& o) : v_(o.v_) { credit(v_.size()); }
    ParamStorage(ParamStorage&& o) noexcept : v_(std::move(o.v_)) { o.v_.clear(); }

    ParamStorage& operator=(const ParamStorage& o) {
        if (this != &o) {
            debit(v_.size());
            v_ = o.v_;
            credit(v_.size());
        }
        return *this;
    }
    ParamStorage& operator=(ParamStorage&& o) noexcept {
        if (this != &o) {
            debit(v_.size());
            v_ = std::move(o.v_);
            o.v_.clear();
        }
        return *this;
    }

    void grow(std::size_t n) {
        v_.resize(v_.size() + n, 0.0);
        credit(n);
    }

    std::size_t size() const { return v_.size(); }
    double* data() { return v_.data(); }
    const double* data() const { return v_.data(); }

    static long long live() { return live_.load(std::memory_order_relaxed); }
    static long long peak() { return peak_.load(std::memory_order_relaxed); }
    static void reset_peak() { peak_.store(live(), std::memory_order_relaxed); }

private:
    static void credit(std::size_t n) {
        const long long now = live_.fetch_add(static_cast<long long>(n),
                                              std::memory_order_relaxed) +
                              static_cast<long long>(n);
        long long p = peak_.load(std::memory_order_relaxed);
        while (now > p &&
               !peak_.compare_exchange_weak(p, now, std::memory_order_relaxed)) {
        }
    }
    static void debit(std::size_t n) {
        live_.fetch_sub(static_cast<long long>(n), std::memory_order_relaxed);
    }

    std::vector<double> v_;
    static inline std::atomic<long long> live_{0};
    static inline std::atomic<long long> peak_{0};
};

} // namespace detail

struct BlockInfo {
    std::string name;
    std::size_t offset = 0;
    std::vector<std::size_t> dims;
    std::size_t size = 0; // product of dims
};

// Named, ordered collection of dense arrays backed by one flat vector.
// Two ParamSets are layout-compatible iff block names, order and shapes all
// match; every binary operation in the library requires that.
class ParamSet {
public:
    ParamSet() = default;

    std::size_t add_block(std::string name, std::vector<std::size_t> dims);
    std::size_t add_block(std::string name, std::vector<std::size_t> dims,
                          std::span<const double> values);

    std::size_t block_count() const { return blocks_.size(); }
    const BlockInfo& info(std::size_t i) const { return blocks_[i]; }

    std::span<double> values(std::size_t i) {
        return {data_.data() + blocks_[i].offset, blocks_[i].size};
    }
    std::span<const double> values(std::size_t i) const {
        return {data_.data() + blocks_[i].offset, blocks_[i].size};
    }
    std::span<double> values(std::string_view name);
    std::span<const double> values(std::string_view name) const;
    bool has_block(std::string_view name) const;

    std::size_t size() const { return data_.size(); }
    std::span<double> flat() { return {data_.data(), data_.size()}; }
    std::span<const double> flat() const { return {data_.data(), data_.size()}; }

    bool layout_compatible(const ParamSet& o) const;
    ParamSet zeros_like() const;

    // Throws ShapeError naming the first offending block.
    static void require_compatible(const ParamSet& a, const ParamSet& b,
                                   std::string_view context);

    // Instrumentation over all live ParamSet storage, in doubles.
    static long long live_values() { return detail::ParamStorage::live(); }
    static long long peak_live_values() { return detail::ParamStorage::peak(); }
    static void reset_peak() { detail::ParamStorage::reset_peak(); }

private:
    std::size_t find(std::string_view name) const; // npos when absent

    std::vector<BlockInfo> blocks_;
    detail::ParamStorage data_;
};

} // namespace cmm
