#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "isingclt/errors.hpp"
#include "isingclt/model.hpp"

namespace isingclt::detail {

/// Walks a contiguous range of the reflected Gray code. Consecutive indices
/// differ in one spin, so energy and local fields update in O(n).
class GrayWalker {
public:
    explicit GrayWalker(const IsingModel& model)
        : n_(model.size()),
          a_(model.interaction()),
          h_(model.field()),
          x_(n_),
          local_(n_) {}

    /// Positions the walker at Gray index `index` with exact recomputation.
    void start(std::uint64_t index) {
        code_ = index ^ (index >> 1);
        for (std::size_t i = 0; i < n_; ++i) x_[i] = ((code_ >> i) & 1U) ? 1.0 : -1.0;
        energy_ = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            double l = h_(static_cast<Eigen::Index>(i));
            for (std::size_t j = 0; j < n_; ++j) l += a_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * x_[j];
            local_[i] = l;
            energy_ += x_[i] * (0.5 * (l - h_(static_cast<Eigen::Index>(i))) + h_(static_cast<Eigen::Index>(i)));
        }
    }

    /// Moves from index-1 to index; returns the flipped site.
    std::size_t advance(std::uint64_t index) {
        const auto i = static_cast<std::size_t>(std::countr_zero(index));
        const double old = x_[i];
        energy_ -= 2.0 * old * local_[i];
        const double delta = -2.0 * old;
        const double* col = a_.data() + static_cast<std::ptrdiff_t>(i * n_);  // column i == row i
        for (std::size_t j = 0; j < n_; ++j) local_[j] += col[j] * delta;
        x_[i] = -old;
        code_ ^= std::uint64_t{1} << i;
        return i;
    }

    double energy() const { return energy_; }
    std::uint64_t code() const { return code_; }
    const std::vector<double>& spins() const { return x_; }

private:
    std::size_t n_;
    const Matrix& a_;
    const Vector& h_;
    std::vector<double> x_;
    std::vector<double> local_;
    double energy_ = 0.0;
    std::uint64_t code_ = 0;
};

/// Fixed partition of [0, 2^n) into power-of-two blocks, independent of the
/// worker count.
struct BlockPlan {
    std::uint64_t total = 0;
    std::uint64_t blocks = 0;
    std::uint64_t block_size = 0;

    static BlockPlan make(std::size_t n) {
        BlockPlan p;
        p.total = std::uint64_t{1} << n;
        p.blocks = std::min<std::uint64_t>(p.total, 64);
        p.block_size = p.total / p.blocks;
        return p;
    }
};

inline void check_cap(std::size_t n, std::size_t cap, const char* what) {
    if (n > cap)
        throw NumericalError(std::string(what) + ": n = " + std::to_string(n) +
                             " exceeds the enumeration cap " + std::to_string(cap));
    if (n > 40) throw NumericalError(std::string(what) + ": n > 40 cannot be enumerated");
}

/// Visits every configuration of block b: f(walker).
template <class F>
void walk_block(GrayWalker& w, const BlockPlan& plan, std::uint64_t b, F&& f) {
    const std::uint64_t first = b * plan.block_size;
    const std::uint64_t last = first + plan.block_size;
    w.start(first);
    f(w);
    for (std::uint64_t k = first + 1; k < last; ++k) {
        w.advance(k);
        f(w);
    }
}

}  // namespace isingclt::detail
