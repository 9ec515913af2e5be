#pragma once

// Helpers for matrix-valued functions sampled on the grid.

#include <vector>

#include "phtori/model.hpp"
#include "phtori/periodic.hpp"

namespace phtori::detail {

// One row per grid point, column-major flattening of each matrix.
inline Mat stack_rows(const std::vector<Mat>& mats) {
    const int rows = static_cast<int>(mats.front().rows());
    const int cols = static_cast<int>(mats.front().cols());
    Mat out(static_cast<Eigen::Index>(mats.size()), rows * cols);
    for (std::size_t j = 0; j < mats.size(); ++j)
        out.row(static_cast<Eigen::Index>(j)) = Eigen::Map<const Eigen::RowVectorXd>(mats[j].data(), rows * cols);
    return out;
}

inline std::vector<Mat> unstack_rows(const Mat& s, int rows, int cols) {
    std::vector<Mat> out(s.rows());
    for (Eigen::Index j = 0; j < s.rows(); ++j) {
        const Eigen::RowVectorXd r = s.row(j);
        out[j] = Eigen::Map<const Mat>(r.data(), rows, cols);
    }
    return out;
}

inline std::vector<Mat> rotate_matrices(const std::vector<Mat>& mats, double delta) {
    return unstack_rows(rotate_samples(stack_rows(mats), delta), static_cast<int>(mats.front().rows()),
                        static_cast<int>(mats.front().cols()));
}

inline PeriodicFunction entry_function(const std::vector<Mat>& mats, int r, int c) {
    Vec v(static_cast<Eigen::Index>(mats.size()));
    for (std::size_t j = 0; j < mats.size(); ++j) v[static_cast<Eigen::Index>(j)] = mats[j](r, c);
    return PeriodicFunction::from_samples(v);
}

inline PeriodicFunction column_function(const Mat& samples, int c) {
    return PeriodicFunction::from_samples(Vec(samples.col(c)));
}

inline Vec to_vec(const PeriodicFunction& f) {
    return Eigen::Map<const Vec>(f.samples().data(), f.size());
}

}  // namespace phtori::detail
