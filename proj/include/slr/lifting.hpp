#pragma once

#include <Eigen/Dense>

#include <span>

#include "slr/grid.hpp"

namespace slr {

// Odd-sized rectangle of centered filter offsets. Tap t = p*cols + q sits at
// offset (p - rows/2, q - cols/2) as (dy, dx).
class FilterSupport {
public:
    FilterSupport(int rows, int cols);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    int size() const { return rows_ * cols_; }
    int half_rows() const { return rows_ / 2; }
    int half_cols() const { return cols_ / 2; }
    int offset_y(int tap) const { return tap / cols_ - half_rows(); }
    int offset_x(int tap) const { return tap % cols_ - half_cols(); }

    bool fits(const KGrid& grid) const { return rows_ <= grid.rows() && cols_ <= grid.cols(); }
    void require_fits(const KGrid& grid) const;

    bool operator==(const FilterSupport&) const = default;

private:
    int rows_;
    int cols_;
};

// Multichannel block-Toeplitz lifting of a weighted spectrum. Rows are grouped
// by channel, then by valid shift in row-major order; a valid shift is one
// where the whole filter overlaps the grid. Entry (shift s, tap a) is the
// weighted spectrum at s - a, so matrix * c is the valid part of the linear
// convolution of each channel with c.
struct LiftedMatrix {
    Eigen::MatrixXcd matrix;
    int channels = 0;
    int shift_rows = 0;
    int shift_cols = 0;

    int rows_per_channel() const { return shift_rows * shift_cols; }
};

LiftedMatrix build_lifted(const ComplexImage& rho_hat, const DerivativeOp& op, const FilterSupport& supp);

// T^H T for the lifting above, computed without forming T.
Eigen::MatrixXcd gram_matrix(const ComplexImage& rho_hat, const DerivativeOp& op, const FilterSupport& supp);

// ||T(rho_hat) c||_2.
double annihilation_residual(const ComplexImage& rho_hat, const DerivativeOp& op, const FilterSupport& supp,
                             std::span<const cdouble> filter);

}  // namespace slr
