#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace slr {

using cdouble = std::complex<double>;
using CVector = std::vector<cdouble>;

// Rectangular grid with centered integer coordinates. Array row i holds
// k_y = i - rows/2 and column j holds k_x = j - cols/2, so DC sits at
// (rows/2, cols/2). The same centering is used for spatial positions.
class KGrid {
public:
    KGrid(int rows, int cols);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    std::size_t size() const { return static_cast<std::size_t>(rows_) * cols_; }

    int ky(int row) const { return row - rows_ / 2; }
    int kx(int col) const { return col - cols_ / 2; }

    bool contains(int ky, int kx) const;
    // Linear row-major offset of centered frequency (ky, kx).
    std::size_t index(int ky, int kx) const;
    std::size_t dc_index() const { return index(0, 0); }

    bool operator==(const KGrid&) const = default;

private:
    int rows_;
    int cols_;
};

enum class Domain { spatial, fourier };

std::string_view to_string(Domain d);
Domain parse_domain(std::string_view s);

class ComplexImage {
public:
    ComplexImage(KGrid grid, Domain domain);
    ComplexImage(KGrid grid, Domain domain, CVector values);

    const KGrid& grid() const { return grid_; }
    Domain domain() const { return domain_; }

    std::span<cdouble> values() { return values_; }
    std::span<const cdouble> values() const { return values_; }
    CVector& data() { return values_; }
    const CVector& data() const { return values_; }

    cdouble& operator[](std::size_t i) { return values_[i]; }
    const cdouble& operator[](std::size_t i) const { return values_[i]; }
    cdouble& at(int row, int col) { return values_[static_cast<std::size_t>(row) * grid_.cols() + col]; }
    const cdouble& at(int row, int col) const {
        return values_[static_cast<std::size_t>(row) * grid_.cols() + col];
    }

    double norm() const;
    double squared_norm() const;

private:
    KGrid grid_;
    Domain domain_;
    CVector values_;
};

// Fixed channel count, one array per channel, all on the same grid.
class MultiChannelImage {
public:
    MultiChannelImage(KGrid grid, Domain domain, int channels);

    const KGrid& grid() const { return grid_; }
    Domain domain() const { return domain_; }
    int channels() const { return static_cast<int>(channels_.size()); }

    CVector& channel(int c) { return channels_[c]; }
    const CVector& channel(int c) const { return channels_[c]; }

    double squared_norm() const;

private:
    KGrid grid_;
    Domain domain_;
    std::vector<CVector> channels_;
};

// In-place centered unitary DFT on a raw row-major array of grid.size().
// inverse=false maps spatial -> fourier.
void fft2_centered_inplace(const KGrid& grid, std::span<cdouble> data, bool inverse);

ComplexImage fft2_centered(const ComplexImage& img);
ComplexImage ifft2_centered(const ComplexImage& img);

enum class DerivativeOrder { first = 1, second = 2 };

// Diagonal k-space derivative weighting. Channel order is (x, y) for the
// first order and (xx, xy, yy) for the second order. Multipliers use
// j*2*pi*k/N per axis so scales do not depend on the grid size.
class DerivativeOp {
public:
    DerivativeOp(DerivativeOrder order, KGrid grid);

    DerivativeOrder order() const { return order_; }
    const KGrid& grid() const { return grid_; }
    int channels() const { return static_cast<int>(multipliers_.size()); }

    std::span<const cdouble> multiplier(int ch) const { return multipliers_[ch]; }
    // Diagonal of M^* M, i.e. sum over channels of |w_ch(k)|^2.
    std::span<const double> gain() const { return gain_; }

private:
    DerivativeOrder order_;
    KGrid grid_;
    std::vector<CVector> multipliers_;
    std::vector<double> gain_;
};

MultiChannelImage apply_derivative(const DerivativeOp& op, const ComplexImage& rho_hat);
ComplexImage apply_derivative_adjoint(const DerivativeOp& op, const MultiChannelImage& channels);

}  // namespace slr
