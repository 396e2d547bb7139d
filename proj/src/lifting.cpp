#include "slr/lifting.hpp"

#include <string>
#include <vector>

#include "slr/errors.hpp"

namespace slr {

FilterSupport::FilterSupport(int rows, int cols) : rows_(rows), cols_(cols) {
    if (rows < 1 || cols < 1 || rows % 2 == 0 || cols % 2 == 0) {
        throw ParameterError("filter support must have odd positive dimensions, got " + std::to_string(rows) +
                             "x" + std::to_string(cols));
    }
}

void FilterSupport::require_fits(const KGrid& grid) const {
    if (!fits(grid)) {
        throw DimensionError("filter " + std::to_string(rows_) + "x" + std::to_string(cols_) +
                             " does not fit grid " + std::to_string(grid.rows()) + "x" +
                             std::to_string(grid.cols()));
    }
}

namespace {

void check_inputs(const ComplexImage& rho_hat, const DerivativeOp& op, const FilterSupport& supp) {
    if (rho_hat.domain() != Domain::fourier) throw ParameterError("lifting expects a fourier-domain spectrum");
    if (!(rho_hat.grid() == op.grid())) throw DimensionError("spectrum and derivative operator grids differ");
    supp.require_fits(rho_hat.grid());
}

}  // namespace

LiftedMatrix build_lifted(const ComplexImage& rho_hat, const DerivativeOp& op, const FilterSupport& supp) {
    check_inputs(rho_hat, op, supp);
    const KGrid& g = rho_hat.grid();
    const MultiChannelImage weighted = apply_derivative(op, rho_hat);

    LiftedMatrix out;
    out.channels = op.channels();
    out.shift_rows = g.rows() - supp.rows() + 1;
    out.shift_cols = g.cols() - supp.cols() + 1;
    const int per_channel = out.rows_per_channel();
    out.matrix.resize(static_cast<Eigen::Index>(per_channel) * out.channels, supp.size());

    const int hr = supp.half_rows();
    const int hc = supp.half_cols();
    for (int ch = 0; ch < out.channels; ++ch) {
        const CVector& z = weighted.channel(ch);
        for (int sr = 0; sr < out.shift_rows; ++sr) {
            for (int sc = 0; sc < out.shift_cols; ++sc) {
                const Eigen::Index row = static_cast<Eigen::Index>(ch) * per_channel + sr * out.shift_cols + sc;
                // Array position of the shift centre.
                const int ur = sr + hr;
                const int uc = sc + hc;
                for (int t = 0; t < supp.size(); ++t) {
                    const int r = ur - supp.offset_y(t);
                    const int c = uc - supp.offset_x(t);
                    out.matrix(row, t) = z[static_cast<std::size_t>(r) * g.cols() + c];
                }
            }
        }
    }
    return out;
}

Eigen::MatrixXcd gram_matrix(const ComplexImage& rho_hat, const DerivativeOp& op, const FilterSupport& supp) {
    check_inputs(rho_hat, op, supp);
    const KGrid& g = rho_hat.grid();
    const int nr = g.rows();
    const int nc = g.cols();
    const int fr = supp.rows();
    const int fc = supp.cols();
    const int hr = supp.half_rows();
    const int hc = supp.half_cols();
    const MultiChannelImage weighted = apply_derivative(op, rho_hat);

    // G(a, b) = sum_ch sum_{s valid} conj(z(s - a)) z(s - b). With u = s - a and
    // d = b - a this is a window sum of conj(z(u)) z(u - d), read from a
    // summed-area table per lag d.
    Eigen::MatrixXcd gram = Eigen::MatrixXcd::Zero(supp.size(), supp.size());
    const int sat_cols = nc + 1;
    std::vector<cdouble> sat(static_cast<std::size_t>(nr + 1) * sat_cols);
    auto sat_at = [&](int r, int c) -> cdouble& { return sat[static_cast<std::size_t>(r) * sat_cols + c]; };

    for (int ch = 0; ch < op.channels(); ++ch) {
        const CVector& z = weighted.channel(ch);
        for (int dy = -(fr - 1); dy <= fr - 1; ++dy) {
            for (int dx = -(fc - 1); dx <= fc - 1; ++dx) {
                for (int r = 0; r < nr; ++r) {
                    cdouble row_sum = 0.0;
                    for (int c = 0; c < nc; ++c) {
                        const int r2 = r - dy;
                        const int c2 = c - dx;
                        if (r2 >= 0 && r2 < nr && c2 >= 0 && c2 < nc) {
                            row_sum += std::conj(z[static_cast<std::size_t>(r) * nc + c]) *
                                       z[static_cast<std::size_t>(r2) * nc + c2];
                        }
                        sat_at(r + 1, c + 1) = sat_at(r, c + 1) + row_sum;
                    }
                }
                for (int ta = 0; ta < supp.size(); ++ta) {
                    const int ay = supp.offset_y(ta);
                    const int ax = supp.offset_x(ta);
                    const int by = ay + dy;
                    const int bx = ax + dx;
                    if (by < -hr || by > hr || bx < -hc || bx > hc) continue;
                    const int tb = (by + hr) * fc + (bx + hc);
                    // Window of u for shifts centred in [hr, nr-1-hr] x [hc, nc-1-hc].
                    const int r0 = hr - ay;
                    const int r1 = nr - hr - ay;  // exclusive
                    const int c0 = hc - ax;
                    const int c1 = nc - hc - ax;
                    gram(ta, tb) += sat_at(r1, c1) - sat_at(r0, c1) - sat_at(r1, c0) + sat_at(r0, c0);
                }
            }
        }
    }
    return gram;
}

double annihilation_residual(const ComplexImage& rho_hat, const DerivativeOp& op, const FilterSupport& supp,
                             std::span<const cdouble> filter) {
    if (filter.size() != static_cast<std::size_t>(supp.size())) {
        throw DimensionError("filter has " + std::to_string(filter.size()) + " taps, support needs " +
                             std::to_string(supp.size()));
    }
    const LiftedMatrix lifted = build_lifted(rho_hat, op, supp);
    const Eigen::Map<const Eigen::VectorXcd> c(filter.data(), supp.size());
    return (lifted.matrix * c).norm();
}

}  // namespace slr
