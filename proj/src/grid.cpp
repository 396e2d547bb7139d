#include "slr/grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>
#include <utility>

#include "slr/errors.hpp"

namespace slr {

KGrid::KGrid(int rows, int cols) : rows_(rows), cols_(cols) {
    if (rows < 4 || cols < 4 || rows % 2 != 0 || cols % 2 != 0) {
        throw ParameterError("grid dimensions must be even and >= 4, got " + std::to_string(rows) +
                             "x" + std::to_string(cols));
    }
}

bool KGrid::contains(int ky, int kx) const {
    return ky >= -rows_ / 2 && ky < rows_ / 2 && kx >= -cols_ / 2 && kx < cols_ / 2;
}

std::size_t KGrid::index(int ky, int kx) const {
    if (!contains(ky, kx)) {
        throw DimensionError("frequency (" + std::to_string(ky) + ", " + std::to_string(kx) +
                             ") outside grid");
    }
    return static_cast<std::size_t>(ky + rows_ / 2) * cols_ + (kx + cols_ / 2);
}

std::string_view to_string(Domain d) { return d == Domain::spatial ? "spatial" : "fourier"; }

Domain parse_domain(std::string_view s) {
    if (s == "spatial") return Domain::spatial;
    if (s == "fourier") return Domain::fourier;
    throw ParseError("unknown domain tag '" + std::string(s) + "'");
}

ComplexImage::ComplexImage(KGrid grid, Domain domain)
    : grid_(grid), domain_(domain), values_(grid.size()) {}

ComplexImage::ComplexImage(KGrid grid, Domain domain, CVector values)
    : grid_(grid), domain_(domain), values_(std::move(values)) {
    if (values_.size() != grid_.size()) {
        throw DimensionError("image has " + std::to_string(values_.size()) + " values, grid needs " +
                             std::to_string(grid_.size()));
    }
}

double ComplexImage::squared_norm() const {
    double s = 0.0;
    for (const auto& v : values_) s += std::norm(v);
    return s;
}

double ComplexImage::norm() const { return std::sqrt(squared_norm()); }

MultiChannelImage::MultiChannelImage(KGrid grid, Domain domain, int channels)
    : grid_(grid), domain_(domain), channels_(channels, CVector(grid.size())) {}

double MultiChannelImage::squared_norm() const {
    double s = 0.0;
    for (const auto& ch : channels_)
        for (const auto& v : ch) s += std::norm(v);
    return s;
}

namespace {

// FFTW planning is not thread-safe; execution with fresh aligned buffers is.
struct PlanPair {
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;
    ~PlanPair() {
        if (forward) fftw_destroy_plan(forward);
        if (backward) fftw_destroy_plan(backward);
    }
};

struct FftwBuffer {
    explicit FftwBuffer(std::size_t n)
        : ptr(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n))) {}
    ~FftwBuffer() { fftw_free(ptr); }
    FftwBuffer(const FftwBuffer&) = delete;
    FftwBuffer& operator=(const FftwBuffer&) = delete;
    fftw_complex* ptr;
};

const PlanPair& plans_for(int rows, int cols) {
    static std::mutex mutex;
    static std::map<std::pair<int, int>, std::unique_ptr<PlanPair>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[{rows, cols}];
    if (!slot) {
        slot = std::make_unique<PlanPair>();
        FftwBuffer buf(static_cast<std::size_t>(rows) * cols);
        slot->forward = fftw_plan_dft_2d(rows, cols, buf.ptr, buf.ptr, FFTW_FORWARD, FFTW_ESTIMATE);
        slot->backward = fftw_plan_dft_2d(rows, cols, buf.ptr, buf.ptr, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    return *slot;
}

}  // namespace

void fft2_centered_inplace(const KGrid& grid, std::span<cdouble> data, bool inverse) {
    const int rows = grid.rows();
    const int cols = grid.cols();
    if (data.size() != grid.size()) throw DimensionError("fft buffer does not match grid");
    const PlanPair& plans = plans_for(rows, cols);
    FftwBuffer buf(grid.size());
    auto* b = reinterpret_cast<cdouble*>(buf.ptr);
    const int hr = rows / 2;
    const int hc = cols / 2;
    // Even sizes: the centering shift is its own inverse.
    for (int i = 0; i < rows; ++i) {
        const int si = (i + hr) % rows;
        for (int j = 0; j < cols; ++j) {
            b[static_cast<std::size_t>(si) * cols + (j + hc) % cols] =
                data[static_cast<std::size_t>(i) * cols + j];
        }
    }
    fftw_execute_dft(inverse ? plans.backward : plans.forward, buf.ptr, buf.ptr);
    const double scale = 1.0 / std::sqrt(static_cast<double>(grid.size()));
    for (int i = 0; i < rows; ++i) {
        const int si = (i + hr) % rows;
        for (int j = 0; j < cols; ++j) {
            data[static_cast<std::size_t>(i) * cols + j] =
                b[static_cast<std::size_t>(si) * cols + (j + hc) % cols] * scale;
        }
    }
}

ComplexImage fft2_centered(const ComplexImage& img) {
    if (img.domain() != Domain::spatial) throw ParameterError("fft2_centered expects a spatial image");
    ComplexImage out(img.grid(), Domain::fourier, img.data());
    fft2_centered_inplace(out.grid(), out.values(), false);
    return out;
}

ComplexImage ifft2_centered(const ComplexImage& img) {
    if (img.domain() != Domain::fourier) throw ParameterError("ifft2_centered expects a fourier image");
    ComplexImage out(img.grid(), Domain::spatial, img.data());
    fft2_centered_inplace(out.grid(), out.values(), true);
    return out;
}

DerivativeOp::DerivativeOp(DerivativeOrder order, KGrid grid)
    : order_(order), grid_(grid), gain_(grid.size(), 0.0) {
    const std::size_t n = grid.size();
    CVector wx(n), wy(n);
    const cdouble j2pi(0.0, 2.0 * std::numbers::pi);
    for (int r = 0; r < grid.rows(); ++r) {
        for (int c = 0; c < grid.cols(); ++c) {
            const std::size_t i = static_cast<std::size_t>(r) * grid.cols() + c;
            wx[i] = j2pi * (static_cast<double>(grid.kx(c)) / grid.cols());
            wy[i] = j2pi * (static_cast<double>(grid.ky(r)) / grid.rows());
        }
    }
    if (order == DerivativeOrder::first) {
        multipliers_ = {std::move(wx), std::move(wy)};
    } else {
        CVector wxx(n), wxy(n), wyy(n);
        for (std::size_t i = 0; i < n; ++i) {
            wxx[i] = wx[i] * wx[i];
            wxy[i] = wx[i] * wy[i];
            wyy[i] = wy[i] * wy[i];
        }
        multipliers_ = {std::move(wxx), std::move(wxy), std::move(wyy)};
    }
    for (const auto& w : multipliers_)
        for (std::size_t i = 0; i < n; ++i) gain_[i] += std::norm(w[i]);
}

MultiChannelImage apply_derivative(const DerivativeOp& op, const ComplexImage& rho_hat) {
    if (!(rho_hat.grid() == op.grid())) throw DimensionError("derivative operator and spectrum grids differ");
    MultiChannelImage out(op.grid(), Domain::fourier, op.channels());
    for (int ch = 0; ch < op.channels(); ++ch) {
        auto w = op.multiplier(ch);
        auto& dst = out.channel(ch);
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = w[i] * rho_hat[i];
    }
    return out;
}

ComplexImage apply_derivative_adjoint(const DerivativeOp& op, const MultiChannelImage& channels) {
    if (channels.channels() != op.channels()) {
        throw DimensionError("expected " + std::to_string(op.channels()) + " channels, got " +
                             std::to_string(channels.channels()));
    }
    if (!(channels.grid() == op.grid())) throw DimensionError("derivative operator and channel grids differ");
    ComplexImage out(op.grid(), Domain::fourier);
    for (int ch = 0; ch < op.channels(); ++ch) {
        auto w = op.multiplier(ch);
        const auto& src = channels.channel(ch);
        for (std::size_t i = 0; i < src.size(); ++i) out[i] += std::conj(w[i]) * src[i];
    }
    return out;
}

}  // namespace slr
