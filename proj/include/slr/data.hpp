#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "slr/grid.hpp"
#include "slr/lifting.hpp"

namespace slr {

// Shapes use centered pixel coordinates: x = col - cols/2, y = row - rows/2.
struct Rect {
    double x0, y0, x1, y1;
};

struct Disk {
    double cx, cy, radius;
};

struct LinearProfile {
    double gx = 0.0;
    double gy = 0.0;
};

// Constant shapes contribute amplitude; linear shapes contribute
// amplitude + gx*x + gy*y inside the region.
struct Shape {
    std::variant<Rect, Disk> region;
    double amplitude = 1.0;
    std::optional<LinearProfile> linear;
};

struct PhantomSpec {
    KGrid grid;
    std::vector<Shape> shapes;
    std::uint64_t seed = 0;
};

struct Phantom {
    ComplexImage rho;
    ComplexImage rho1;  // constant-profile shapes
    ComplexImage rho2;  // linear-profile shapes
};

Phantom make_phantom(const PhantomSpec& spec);

// Deterministic mix of constant and linear shapes drawn from the seed.
PhantomSpec random_phantom_spec(const KGrid& grid, int shape_count, std::uint64_t seed);

// Rectangles and disks of both profiles, used by the examples and tests.
PhantomSpec mixed_phantom_spec(const KGrid& grid);

struct MaskSpec {
    KGrid grid;
    double acceleration = 4.0;
    double density_decay = 2.0;
    int center_radius = 2;
    std::uint64_t seed = 0;
};

struct SamplingMask {
    KGrid grid;
    std::vector<std::uint8_t> sampled;

    std::size_t count() const;
    double fraction() const { return static_cast<double>(count()) / static_cast<double>(grid.size()); }
};

// Variable-density Bernoulli mask with p(k) proportional to (1+|k|)^-decay
// scaled so the expected sampled fraction is 1/R. The center disk is always
// sampled.
SamplingMask make_mask(const MaskSpec& spec);

// Complex circular Gaussian noise, sigma per real and imaginary part.
CVector add_noise(std::span<const cdouble> b, double sigma, std::uint64_t seed);

// 20 log10(||ref|| / ||ref - est||); +inf on an exact match.
double snr_db(const ComplexImage& reference, const ComplexImage& estimate);

// Spectra that are exactly annihilated on the valid region by a known
// bandlimited edge polynomial, built directly in k-space.
struct FilterTap {
    int dy;
    int dx;
    cdouble value;
};

struct AnalyticSpectrum {
    ComplexImage rho_hat;
    // Minimal annihilating filter, offsets relative to its first tap.
    std::vector<FilterTap> filter;
    int filter_rows = 1;
    int filter_cols = 1;
};

enum class EdgeDirection { vertical, horizontal, diagonal };

// Piecewise-constant stripes with edges at n.r = offset and offset + n/2
// (square wave across the edge). First-order annihilator has taps at 0 and
// 2 steps along the normal.
AnalyticSpectrum stripe_spectrum(const KGrid& grid, EdgeDirection dir, double offset, double amplitude,
                                 double background);

// Periodic sawtooth ramp with a single jump at n.r = offset: piecewise linear.
// Its second-order annihilator is the square of the two-tap edge polynomial.
AnalyticSpectrum ramp_spectrum(const KGrid& grid, EdgeDirection dir, double offset, double amplitude,
                               double background);

// Spike at (ty, tx) on a flat background. Annihilated to first order by the
// separable 2x2 polynomial vanishing on the lines x = tx and y = ty.
AnalyticSpectrum spike_spectrum(const KGrid& grid, double ty, double tx, double amplitude, double background);

// Zero-pads a minimal filter into supp, first tap at offset (dy, dx).
CVector embed_filter(const AnalyticSpectrum& spectrum, const FilterSupport& supp, int dy, int dx);

}  // namespace slr

namespace slr {

// Decomposition error with the DC offset removed from every component (the
// split of a constant between the two parts is not identifiable):
// max over i of ||r_i - t_i||^2 / ||t_i||^2 on mean-free arrays.
double component_leakage(const ComplexImage& rec1, const ComplexImage& rec2, const ComplexImage& true1,
                         const ComplexImage& true2);

}  // namespace slr
