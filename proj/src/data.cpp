#include "slr/data.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "slr/errors.hpp"

namespace slr {

namespace {

bool inside(const Shape& s, double x, double y) {
    if (const auto* r = std::get_if<Rect>(&s.region)) {
        return x >= r->x0 && x <= r->x1 && y >= r->y0 && y <= r->y1;
    }
    const auto& d = std::get<Disk>(s.region);
    const double dx = x - d.cx;
    const double dy = y - d.cy;
    return dx * dx + dy * dy <= d.radius * d.radius;
}

void check_region(const Shape& s, const KGrid& g) {
    const double xmin = -g.cols() / 2.0, xmax = g.cols() / 2.0 - 1.0;
    const double ymin = -g.rows() / 2.0, ymax = g.rows() / 2.0 - 1.0;
    double x0, x1, y0, y1;
    if (const auto* r = std::get_if<Rect>(&s.region)) {
        if (r->x1 < r->x0 || r->y1 < r->y0) throw ParameterError("rectangle has negative extent");
        x0 = r->x0, x1 = r->x1, y0 = r->y0, y1 = r->y1;
    } else {
        const auto& d = std::get<Disk>(s.region);
        if (!(d.radius > 0.0)) throw ParameterError("disk radius must be positive");
        x0 = d.cx - d.radius, x1 = d.cx + d.radius, y0 = d.cy - d.radius, y1 = d.cy + d.radius;
    }
    if (x0 < xmin || x1 > xmax || y0 < ymin || y1 > ymax) throw ParameterError("shape extends outside the grid");
}

}  // namespace

Phantom make_phantom(const PhantomSpec& spec) {
    if (spec.shapes.empty()) throw ParameterError("phantom needs at least one shape");
    const KGrid& g = spec.grid;
    for (const auto& s : spec.shapes) check_region(s, g);
    Phantom out{ComplexImage(g, Domain::spatial), ComplexImage(g, Domain::spatial),
                ComplexImage(g, Domain::spatial)};
    for (int row = 0; row < g.rows(); ++row) {
        const double y = g.ky(row);
        for (int col = 0; col < g.cols(); ++col) {
            const double x = g.kx(col);
            for (const auto& s : spec.shapes) {
                if (!inside(s, x, y)) continue;
                if (s.linear) {
                    out.rho2.at(row, col) += s.amplitude + s.linear->gx * x + s.linear->gy * y;
                } else {
                    out.rho1.at(row, col) += s.amplitude;
                }
            }
            out.rho.at(row, col) = out.rho1.at(row, col) + out.rho2.at(row, col);
        }
    }
    return out;
}

PhantomSpec random_phantom_spec(const KGrid& grid, int shape_count, std::uint64_t seed) {
    if (shape_count < 1) throw ParameterError("shape count must be positive");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double hx = grid.cols() / 2.0;
    const double hy = grid.rows() / 2.0;
    const double margin = 2.0;
    PhantomSpec spec{grid, {}, seed};
    for (int i = 0; i < shape_count; ++i) {
        Shape s;
        const double size_x = (0.15 + 0.25 * unit(rng)) * grid.cols();
        const double size_y = (0.15 + 0.25 * unit(rng)) * grid.rows();
        const double cx = -hx + margin + size_x / 2 + unit(rng) * (grid.cols() - 2 * margin - size_x - 1);
        const double cy = -hy + margin + size_y / 2 + unit(rng) * (grid.rows() - 2 * margin - size_y - 1);
        if (unit(rng) < 0.5) {
            s.region = Rect{std::round(cx - size_x / 2), std::round(cy - size_y / 2), std::round(cx + size_x / 2),
                            std::round(cy + size_y / 2)};
        } else {
            s.region = Disk{cx, cy, 0.5 * std::min(size_x, size_y)};
        }
        s.amplitude = 0.3 + 0.7 * unit(rng);
        if (i % 2 == 1) {
            const double slope = 1.0 / std::max(grid.rows(), grid.cols());
            s.linear = LinearProfile{(2 * unit(rng) - 1) * slope, (2 * unit(rng) - 1) * slope};
        }
        spec.shapes.push_back(s);
    }
    return spec;
}

PhantomSpec mixed_phantom_spec(const KGrid& grid) {
    // Proportions of a 64x64 layout, scaled to the grid.
    const double sx = grid.cols() / 64.0;
    const double sy = grid.rows() / 64.0;
    const double s = std::min(sx, sy);
    PhantomSpec spec{grid, {}, 0};
    spec.shapes.push_back(Shape{Rect{-24 * sx, -20 * sy, -4 * sx, 6 * sy}, 1.0, std::nullopt});
    spec.shapes.push_back(Shape{Disk{14 * sx, -14 * sy, 9 * s}, 0.6, std::nullopt});
    spec.shapes.push_back(Shape{Rect{2 * sx, 4 * sy, 26 * sx, 24 * sy}, 0.5, LinearProfile{0.03 / sx, -0.02 / sy}});
    spec.shapes.push_back(Shape{Disk{-14 * sx, 18 * sy, 9 * s}, 0.4, LinearProfile{-0.02 / sx, 0.03 / sy}});
    return spec;
}

std::size_t SamplingMask::count() const {
    return static_cast<std::size_t>(std::count(sampled.begin(), sampled.end(), std::uint8_t{1}));
}

SamplingMask make_mask(const MaskSpec& spec) {
    const KGrid& g = spec.grid;
    const double n = static_cast<double>(g.size());
    if (!(spec.acceleration > 1.0) || !(spec.acceleration < n)) {
        throw ParameterError("acceleration must lie in (1, " + std::to_string(g.size()) + "), got " +
                             std::to_string(spec.acceleration));
    }
    if (!(spec.density_decay > 0.0)) throw ParameterError("density decay must be positive");
    if (spec.center_radius < 1) throw ParameterError("center radius must be >= 1");

    std::vector<double> radius(g.size());
    std::vector<std::uint8_t> center(g.size(), 0);
    double center_count = 0.0;
    for (int r = 0; r < g.rows(); ++r) {
        for (int c = 0; c < g.cols(); ++c) {
            const std::size_t i = static_cast<std::size_t>(r) * g.cols() + c;
            radius[i] = std::hypot(static_cast<double>(g.kx(c)), static_cast<double>(g.ky(r)));
            if (radius[i] <= spec.center_radius) {
                center[i] = 1;
                center_count += 1.0;
            }
        }
    }
    const double budget = n / spec.acceleration;
    if (center_count > budget) {
        throw ParameterError("fully sampled center (" + std::to_string(static_cast<int>(center_count)) +
                             " samples) exceeds the budget of " + std::to_string(budget) + " samples");
    }

    auto expected = [&](double scale) {
        double e = center_count;
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (!center[i]) e += std::min(1.0, scale * std::pow(1.0 + radius[i], -spec.density_decay));
        }
        return e;
    };
    double lo = 0.0;
    double hi = 1.0;
    while (expected(hi) < budget && hi < 1e300) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (expected(mid) < budget ? lo : hi) = mid;
    }
    const double scale = 0.5 * (lo + hi);

    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    SamplingMask mask{g, std::vector<std::uint8_t>(g.size(), 0)};
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double u = unit(rng);
        const double prob = center[i] ? 1.0 : std::min(1.0, scale * std::pow(1.0 + radius[i], -spec.density_decay));
        mask.sampled[i] = u < prob ? 1 : 0;
    }
    return mask;
}

CVector add_noise(std::span<const cdouble> b, double sigma, std::uint64_t seed) {
    if (!(sigma >= 0.0)) throw ParameterError("noise sigma must be >= 0");
    CVector out(b.begin(), b.end());
    if (sigma == 0.0) return out;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, sigma);
    for (auto& v : out) {
        const double re = normal(rng);
        const double im = normal(rng);
        v += cdouble(re, im);
    }
    return out;
}

double snr_db(const ComplexImage& reference, const ComplexImage& estimate) {
    if (!(reference.grid() == estimate.grid())) throw DimensionError("snr_db: grids differ");
    const double ref = reference.norm();
    if (ref == 0.0) throw ParameterError("snr_db: reference image is zero");
    double err = 0.0;
    for (std::size_t i = 0; i < reference.grid().size(); ++i) err += std::norm(reference[i] - estimate[i]);
    if (err == 0.0) return std::numeric_limits<double>::infinity();
    return 20.0 * std::log10(ref / std::sqrt(err));
}

namespace {

struct LineGeometry {
    int step_y;
    int step_x;
    int length;  // grid period along the normal
};

LineGeometry line_geometry(const KGrid& g, EdgeDirection dir) {
    switch (dir) {
        case EdgeDirection::vertical:
            return {0, 1, g.cols()};
        case EdgeDirection::horizontal:
            return {1, 0, g.rows()};
        case EdgeDirection::diagonal:
            if (g.rows() != g.cols()) throw ParameterError("diagonal edges need a square grid");
            return {1, 1, g.rows()};
    }
    throw ParameterError("unknown edge direction");
}

// Weighted spectrum along the line k = m*(step_y, step_x) is shaped by
// derivative_line(m); the spectrum itself is derivative_line(m) / w(m)
// with w(m) = j 2 pi m / n the first-order multiplier along the normal.
template <class LineFn>
ComplexImage line_spectrum(const KGrid& g, const LineGeometry& geo, double background, LineFn derivative_line) {
    ComplexImage rho_hat(g, Domain::fourier);
    const int half = geo.length / 2;
    for (int m = -half; m < half; ++m) {
        const int ky = m * geo.step_y;
        const int kx = m * geo.step_x;
        if (m == 0) {
            rho_hat[g.dc_index()] = background * std::sqrt(static_cast<double>(g.size()));
            continue;
        }
        const cdouble w(0.0, 2.0 * std::numbers::pi * m / geo.length);
        rho_hat[g.index(ky, kx)] = derivative_line(m) / w;
    }
    return rho_hat;
}

cdouble phase(double offset, int m, int n) {
    return std::polar(1.0, -2.0 * std::numbers::pi * offset * m / n);
}

}  // namespace

AnalyticSpectrum stripe_spectrum(const KGrid& grid, EdgeDirection dir, double offset, double amplitude,
                                 double background) {
    const LineGeometry geo = line_geometry(grid, dir);
    const int n = geo.length;
    // Edges at offset (up) and offset + n/2 (down): z^m (1 - (-1)^m).
    auto line = [&](int m) { return amplitude * phase(offset, m, n) * (m % 2 == 0 ? 0.0 : 2.0); };
    AnalyticSpectrum out{line_spectrum(grid, geo, background, line), {}, 1, 1};
    const cdouble z2 = phase(offset, 2, n);
    out.filter = {{0, 0, 1.0}, {2 * geo.step_y, 2 * geo.step_x, -z2}};
    out.filter_rows = 2 * geo.step_y + 1;
    out.filter_cols = 2 * geo.step_x + 1;
    return out;
}

AnalyticSpectrum ramp_spectrum(const KGrid& grid, EdgeDirection dir, double offset, double amplitude,
                               double background) {
    const LineGeometry geo = line_geometry(grid, dir);
    const int n = geo.length;
    // Constant slope plus a single downward jump: derivative spectrum -z^m off DC.
    auto line = [&](int m) { return -amplitude * phase(offset, m, n); };
    AnalyticSpectrum out{line_spectrum(grid, geo, background, line), {}, 1, 1};
    const cdouble z = phase(offset, 1, n);
    // (1 - z e^{j2pi n.r/n})^2
    out.filter = {{0, 0, 1.0}, {geo.step_y, geo.step_x, -2.0 * z}, {2 * geo.step_y, 2 * geo.step_x, z * z}};
    out.filter_rows = 2 * geo.step_y + 1;
    out.filter_cols = 2 * geo.step_x + 1;
    return out;
}

AnalyticSpectrum spike_spectrum(const KGrid& grid, double ty, double tx, double amplitude, double background) {
    ComplexImage rho_hat(grid, Domain::fourier);
    for (int r = 0; r < grid.rows(); ++r) {
        for (int c = 0; c < grid.cols(); ++c) {
            const int ky = grid.ky(r);
            const int kx = grid.kx(c);
            rho_hat.at(r, c) = amplitude * phase(ty, ky, grid.rows()) * phase(tx, kx, grid.cols());
        }
    }
    rho_hat[grid.dc_index()] += background * std::sqrt(static_cast<double>(grid.size()));
    const cdouble zx = phase(tx, 1, grid.cols());
    const cdouble zy = phase(ty, 1, grid.rows());
    AnalyticSpectrum out{std::move(rho_hat), {{0, 0, 1.0}, {0, 1, -zx}, {1, 0, -zy}, {1, 1, zx * zy}}, 2, 2};
    return out;
}

CVector embed_filter(const AnalyticSpectrum& spectrum, const FilterSupport& supp, int dy, int dx) {
    CVector c(static_cast<std::size_t>(supp.size()));
    for (const auto& tap : spectrum.filter) {
        const int oy = dy + tap.dy;
        const int ox = dx + tap.dx;
        if (oy < -supp.half_rows() || oy > supp.half_rows() || ox < -supp.half_cols() || ox > supp.half_cols()) {
            throw DimensionError("filter tap falls outside the support");
        }
        c[static_cast<std::size_t>((oy + supp.half_rows()) * supp.cols() + ox + supp.half_cols())] = tap.value;
    }
    return c;
}

}  // namespace slr

namespace slr {

double component_leakage(const ComplexImage& rec1, const ComplexImage& rec2, const ComplexImage& true1,
                         const ComplexImage& true2) {
    auto mean = [](const ComplexImage& x) {
        cdouble m = 0.0;
        for (const auto& v : x.values()) m += v;
        return m / static_cast<double>(x.grid().size());
    };
    auto relative = [&](const ComplexImage& rec, const ComplexImage& truth) {
        if (!(rec.grid() == truth.grid())) throw DimensionError("component_leakage: grids differ");
        const cdouble mr = mean(rec);
        const cdouble mt = mean(truth);
        double err = 0.0;
        double ref = 0.0;
        for (std::size_t i = 0; i < rec.grid().size(); ++i) {
            err += std::norm((rec[i] - mr) - (truth[i] - mt));
            ref += std::norm(truth[i] - mt);
        }
        if (ref == 0.0) throw ParameterError("component_leakage: a true component is constant");
        return err / ref;
    };
    return std::max(relative(rec1, true1), relative(rec2, true2));
}

}  // namespace slr
