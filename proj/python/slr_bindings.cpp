#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>

#include "slr/data.hpp"
#include "slr/errors.hpp"
#include "slr/grid.hpp"
#include "slr/io.hpp"
#include "slr/lifting.hpp"
#include "slr/solver.hpp"
#include "slr/weights.hpp"

namespace py = pybind11;
using namespace slr;

namespace {

using CArray = py::array_t<cdouble, py::array::c_style | py::array::forcecast>;

KGrid grid_of(const CArray& a) {
    if (a.ndim() != 2) throw DimensionError("expected a 2-D array");
    return KGrid(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)));
}

ComplexImage to_image(const CArray& a, Domain d) {
    const KGrid g = grid_of(a);
    return ComplexImage(g, d, CVector(a.data(), a.data() + g.size()));
}

CArray to_array(const ComplexImage& img) {
    CArray out({img.grid().rows(), img.grid().cols()});
    std::memcpy(out.mutable_data(), img.data().data(), img.grid().size() * sizeof(cdouble));
    return out;
}

SamplingMask to_mask(const py::array_t<bool, py::array::c_style | py::array::forcecast>& m) {
    if (m.ndim() != 2) throw DimensionError("expected a 2-D mask");
    SamplingMask out{KGrid(static_cast<int>(m.shape(0)), static_cast<int>(m.shape(1))), {}};
    out.sampled.assign(m.data(), m.data() + m.size());
    return out;
}

py::array_t<bool> from_mask(const SamplingMask& m) {
    py::array_t<bool> out({m.grid.rows(), m.grid.cols()});
    for (std::size_t i = 0; i < m.grid.size(); ++i) out.mutable_data()[i] = m.sampled[i] != 0;
    return out;
}

DerivativeOrder order_of(int order) {
    if (order == 1) return DerivativeOrder::first;
    if (order == 2) return DerivativeOrder::second;
    throw ParameterError("derivative order must be 1 or 2");
}

py::dict phantom_dict(const Phantom& ph) {
    py::dict d;
    d["rho"] = to_array(ph.rho);
    d["rho1"] = to_array(ph.rho1);
    d["rho2"] = to_array(ph.rho2);
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Two-component structured low-rank recovery from undersampled k-space.";

    py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
    py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);

    m.def("fft2c", [](const CArray& x) { return to_array(fft2_centered(to_image(x, Domain::spatial))); },
          py::arg("image"), "Centered unitary 2-D DFT.");
    m.def("ifft2c", [](const CArray& x) { return to_array(ifft2_centered(to_image(x, Domain::fourier))); },
          py::arg("kspace"));

    m.def(
        "derivative",
        [](const CArray& rho_hat, int order) {
            const ComplexImage img = to_image(rho_hat, Domain::fourier);
            const MultiChannelImage out = apply_derivative(DerivativeOp(order_of(order), img.grid()), img);
            py::list channels;
            for (int ch = 0; ch < out.channels(); ++ch) {
                channels.append(to_array(ComplexImage(out.grid(), Domain::fourier, out.channel(ch))));
            }
            return channels;
        },
        py::arg("rho_hat"), py::arg("order"), "Derivative-weighted spectra: (x, y) or (xx, xy, yy).");

    m.def(
        "lifted_matrix",
        [](const CArray& rho_hat, int order, int filter_rows, int filter_cols) {
            const ComplexImage img = to_image(rho_hat, Domain::fourier);
            return build_lifted(img, DerivativeOp(order_of(order), img.grid()), FilterSupport(filter_rows, filter_cols))
                .matrix;
        },
        py::arg("rho_hat"), py::arg("order"), py::arg("filter_rows"), py::arg("filter_cols"));
    m.def(
        "gram_matrix",
        [](const CArray& rho_hat, int order, int filter_rows, int filter_cols) {
            const ComplexImage img = to_image(rho_hat, Domain::fourier);
            return gram_matrix(img, DerivativeOp(order_of(order), img.grid()), FilterSupport(filter_rows, filter_cols));
        },
        py::arg("rho_hat"), py::arg("order"), py::arg("filter_rows"), py::arg("filter_cols"));

    m.def(
        "weight_sqrt",
        [](const Eigen::MatrixXcd& gram, int filter_rows, int filter_cols, double epsilon, double p) {
            const FilterBank bank = weight_sqrt(gram, FilterSupport(filter_rows, filter_cols), epsilon, p);
            py::dict d;
            d["eigenvalues"] = bank.eigenvalues();
            d["eigenvectors"] = bank.eigenvectors();
            d["weight_sqrt"] = bank.weight_sqrt();
            d["weight_matrix"] = bank.weight_matrix();
            return d;
        },
        py::arg("gram"), py::arg("filter_rows"), py::arg("filter_cols"), py::arg("epsilon"), py::arg("p"));
    m.def(
        "sos_mask",
        [](const Eigen::MatrixXcd& gram, int filter_rows, int filter_cols, double epsilon, double p, int rows,
           int cols) {
            const FilterBank bank = weight_sqrt(gram, FilterSupport(filter_rows, filter_cols), epsilon, p);
            const SosMask s = sos_mask(bank, KGrid(rows, cols));
            py::array_t<double> out({rows, cols});
            std::memcpy(out.mutable_data(), s.entries.data(), s.entries.size() * sizeof(double));
            return out;
        },
        py::arg("gram"), py::arg("filter_rows"), py::arg("filter_cols"), py::arg("epsilon"), py::arg("p"),
        py::arg("rows"), py::arg("cols"));

    m.def(
        "mixed_phantom", [](int rows, int cols) { return phantom_dict(make_phantom(mixed_phantom_spec(KGrid(rows, cols)))); },
        py::arg("rows"), py::arg("cols"), "Returns {'rho', 'rho1', 'rho2'}.");
    m.def(
        "random_phantom",
        [](int rows, int cols, int shapes, std::uint64_t seed) {
            return phantom_dict(make_phantom(random_phantom_spec(KGrid(rows, cols), shapes, seed)));
        },
        py::arg("rows"), py::arg("cols"), py::arg("shapes"), py::arg("seed"));
    m.def(
        "make_mask",
        [](int rows, int cols, double acceleration, double density_decay, int center_radius, std::uint64_t seed) {
            return from_mask(make_mask(MaskSpec{KGrid(rows, cols), acceleration, density_decay, center_radius, seed}));
        },
        py::arg("rows"), py::arg("cols"), py::arg("acceleration"), py::arg("density_decay") = 2.0,
        py::arg("center_radius") = 2, py::arg("seed") = 0);

    m.def(
        "snr_db", [](const CArray& ref, const CArray& est) {
            return snr_db(to_image(ref, Domain::spatial), to_image(est, Domain::spatial));
        },
        py::arg("reference"), py::arg("estimate"));
    m.def(
        "component_leakage",
        [](const CArray& rec1, const CArray& rec2, const CArray& true1, const CArray& true2) {
            return component_leakage(to_image(rec1, Domain::spatial), to_image(rec2, Domain::spatial),
                                     to_image(true1, Domain::spatial), to_image(true2, Domain::spatial));
        },
        py::arg("rec1"), py::arg("rec2"), py::arg("true1"), py::arg("true2"));

    py::class_<SolverConfig>(m, "SolverConfig")
        .def(py::init<>())
        .def_property(
            "mode", [](const SolverConfig& c) { return to_string(c.mode); },
            [](SolverConfig& c, const std::string& s) { c.mode = parse_mode(s); })
        .def_readwrite("lambda1", &SolverConfig::lambda1)
        .def_readwrite("lambda2", &SolverConfig::lambda2)
        .def_readwrite("p", &SolverConfig::p)
        .def_readwrite("gamma1", &SolverConfig::gamma1)
        .def_readwrite("gamma2", &SolverConfig::gamma2)
        .def_property(
            "filter1", [](const SolverConfig& c) { return std::pair(c.filter1.rows(), c.filter1.cols()); },
            [](SolverConfig& c, std::pair<int, int> f) { c.filter1 = FilterSupport(f.first, f.second); })
        .def_property(
            "filter2", [](const SolverConfig& c) { return std::pair(c.filter2.rows(), c.filter2.cols()); },
            [](SolverConfig& c, std::pair<int, int> f) { c.filter2 = FilterSupport(f.first, f.second); })
        .def_readwrite("irls_iters", &SolverConfig::irls_iters)
        .def_readwrite("admm_iters", &SolverConfig::admm_iters)
        .def_readwrite("epsilon0", &SolverConfig::epsilon0)
        .def_readwrite("epsilon_rel", &SolverConfig::epsilon_rel)
        .def_readwrite("epsilon_decay", &SolverConfig::epsilon_decay)
        .def_readwrite("epsilon_min", &SolverConfig::epsilon_min)
        .def_property(
            "rho_update", [](const SolverConfig& c) { return to_string(c.rho_update); },
            [](SolverConfig& c, const std::string& s) { c.rho_update = parse_rho_update(s); })
        .def("validate", &SolverConfig::validate);

    m.def(
        "recover",
        [](const CArray& kspace, const py::array_t<bool, py::array::c_style | py::array::forcecast>& mask,
           const SolverConfig& cfg) {
            const SamplingOp samp = SamplingOp::from_kspace(to_mask(mask), to_image(kspace, Domain::fourier));
            Recovery rec = [&] {
                py::gil_scoped_release release;
                return irls_recover(samp, cfg);
            }();
            py::list iterations;
            for (const auto& it : rec.diagnostics.iterations) {
                py::dict d;
                d["iteration"] = it.iteration;
                d["epsilon1"] = it.epsilon1;
                d["epsilon2"] = it.epsilon2;
                d["surrogate_before"] = it.surrogate_before;
                d["surrogate_after"] = it.surrogate_after;
                d["objective_before"] = it.objective_before;
                d["objective_after"] = it.objective_after;
                d["data_misfit"] = it.data_misfit;
                d["constraint_residual"] = it.constraint_residual;
                iterations.append(d);
            }
            py::dict out;
            out["rho"] = to_array(rec.image());
            out["rho1"] = to_array(rec.rho1);
            out["rho2"] = to_array(rec.rho2);
            out["iterations"] = iterations;
            out["warnings"] = rec.diagnostics.warnings;
            return out;
        },
        py::arg("kspace"), py::arg("mask"), py::arg("config"),
        "Recovers from the full-grid k-space read at the mask. Returns spatial rho, rho1, rho2 and diagnostics.");

    m.def(
        "read_array",
        [](const std::string& path) {
            const ComplexImage img = read_array(path);
            return py::make_tuple(to_array(img), std::string(to_string(img.domain())));
        },
        py::arg("path"), "Returns (array, domain).");
    m.def(
        "write_array",
        [](const std::string& path, const CArray& a, const std::string& domain) {
            write_array(path, to_image(a, parse_domain(domain)));
        },
        py::arg("path"), py::arg("array"), py::arg("domain"));
}
