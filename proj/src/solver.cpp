#include "slr/solver.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "slr/errors.hpp"

namespace slr {

SamplingOp::SamplingOp(SamplingMask mask, CVector measurements, double noise_sigma)
    : mask_(std::move(mask)), measurements_(std::move(measurements)), noise_sigma_(noise_sigma) {
    if (mask_.sampled.size() != mask_.grid.size()) throw DimensionError("mask size does not match its grid");
    if (!(noise_sigma >= 0.0)) throw ParameterError("noise sigma must be >= 0");
    for (std::size_t i = 0; i < mask_.sampled.size(); ++i) {
        if (mask_.sampled[i]) indices_.push_back(i);
    }
    if (measurements_.size() != indices_.size()) {
        throw DimensionError("got " + std::to_string(measurements_.size()) + " measurements for " +
                             std::to_string(indices_.size()) + " sampled entries");
    }
}

SamplingOp SamplingOp::from_kspace(const SamplingMask& mask, const ComplexImage& kspace, double noise_sigma) {
    if (!(mask.grid == kspace.grid())) throw DimensionError("mask and k-space grids differ");
    if (kspace.domain() != Domain::fourier) throw ParameterError("k-space data must be in the fourier domain");
    CVector b;
    for (std::size_t i = 0; i < mask.sampled.size(); ++i) {
        if (mask.sampled[i]) b.push_back(kspace[i]);
    }
    return SamplingOp(mask, std::move(b), noise_sigma);
}

CVector SamplingOp::forward(const ComplexImage& rho_hat) const {
    if (!(rho_hat.grid() == grid())) throw DimensionError("sampling operator and spectrum grids differ");
    CVector out(indices_.size());
    for (std::size_t s = 0; s < indices_.size(); ++s) out[s] = rho_hat[indices_[s]];
    return out;
}

ComplexImage SamplingOp::adjoint(std::span<const cdouble> values) const {
    if (values.size() != indices_.size()) throw DimensionError("adjoint input length does not match sample count");
    ComplexImage out(grid(), Domain::fourier);
    for (std::size_t s = 0; s < indices_.size(); ++s) out[indices_[s]] = values[s];
    return out;
}

std::string to_string(Mode m) {
    switch (m) {
        case Mode::combined:
            return "combined";
        case Mode::first_order:
            return "first_order";
        case Mode::second_order:
            return "second_order";
    }
    return "?";
}

Mode parse_mode(const std::string& s) {
    if (s == "combined") return Mode::combined;
    if (s == "first_order") return Mode::first_order;
    if (s == "second_order") return Mode::second_order;
    throw ParseError("unknown mode '" + s + "'");
}

std::string to_string(RhoUpdate r) { return r == RhoUpdate::joint ? "joint" : "sequential"; }

RhoUpdate parse_rho_update(const std::string& s) {
    if (s == "joint") return RhoUpdate::joint;
    if (s == "sequential") return RhoUpdate::sequential;
    throw ParseError("unknown rho update '" + s + "'");
}

void SolverConfig::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) throw ParameterError(std::string(name) + " must be positive");
    };
    if (first_active()) {
        positive(lambda1, "lambda1");
        positive(gamma1, "gamma1");
    }
    if (second_active()) {
        positive(lambda2, "lambda2");
        positive(gamma2, "gamma2");
    }
    if (!(p > 0.0 && p <= 1.0)) throw ParameterError("p must lie in (0, 1]");
    if (irls_iters < 1) throw ParameterError("irls_iters must be >= 1");
    if (admm_iters < 1) throw ParameterError("admm_iters must be >= 1");
    if (!(epsilon0 > 0.0)) positive(epsilon_rel, "epsilon_rel");
    if (!(epsilon_decay > 0.0 && epsilon_decay <= 1.0)) throw ParameterError("epsilon_decay must lie in (0, 1]");
    if (!(epsilon_min >= 0.0)) throw ParameterError("epsilon_min must be >= 0");
}

double SolverConfig::epsilon_at(int n, double eps0) const {
    return std::max(eps0 * std::pow(epsilon_decay, n), epsilon_min);
}

namespace {

DerivativeOp op_for(int idx, const KGrid& g) {
    if (idx != 1 && idx != 2) throw ParameterError("component index must be 1 or 2");
    return DerivativeOp(idx == 1 ? DerivativeOrder::first : DerivativeOrder::second, g);
}

// F^* M rho_hat, one spatial array per channel.
MultiChannelImage spatial_derivative(const DerivativeOp& op, const ComplexImage& rho_hat) {
    MultiChannelImage out = apply_derivative(op, rho_hat);
    MultiChannelImage spatial(op.grid(), Domain::spatial, op.channels());
    for (int ch = 0; ch < op.channels(); ++ch) {
        spatial.channel(ch) = std::move(out.channel(ch));
        fft2_centered_inplace(op.grid(), spatial.channel(ch), true);
    }
    return spatial;
}

// M^* F (y - q)
ComplexImage adjoint_of_difference(const DerivativeOp& op, const MultiChannelImage& y, const MultiChannelImage& q) {
    MultiChannelImage diff(op.grid(), Domain::fourier, op.channels());
    for (int ch = 0; ch < op.channels(); ++ch) {
        auto& d = diff.channel(ch);
        const auto& yc = y.channel(ch);
        const auto& qc = q.channel(ch);
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = yc[i] - qc[i];
        fft2_centered_inplace(op.grid(), d, false);
    }
    return apply_derivative_adjoint(op, diff);
}

void check_finite(const ComplexImage& x, const char* what) {
    for (const auto& v : x.values()) {
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
            throw NumericalError(std::string("non-finite values in ") + what);
        }
    }
}

double weighted_energy(const SosMask& sos, const MultiChannelImage& channels) {
    double e = 0.0;
    for (int ch = 0; ch < channels.channels(); ++ch) {
        const auto& c = channels.channel(ch);
        for (std::size_t i = 0; i < c.size(); ++i) e += sos.entries[i] * std::norm(c[i]);
    }
    return e;
}

double gamma_of(int idx, const SolverConfig& cfg) { return idx == 1 ? cfg.gamma1 : cfg.gamma2; }
double lambda_of(int idx, const SolverConfig& cfg) { return idx == 1 ? cfg.lambda1 : cfg.lambda2; }

}  // namespace

AdmmState AdmmState::initial(const SamplingOp& samp, const SolverConfig& cfg) {
    const KGrid& g = samp.grid();
    ComplexImage zero(g, Domain::fourier);
    ComplexImage atb = samp.adjoint_data();
    const bool first = cfg.first_active();
    AdmmState s{first ? atb : zero,
                first ? zero : atb,
                MultiChannelImage(g, Domain::spatial, 2),
                MultiChannelImage(g, Domain::spatial, 3),
                MultiChannelImage(g, Domain::spatial, 2),
                MultiChannelImage(g, Domain::spatial, 3)};
    s.y1 = spatial_derivative(op_for(1, g), s.rho1_hat);
    s.y2 = spatial_derivative(op_for(2, g), s.rho2_hat);
    return s;
}

MultiChannelImage update_y(int idx, const AdmmState& state, const SosMask& sos, const SolverConfig& cfg) {
    const KGrid& g = state.rho1_hat.grid();
    if (!(sos.grid == g)) throw DimensionError("sos mask and state grids differ");
    const DerivativeOp op = op_for(idx, g);
    MultiChannelImage y = spatial_derivative(op, idx == 1 ? state.rho1_hat : state.rho2_hat);
    const MultiChannelImage& q = idx == 1 ? state.q1 : state.q2;
    const double gamma = gamma_of(idx, cfg);
    for (int ch = 0; ch < op.channels(); ++ch) {
        auto& yc = y.channel(ch);
        const auto& qc = q.channel(ch);
        for (std::size_t i = 0; i < yc.size(); ++i) {
            yc[i] = gamma / (sos.entries[i] + gamma) * (qc[i] + yc[i]);
        }
    }
    return y;
}

ComplexImage update_rho(int idx, const AdmmState& state, const SamplingOp& samp, const SolverConfig& cfg,
                        bool* dc_held) {
    const KGrid& g = samp.grid();
    const DerivativeOp op = op_for(idx, g);
    const ComplexImage& current = idx == 1 ? state.rho1_hat : state.rho2_hat;
    const ComplexImage& other = idx == 1 ? state.rho2_hat : state.rho1_hat;
    const double alpha = gamma_of(idx, cfg) * lambda_of(idx, cfg);
    ComplexImage t = adjoint_of_difference(op, idx == 1 ? state.y1 : state.y2, idx == 1 ? state.q1 : state.q2);
    const ComplexImage atb = samp.adjoint_data();
    const auto mask = samp.sampled();
    const auto gain = op.gain();
    ComplexImage out(g, Domain::fourier);
    for (std::size_t k = 0; k < g.size(); ++k) {
        const double a = mask[k] ? 1.0 : 0.0;
        const double denom = a + alpha * gain[k];
        if (denom == 0.0) {
            out[k] = current[k];
            if (dc_held) *dc_held = true;
            continue;
        }
        out[k] = (alpha * t[k] + atb[k] - a * other[k]) / denom;
    }
    return out;
}

void update_rho_joint(AdmmState& state, const SamplingOp& samp, const SolverConfig& cfg, bool* dc_held) {
    if (!cfg.first_active()) {
        state.rho2_hat = update_rho(2, state, samp, cfg, dc_held);
        return;
    }
    if (!cfg.second_active()) {
        state.rho1_hat = update_rho(1, state, samp, cfg, dc_held);
        return;
    }
    const KGrid& g = samp.grid();
    const DerivativeOp op1 = op_for(1, g);
    const DerivativeOp op2 = op_for(2, g);
    const double alpha1 = cfg.gamma1 * cfg.lambda1;
    const double alpha2 = cfg.gamma2 * cfg.lambda2;
    const ComplexImage t1 = adjoint_of_difference(op1, state.y1, state.q1);
    const ComplexImage t2 = adjoint_of_difference(op2, state.y2, state.q2);
    const ComplexImage atb = samp.adjoint_data();
    const auto mask = samp.sampled();
    const auto gain1 = op1.gain();
    const auto gain2 = op2.gain();
    for (std::size_t k = 0; k < g.size(); ++k) {
        const double a = mask[k] ? 1.0 : 0.0;
        const double c1 = alpha1 * gain1[k];
        const double c2 = alpha2 * gain2[k];
        if (c1 == 0.0 && c2 == 0.0) {
            // DC: only the sum is determined. Keep rho2's share.
            if (a > 0.0) {
                state.rho1_hat[k] = atb[k] - state.rho2_hat[k];
            } else if (dc_held) {
                *dc_held = true;
            }
            continue;
        }
        const cdouble r1 = alpha1 * t1[k] + atb[k];
        const cdouble r2 = alpha2 * t2[k] + atb[k];
        const double det = a * (c1 + c2) + c1 * c2;
        state.rho1_hat[k] = ((a + c2) * r1 - a * r2) / det;
        state.rho2_hat[k] = ((a + c1) * r2 - a * r1) / det;
    }
}

AdmmState admm_solve(AdmmState state, const SosMask& sos1, const SosMask& sos2, const SamplingOp& samp,
                     const SolverConfig& cfg, AdmmTrace* trace) {
    const KGrid& g = samp.grid();
    const DerivativeOp op1 = op_for(1, g);
    const DerivativeOp op2 = op_for(2, g);
    const bool first = cfg.first_active();
    const bool second = cfg.second_active();
    bool held = false;
    for (int sweep = 0; sweep < cfg.admm_iters; ++sweep) {
        if (first) state.y1 = update_y(1, state, sos1, cfg);
        if (second) state.y2 = update_y(2, state, sos2, cfg);
        if (cfg.rho_update == RhoUpdate::joint) {
            update_rho_joint(state, samp, cfg, &held);
        } else {
            if (first) state.rho1_hat = update_rho(1, state, samp, cfg, &held);
            if (second) state.rho2_hat = update_rho(2, state, samp, cfg, &held);
        }
        double lagrangian = data_misfit(state.rho1_hat, state.rho2_hat, samp);
        double residual2 = 0.0;
        auto update_q = [&](const DerivativeOp& op, const ComplexImage& rho, const MultiChannelImage& y,
                            MultiChannelImage& q, const SosMask& sos, double lambda, double gamma) {
            const MultiChannelImage krho = spatial_derivative(op, rho);
            double aug = 0.0;
            double qn = 0.0;
            for (int ch = 0; ch < op.channels(); ++ch) {
                auto& qc = q.channel(ch);
                const auto& kc = krho.channel(ch);
                const auto& yc = y.channel(ch);
                for (std::size_t i = 0; i < qc.size(); ++i) {
                    const cdouble r = kc[i] - yc[i];
                    residual2 += std::norm(r);
                    qc[i] += r;
                    aug += std::norm(r + qc[i]);
                    qn += std::norm(qc[i]);
                }
            }
            lagrangian += lambda * weighted_energy(sos, y) + gamma * lambda * (aug - qn);
        };
        if (first) update_q(op1, state.rho1_hat, state.y1, state.q1, sos1, cfg.lambda1, cfg.gamma1);
        if (second) update_q(op2, state.rho2_hat, state.y2, state.q2, sos2, cfg.lambda2, cfg.gamma2);
        if (trace) {
            trace->lagrangian.push_back(lagrangian);
            trace->constraint_residual.push_back(std::sqrt(residual2));
        }
    }
    if (trace) trace->dc_held = trace->dc_held || held;
    return state;
}

double data_misfit(const ComplexImage& rho1_hat, const ComplexImage& rho2_hat, const SamplingOp& samp) {
    const CVector& b = samp.measurements();
    const auto mask = samp.sampled();
    double r = 0.0;
    std::size_t s = 0;
    for (std::size_t k = 0; k < mask.size(); ++k) {
        if (!mask[k]) continue;
        r += std::norm(rho1_hat[k] + rho2_hat[k] - b[s++]);
    }
    return r;
}

double sos_surrogate(const ComplexImage& rho1_hat, const ComplexImage& rho2_hat, const SosMask* sos1,
                     const SosMask* sos2, const SamplingOp& samp, const SolverConfig& cfg) {
    const KGrid& g = samp.grid();
    double value = data_misfit(rho1_hat, rho2_hat, samp);
    if (sos1) value += cfg.lambda1 * weighted_energy(*sos1, spatial_derivative(op_for(1, g), rho1_hat));
    if (sos2) value += cfg.lambda2 * weighted_energy(*sos2, spatial_derivative(op_for(2, g), rho2_hat));
    return value;
}

double objective_value(const ComplexImage& rho1_hat, const ComplexImage& rho2_hat, const SamplingOp& samp,
                       const SolverConfig& cfg, const FilterBank* bank1, const FilterBank* bank2) {
    const KGrid& g = samp.grid();
    double value = data_misfit(rho1_hat, rho2_hat, samp);
    auto term = [&](int idx, const ComplexImage& rho, const FilterBank& bank) {
        const Eigen::MatrixXcd gram = gram_matrix(rho, op_for(idx, g), bank.support());
        // ||T H^{1/2}||_F^2 = Tr[T^H T H]
        return (gram.cwiseProduct(bank.weight_matrix().transpose())).sum().real();
    };
    if (bank1) value += cfg.lambda1 * term(1, rho1_hat, *bank1);
    if (bank2) value += cfg.lambda2 * term(2, rho2_hat, *bank2);
    return value;
}

double objective_value(const ComplexImage& rho1_hat, const ComplexImage& rho2_hat, const SamplingOp& samp,
                       const SolverConfig& cfg, double eps) {
    const KGrid& g = samp.grid();
    std::optional<FilterBank> b1, b2;
    if (cfg.first_active()) b1 = weight_sqrt(gram_matrix(rho1_hat, op_for(1, g), cfg.filter1), cfg.filter1, eps, cfg.p);
    if (cfg.second_active()) b2 = weight_sqrt(gram_matrix(rho2_hat, op_for(2, g), cfg.filter2), cfg.filter2, eps, cfg.p);
    return objective_value(rho1_hat, rho2_hat, samp, cfg, b1 ? &*b1 : nullptr, b2 ? &*b2 : nullptr);
}

ComplexImage Recovery::image() const {
    ComplexImage out = rho1;
    for (std::size_t i = 0; i < out.grid().size(); ++i) out[i] += rho2[i];
    return out;
}

Recovery irls_recover(const SamplingOp& samp, const SolverConfig& cfg) {
    cfg.validate();
    const KGrid& g = samp.grid();
    if (cfg.first_active()) cfg.filter1.require_fits(g);
    if (cfg.second_active()) cfg.filter2.require_fits(g);
    const DerivativeOp op1 = op_for(1, g);
    const DerivativeOp op2 = op_for(2, g);

    Diagnostics diag;
    auto initial_epsilon = [&](const DerivativeOp& op, const FilterSupport& supp) {
        if (cfg.epsilon0 > 0.0) return cfg.epsilon0;
        const Eigen::MatrixXcd gram = gram_matrix(samp.adjoint_data(), op, supp);
        const double top = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(gram, Eigen::EigenvaluesOnly)
                               .eigenvalues()
                               .maxCoeff();
        return top > 0.0 ? cfg.epsilon_rel * top : 1.0;
    };
    const double eps1_0 = cfg.first_active() ? initial_epsilon(op1, cfg.filter1) : 0.0;
    const double eps2_0 = cfg.second_active() ? initial_epsilon(op2, cfg.filter2) : 0.0;
    diag.epsilon1_initial = eps1_0;
    diag.epsilon2_initial = eps2_0;

    AdmmState state = AdmmState::initial(samp, cfg);
    const SosMask unused{g, std::vector<double>(g.size(), 0.0)};
    bool dc_held = false;
    for (int n = 0; n < cfg.irls_iters; ++n) {
        IterationRecord rec;
        rec.iteration = n;
        std::optional<FilterBank> bank1, bank2;
        std::optional<SosMask> sos1, sos2;
        if (cfg.first_active()) {
            rec.epsilon1 = cfg.epsilon_at(n, eps1_0);
            bank1 = weight_sqrt(gram_matrix(state.rho1_hat, op1, cfg.filter1), cfg.filter1, rec.epsilon1, cfg.p);
            sos1 = sos_mask(*bank1, g);
        }
        if (cfg.second_active()) {
            rec.epsilon2 = cfg.epsilon_at(n, eps2_0);
            bank2 = weight_sqrt(gram_matrix(state.rho2_hat, op2, cfg.filter2), cfg.filter2, rec.epsilon2, cfg.p);
            sos2 = sos_mask(*bank2, g);
        }
        const FilterBank* b1 = bank1 ? &*bank1 : nullptr;
        const FilterBank* b2 = bank2 ? &*bank2 : nullptr;
        const SosMask* s1 = sos1 ? &*sos1 : nullptr;
        const SosMask* s2 = sos2 ? &*sos2 : nullptr;
        rec.surrogate_before = sos_surrogate(state.rho1_hat, state.rho2_hat, s1, s2, samp, cfg);
        rec.objective_before = objective_value(state.rho1_hat, state.rho2_hat, samp, cfg, b1, b2);

        AdmmTrace trace;
        state = admm_solve(std::move(state), s1 ? *s1 : unused, s2 ? *s2 : unused, samp, cfg, &trace);
        dc_held = dc_held || trace.dc_held;
        try {
            check_finite(state.rho1_hat, "rho1");
            check_finite(state.rho2_hat, "rho2");
        } catch (const NumericalError& e) {
            throw NumericalError(std::string(e.what()) + " at IRLS iteration " + std::to_string(n));
        }
        rec.surrogate_after = sos_surrogate(state.rho1_hat, state.rho2_hat, s1, s2, samp, cfg);
        rec.objective_after = objective_value(state.rho1_hat, state.rho2_hat, samp, cfg, b1, b2);
        rec.data_misfit = data_misfit(state.rho1_hat, state.rho2_hat, samp);
        rec.constraint_residual = trace.constraint_residual.empty() ? 0.0 : trace.constraint_residual.back();
        diag.iterations.push_back(rec);
    }
    if (dc_held) diag.warnings.push_back("DC is unsampled; its coefficient was held at the initial value");

    Recovery out{state.rho1_hat, state.rho2_hat, ifft2_centered(state.rho1_hat), ifft2_centered(state.rho2_hat),
                 std::move(diag)};
    return out;
}

}  // namespace slr
