#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "slr/data.hpp"
#include "slr/grid.hpp"
#include "slr/lifting.hpp"
#include "slr/weights.hpp"

namespace slr {

// Undersampled Fourier measurements: A selects the sampled k-space entries
// in row-major order, A^* scatters them back with zeros elsewhere.
class SamplingOp {
public:
    SamplingOp(SamplingMask mask, CVector measurements, double noise_sigma = 0.0);
    // Gathers measurements from a full k-space array at the sampled entries.
    static SamplingOp from_kspace(const SamplingMask& mask, const ComplexImage& kspace, double noise_sigma = 0.0);

    const KGrid& grid() const { return mask_.grid; }
    const SamplingMask& mask() const { return mask_; }
    std::span<const std::uint8_t> sampled() const { return mask_.sampled; }
    std::size_t sample_count() const { return indices_.size(); }
    const CVector& measurements() const { return measurements_; }
    double noise_sigma() const { return noise_sigma_; }

    CVector forward(const ComplexImage& rho_hat) const;
    ComplexImage adjoint(std::span<const cdouble> values) const;
    // A^* b
    ComplexImage adjoint_data() const { return adjoint(measurements_); }

private:
    SamplingMask mask_;
    std::vector<std::size_t> indices_;
    CVector measurements_;
    double noise_sigma_;
};

enum class Mode { combined, first_order, second_order };
// How the two spectra are updated inside an ADMM sweep: jointly (exact
// block minimizer, per-k 2x2 solve) or one after the other.
enum class RhoUpdate { joint, sequential };

std::string to_string(Mode m);
Mode parse_mode(const std::string& s);
std::string to_string(RhoUpdate r);
RhoUpdate parse_rho_update(const std::string& s);

struct SolverConfig {
    Mode mode = Mode::combined;
    double lambda1 = 1e-3;
    double lambda2 = 1e-3;
    double p = 1.0;
    double gamma1 = 1.0;
    double gamma2 = 1.0;
    FilterSupport filter1{7, 7};
    FilterSupport filter2{7, 7};
    int irls_iters = 10;
    int admm_iters = 20;
    // epsilon0 <= 0 selects epsilon_rel * ||T_i(A^* b)^H T_i(A^* b)||_op per component.
    double epsilon0 = 0.0;
    double epsilon_rel = 1e-2;
    double epsilon_decay = 0.5;
    double epsilon_min = 1e-9;
    RhoUpdate rho_update = RhoUpdate::joint;

    void validate() const;
    bool first_active() const { return mode != Mode::second_order; }
    bool second_active() const { return mode != Mode::first_order; }
    // max(eps0 * decay^n, eps_min)
    double epsilon_at(int n, double eps0) const;
};

struct AdmmState {
    ComplexImage rho1_hat;
    ComplexImage rho2_hat;
    MultiChannelImage y1, y2;  // spatial, 2 and 3 channels
    MultiChannelImage q1, q2;  // scaled multipliers

    // rho1 = A^* b (rho2 for second-order mode), y = F^* M rho, q = 0.
    static AdmmState initial(const SamplingOp& samp, const SolverConfig& cfg);
};

// y = gamma / (S + gamma) * (q + F^* M rho_hat), channel by channel.
MultiChannelImage update_y(int idx, const AdmmState& state, const SosMask& sos, const SolverConfig& cfg);

// Exact minimizer over rho_idx of ||A(rho1 + rho2) - b||^2 +
// gamma*lambda*||q + F^* M rho - y||^2 with the other spectrum fixed. If a
// frequency has neither a sample nor derivative weight (unsampled DC) the
// previous value is kept and dc_held is set.
ComplexImage update_rho(int idx, const AdmmState& state, const SamplingOp& samp, const SolverConfig& cfg,
                        bool* dc_held = nullptr);

// Exact minimizer over both active spectra jointly.
void update_rho_joint(AdmmState& state, const SamplingOp& samp, const SolverConfig& cfg, bool* dc_held = nullptr);

struct AdmmTrace {
    std::vector<double> lagrangian;
    std::vector<double> constraint_residual;
    bool dc_held = false;
};

AdmmState admm_solve(AdmmState state, const SosMask& sos1, const SosMask& sos2, const SamplingOp& samp,
                     const SolverConfig& cfg, AdmmTrace* trace = nullptr);

double data_misfit(const ComplexImage& rho1_hat, const ComplexImage& rho2_hat, const SamplingOp& samp);

// lambda1 ||S1^{1/2} F^* M1 rho1||^2 + lambda2 ||S2^{1/2} F^* M2 rho2||^2 + data.
// The least-squares problem the ADMM loop solves.
double sos_surrogate(const ComplexImage& rho1_hat, const ComplexImage& rho2_hat, const SosMask* sos1,
                     const SosMask* sos2, const SamplingOp& samp, const SolverConfig& cfg);

// lambda1 ||T1 H1^{1/2}||_F^2 + lambda2 ||T2 H2^{1/2}||_F^2 + ||A(rho1+rho2) - b||^2
// on the valid-region lifting, with the weights taken from the given banks
// (a null bank drops that term).
double objective_value(const ComplexImage& rho1_hat, const ComplexImage& rho2_hat, const SamplingOp& samp,
                       const SolverConfig& cfg, const FilterBank* bank1, const FilterBank* bank2);

// Same, with weights recomputed from the current iterates at eps.
double objective_value(const ComplexImage& rho1_hat, const ComplexImage& rho2_hat, const SamplingOp& samp,
                       const SolverConfig& cfg, double eps);

struct IterationRecord {
    int iteration = 0;
    double epsilon1 = 0.0;
    double epsilon2 = 0.0;
    // sos surrogate with this iteration's weights, before and after the
    // least-squares step
    double surrogate_before = 0.0;
    double surrogate_after = 0.0;
    // valid-region lifted objective with the same frozen weights
    double objective_before = 0.0;
    double objective_after = 0.0;
    double data_misfit = 0.0;
    double constraint_residual = 0.0;
};

struct Diagnostics {
    std::vector<IterationRecord> iterations;
    std::vector<std::string> warnings;
    double epsilon1_initial = 0.0;
    double epsilon2_initial = 0.0;
};

struct Recovery {
    ComplexImage rho1_hat;
    ComplexImage rho2_hat;
    ComplexImage rho1;  // spatial
    ComplexImage rho2;
    Diagnostics diagnostics;

    ComplexImage image() const;
};

Recovery irls_recover(const SamplingOp& samp, const SolverConfig& cfg);

}  // namespace slr
