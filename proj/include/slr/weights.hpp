#pragma once

#include <Eigen/Dense>

#include <vector>

#include "slr/grid.hpp"
#include "slr/lifting.hpp"

namespace slr {

// Eigen-decomposition of a (shifted) lifted Gram matrix. Eigenvalues are
// ascending and clamped at zero; eigenvectors are the columns of
// eigenvectors() and act as annihilating filters on the support.
class FilterBank {
public:
    FilterBank(FilterSupport supp, Eigen::VectorXd eigenvalues, Eigen::MatrixXcd eigenvectors, double epsilon,
               double p);

    const FilterSupport& support() const { return supp_; }
    const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
    const Eigen::MatrixXcd& eigenvectors() const { return eigenvectors_; }
    double epsilon() const { return epsilon_; }
    double p() const { return p_; }

    // (lambda_l + eps)^(p/2 - 1)
    Eigen::VectorXd weight_factors() const;
    // (lambda_l + eps)^(p/4 - 1/2)
    Eigen::VectorXd sqrt_factors() const;

    // Row l is sqrt_factor_l * v_l^H, so weight_sqrt()^H * weight_sqrt() == H.
    Eigen::MatrixXcd weight_sqrt() const;
    // H = (G + eps I)^(p/2 - 1).
    Eigen::MatrixXcd weight_matrix() const;
    // Column l is sqrt_factor_l * v_l; sum_l ||T h_l||^2 == Tr[T^H T H].
    Eigen::MatrixXcd filters() const;

private:
    FilterSupport supp_;
    Eigen::VectorXd eigenvalues_;
    Eigen::MatrixXcd eigenvectors_;
    double epsilon_;
    double p_;
};

FilterBank weight_sqrt(const Eigen::MatrixXcd& gram, const FilterSupport& supp, double epsilon, double p);

// Spatial sum-of-squares weights sum_l w_l |mu_l(r)|^2, where mu_l is the
// trigonometric polynomial with coefficients v_l evaluated on the grid.
struct SosMask {
    KGrid grid;
    std::vector<double> entries;
};

SosMask sos_mask(const FilterBank& bank, const KGrid& grid);

}  // namespace slr
