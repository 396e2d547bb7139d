#include "slr/weights.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "slr/errors.hpp"

namespace slr {

FilterBank::FilterBank(FilterSupport supp, Eigen::VectorXd eigenvalues, Eigen::MatrixXcd eigenvectors,
                       double epsilon, double p)
    : supp_(supp),
      eigenvalues_(std::move(eigenvalues)),
      eigenvectors_(std::move(eigenvectors)),
      epsilon_(epsilon),
      p_(p) {
    if (!(epsilon > 0.0)) throw ParameterError("epsilon must be positive");
    if (!(p > 0.0 && p <= 1.0)) throw ParameterError("p must lie in (0, 1]");
    if (eigenvalues_.size() != supp_.size() || eigenvectors_.rows() != supp_.size() ||
        eigenvectors_.cols() != supp_.size()) {
        throw DimensionError("filter bank size does not match support of " + std::to_string(supp_.size()) +
                             " taps");
    }
}

Eigen::VectorXd FilterBank::weight_factors() const {
    return (eigenvalues_.array() + epsilon_).pow(p_ / 2.0 - 1.0).matrix();
}

Eigen::VectorXd FilterBank::sqrt_factors() const {
    return (eigenvalues_.array() + epsilon_).pow(p_ / 4.0 - 0.5).matrix();
}

Eigen::MatrixXcd FilterBank::weight_sqrt() const {
    return sqrt_factors().cast<cdouble>().asDiagonal() * eigenvectors_.adjoint();
}

Eigen::MatrixXcd FilterBank::weight_matrix() const {
    return eigenvectors_ * weight_factors().cast<cdouble>().asDiagonal() * eigenvectors_.adjoint();
}

Eigen::MatrixXcd FilterBank::filters() const {
    return eigenvectors_ * sqrt_factors().cast<cdouble>().asDiagonal();
}

FilterBank weight_sqrt(const Eigen::MatrixXcd& gram, const FilterSupport& supp, double epsilon, double p) {
    if (!(epsilon > 0.0)) throw ParameterError("epsilon must be positive");
    if (gram.rows() != supp.size() || gram.cols() != supp.size()) {
        throw DimensionError("gram matrix is " + std::to_string(gram.rows()) + "x" + std::to_string(gram.cols()) +
                             ", support has " + std::to_string(supp.size()) + " taps");
    }
    if (!gram.allFinite()) throw NumericalError("gram matrix has non-finite entries");
    const double scale = std::max(1.0, gram.cwiseAbs().maxCoeff());
    const double asym = (gram - gram.adjoint()).cwiseAbs().maxCoeff();
    if (asym > 1e-10 * scale) {
        throw NumericalError("gram matrix is not Hermitian (asymmetry " + std::to_string(asym) + ")");
    }
    const Eigen::MatrixXcd sym = 0.5 * (gram + gram.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(sym);
    if (eig.info() != Eigen::Success) throw NumericalError("Hermitian eigen-decomposition failed");
    Eigen::VectorXd lambda = eig.eigenvalues();
    if (lambda.size() > 0 && lambda.minCoeff() < -1e-10 * scale) {
        throw NumericalError("gram matrix is not positive semidefinite (eigenvalue " +
                             std::to_string(lambda.minCoeff()) + ")");
    }
    lambda = lambda.cwiseMax(0.0);
    return FilterBank(supp, std::move(lambda), eig.eigenvectors(), epsilon, p);
}

SosMask sos_mask(const FilterBank& bank, const KGrid& grid) {
    const FilterSupport& supp = bank.support();
    supp.require_fits(grid);
    SosMask mask{grid, std::vector<double>(grid.size(), 0.0)};
    const Eigen::VectorXd w = bank.weight_factors();
    const double root_n = std::sqrt(static_cast<double>(grid.size()));
    CVector mu(grid.size());
    // Filters are accumulated in ascending eigenvalue order for reproducibility.
    for (int l = 0; l < supp.size(); ++l) {
        std::fill(mu.begin(), mu.end(), cdouble{});
        for (int t = 0; t < supp.size(); ++t) {
            mu[grid.index(supp.offset_y(t), supp.offset_x(t))] = bank.eigenvectors()(t, l);
        }
        fft2_centered_inplace(grid, mu, true);
        const double wl = w(l);
        for (std::size_t i = 0; i < mu.size(); ++i) mask.entries[i] += wl * std::norm(root_n * mu[i]);
    }
    return mask;
}

}  // namespace slr
