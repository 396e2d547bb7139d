#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "slr/errors.hpp"
#include "slr/solver.hpp"

using namespace slr;

namespace {

SamplingMask to_mask(const KGrid& g, const std::vector<std::uint8_t>& m) { return SamplingMask{g, m}; }

SamplingOp random_problem(const KGrid& g, double fraction, std::mt19937_64& rng, bool with_dc = true) {
    const auto m = oracle::random_mask(g, fraction, rng, with_dc);
    const ComplexImage full(g, Domain::fourier, oracle::random_vector(g.size(), rng));
    return SamplingOp::from_kspace(to_mask(g, m), full);
}

AdmmState random_state(const KGrid& g, std::mt19937_64& rng) {
    AdmmState s{ComplexImage(g, Domain::fourier, oracle::random_vector(g.size(), rng)),
                ComplexImage(g, Domain::fourier, oracle::random_vector(g.size(), rng)),
                MultiChannelImage(g, Domain::spatial, 2), MultiChannelImage(g, Domain::spatial, 3),
                MultiChannelImage(g, Domain::spatial, 2), MultiChannelImage(g, Domain::spatial, 3)};
    for (int ch = 0; ch < 2; ++ch) {
        s.y1.channel(ch) = oracle::random_vector(g.size(), rng);
        s.q1.channel(ch) = oracle::random_vector(g.size(), rng);
    }
    for (int ch = 0; ch < 3; ++ch) {
        s.y2.channel(ch) = oracle::random_vector(g.size(), rng);
        s.q2.channel(ch) = oracle::random_vector(g.size(), rng);
    }
    return s;
}

std::vector<CVector> channels_of(const MultiChannelImage& m) {
    std::vector<CVector> out;
    for (int ch = 0; ch < m.channels(); ++ch) out.push_back(m.channel(ch));
    return out;
}

SosMask random_sos(const KGrid& g, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 5.0);
    SosMask s{g, std::vector<double>(g.size())};
    for (auto& v : s.entries) v = u(rng);
    return s;
}

double max_rel_channels(const MultiChannelImage& a, const std::vector<CVector>& b) {
    double worst = 0.0;
    for (int ch = 0; ch < a.channels(); ++ch) worst = std::max(worst, oracle::rel_diff(a.channel(ch), b[ch]));
    return worst;
}

cdouble inner(const CVector& a, const CVector& b) {
    cdouble s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
    return s;
}

Phantom small_phantom(const KGrid& g, bool with_linear) {
    PhantomSpec spec = mixed_phantom_spec(g);
    if (!with_linear) {
        std::erase_if(spec.shapes, [](const Shape& s) { return s.linear.has_value(); });
    }
    return make_phantom(spec);
}

// Single-component iteration written from scratch: dense DFT, direct
// polynomial sos weights, pointwise closed forms.
ComplexImage reference_first_order(const SamplingOp& samp, const SolverConfig& cfg) {
    const KGrid& g = samp.grid();
    const Eigen::MatrixXcd f = oracle::dft_matrix(g);
    const auto w = oracle::multipliers(g, 1);
    const std::size_t n = g.size();
    auto to_e = [](const CVector& v) { return Eigen::Map<const Eigen::VectorXcd>(v.data(), v.size()).eval(); };
    auto to_s = [](const Eigen::VectorXcd& v) { return CVector(v.data(), v.data() + v.size()); };

    CVector atb(n, 0.0);
    {
        std::size_t s = 0;
        for (std::size_t k = 0; k < n; ++k)
            if (samp.sampled()[k]) atb[k] = samp.measurements()[s++];
    }
    auto spatial_grad = [&](const CVector& rho) {
        std::vector<CVector> out;
        for (int ch = 0; ch < 2; ++ch) {
            CVector z(n);
            for (std::size_t k = 0; k < n; ++k) z[k] = w[ch][k] * rho[k];
            out.push_back(to_s(f.adjoint() * to_e(z)));
        }
        return out;
    };
    auto top_eig = [&](const CVector& rho) {
        const Eigen::MatrixXcd t = oracle::lifted(g, rho, 1, cfg.filter1);
        return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(t.adjoint() * t).eigenvalues().maxCoeff();
    };
    const double eps0 = cfg.epsilon_rel * top_eig(atb);

    CVector rho = atb;
    std::vector<CVector> y = spatial_grad(rho);
    std::vector<CVector> q(2, CVector(n, 0.0));
    const double gl = cfg.gamma1 * cfg.lambda1;
    for (int it = 0; it < cfg.irls_iters; ++it) {
        const double eps = std::max(eps0 * std::pow(cfg.epsilon_decay, it), cfg.epsilon_min);
        const Eigen::MatrixXcd t = oracle::lifted(g, rho, 1, cfg.filter1);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(t.adjoint() * t);
        Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
        Eigen::VectorXd factors = (lam.array() + eps).pow(cfg.p / 2.0 - 1.0).matrix();
        const std::vector<double> s = oracle::sos(g, cfg.filter1, factors, es.eigenvectors());
        for (int sweep = 0; sweep < cfg.admm_iters; ++sweep) {
            const auto grad = spatial_grad(rho);
            for (int ch = 0; ch < 2; ++ch)
                for (std::size_t i = 0; i < n; ++i) y[ch][i] = cfg.gamma1 / (s[i] + cfg.gamma1) * (q[ch][i] + grad[ch][i]);
            CVector t_k(n, 0.0);
            for (int ch = 0; ch < 2; ++ch) {
                CVector d(n);
                for (std::size_t i = 0; i < n; ++i) d[i] = y[ch][i] - q[ch][i];
                const CVector fd = to_s(f * to_e(d));
                for (std::size_t k = 0; k < n; ++k) t_k[k] += std::conj(w[ch][k]) * fd[k];
            }
            for (std::size_t k = 0; k < n; ++k) {
                const double a = samp.sampled()[k] ? 1.0 : 0.0;
                const double gain = std::norm(w[0][k]) + std::norm(w[1][k]);
                const double den = a + gl * gain;
                if (den > 0.0) rho[k] = (gl * t_k[k] + atb[k]) / den;
            }
            const auto grad2 = spatial_grad(rho);
            for (int ch = 0; ch < 2; ++ch)
                for (std::size_t i = 0; i < n; ++i) q[ch][i] += grad2[ch][i] - y[ch][i];
        }
    }
    return ComplexImage(g, Domain::fourier, rho);
}

}  // namespace

TEST_CASE("sampling operator adjoint and projection") {
    std::mt19937_64 rng(40);
    const KGrid g(8, 12);
    const SamplingOp samp = random_problem(g, 0.4, rng);
    for (int trial = 0; trial < 5; ++trial) {
        const ComplexImage x(g, Domain::fourier, oracle::random_vector(g.size(), rng));
        const CVector y = oracle::random_vector(samp.sample_count(), rng);
        const cdouble lhs = inner(samp.forward(x), y);
        const cdouble rhs = inner(x.data(), samp.adjoint(y).data());
        CHECK(std::abs(lhs - rhs) <= 1e-12 * std::abs(lhs));
        const ComplexImage proj = samp.adjoint(samp.forward(x));
        for (std::size_t k = 0; k < g.size(); ++k) CHECK(proj[k] == (samp.sampled()[k] ? x[k] : cdouble(0.0)));
    }
    CHECK(samp.adjoint_data().norm() == doctest::Approx(std::sqrt(inner(samp.measurements(), samp.measurements()).real())));
}

TEST_CASE("sampling operator errors") {
    const KGrid g(4, 4);
    SamplingMask m{g, std::vector<std::uint8_t>(g.size(), 1)};
    CHECK_THROWS_AS(SamplingOp(m, CVector(15)), DimensionError);
    CHECK_THROWS_AS(SamplingOp(m, CVector(16), -1.0), ParameterError);
    CHECK_THROWS_AS(SamplingOp::from_kspace(m, ComplexImage(g, Domain::spatial)), ParameterError);
    CHECK_THROWS_AS(SamplingOp::from_kspace(m, ComplexImage(KGrid(4, 6), Domain::fourier)), DimensionError);
    const SamplingOp ok(m, CVector(16));
    CHECK_THROWS_AS(ok.forward(ComplexImage(KGrid(6, 4), Domain::fourier)), DimensionError);
    CHECK_THROWS_AS(ok.adjoint(CVector(3)), DimensionError);
}

TEST_CASE("mode and update names round-trip") {
    for (Mode m : {Mode::combined, Mode::first_order, Mode::second_order}) CHECK(parse_mode(to_string(m)) == m);
    for (RhoUpdate r : {RhoUpdate::joint, RhoUpdate::sequential}) CHECK(parse_rho_update(to_string(r)) == r);
    CHECK_THROWS_AS(parse_mode("third_order"), ParseError);
    CHECK_THROWS_AS(parse_rho_update("random"), ParseError);
}

TEST_CASE("config validation and epsilon schedule") {
    SolverConfig c;
    CHECK_NOTHROW(c.validate());
    auto bad = [](auto mutate) {
        SolverConfig x;
        mutate(x);
        CHECK_THROWS_AS(x.validate(), ParameterError);
    };
    bad([](SolverConfig& x) { x.lambda1 = 0.0; });
    bad([](SolverConfig& x) { x.lambda2 = -1.0; });
    bad([](SolverConfig& x) { x.gamma1 = 0.0; });
    bad([](SolverConfig& x) { x.p = 0.0; });
    bad([](SolverConfig& x) { x.p = 1.5; });
    bad([](SolverConfig& x) { x.irls_iters = 0; });
    bad([](SolverConfig& x) { x.admm_iters = 0; });
    bad([](SolverConfig& x) { x.epsilon_decay = 0.0; });
    bad([](SolverConfig& x) { x.epsilon_decay = 1.5; });
    bad([](SolverConfig& x) { x.epsilon_min = -1.0; });
    bad([](SolverConfig& x) { x.lambda1 = std::nan(""); });
    SolverConfig second;
    second.mode = Mode::second_order;
    second.lambda1 = 0.0;  // unused in this mode
    CHECK_NOTHROW(second.validate());

    c.epsilon_decay = 0.5;
    c.epsilon_min = 0.01;
    double prev = c.epsilon_at(0, 1.0);
    CHECK(prev == 1.0);
    for (int n = 1; n < 20; ++n) {
        const double e = c.epsilon_at(n, 1.0);
        CHECK(e <= prev);
        CHECK(e >= 0.01);
        prev = e;
    }
    CHECK(c.epsilon_at(19, 1.0) == 0.01);
}

TEST_CASE("initial state") {
    std::mt19937_64 rng(41);
    const KGrid g(8, 8);
    const SamplingOp samp = random_problem(g, 0.5, rng);
    SolverConfig c;
    const AdmmState s = AdmmState::initial(samp, c);
    CHECK(oracle::rel_diff(s.rho1_hat.data(), samp.adjoint_data().data()) == 0.0);
    CHECK(s.rho2_hat.norm() == 0.0);
    CHECK(s.q1.squared_norm() == 0.0);
    CHECK(s.q2.squared_norm() == 0.0);
    CHECK(s.y2.squared_norm() == 0.0);
    CHECK(s.y1.channels() == 2);
    CHECK(s.y2.channels() == 3);
    c.mode = Mode::second_order;
    const AdmmState s2 = AdmmState::initial(samp, c);
    CHECK(s2.rho1_hat.norm() == 0.0);
    CHECK(oracle::rel_diff(s2.rho2_hat.data(), samp.adjoint_data().data()) == 0.0);
}

TEST_CASE("y update closed forms") {
    std::mt19937_64 rng(42);
    const KGrid g(8, 8);
    SolverConfig c;
    c.gamma1 = 0.7;
    c.gamma2 = 2.5;
    for (int trial = 0; trial < 5; ++trial) {
        const AdmmState s = random_state(g, rng);
        for (int idx : {1, 2}) {
            const double gamma = idx == 1 ? c.gamma1 : c.gamma2;
            const MultiChannelImage& q = idx == 1 ? s.q1 : s.q2;
            const ComplexImage& rho = idx == 1 ? s.rho1_hat : s.rho2_hat;

            const SosMask zero{g, std::vector<double>(g.size(), 0.0)};
            const auto free_y = oracle::y_update(g, idx, rho.data(), channels_of(q), zero.entries, gamma);
            CHECK(max_rel_channels(update_y(idx, s, zero, c), free_y) < 1e-12);

            const SosMask flat{g, std::vector<double>(g.size(), gamma)};
            MultiChannelImage half = update_y(idx, s, flat, c);
            std::vector<CVector> expected = free_y;
            for (auto& ch : expected)
                for (auto& v : ch) v *= 0.5;
            CHECK(max_rel_channels(half, expected) < 1e-12);

            const SosMask sos = random_sos(g, rng);
            CHECK(max_rel_channels(update_y(idx, s, sos, c),
                                   oracle::y_update(g, idx, rho.data(), channels_of(q), sos.entries, gamma)) < 1e-9);
        }
    }
    CHECK_THROWS_AS(update_y(1, random_state(g, rng), SosMask{KGrid(8, 10), std::vector<double>(80)}, c),
                    DimensionError);
}

TEST_CASE("rho update matches the dense least-squares oracle") {
    std::mt19937_64 rng(43);
    const KGrid g(8, 8);
    SolverConfig c;
    c.lambda1 = 0.3;
    c.lambda2 = 0.05;
    c.gamma1 = 1.7;
    c.gamma2 = 0.9;
    for (int trial = 0; trial < 5; ++trial) {
        const SamplingOp samp = random_problem(g, 0.45, rng);
        const AdmmState s = random_state(g, rng);
        for (int idx : {1, 2}) {
            const double gl = idx == 1 ? c.gamma1 * c.lambda1 : c.gamma2 * c.lambda2;
            const CVector expected = oracle::rho_update(
                g, idx, samp.mask().sampled, samp.measurements(), (idx == 1 ? s.rho2_hat : s.rho1_hat).data(),
                channels_of(idx == 1 ? s.y1 : s.y2), channels_of(idx == 1 ? s.q1 : s.q2), gl);
            bool held = false;
            CHECK(oracle::rel_diff(update_rho(idx, s, samp, c, &held).data(), expected) < 1e-9);
            CHECK_FALSE(held);
        }
    }
}

TEST_CASE("rho update edge cases") {
    std::mt19937_64 rng(44);
    const KGrid g(8, 8);
    SolverConfig c;
    c.lambda1 = 1e-300;
    SamplingMask full{g, std::vector<std::uint8_t>(g.size(), 1)};
    const SamplingOp samp = SamplingOp::from_kspace(full, ComplexImage(g, Domain::fourier, oracle::random_vector(g.size(), rng)));
    const AdmmState s = random_state(g, rng);
    const ComplexImage r1 = update_rho(1, s, samp, c);
    for (std::size_t k = 0; k < g.size(); ++k) CHECK(std::abs(r1[k] - (samp.measurements()[k] - s.rho2_hat[k])) < 1e-12);

    // y == q and nothing sampled: every nonzero frequency goes to zero.
    c.lambda1 = 0.5;
    SamplingMask none{g, std::vector<std::uint8_t>(g.size(), 0)};
    const SamplingOp empty(none, CVector{});
    AdmmState z = random_state(g, rng);
    z.y1 = z.q1;
    bool held = false;
    const ComplexImage r2 = update_rho(1, z, empty, c, &held);
    CHECK(held);
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (k == g.dc_index()) {
            CHECK(r2[k] == z.rho1_hat[k]);
        } else {
            CHECK(std::abs(r2[k]) < 1e-12);
        }
    }
    CHECK_THROWS_AS(update_rho(3, z, empty, c), ParameterError);
}

TEST_CASE("joint rho update matches the dense joint oracle") {
    std::mt19937_64 rng(45);
    const KGrid g(8, 8);
    SolverConfig c;
    c.lambda1 = 0.2;
    c.lambda2 = 0.6;
    c.gamma1 = 1.3;
    c.gamma2 = 0.4;
    for (int trial = 0; trial < 5; ++trial) {
        const SamplingOp samp = random_problem(g, 0.5, rng);
        AdmmState s = random_state(g, rng);
        const auto [e1, e2] = oracle::joint_rho_update(g, samp.mask().sampled, samp.measurements(), channels_of(s.y1),
                                                       channels_of(s.q1), c.gamma1 * c.lambda1, channels_of(s.y2),
                                                       channels_of(s.q2), c.gamma2 * c.lambda2);
        const cdouble rho2_dc = s.rho2_hat[g.dc_index()];
        update_rho_joint(s, samp, c);
        // Only the sum is determined at DC; the split keeps rho2's value.
        CVector a1 = s.rho1_hat.data(), a2 = s.rho2_hat.data(), b1 = e1, b2 = e2;
        const std::size_t dc = g.dc_index();
        CHECK(std::abs((a1[dc] + a2[dc]) - (b1[dc] + b2[dc])) < 1e-9 * std::abs(b1[dc] + b2[dc]));
        CHECK(a2[dc] == rho2_dc);
        a1[dc] = a2[dc] = b1[dc] = b2[dc] = 0.0;
        CHECK(oracle::rel_diff(a1, b1) < 1e-9);
        CHECK(oracle::rel_diff(a2, b2) < 1e-9);
    }
}

TEST_CASE("joint update in a single-component mode equals update_rho") {
    std::mt19937_64 rng(46);
    const KGrid g(8, 8);
    const SamplingOp samp = random_problem(g, 0.5, rng);
    SolverConfig c;
    c.mode = Mode::first_order;
    AdmmState s = random_state(g, rng);
    const ComplexImage expected = update_rho(1, s, samp, c);
    update_rho_joint(s, samp, c);
    CHECK(oracle::rel_diff(s.rho1_hat.data(), expected.data()) == 0.0);
}

TEST_CASE("ADMM fixed point at zero data") {
    const KGrid g(8, 8);
    SamplingMask m{g, std::vector<std::uint8_t>(g.size(), 0)};
    m.sampled[g.dc_index()] = 1;
    m.sampled[3] = 1;
    const SamplingOp samp(m, CVector(2, 0.0));
    SolverConfig c;
    c.admm_iters = 10;
    std::mt19937_64 rng(47);
    const AdmmState s = admm_solve(AdmmState::initial(samp, c), random_sos(g, rng), random_sos(g, rng), samp, c);
    CHECK(s.rho1_hat.norm() == 0.0);
    CHECK(s.rho2_hat.norm() == 0.0);
    CHECK(s.q1.squared_norm() == 0.0);
    CHECK(s.y2.squared_norm() == 0.0);
}

TEST_CASE("ADMM reproduces fully sampled data with tiny lambdas") {
    std::mt19937_64 rng(48);
    const KGrid g(16, 16);
    const ComplexImage truth(g, Domain::fourier, oracle::random_vector(g.size(), rng));
    const SamplingOp samp = SamplingOp::from_kspace(SamplingMask{g, std::vector<std::uint8_t>(g.size(), 1)}, truth);
    SolverConfig c;
    c.lambda1 = c.lambda2 = 1e-9;
    c.admm_iters = 50;
    const AdmmState s = admm_solve(AdmmState::initial(samp, c), random_sos(g, rng), random_sos(g, rng), samp, c);
    CVector sum(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) sum[k] = s.rho1_hat[k] + s.rho2_hat[k];
    CHECK(oracle::rel_diff(sum, truth.data()) < 1e-6);
}

TEST_CASE("ADMM constraint residual shrinks") {
    std::mt19937_64 rng(49);
    const KGrid g(16, 16);
    for (RhoUpdate r : {RhoUpdate::joint, RhoUpdate::sequential}) {
        const SamplingOp samp = random_problem(g, 0.4, rng);
        SolverConfig c;
        c.rho_update = r;
        c.admm_iters = 60;
        c.lambda1 = 0.05;
        c.lambda2 = 0.02;
        AdmmTrace trace;
        admm_solve(random_state(g, rng), random_sos(g, rng), random_sos(g, rng), samp, c, &trace);
        REQUIRE(trace.constraint_residual.size() == 60);
        REQUIRE(trace.lagrangian.size() == 60);
        CHECK(trace.constraint_residual.back() < trace.constraint_residual.front());
        CHECK(trace.constraint_residual.back() < 1e-3 * trace.constraint_residual.front());
        CHECK_FALSE(trace.dc_held);
    }
}

TEST_CASE("objective values") {
    std::mt19937_64 rng(50);
    const KGrid g(8, 8);
    SolverConfig c;
    c.filter1 = FilterSupport(3, 3);
    c.filter2 = FilterSupport(3, 3);
    const ComplexImage zero(g, Domain::fourier);
    SamplingMask m{g, oracle::random_mask(g, 0.5, rng)};
    const SamplingOp empty_data(m, CVector(m.count(), 0.0));
    CHECK(objective_value(zero, zero, empty_data, c, 1.0) == 0.0);
    const CVector b = oracle::random_vector(m.count(), rng);
    const SamplingOp with_data(m, b);
    CHECK(objective_value(zero, zero, with_data, c, 1.0) == doctest::Approx(inner(b, b).real()).epsilon(1e-14));

    c.lambda1 = 0.4;
    c.lambda2 = 0.9;
    for (double p : {0.5, 1.0}) {
        c.p = p;
        const ComplexImage r1(g, Domain::fourier, oracle::random_vector(g.size(), rng));
        const ComplexImage r2(g, Domain::fourier, oracle::random_vector(g.size(), rng));
        const double eps = 0.3;
        double expected = data_misfit(r1, r2, with_data);
        for (int idx : {1, 2}) {
            const Eigen::MatrixXcd t = oracle::lifted(g, (idx == 1 ? r1 : r2).data(), idx, FilterSupport(3, 3));
            const Eigen::MatrixXcd gram = t.adjoint() * t;
            expected += (idx == 1 ? c.lambda1 : c.lambda2) *
                        (gram * oracle::matrix_power(gram, eps, p / 2.0 - 1.0)).trace().real();
        }
        CHECK(std::abs(objective_value(r1, r2, with_data, c, eps) - expected) <= 1e-8 * expected);
    }
}

TEST_CASE("sos surrogate adds weighted derivative energy") {
    std::mt19937_64 rng(51);
    const KGrid g(8, 8);
    SolverConfig c;
    c.lambda1 = 0.25;
    const SamplingOp samp = random_problem(g, 0.5, rng);
    const ComplexImage r1(g, Domain::fourier, oracle::random_vector(g.size(), rng));
    const ComplexImage zero(g, Domain::fourier);
    const SosMask sos = random_sos(g, rng);
    double energy = 0.0;
    const Eigen::MatrixXcd finv = oracle::dft_matrix(g).adjoint();
    for (const auto& w : oracle::multipliers(g, 1)) {
        Eigen::VectorXcd z(static_cast<Eigen::Index>(g.size()));
        for (std::size_t k = 0; k < g.size(); ++k) z(static_cast<Eigen::Index>(k)) = w[k] * r1[k];
        const Eigen::VectorXcd sp = finv * z;
        for (std::size_t i = 0; i < g.size(); ++i) energy += sos.entries[i] * std::norm(sp(static_cast<Eigen::Index>(i)));
    }
    const double expected = data_misfit(r1, zero, samp) + c.lambda1 * energy;
    CHECK(sos_surrogate(r1, zero, &sos, nullptr, samp, c) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(sos_surrogate(r1, zero, nullptr, nullptr, samp, c) == doctest::Approx(data_misfit(r1, zero, samp)));
}

TEST_CASE("first-order mode matches an independent single-component iteration") {
    const KGrid g(12, 12);
    const Phantom ph = small_phantom(g, false);
    std::mt19937_64 rng(52);
    SamplingMask m{g, oracle::random_mask(g, 0.5, rng)};
    const SamplingOp samp = SamplingOp::from_kspace(m, fft2_centered(ph.rho));
    SolverConfig c;
    c.mode = Mode::first_order;
    c.filter1 = FilterSupport(3, 3);
    c.irls_iters = 3;
    c.admm_iters = 5;
    c.lambda1 = 0.05;
    const Recovery rec = irls_recover(samp, c);
    const ComplexImage expected = reference_first_order(samp, c);
    CHECK(oracle::rel_diff(rec.rho1_hat.data(), expected.data()) < 1e-8);
    CHECK(rec.rho2.norm() == 0.0);
    CHECK(rec.rho2_hat.norm() == 0.0);

    // A very heavily weighted second component stays negligible and the
    // combined solver follows the single-component path.
    SolverConfig combined = c;
    combined.mode = Mode::combined;
    combined.lambda2 = 1e12;
    combined.filter2 = FilterSupport(3, 3);
    const Recovery both = irls_recover(samp, combined);
    CHECK(oracle::rel_diff(both.rho1_hat.data(), rec.rho1_hat.data()) < 1e-8);
}

TEST_CASE("second-order mode pins rho1") {
    const KGrid g(16, 16);
    const Phantom ph = small_phantom(g, true);
    std::mt19937_64 rng(53);
    const SamplingOp samp = SamplingOp::from_kspace(SamplingMask{g, oracle::random_mask(g, 0.5, rng)}, fft2_centered(ph.rho));
    SolverConfig c;
    c.mode = Mode::second_order;
    c.filter2 = FilterSupport(3, 3);
    c.irls_iters = 2;
    c.admm_iters = 5;
    const Recovery rec = irls_recover(samp, c);
    CHECK(rec.rho1.norm() == 0.0);
    CHECK(rec.rho2.norm() > 0.0);
}

TEST_CASE("fully sampled noiseless data is reproduced") {
    const KGrid g(32, 32);
    const Phantom ph = small_phantom(g, true);
    const SamplingOp samp =
        SamplingOp::from_kspace(SamplingMask{g, std::vector<std::uint8_t>(g.size(), 1)}, fft2_centered(ph.rho));
    SolverConfig c;
    c.lambda1 = c.lambda2 = 1e-6;
    c.filter1 = c.filter2 = FilterSupport(5, 5);
    c.irls_iters = 3;
    c.admm_iters = 20;
    const Recovery rec = irls_recover(samp, c);
    CHECK(snr_db(ph.rho, rec.image()) >= 60.0);
}

TEST_CASE("large lambda2 keeps a constant-only phantom in rho1") {
    const KGrid g(32, 32);
    const Phantom ph = small_phantom(g, false);
    std::mt19937_64 rng(54);
    const SamplingOp samp =
        SamplingOp::from_kspace(make_mask(MaskSpec{g, 2.0, 1.0, 2, 5}), fft2_centered(ph.rho));
    SolverConfig c;
    c.lambda1 = 1e-3;
    c.lambda2 = 1e3;
    c.filter1 = c.filter2 = FilterSupport(5, 5);
    c.irls_iters = 5;
    c.admm_iters = 20;
    const Recovery rec = irls_recover(samp, c);
    // Threshold from the fixture: 5% of the rho1 energy.
    CHECK(rec.rho2.squared_norm() <= 0.05 * rec.rho1.squared_norm());
}

TEST_CASE("least-squares steps never increase the frozen-weight surrogate") {
    const KGrid g(32, 32);
    const Phantom ph = small_phantom(g, true);
    const SamplingOp samp = SamplingOp::from_kspace(make_mask(MaskSpec{g, 2.0, 2.0, 2, 3}), fft2_centered(ph.rho));
    SolverConfig c;
    c.filter1 = c.filter2 = FilterSupport(5, 5);
    c.irls_iters = 4;
    c.admm_iters = 200;
    c.epsilon_decay = 1.0;
    const Recovery rec = irls_recover(samp, c);
    const double slack = 1e-6 * rec.diagnostics.iterations.front().surrogate_before;
    for (const auto& it : rec.diagnostics.iterations) {
        CHECK(it.surrogate_after <= it.surrogate_before + slack);
        CHECK(it.epsilon1 == rec.diagnostics.epsilon1_initial);
        CHECK(it.epsilon2 == rec.diagnostics.epsilon2_initial);
    }
}

TEST_CASE("recovery is deterministic") {
    const KGrid g(16, 16);
    const Phantom ph = small_phantom(g, true);
    const SamplingOp samp = SamplingOp::from_kspace(make_mask(MaskSpec{g, 2.0, 2.0, 1, 9}), fft2_centered(ph.rho));
    SolverConfig c;
    c.filter1 = c.filter2 = FilterSupport(3, 3);
    c.irls_iters = 3;
    c.admm_iters = 10;
    const Recovery a = irls_recover(samp, c);
    const Recovery b = irls_recover(samp, c);
    CHECK(a.rho1.data() == b.rho1.data());
    CHECK(a.rho2.data() == b.rho2.data());
    REQUIRE(a.diagnostics.iterations.size() == b.diagnostics.iterations.size());
    for (std::size_t i = 0; i < a.diagnostics.iterations.size(); ++i) {
        CHECK(a.diagnostics.iterations[i].surrogate_after == b.diagnostics.iterations[i].surrogate_after);
        CHECK(a.diagnostics.iterations[i].objective_after == b.diagnostics.iterations[i].objective_after);
    }
}

TEST_CASE("unsampled DC is held and reported") {
    const KGrid g(16, 16);
    const Phantom ph = small_phantom(g, true);
    std::mt19937_64 rng(55);
    const SamplingOp samp =
        SamplingOp::from_kspace(SamplingMask{g, oracle::random_mask(g, 0.5, rng, false)}, fft2_centered(ph.rho));
    SolverConfig c;
    c.filter1 = c.filter2 = FilterSupport(3, 3);
    c.irls_iters = 2;
    c.admm_iters = 5;
    const Recovery rec = irls_recover(samp, c);
    REQUIRE(rec.diagnostics.warnings.size() == 1);
    CHECK(rec.diagnostics.warnings[0].find("DC") != std::string::npos);
    CHECK(rec.rho1_hat[g.dc_index()] == cdouble(0.0));
}

TEST_CASE("recovery rejects bad configurations and data") {
    const KGrid g(8, 8);
    std::mt19937_64 rng(56);
    SamplingOp samp = random_problem(g, 0.5, rng);
    SolverConfig c;
    c.filter1 = FilterSupport(9, 9);
    CHECK_THROWS_AS(irls_recover(samp, c), DimensionError);
    c.filter1 = FilterSupport(3, 3);
    c.filter2 = FilterSupport(3, 3);
    c.lambda1 = -1.0;
    CHECK_THROWS_AS(irls_recover(samp, c), ParameterError);
    c.lambda1 = 1e-3;
    CVector b = samp.measurements();
    b[0] = cdouble(std::numeric_limits<double>::infinity(), 0.0);
    const SamplingOp broken(samp.mask(), b);
    CHECK_THROWS_AS(irls_recover(broken, c), NumericalError);
}
