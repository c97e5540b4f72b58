#include <cmath>

#include "doctest.h"
#include "tesp/errors.hpp"
#include "tesp/perturbation.hpp"
#include "test_util.hpp"

using namespace tesp;

namespace {

Scenario make(Dims sensors, Index n, rmat mu, double rho = 0.0) {
    Scenario s;
    s.sensors = std::move(sensors);
    s.snapshots = n;
    s.mu = std::move(mu);
    s.rho = rho;
    return s;
}

Scenario two_source_4x4() {
    rmat mu(2, 2);
    mu << 1.0, -0.5, -0.5, 1.0;
    return make({4, 4}, 8, mu, 0.9);
}

Scenario four_source_ula() {
    rmat mu(4, 1);
    mu << 1.0, 0.7, -0.6, -0.3;
    return make({8}, 8, mu);
}

cmat unit_noise(const Scenario& s, std::uint64_t seed) {
    Rng rng = make_rng(seed, 1);
    return NoiseSampler(NoiseSpec::white(1.0), s.total_sensors(), s.snapshots).draw(rng);
}

template <class F>
double residual_slope(F residual) {
    std::vector<double> y;
    for (double e : testutil::scaling_eps()) y.push_back(residual(e));
    return testutil::loglog_slope(testutil::scaling_eps(), y);
}

}  // namespace

TEST_CASE("zero noise gives zero expansions") {
    Scenario s = two_source_4x4();
    cmat sym = generate_symbols(s, 1);
    ExactModel ex = build_exact(s, sym, Variant::standard_tensor);
    cmat zero = cmat::Zero(16, 8);
    CHECK(svd_expansion(zero, ex.svd, true).total().norm() == 0.0);
    CHECK(mode_expansion(tensor_from_matrix(zero, s.sensors), ex.ten->mode_sets[0], 1).norm() == 0.0);
    CHECK(hosvd_expansion(tensor_from_matrix(zero, s.sensors), *ex.ten, true).norm() == 0.0);
    CHECK(dmu_first_order(zero, ex).delta_mu.norm() == 0.0);
}

TEST_CASE("basis perturbation structure") {
    Scenario s = two_source_4x4();
    ExactModel ex = build_exact(s, generate_symbols(s, 2), Variant::standard);
    FirstOrderSubspaceError e = svd_expansion(unit_noise(s, 3), ex.svd, true);
    CHECK((e.gamma_s + e.gamma_s.adjoint()).norm() < 1e-10);
    for (Index k = 0; k < 2; ++k) CHECK(e.d_matrix(k, k) == 0.0);
    CHECK((e.d_matrix + e.d_matrix.transpose()).norm() < 1e-12 * e.d_matrix.norm());
}

TEST_CASE("single source leakage term") {
    Scenario s = make({6}, 5, (rmat(1, 1) << 0.4).finished());
    ExactModel ex = build_exact(s, generate_symbols(s, 1), Variant::standard);
    cmat n = unit_noise(s, 2);
    FirstOrderSubspaceError e = svd_expansion(n, ex.svd);
    cmat direct = ex.svd.un.adjoint() * n * ex.svd.vs / ex.svd.sigma_s[0];
    CHECK((e.gamma_n - direct).norm() < 1e-12 * direct.norm());
}

TEST_CASE("repeated singular values reject the basis term") {
    SubspaceSet ss = svd_subspace((cmat(3, 3) << 2, 0, 0, 0, 1, 0, 0, 0, 1e-3).finished(), 2);
    ss.sigma_s[1] = ss.sigma_s[0];
    CHECK_THROWS_AS(svd_expansion(cmat::Ones(3, 3), ss, true), DegenerateGapError);
}

TEST_CASE("matrix subspace expansion is accurate to second order") {
    Scenario s = two_source_4x4();
    ExactModel ex = build_exact(s, generate_symbols(s, 4), Variant::standard);
    cmat n0 = unit_noise(s, 5);
    const double slope = residual_slope([&](double e) {
        cmat us_hat = svd_subspace(ex.x0 + e * n0, 2).us;
        return (align_subspace_error(us_hat, ex.svd.us) - svd_expansion(e * n0, ex.svd, true).total()).norm();
    });
    CHECK(slope > 1.7);
    CHECK(slope < 2.3);
}

TEST_CASE("mode expansion lies in the noise subspace and is accurate to second order") {
    Scenario s = two_source_4x4();
    ExactModel ex = build_exact(s, generate_symbols(s, 4), Variant::standard_tensor);
    Tensor n0 = tensor_from_matrix(unit_noise(s, 6), s.sensors);
    Tensor x0 = tensor_from_matrix(ex.x0, s.sensors);
    for (int r = 1; r <= 2; ++r) {
        const SubspaceSet& ms = ex.ten->mode_sets[r - 1];
        cmat du = mode_expansion(n0, ms, r);
        CHECK((ms.us.adjoint() * du).norm() < 1e-12 * du.norm());
        // Projection error: T_hat - T == dU U^H + U dU^H + O(eps^2).
        const double slope = residual_slope([&](double e) {
            Tensor x(x0.dims(), x0.data() + e * n0.data());
            cmat u_hat = svd_subspace(unfold(x, r), ms.rank()).us;
            cmat dp = u_hat * u_hat.adjoint() - ms.us * ms.us.adjoint();
            cmat lin = e * (du * ms.us.adjoint() + ms.us * du.adjoint());
            return (dp - lin).norm();
        });
        CHECK(slope > 1.7);
        CHECK(slope < 2.3);
    }
}

TEST_CASE("tensor subspace expansion is accurate to second order") {
    Scenario s = two_source_4x4();
    ExactModel ex = build_exact(s, generate_symbols(s, 4), Variant::standard_tensor);
    cmat n0 = unit_noise(s, 7);
    const double slope = residual_slope([&](double e) {
        TensorSubspaceSet t = hosvd_subspace(tensor_from_matrix(ex.x0 + e * n0, s.sensors), 2);
        // Projected basis built from the phase-aligned matrix subspace.
        Tensor u = tensor_from_matrix(align_columns(t.svd.us, ex.svd.us), s.sensors);
        for (int r = 1; r <= 2; ++r) u = mode_product(u, t.projections[r - 1], r);
        cmat actual = matrix_from_tensor(u) - ex.svd.us;
        cmat pred = hosvd_expansion(tensor_from_matrix(e * n0, s.sensors), *ex.ten, true);
        return (actual - pred).norm();
    });
    CHECK(slope > 1.7);
    CHECK(slope < 2.3);
}

TEST_CASE("frequency error expansion is accurate to second order for every variant") {
    for (Variant v : {Variant::standard, Variant::unitary, Variant::standard_tensor, Variant::unitary_tensor,
                      Variant::sls, Variant::unitary_sls}) {
        CAPTURE(variant_name(v));
        Scenario s = uses_sls(v) ? four_source_ula() : two_source_4x4();
        cmat sym = generate_symbols(s, 4);
        ExactModel ex = build_exact(s, sym, v);
        cmat n0 = unit_noise(s, 8);
        const double slope = residual_slope([&](double e) {
            ObservationSet o = observe(s, sym, e * n0);
            rmat err = testutil::matched_error(estimate(o, s, v).mu_hat, s.mu);
            return (err - dmu_first_order(e * n0, ex).delta_mu).norm();
        });
        CHECK(slope > 1.7);
        CHECK(slope < 2.3);
    }
}

TEST_CASE("frequency error expansion is linear in the noise") {
    Scenario s = two_source_4x4();
    for (Variant v : {Variant::standard, Variant::unitary_tensor}) {
        ExactModel ex = build_exact(s, generate_symbols(s, 1), v);
        cmat n = unit_noise(s, 2);
        rmat a = dmu_first_order(n, ex).delta_mu;
        rmat b = dmu_first_order(2.0 * n, ex).delta_mu;
        rmat c = dmu_first_order(-0.3 * n, ex).delta_mu;
        CHECK((b - 2.0 * a).norm() < 1e-12 * a.norm());
        CHECK((c + 0.3 * a).norm() < 1e-12 * a.norm());
    }
}

TEST_CASE("sensitivity vectors reproduce the direct expansion and ignore the basis term") {
    for (Variant v : {Variant::standard, Variant::unitary, Variant::standard_tensor, Variant::unitary_tensor,
                      Variant::sls, Variant::unitary_sls}) {
        CAPTURE(variant_name(v));
        Scenario s = uses_sls(v) ? four_source_ula() : two_source_4x4();
        ExactModel ex = build_exact(s, generate_symbols(s, 3), v);
        cmat n = unit_noise(s, 9);
        rmat dmu = dmu_first_order(n, ex).delta_mu;
        cvec du = vec(subspace_error_first_order(n, ex, false));
        cvec du_full = vec(subspace_error_first_order(n, ex, true));
        for (int r = 1; r <= s.dims(); ++r)
            for (Index k = 0; k < s.sources(); ++k) {
                const cvec rk = ex.sensitivity[r - 1].col(k);
                const double lin = (rk.transpose() * du)(0).imag();
                const double full = (rk.transpose() * du_full)(0).imag();
                CHECK(std::abs(lin - dmu(k, r - 1)) < 1e-10 * dmu.norm());
                CHECK(std::abs(full - lin) < 1e-10 * dmu.norm());
            }
    }
}

TEST_CASE("forward-backward noise enters through the data extension") {
    Scenario s = two_source_4x4();
    ExactModel ex = build_exact(s, generate_symbols(s, 3), Variant::unitary);
    cmat n = unit_noise(s, 4);
    CHECK(ex.x0.cols() == 2 * s.snapshots);
    cmat expected = svd_expansion(fba_extend(n), ex.svd).total();
    CHECK((subspace_error_first_order(n, ex) - expected).norm() < 1e-14);
}
