#include "tesp/mse.hpp"

#include "tesp/errors.hpp"

namespace tesp {

cmat build_w_mat(const SubspaceSet& exact) {
    if (!(exact.sigma_s.minCoeff() > 0.0)) throw IllPosedError("W_mat: signal singular values must be positive");
    cmat left = exact.sigma_s.cwiseInverse().cast<cplx>().asDiagonal() * exact.vs.transpose();
    return kron(left, exact.un * exact.un.adjoint());
}

cmat lift_left_projection(const cmat& t1, Index m2) {
    const Index m1 = t1.rows();
    cmat stack(m1 * m1 * m2, m2);
    cmat im2 = cmat::Identity(m2, m2);
    for (Index j = 0; j < m1; ++j) stack.middleRows(j * m1 * m2, m1 * m2) = kron(im2, t1.col(j));
    return kron(stack, im2);
}

cmat lift_right_projection(const cmat& t2, Index m1) {
    const Index m2 = t2.rows();
    cmat stack(m1 * m2 * m2, m1);
    cmat im1 = cmat::Identity(m1, m1);
    for (Index j = 0; j < m2; ++j) stack.middleRows(j * m1 * m2, m1 * m2) = kron(im1, t2.col(j));
    return kron(im1, stack);
}

cmat apply_commutation_right(const cmat& x, Index m, Index n) {
    if (x.cols() != m * n) throw DimensionError("commutation: column count mismatch");
    cmat out(x.rows(), x.cols());
    for (Index i = 0; i < m; ++i)
        for (Index j = 0; j < n; ++j) out.col(j + n * i) = x.col(i + m * j);
    return out;
}

cmat build_w_ten(const TensorSubspaceSet& exact) {
    if (exact.sensors.size() != 2) throw UnsupportedError("W_ten is only available for two spatial dimensions");
    const Index m1 = exact.sensors[0], m2 = exact.sensors[1], m = m1 * m2;
    const SubspaceSet& sv = exact.svd;
    const Index n = sv.vs.rows();
    const cmat& t1 = exact.projections[0];
    const cmat& t2 = exact.projections[1];

    // last-mode SVD of the data tensor, expressed through the matrix SVD
    cmat u3s = sv.vs.conjugate();
    cmat v3n = sv.un.conjugate();
    cmat s3inv = sv.sigma_s.cwiseInverse().cast<cplx>().asDiagonal();
    cmat w = kron(s3inv * u3s.adjoint(), kron(t1, t2) * v3n.conjugate() * v3n.transpose());

    cmat left = kron(sv.us.transpose(), cmat::Identity(m, m));
    auto mode_map = [](const SubspaceSet& ms) {
        cmat core = ms.us.conjugate() * ms.sigma_s.cwiseInverse().cast<cplx>().asDiagonal() * ms.vs.transpose();
        return kron(core, ms.un * ms.un.adjoint());
    };
    cmat second = left * lift_right_projection(t2, m1) * mode_map(exact.mode_sets[0]);
    w += apply_commutation_right(second, m1 * n, m2);
    w += left * lift_left_projection(t1, m2) * mode_map(exact.mode_sets[1]);
    return w;
}

double mse_from_mapped(const cvec& z, const NoiseSpec& noise, bool fba) {
    const Index len = z.size();
    if (noise.kind == NoiseSpec::Kind::white) {
        // R = sigma2 I, C = c sigma2 I; the extended blocks add c Pi to R and Pi to C
        const double c = noise.circularity;
        double quad = z.squaredNorm();
        double pseudo = c * (z.transpose() * z)(0).real();
        if (fba) {
            quad += c * z.dot(z.reverse()).real();
            pseudo += (z.transpose() * z.reverse())(0).real();
        }
        return 0.5 * noise.sigma2 * (quad - pseudo);
    }
    cmat rr = noise.cov, cc = noise.pseudo;
    if (fba) {
        const Index mn = noise.cov.rows();
        cmat r2(2 * mn, 2 * mn), c2(2 * mn, 2 * mn);
        auto flip = [](const cmat& a) { return cmat(a.rowwise().reverse()); };     // a * Pi
        auto lflip = [](const cmat& a) { return cmat(a.colwise().reverse()); };    // Pi * a
        r2 << noise.cov, flip(noise.pseudo), lflip(noise.pseudo.conjugate()), lflip(flip(noise.cov.conjugate()));
        c2 << noise.pseudo, flip(noise.cov), lflip(noise.cov.conjugate()), lflip(flip(noise.pseudo.conjugate()));
        rr = std::move(r2);
        cc = std::move(c2);
    }
    if (rr.rows() != len) throw DimensionError("mse: noise covariance size does not match W");
    cplx a = z.adjoint() * rr.transpose() * z;
    cplx b = z.transpose() * cc * z;
    return 0.5 * (a.real() - b.real());
}

MseReport analytical_mse(const ExactModel& ex, const NoiseSpec& noise) {
    const Scenario& s = ex.scenario;
    MseReport rep;
    rep.w = ex.ten ? build_w_ten(*ex.ten) : build_w_mat(ex.svd);
    rep.r = ex.sensitivity;
    rep.mse.resize(s.sources(), s.dims());
    const bool fba = uses_fba(ex.variant);
    for (int r = 0; r < s.dims(); ++r)
        for (Index k = 0; k < s.sources(); ++k) {
            cvec z = rep.w.transpose() * ex.sensitivity[r].col(k);
            rep.mse(k, r) = mse_from_mapped(z, noise, fba);
        }
    return rep;
}

double effective_snr(const cmat& symbols, double sigma2) { return symbols.squaredNorm() / sigma2; }

double closed_form_ls(Index m_r, Index m_total, double snr_eff) {
    const double mr = static_cast<double>(m_r);
    return mr / (static_cast<double>(m_total) * (mr - 1) * (mr - 1)) / snr_eff;
}

double closed_form_sls(Index m, double snr_eff) {
    const double x = static_cast<double>(m);
    const double num = x * x * x * x - 2 * x * x * x + 24 * x * x - 22 * x + 23;
    const double den = x * (x * x + 11) * (x * x + 11) * (x - 1) * (x - 1);
    return 6.0 * num / den / snr_eff;
}

double closed_form_crb(Index m_r, Index m_total, double snr_eff) {
    const double mr = static_cast<double>(m_r);
    return 6.0 / (static_cast<double>(m_total) * (mr * mr - 1)) / snr_eff;
}

double efficiency_ls(Index m) { return closed_form_crb(m, m, 1.0) / closed_form_ls(m, m, 1.0); }
double efficiency_sls(Index m) { return closed_form_crb(m, m, 1.0) / closed_form_sls(m, 1.0); }

MseReport single_source_closed_forms(const Scenario& s, Variant v, double snr_eff) {
    if (s.sources() != 1) throw UnsupportedError("closed forms require a single source");
    if (uses_sls(v) && s.dims() != 1) throw UnsupportedError("structured least squares is only defined for 1-D arrays");
    MseReport rep;
    rep.effective_snr = snr_eff;
    rep.mse.resize(1, s.dims());
    rep.crb.resize(1, s.dims());
    const Index m = s.total_sensors();
    for (int r = 0; r < s.dims(); ++r) {
        rep.mse(0, r) = uses_sls(v) ? closed_form_sls(m, snr_eff) : closed_form_ls(s.sensors[r], m, snr_eff);
        rep.crb(0, r) = closed_form_crb(s.sensors[r], m, snr_eff);
    }
    rep.efficiency = efficiency(rep.crb, rep.mse);
    return rep;
}

MseReport crb_deterministic(const Scenario& s, const cmat& symbols, double sigma2) {
    const Index d = s.sources(), m = s.total_sensors(), n = symbols.cols();
    const int big_r = s.dims();
    cmat a = steering_matrix(s);
    cmat dm(m, d * big_r);
    for (int r = 1; r <= big_r; ++r) {
        for (Index k = 0; k < d; ++k) {
            cmat col = cmat::Identity(1, 1);
            for (int q = 1; q <= big_r; ++q) {
                cvec f = steering_vector(s.mu(k, q - 1), s.sensors[q - 1]);
                if (q == r)
                    for (Index p = 0; p < f.size(); ++p) f[p] *= kJ * static_cast<double>(p);
                col = kron(col, f);
            }
            dm.col((r - 1) * d + k) = col;
        }
    }
    Eigen::JacobiSVD<cmat> asvd(a, Eigen::ComputeThinU);
    const rvec& sa = asvd.singularValues();
    if (!(sa[d - 1] > 1e-12 * sa[0])) throw RankError("crb: steering matrix is rank deficient");
    cmat ua = asvd.matrixU();
    cmat pperp = cmat::Identity(m, m) - ua * ua.adjoint();
    cmat rs = symbols * symbols.adjoint() / static_cast<double>(n);
    cmat weight = kron(cmat::Ones(big_r, big_r), rs.transpose());
    rmat fisher = (dm.adjoint() * pperp * dm).cwiseProduct(weight).real();
    Eigen::FullPivLU<rmat> lu(fisher);
    if (!lu.isInvertible()) throw RankError("crb: singular Fisher block");
    rmat c = sigma2 / (2.0 * static_cast<double>(n)) * lu.inverse();
    MseReport rep;
    rep.crb.resize(d, big_r);
    for (int r = 0; r < big_r; ++r)
        for (Index k = 0; k < d; ++k) rep.crb(k, r) = c(r * d + k, r * d + k);
    rep.effective_snr = effective_snr(symbols, sigma2);
    return rep;
}

rmat sls_g_matrix(Index m) {
    const Index n = m - 1;
    rmat g = rmat::Constant(n, n, 1.0 / static_cast<double>(m)) + 2.0 * rmat::Identity(n, n);
    for (Index i = 0; i + 1 < n; ++i) {
        g(i, i + 1) -= 1.0;
        g(i + 1, i) -= 1.0;
    }
    return g;
}

SlsInternals sls_closed_form_internals(Index m) {
    if (m < 2) throw DimensionError("sls internals: need at least 2 sensors");
    SlsInternals out;
    const double x = static_cast<double>(m);
    out.g = sls_g_matrix(m);
    out.g_inv.resize(m - 1, m - 1);
    for (Index i = 1; i < m; ++i)
        for (Index j = 1; j < m; ++j) {
            const double a = static_cast<double>(i), b = static_cast<double>(j);
            const double corr = 3.0 * a * (x - a) * b * (x - b) / (x * x + 11);
            const double base = i >= j ? (x - a) * b : a * (x - b);
            out.g_inv(i - 1, j - 1) = (base - corr) / x;
        }
    out.gamma = (x - 1) * x * (x + 1) / (x * x + 11);
    out.g_d.resize(m);
    for (Index i = 1; i <= m; ++i) out.g_d[i - 1] = 6.0 * (2.0 * static_cast<double>(i) - x - 1) / (x * x + 11);
    return out;
}

rmat efficiency(const rmat& crb, const rmat& mse) {
    if (crb.rows() != mse.rows() || crb.cols() != mse.cols()) throw DimensionError("efficiency: shape mismatch");
    if ((mse.array() == 0.0).any()) throw IllPosedError("efficiency: zero MSE");
    return crb.cwiseQuotient(mse);
}

}  // namespace tesp
