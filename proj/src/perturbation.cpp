#include "tesp/perturbation.hpp"

#include "tesp/errors.hpp"

namespace tesp {

static cmat pinv_full_rank(const cmat& a) {
    Eigen::JacobiSVD<cmat> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const rvec& s = svd.singularValues();
    if (!(s[s.size() - 1] > 1e-12 * s[0])) throw IllPosedError("pseudo-inverse of a rank deficient matrix");
    return svd.matrixV() * s.cwiseInverse().cast<cplx>().asDiagonal() * svd.matrixU().adjoint();
}

FirstOrderSubspaceError svd_expansion(const cmat& noise, const SubspaceSet& exact, bool include_basis) {
    const Index d = exact.rank();
    if (noise.rows() != exact.us.rows() || noise.cols() != exact.vs.rows())
        throw DimensionError("svd_expansion: noise shape does not match the subspaces");
    FirstOrderSubspaceError e;
    cmat sinv = exact.sigma_s.cwiseInverse().cast<cplx>().asDiagonal();
    cmat nvs = noise * exact.vs;
    e.gamma_n = exact.un.adjoint() * nvs * sinv;
    e.delta_us = exact.un * e.gamma_n;
    e.d_matrix = rmat::Zero(d, d);
    const double s0 = exact.sigma_s[0];
    for (Index k = 0; k < d; ++k)
        for (Index l = 0; l < d; ++l) {
            if (k == l) continue;
            const double gap = exact.sigma_s[l] * exact.sigma_s[l] - exact.sigma_s[k] * exact.sigma_s[k];
            if (std::abs(gap) <= 1e-12 * s0 * s0) {
                if (include_basis) throw DegenerateGapError("svd_expansion: repeated singular values");
                continue;
            }
            e.d_matrix(k, l) = 1.0 / gap;
        }
    if (include_basis) {
        cmat sig = exact.sigma_s.cast<cplx>().asDiagonal();
        cmat inner = exact.us.adjoint() * nvs * sig;
        inner += cmat(inner.adjoint());
        e.gamma_s = e.d_matrix.cast<cplx>().cwiseProduct(inner);
        e.delta_us_basis = exact.us * e.gamma_s;
    }
    return e;
}

cmat mode_expansion(const Tensor& noise, const SubspaceSet& exact_mode, int mode) {
    cmat nr = unfold(noise, mode);
    if (nr.rows() != exact_mode.us.rows() || nr.cols() != exact_mode.vs.rows())
        throw DimensionError("mode_expansion: noise shape does not match the mode subspaces");
    cmat sinv = exact_mode.sigma_s.cwiseInverse().cast<cplx>().asDiagonal();
    return exact_mode.un * (exact_mode.un.adjoint() * (nr * exact_mode.vs)) * sinv;
}

cmat hosvd_expansion(const Tensor& noise, const TensorSubspaceSet& exact, bool include_basis) {
    const int big_r = static_cast<int>(exact.sensors.size());
    cmat du = svd_expansion(matrix_from_tensor(noise), exact.svd, include_basis).total();
    Tensor t = tensor_from_matrix(du, exact.sensors);
    for (int r = 1; r <= big_r; ++r) t = mode_product(t, exact.projections[r - 1], r);
    cmat out = matrix_from_tensor(t);
    const Tensor us = tensor_from_matrix(exact.svd.us, exact.sensors);
    for (int r = 1; r <= big_r; ++r) {
        const SubspaceSet& ms = exact.mode_sets[r - 1];
        cmat lift = mode_expansion(noise, ms, r) * ms.us.adjoint();
        Tensor u = us;
        for (int q = 1; q <= big_r; ++q) u = mode_product(u, q == r ? lift : exact.projections[q - 1], q);
        out += matrix_from_tensor(u);
    }
    return out;
}

cmat ls_sensitivity(const cmat& us, const SelectionPair& sel, const EigenStructure& eig) {
    const Index d = us.cols();
    cmat a1p = pinv_full_rank(sel.j1_eff * us);
    cmat r(us.rows() * d, d);
    for (Index k = 0; k < d; ++k) {
        cmat b = a1p * (sel.j2_eff / eig.lambda[k] - sel.j1_eff);
        cvec pk = eig.p.row(k).transpose();
        r.col(k) = kron(eig.q.col(k), b.transpose() * pk);
    }
    return r;
}

cmat sls_sensitivity(const cmat& us, const SelectionPair& sel, const EigenStructure& eig) {
    const Index d = us.cols();
    const cmat& j1 = sel.j1_eff;
    const cmat& j2 = sel.j2_eff;
    cmat a1 = j1 * us;
    cmat a1p = pinv_full_rank(a1);
    cmat id = cmat::Identity(d, d);
    cmat psit = eig.psi.transpose();
    cmat f(j1.rows() * d, d * d + us.rows() * d);
    f.leftCols(d * d) = kron(id, a1);
    f.rightCols(us.rows() * d) = kron(psit, j1) - kron(id, j2);
    cmat proj = a1 * a1p;
    cmat w_ru = kron(psit, j1) + kron(id, proj * j2) - kron(psit, proj * j1) - kron(id, j2);
    Eigen::PartialPivLU<cmat> ffht((f * f.adjoint()).transpose());
    cmat r = ls_sensitivity(us, sel, eig);
    for (Index k = 0; k < d; ++k) {
        cvec pk = eig.p.row(k).transpose();
        cvec g = kron(eig.q.col(k), a1.conjugate() * pk / eig.lambda[k]);
        // row g^T (F F^H)^-1 W_RU, transposed
        cvec h = ffht.solve(g);
        r.col(k) -= w_ru.transpose() * h;
    }
    return r;
}

ExactModel build_exact(const Scenario& s, const cmat& symbols, Variant v) {
    s.validate();
    if (uses_sls(v) && s.dims() != 1) throw UnsupportedError("structured least squares is only defined for 1-D arrays");
    ExactModel ex;
    ex.scenario = s;
    ex.variant = v;
    ObservationSet o = observe(s, symbols, cmat::Zero(s.total_sensors(), s.snapshots));
    ex.x0 = uses_fba(v) ? fba_extend(o.x0) : o.x0;
    ex.svd = svd_subspace(ex.x0, s.sources());
    if (uses_tensor(v)) {
        ex.ten = hosvd_subspace(tensor_from_matrix(ex.x0, s.sensors), s.sources());
        ex.ten->svd = ex.svd;
        ex.ten->combined = ex.svd.us;
    }
    ex.eig = exact_structures(ex.svd.us, s);
    for (int r = 1; r <= s.dims(); ++r) {
        ex.sel.push_back(selection_matrices(s, r));
        ex.sensitivity.push_back(uses_sls(v) ? sls_sensitivity(ex.svd.us, ex.sel.back(), ex.eig[r - 1])
                                             : ls_sensitivity(ex.svd.us, ex.sel.back(), ex.eig[r - 1]));
    }
    return ex;
}

cmat subspace_error_first_order(const cmat& noise, const ExactModel& ex, bool include_basis) {
    cmat nz = uses_fba(ex.variant) ? fba_extend(noise) : noise;
    if (ex.ten) return hosvd_expansion(tensor_from_matrix(nz, ex.scenario.sensors), *ex.ten, include_basis);
    return svd_expansion(nz, ex.svd, include_basis).total();
}

FirstOrderFrequencyError dmu_first_order(const cmat& noise, const ExactModel& ex) {
    const Scenario& s = ex.scenario;
    const Index d = s.sources();
    cmat du = subspace_error_first_order(noise, ex);
    FirstOrderFrequencyError out;
    out.variant = ex.variant;
    out.delta_mu.resize(d, s.dims());
    for (int r = 1; r <= s.dims(); ++r) {
        const SelectionPair& sel = ex.sel[r - 1];
        const EigenStructure& e = ex.eig[r - 1];
        if (uses_sls(ex.variant)) {
            cvec v = vec(du);
            for (Index k = 0; k < d; ++k)
                out.delta_mu(k, r - 1) = (ex.sensitivity[r - 1].col(k).transpose() * v)(0).imag();
            continue;
        }
        cmat a1p = pinv_full_rank(sel.j1_eff * ex.svd.us);
        cmat j1du = sel.j1_eff * du, j2du = sel.j2_eff * du;
        for (Index k = 0; k < d; ++k) {
            cvec t = a1p * (j2du * e.q.col(k) / e.lambda[k] - j1du * e.q.col(k));
            out.delta_mu(k, r - 1) = (e.p.row(k) * t)(0).imag();
        }
    }
    return out;
}

}  // namespace tesp
