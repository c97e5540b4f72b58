#include "tesp/esprit.hpp"

#include <cmath>

#include "tesp/errors.hpp"

namespace tesp {

std::string variant_name(Variant v) {
    switch (v) {
        case Variant::standard: return "standard";
        case Variant::unitary: return "unitary";
        case Variant::standard_tensor: return "standard_tensor";
        case Variant::unitary_tensor: return "unitary_tensor";
        case Variant::sls: return "sls";
        case Variant::unitary_sls: return "unitary_sls";
    }
    return "unknown";
}

Variant parse_variant(const std::string& name) {
    for (Variant v : {Variant::standard, Variant::unitary, Variant::standard_tensor, Variant::unitary_tensor,
                      Variant::sls, Variant::unitary_sls})
        if (variant_name(v) == name) return v;
    throw ConfigError("unknown variant '" + name + "'");
}

bool uses_fba(Variant v) {
    return v == Variant::unitary || v == Variant::unitary_tensor || v == Variant::unitary_sls;
}
bool uses_tensor(Variant v) { return v == Variant::standard_tensor || v == Variant::unitary_tensor; }
bool uses_sls(Variant v) { return v == Variant::sls || v == Variant::unitary_sls; }

SelectionPair selection_matrices(const Dims& sensors, int mode) {
    if (mode < 1 || mode > static_cast<int>(sensors.size())) throw DimensionError("selection: mode out of range");
    const Index m = sensors[mode - 1];
    if (m < 2) throw DimensionError("selection: need at least 2 sensors");
    SelectionPair sel;
    sel.j1 = cmat::Identity(m - 1, m);
    sel.j2 = cmat::Zero(m - 1, m);
    sel.j2.rightCols(m - 1) = cmat::Identity(m - 1, m - 1);
    Index before = 1, after = 1;
    for (int r = 1; r < mode; ++r) before *= sensors[r - 1];
    for (int r = mode + 1; r <= static_cast<int>(sensors.size()); ++r) after *= sensors[r - 1];
    cmat ib = cmat::Identity(before, before), ia = cmat::Identity(after, after);
    sel.j1_eff = kron(kron(ib, sel.j1), ia);
    sel.j2_eff = kron(kron(ib, sel.j2), ia);
    return sel;
}

SelectionPair selection_matrices(const Scenario& s, int mode) { return selection_matrices(s.sensors, mode); }

EigenStructure eigen_structure(const cmat& psi) {
    Eigen::ComplexEigenSolver<cmat> eig(psi);
    EigenStructure e;
    e.psi = psi;
    e.lambda = eig.eigenvalues();
    e.q = eig.eigenvectors();
    Eigen::FullPivLU<cmat> lu(e.q);
    e.p = lu.inverse();
    Eigen::JacobiSVD<cmat> sv(e.q);
    const rvec& s = sv.singularValues();
    e.ill_conditioned = !(s[s.size() - 1] > 0.0) || s[0] / s[s.size() - 1] > 1e8;
    return e;
}

static cmat pinv(const cmat& a, double rel_tol, const char* what) {
    Eigen::JacobiSVD<cmat> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const rvec& s = svd.singularValues();
    if (s.size() == 0 || !(s[s.size() - 1] > rel_tol * s[0])) throw IllPosedError(std::string(what) + ": rank deficient");
    return svd.matrixV() * s.cwiseInverse().cast<cplx>().asDiagonal() * svd.matrixU().adjoint();
}

EigenStructure ls_solve_invariance(const cmat& us, const SelectionPair& sel) {
    if (us.rows() != sel.j1_eff.cols()) throw DimensionError("ls_solve: subspace rows must equal sensor count");
    cmat a1 = sel.j1_eff * us;
    if (a1.rows() < a1.cols()) throw IllPosedError("ls_solve: fewer selected rows than sources");
    return eigen_structure(pinv(a1, 1e-12, "ls_solve") * (sel.j2_eff * us));
}

EstimateReport pair_modes(const std::vector<EigenStructure>& structures) {
    if (structures.empty()) throw DimensionError("pair_modes: no modes");
    const Index d = structures.front().psi.rows();
    EstimateReport rep;
    rep.modes = structures;
    rep.mu_hat.resize(d, static_cast<Index>(structures.size()));
    const cmat& q = structures.front().q;
    const cmat& p = structures.front().p;
    for (std::size_t r = 0; r < structures.size(); ++r) {
        if (structures[r].psi.rows() != d) throw DimensionError("pair_modes: modes disagree on d");
        cmat diag = p * structures[r].psi * q;
        cmat off = diag;
        off.diagonal().setZero();
        if (off.norm() > 0.1 * structures[r].psi.norm()) rep.pairing_unreliable = true;
        for (Index k = 0; k < d; ++k) rep.mu_hat(k, static_cast<Index>(r)) = std::arg(diag(k, k));
    }
    return rep;
}

EigenStructure sls_refine(const cmat& us_hat, const SelectionPair& sel, const EigenStructure& psi_ls) {
    const cmat& j1 = sel.j1_eff;
    const cmat& j2 = sel.j2_eff;
    const Index d = us_hat.cols();
    const Index m = us_hat.rows();
    if (d > j1.rows()) throw DimensionError("sls_refine: d must not exceed M - 1");
    cmat id = cmat::Identity(d, d);
    cmat f(j1.rows() * d, d * d + m * d);
    f.leftCols(d * d) = kron(id, j1 * us_hat);
    f.rightCols(m * d) = kron(psi_ls.psi.transpose(), j1) - kron(id, j2);
    cvec r = vec(j1 * us_hat * psi_ls.psi - j2 * us_hat);
    cmat ffh = f * f.adjoint();
    Eigen::JacobiSVD<cmat> sv(ffh);
    const rvec& s = sv.singularValues();
    if (!(s[s.size() - 1] > 1e-12 * s[0])) throw IllPosedError("sls_refine: F F^H singular");
    cvec step = -f.adjoint() * ffh.ldlt().solve(r);
    cmat dpsi = unvec(step.head(d * d), d, d);
    return eigen_structure(psi_ls.psi + dpsi);
}

cmat variant_subspace(const ObservationSet& obs, const Scenario& s, Variant v) {
    const Index d = s.sources();
    if (uses_tensor(v)) {
        Tensor x = uses_fba(v) ? fba_extend(obs.x_tensor) : obs.x_tensor;
        return hosvd_subspace(x, d).combined;
    }
    cmat x = uses_fba(v) ? fba_extend(obs.x) : obs.x;
    return svd_subspace(x, d).us;
}

EstimateReport estimate_from_subspace(const cmat& us, const Scenario& s, Variant v) {
    if (uses_sls(v) && s.dims() != 1) throw UnsupportedError("structured least squares is only defined for 1-D arrays");
    std::vector<EigenStructure> modes;
    for (int r = 1; r <= s.dims(); ++r) {
        auto sel = selection_matrices(s, r);
        EigenStructure e = ls_solve_invariance(us, sel);
        if (uses_sls(v)) e = sls_refine(us, sel, e);
        modes.push_back(std::move(e));
    }
    EstimateReport rep = pair_modes(modes);
    rep.variant = v;
    return rep;
}

EstimateReport estimate(const ObservationSet& obs, const Scenario& s, Variant v) {
    if (uses_sls(v) && s.dims() != 1) throw UnsupportedError("structured least squares is only defined for 1-D arrays");
    return estimate_from_subspace(variant_subspace(obs, s, v), s, v);
}

std::vector<EigenStructure> exact_structures(const cmat& us, const Scenario& s) {
    cmat a = steering_matrix(s);
    cmat k = a.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(us);  // us == a k
    Eigen::FullPivLU<cmat> lu(k);
    if (!lu.isInvertible()) throw RankError("exact_structures: subspace does not span the steering matrix");
    cmat q = lu.inverse();
    std::vector<EigenStructure> out;
    for (int r = 1; r <= s.dims(); ++r) {
        EigenStructure e;
        e.lambda.resize(s.sources());
        for (Index i = 0; i < s.sources(); ++i) e.lambda[i] = std::polar(1.0, s.mu(i, r - 1));
        e.q = q;
        e.p = k;
        e.psi = q * e.lambda.asDiagonal() * k;
        out.push_back(std::move(e));
    }
    return out;
}

}  // namespace tesp
