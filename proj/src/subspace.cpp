#include "tesp/subspace.hpp"

#include <algorithm>

#include "tesp/errors.hpp"

namespace tesp {

namespace {

void check_gap(const rvec& sv, Index d, const char* what) {
    if (d < sv.size() && sv[0] > 0.0 && sv[d - 1] - sv[d] <= 1e-12 * sv[0])
        throw DegenerateGapError(std::string(what) + ": repeated singular value at the truncation boundary");
}

}  // namespace

SubspaceSet svd_subspace(const cmat& x, Index d) {
    if (d < 1 || d > std::min(x.rows(), x.cols())) throw DimensionError("svd_subspace: d out of range");
    Eigen::JacobiSVD<cmat> svd(x, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const rvec& sv = svd.singularValues();
    check_gap(sv, d, "svd_subspace");
    SubspaceSet s;
    s.us = svd.matrixU().leftCols(d);
    s.un = svd.matrixU().rightCols(x.rows() - d);
    s.vs = svd.matrixV().leftCols(d);
    s.vn = svd.matrixV().rightCols(x.cols() - d);
    s.sigma_s = sv.head(d);
    s.sigma = sv;
    return s;
}

static std::vector<Index> spatial_ranks(const Tensor& x, Index d, const std::optional<std::vector<Index>>& ranks) {
    const int big_r = x.order() - 1;
    if (big_r < 1) throw DimensionError("hosvd_subspace: need at least one spatial mode");
    std::vector<Index> p(big_r);
    for (int r = 0; r < big_r; ++r) p[r] = std::min(x.dims()[r], d);
    if (ranks) {
        if (static_cast<int>(ranks->size()) != big_r) throw DimensionError("hosvd_subspace: one rank per spatial mode");
        p = *ranks;
    }
    return p;
}

TensorSubspaceSet hosvd_subspace(const Tensor& x, Index d, const std::optional<std::vector<Index>>& ranks) {
    const int big_r = x.order() - 1;
    auto p = spatial_ranks(x, d, ranks);
    TensorSubspaceSet t;
    t.sensors = Dims(x.dims().begin(), x.dims().end() - 1);
    for (int r = 1; r <= big_r; ++r) {
        const Index pr = p[r - 1];
        if (pr < 1 || pr > x.dim(r)) throw DimensionError("hosvd_subspace: mode rank out of range");
        t.mode_sets.push_back(svd_subspace(unfold(x, r), pr));
        const cmat& u = t.mode_sets.back().us;
        t.projections.push_back(u * u.adjoint());
    }
    t.svd = svd_subspace(matrix_from_tensor(x), d);
    Tensor u = tensor_from_matrix(t.svd.us, t.sensors);
    for (int r = 1; r <= big_r; ++r) u = mode_product(u, t.projections[r - 1], r);
    t.combined = matrix_from_tensor(u);
    return t;
}

cmat hosvd_subspace_via_core(const Tensor& x, Index d, const std::optional<std::vector<Index>>& ranks) {
    const int big_r = x.order() - 1;
    auto p = spatial_ranks(x, d, ranks);
    std::vector<Index> all = p;
    all.push_back(d);
    HosvdFactors h = hosvd_truncated(x, all);
    Tensor u = h.core;
    for (int r = 1; r <= big_r; ++r) u = mode_product(u, h.factors[r - 1], r);
    const rvec& sv = h.mode_singular_values[big_r];
    check_gap(sv, d, "hosvd_subspace_via_core");
    u = mode_product(u, cmat(sv.head(d).cwiseInverse().cast<cplx>().asDiagonal()), big_r + 1);
    return matrix_from_tensor(u);
}

cmat fba_extend(const cmat& x) {
    cmat z(x.rows(), 2 * x.cols());
    z.leftCols(x.cols()) = x;
    z.rightCols(x.cols()) = x.conjugate().colwise().reverse().rowwise().reverse();
    return z;
}

Tensor fba_extend(const Tensor& x) {
    Dims spatial(x.dims().begin(), x.dims().end() - 1);
    return tensor_from_matrix(fba_extend(matrix_from_tensor(x)), spatial);
}

cmat align_columns(const cmat& us_hat, const cmat& us) {
    if (us_hat.rows() != us.rows() || us_hat.cols() != us.cols()) throw DimensionError("align: shape mismatch");
    cmat out = us_hat;
    for (Index n = 0; n < us.cols(); ++n) {
        cplx ip = us_hat.col(n).dot(us.col(n));  // u_hat^H u
        if (std::abs(ip) < 1e-12) throw AlignmentError("align: estimate orthogonal to reference column");
        out.col(n) *= ip / std::abs(ip);
    }
    return out;
}

cmat align_subspace_error(const cmat& us_hat, const cmat& us) { return align_columns(us_hat, us) - us; }

}  // namespace tesp
