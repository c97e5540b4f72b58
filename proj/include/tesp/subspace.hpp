#pragma once

#include <optional>

#include "tesp/tensor.hpp"

namespace tesp {

struct SubspaceSet {
    cmat us, un;     // left signal / noise singular vectors
    cmat vs, vn;     // right signal / noise singular vectors
    rvec sigma_s;    // d dominant singular values, descending
    rvec sigma;      // all singular values

    Index rank() const { return us.cols(); }
};

struct TensorSubspaceSet {
    std::vector<SubspaceSet> mode_sets;  // SVD of every spatial unfolding
    std::vector<cmat> projections;       // U_r^[s] U_r^[s]^H
    SubspaceSet svd;                     // matrix SVD of the same observation
    cmat combined;                       // (T_1 x ... x T_R) * Us
    Dims sensors;
};

SubspaceSet svd_subspace(const cmat& x, Index d);

// Spatial mode ranks default to min(M_r, d).
TensorSubspaceSet hosvd_subspace(const Tensor& x, Index d, const std::optional<std::vector<Index>>& ranks = {});

// Same subspace through the truncated core tensor, including the last-mode
// inverse singular value weighting. Columns agree with the projected basis
// up to a per-column phase.
cmat hosvd_subspace_via_core(const Tensor& x, Index d, const std::optional<std::vector<Index>>& ranks = {});

cmat fba_extend(const cmat& x);
Tensor fba_extend(const Tensor& x);

// Phase-aligned estimate: u_hat_n (u_hat_n^H u_n)/|u_hat_n^H u_n|.
cmat align_columns(const cmat& us_hat, const cmat& us);
cmat align_subspace_error(const cmat& us_hat, const cmat& us);

}  // namespace tesp
