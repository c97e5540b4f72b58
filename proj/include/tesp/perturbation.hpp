#pragma once

#include <optional>

#include "tesp/esprit.hpp"

namespace tesp {

struct FirstOrderSubspaceError {
    cmat delta_us;        // Un * Gamma_n
    cmat delta_us_basis;  // Us * Gamma_s, empty unless requested
    cmat gamma_n, gamma_s;
    rmat d_matrix;        // 1/(s_l^2 - s_k^2) off the diagonal

    cmat total() const { return delta_us_basis.size() ? cmat(delta_us + delta_us_basis) : delta_us; }
};

struct FirstOrderFrequencyError {
    rmat delta_mu;  // d x R
    Variant variant = Variant::standard;
};

// Noise-free quantities a variant's expansions are evaluated against.
struct ExactModel {
    Scenario scenario;
    Variant variant = Variant::standard;
    cmat x0;                                // noise-free data, FBA-extended for unitary variants
    SubspaceSet svd;                        // SVD of x0
    std::optional<TensorSubspaceSet> ten;   // HOSVD of x0 (tensor variants)
    std::vector<SelectionPair> sel;
    std::vector<EigenStructure> eig;        // per mode, ordered by source
    std::vector<cmat> sensitivity;          // per mode, column k is r_k (LS) or the SLS vector
};

ExactModel build_exact(const Scenario& s, const cmat& symbols, Variant v);

FirstOrderSubspaceError svd_expansion(const cmat& noise, const SubspaceSet& exact, bool include_basis = false);

// U_r^[n] U_r^[n]^H unfold(N, r) V_r^[s] Sigma_r^[s]^-1
cmat mode_expansion(const Tensor& noise, const SubspaceSet& exact_mode, int mode);

// First-order error of the projected HOSVD basis (T_1 x ... x T_R) Us.
cmat hosvd_expansion(const Tensor& noise, const TensorSubspaceSet& exact, bool include_basis = false);

// Noise enters FBA variants through the same extension as the data.
cmat subspace_error_first_order(const cmat& noise, const ExactModel& ex, bool include_basis = false);

FirstOrderFrequencyError dmu_first_order(const cmat& noise, const ExactModel& ex);

// LS sensitivity vectors r_k = q_k kron ([(J1 Us)^+ (J2/lambda_k - J1)]^T p_k), one column per source.
cmat ls_sensitivity(const cmat& us, const SelectionPair& sel, const EigenStructure& eig);
// Structured least squares counterpart (1-D).
cmat sls_sensitivity(const cmat& us, const SelectionPair& sel, const EigenStructure& eig);

}  // namespace tesp
