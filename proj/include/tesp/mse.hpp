#pragma once

#include "tesp/perturbation.hpp"

namespace tesp {

struct MseReport {
    rmat mse;                  // d x R
    std::vector<cmat> r;       // per mode, one sensitivity vector per source
    cmat w;                    // vec(dUs) = W vec(N)
    rmat crb;                  // d x R, empty when not computed
    rmat efficiency;           // crb / mse
    double effective_snr = 0;  // N P_T / sigma^2

    double mse_total() const { return mse.sum(); }
    double crb_total() const { return crb.sum(); }
};

cmat build_w_mat(const SubspaceSet& exact);

// R = 2 only. The last-mode factors are taken from exact.svd so that the
// basis of Us matches the one used by the sensitivity vectors.
cmat build_w_ten(const TensorSubspaceSet& exact);

// Linear maps vec(B) -> vec(T1 kron B) (B is m2 x m2) and vec(A) -> vec(A kron T2) (A is m1 x m1).
cmat lift_left_projection(const cmat& t1, Index m2);
cmat lift_right_projection(const cmat& t2, Index m1);

// x * K_{m x n} without forming K.
cmat apply_commutation_right(const cmat& x, Index m, Index n);

MseReport analytical_mse(const ExactModel& ex, const NoiseSpec& noise);

// Quadratic-form MSE for one sensitivity vector mapped through W (z = W^T r).
double mse_from_mapped(const cvec& z, const NoiseSpec& noise, bool fba);

double effective_snr(const cmat& symbols, double sigma2);

// Single source, white noise; indexed by mode.
double closed_form_ls(Index m_r, Index m_total, double snr_eff);
double closed_form_sls(Index m, double snr_eff);
double closed_form_crb(Index m_r, Index m_total, double snr_eff);
double efficiency_ls(Index m);
double efficiency_sls(Index m);
MseReport single_source_closed_forms(const Scenario& s, Variant v, double snr_eff);

MseReport crb_deterministic(const Scenario& s, const cmat& symbols, double sigma2);

struct SlsInternals {
    double gamma = 0;  // 1^T G^-1 1
    rvec g_d;          // 1^T G^-1 (J2 - J1)
    rmat g;
    rmat g_inv;        // closed form
};

rmat sls_g_matrix(Index m);
SlsInternals sls_closed_form_internals(Index m);

rmat efficiency(const rmat& crb, const rmat& mse);

}  // namespace tesp
