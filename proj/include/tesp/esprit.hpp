#pragma once

#include <string>

#include "tesp/signal.hpp"
#include "tesp/subspace.hpp"

namespace tesp {

enum class Variant { standard, unitary, standard_tensor, unitary_tensor, sls, unitary_sls };

std::string variant_name(Variant v);
Variant parse_variant(const std::string& name);
bool uses_fba(Variant v);
bool uses_tensor(Variant v);
bool uses_sls(Variant v);

struct SelectionPair {
    cmat j1, j2;          // (M_r - 1) x M_r, maximum overlap
    cmat j1_eff, j2_eff;  // I x J x I embedded in the full array
};

SelectionPair selection_matrices(const Dims& sensors, int mode);
SelectionPair selection_matrices(const Scenario& s, int mode);

struct EigenStructure {
    cmat psi;
    cvec lambda;
    cmat q;  // right eigenvectors (columns)
    cmat p;  // left eigenvectors (rows), p == q^-1
    bool ill_conditioned = false;
};

struct EstimateReport {
    rmat mu_hat;  // d x R, rows paired across modes
    std::vector<EigenStructure> modes;
    Variant variant = Variant::standard;
    bool pairing_unreliable = false;
};

EigenStructure eigen_structure(const cmat& psi);
EigenStructure ls_solve_invariance(const cmat& us, const SelectionPair& sel);
EstimateReport pair_modes(const std::vector<EigenStructure>& structures);

// One linearised structured least squares step, no regularisation.
EigenStructure sls_refine(const cmat& us_hat, const SelectionPair& sel, const EigenStructure& psi_ls);

// Signal subspace used by a variant (before the invariance solve).
cmat variant_subspace(const ObservationSet& obs, const Scenario& s, Variant v);

EstimateReport estimate_from_subspace(const cmat& us, const Scenario& s, Variant v);
EstimateReport estimate(const ObservationSet& obs, const Scenario& s, Variant v);

// Eigenstructure of the noise-free problem, ordered by source: q = (A^+ Us)^-1.
std::vector<EigenStructure> exact_structures(const cmat& us, const Scenario& s);

}  // namespace tesp
