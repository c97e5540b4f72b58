#pragma once

#include <cstdint>
#include <random>

#include "tesp/tensor.hpp"

namespace tesp {

struct Scenario {
    Dims sensors;        // M_1..M_R
    Index snapshots = 1; // N
    rmat mu;             // d x R spatial frequencies in radians
    double rho = 0.0;    // pairwise source correlation magnitude
    double power = 1.0;  // per-source power

    int dims() const { return static_cast<int>(sensors.size()); }
    Index sources() const { return mu.rows(); }
    Index total_sensors() const { return product(sensors); }
    void validate() const;
};

struct NoiseSpec {
    enum class Kind { white, general };
    Kind kind = Kind::white;
    double sigma2 = 1.0;
    double circularity = 0.0;  // white kind: E{n n^T} = circularity * sigma2 * I
    cmat cov;                  // E{n n^H} over vec(N), general kind only
    cmat pseudo;               // E{n n^T}

    static NoiseSpec white(double sigma2);
    static NoiseSpec improper(double sigma2, double circularity);
    static NoiseSpec general(cmat cov, cmat pseudo);
};

struct ObservationSet {
    Tensor x0_tensor, x_tensor, noise_tensor;
    cmat x0, x, noise;  // M x N views, rows ordered m_1 slowest
    cmat symbols;       // d x N
};

using Rng = std::mt19937_64;

// Independent stream for (seed, stream) pairs.
Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0);

cvec steering_vector(double mu, Index m);
cmat steering_matrix(const Scenario& s);    // M x d, Khatri-Rao of the per-mode matrices
cmat mode_steering(const Scenario& s, int mode);  // M_r x d
Tensor steering_tensor(const Scenario& s);  // M_1 x ... x M_R x d

// d x d target symbol covariance (unit diagonal, rho e^{j phi} off-diagonal),
// phases redrawn until positive definite, with an always-valid fallback.
cmat symbol_covariance(const Scenario& s, Rng& rng);
cmat generate_symbols(const Scenario& s, std::uint64_t seed);
cmat generate_symbols(const Scenario& s, Rng& rng);

// Augmented real covariance [xx^T, xy^T; yx^T, yy^T] of n = x + j y.
rmat augmented_real_covariance(const cmat& cov, const cmat& pseudo);

// Draws M x N noise matrices; the real factor of a general spec is computed once.
class NoiseSampler {
  public:
    NoiseSampler(const NoiseSpec& spec, Index rows, Index cols);
    cmat draw(Rng& rng) const;

  private:
    NoiseSpec::Kind kind_;
    Index rows_, cols_;
    double sigma2_;
    double circularity_;
    rmat factor_;
};

// dims are M_1..M_R, N
Tensor generate_noise(const NoiseSpec& spec, const Dims& dims, std::uint64_t seed);

ObservationSet synthesize(const Scenario& s, const NoiseSpec& spec, std::uint64_t seed);
ObservationSet observe(const Scenario& s, const cmat& symbols, const cmat& noise);

}  // namespace tesp
