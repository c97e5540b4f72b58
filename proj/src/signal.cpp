#include "tesp/signal.hpp"

#include <cmath>
#include <numbers>

#include "tesp/errors.hpp"

namespace tesp {

void Scenario::validate() const {
    if (sensors.empty()) throw ConfigError("scenario: at least one spatial dimension required");
    for (Index m : sensors)
        if (m < 2) throw ConfigError("scenario: every dimension needs at least 2 sensors");
    if (snapshots < 1) throw ConfigError("scenario: snapshots must be positive");
    if (mu.rows() < 1) throw ConfigError("scenario: at least one source required");
    if (mu.cols() != dims()) throw ConfigError("scenario: one frequency per source and dimension required");
    if ((mu.array().abs() > std::numbers::pi).any()) throw ConfigError("scenario: |mu| must not exceed pi");
    if (rho < 0.0 || rho >= 1.0) throw ConfigError("scenario: rho must lie in [0, 1)");
    if (power <= 0.0) throw ConfigError("scenario: power must be positive");
}

NoiseSpec NoiseSpec::white(double sigma2) {
    NoiseSpec n;
    n.kind = Kind::white;
    n.sigma2 = sigma2;
    return n;
}

NoiseSpec NoiseSpec::improper(double sigma2, double circularity) {
    if (std::abs(circularity) > 1.0) throw ConfigError("noise: circularity must lie in [-1, 1]");
    NoiseSpec n = white(sigma2);
    n.circularity = circularity;
    return n;
}

NoiseSpec NoiseSpec::general(cmat cov, cmat pseudo) {
    if (cov.rows() != cov.cols() || pseudo.rows() != cov.rows() || pseudo.cols() != cov.cols())
        throw DimensionError("noise: covariance and pseudo-covariance must be square and equal size");
    NoiseSpec n;
    n.kind = Kind::general;
    n.cov = std::move(cov);
    n.pseudo = std::move(pseudo);
    return n;
}

Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                      0x9e3779b9u};
    return Rng(seq);
}

cvec steering_vector(double mu, Index m) {
    cvec a(m);
    for (Index p = 0; p < m; ++p) a[p] = std::polar(1.0, static_cast<double>(p) * mu);
    return a;
}

cmat mode_steering(const Scenario& s, int mode) {
    const Index d = s.sources();
    cmat a(s.sensors[mode - 1], d);
    for (Index k = 0; k < d; ++k) a.col(k) = steering_vector(s.mu(k, mode - 1), s.sensors[mode - 1]);
    return a;
}

cmat steering_matrix(const Scenario& s) {
    cmat a = mode_steering(s, 1);
    for (int r = 2; r <= s.dims(); ++r) a = khatri_rao(a, mode_steering(s, r));
    return a;
}

Tensor steering_tensor(const Scenario& s) {
    Dims dims = s.sensors;
    dims.push_back(s.sources());
    Tensor t(dims);
    std::vector<cmat> modes;
    for (int r = 1; r <= s.dims(); ++r) modes.push_back(mode_steering(s, r));
    const int big_r = s.dims();
    Dims idx(dims.size(), 0);
    for (Index lin = 0; lin < t.size(); ++lin) {
        cplx v = 1.0;
        for (int r = 0; r < big_r; ++r) v *= modes[r](idx[r], idx[big_r]);
        t.at(idx) = v;
        for (std::size_t k = 0; k < idx.size(); ++k) {
            if (++idx[k] < dims[k]) break;
            idx[k] = 0;
        }
    }
    return t;
}

cmat symbol_covariance(const Scenario& s, Rng& rng) {
    const Index d = s.sources();
    std::uniform_real_distribution<double> phase(-std::numbers::pi, std::numbers::pi);
    constexpr int kMaxDraws = 10000;
    cmat c = cmat::Identity(d, d);
    for (int attempt = 0; attempt < kMaxDraws; ++attempt) {
        for (Index i = 0; i < d; ++i)
            for (Index j = i + 1; j < d; ++j) {
                c(i, j) = std::polar(s.rho, phase(rng));
                c(j, i) = std::conj(c(i, j));
            }
        Eigen::SelfAdjointEigenSolver<cmat> eig(c, Eigen::EigenvaluesOnly);
        if (eig.eigenvalues().minCoeff() > 1e-12) return c;
    }
    // Independent phases almost never give a valid covariance for large d and
    // rho near one. Phases of the form theta_i - theta_j are still uniform per
    // pair and always valid.
    rvec theta(d);
    for (Index i = 0; i < d; ++i) theta[i] = phase(rng);
    for (Index i = 0; i < d; ++i)
        for (Index j = i + 1; j < d; ++j) {
            c(i, j) = std::polar(s.rho, theta[i] - theta[j]);
            c(j, i) = std::conj(c(i, j));
        }
    return c;
}

cmat generate_symbols(const Scenario& s, Rng& rng) {
    const Index d = s.sources();
    cmat chol_factor = cmat::Identity(d, d);
    if (d > 1 && s.rho > 0.0) {
        Eigen::LLT<cmat> llt(symbol_covariance(s, rng));
        if (llt.info() != Eigen::Success) throw ConfigError("symbols: covariance not positive definite");
        chol_factor = llt.matrixL();
    }
    std::normal_distribution<double> g(0.0, std::sqrt(0.5));
    cmat z(d, s.snapshots);
    for (Index j = 0; j < z.cols(); ++j)
        for (Index i = 0; i < d; ++i) z(i, j) = cplx(g(rng), g(rng));
    return std::sqrt(s.power) * chol_factor * z;
}

cmat generate_symbols(const Scenario& s, std::uint64_t seed) {
    Rng rng = make_rng(seed);
    return generate_symbols(s, rng);
}

rmat augmented_real_covariance(const cmat& cov, const cmat& pseudo) {
    const Index n = cov.rows();
    rmat g(2 * n, 2 * n);
    g.topLeftCorner(n, n) = 0.5 * (cov + pseudo).real();
    g.bottomRightCorner(n, n) = 0.5 * (cov - pseudo).real();
    g.topRightCorner(n, n) = -0.5 * (cov - pseudo).imag();
    g.bottomLeftCorner(n, n) = 0.5 * (cov + pseudo).imag();
    return g;
}

NoiseSampler::NoiseSampler(const NoiseSpec& spec, Index rows, Index cols)
    : kind_(spec.kind), rows_(rows), cols_(cols), sigma2_(spec.sigma2), circularity_(spec.circularity) {
    if (kind_ == NoiseSpec::Kind::white) {
        if (sigma2_ < 0.0) throw ConfigError("noise: variance must be nonnegative");
        return;
    }
    if (spec.cov.rows() != rows * cols) throw DimensionError("noise: covariance size must equal M*N");
    rmat g = augmented_real_covariance(spec.cov, spec.pseudo);
    if ((g - g.transpose()).norm() > 1e-10 * std::max(1.0, g.norm()))
        throw ConfigError("noise: covariance must be Hermitian and pseudo-covariance symmetric");
    Eigen::SelfAdjointEigenSolver<rmat> eig(0.5 * (g + g.transpose()));
    const rvec& ev = eig.eigenvalues();
    if (ev.minCoeff() < -1e-10 * std::max(1.0, ev.cwiseAbs().maxCoeff()))
        throw ConfigError("noise: augmented real covariance is not positive semidefinite");
    factor_ = eig.eigenvectors() * ev.cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

cmat NoiseSampler::draw(Rng& rng) const {
    if (kind_ == NoiseSpec::Kind::white) {
        std::normal_distribution<double> gr(0.0, std::sqrt(0.5 * sigma2_ * (1.0 + circularity_)));
        std::normal_distribution<double> gi(0.0, std::sqrt(0.5 * sigma2_ * (1.0 - circularity_)));
        cmat n(rows_, cols_);
        for (Index j = 0; j < cols_; ++j)
            for (Index i = 0; i < rows_; ++i) {
                const double re = gr(rng);
                n(i, j) = cplx(re, gi(rng));
            }
        return n;
    }
    std::normal_distribution<double> g;
    rvec z(factor_.cols());
    for (Index i = 0; i < z.size(); ++i) z[i] = g(rng);
    rvec xy = factor_ * z;
    const Index mn = rows_ * cols_;
    cvec v(mn);
    for (Index i = 0; i < mn; ++i) v[i] = cplx(xy[i], xy[mn + i]);
    return unvec(v, rows_, cols_);
}

Tensor generate_noise(const NoiseSpec& spec, const Dims& dims, std::uint64_t seed) {
    if (dims.size() < 2) throw DimensionError("noise: need spatial extents and a snapshot count");
    Dims spatial(dims.begin(), dims.end() - 1);
    NoiseSampler sampler(spec, product(spatial), dims.back());
    Rng rng = make_rng(seed, 1);
    return tensor_from_matrix(sampler.draw(rng), spatial);
}

ObservationSet observe(const Scenario& s, const cmat& symbols, const cmat& noise) {
    if (symbols.rows() != s.sources() || symbols.cols() != s.snapshots)
        throw DimensionError("observe: symbols must be d x N");
    if (noise.rows() != s.total_sensors() || noise.cols() != s.snapshots)
        throw DimensionError("observe: noise must be M x N");
    ObservationSet o;
    o.symbols = symbols;
    o.x0_tensor = mode_product(steering_tensor(s), symbols.transpose(), s.dims() + 1);
    o.x0 = matrix_from_tensor(o.x0_tensor);
    o.noise = noise;
    o.noise_tensor = tensor_from_matrix(noise, s.sensors);
    o.x = o.x0 + o.noise;
    o.x_tensor = Tensor(o.x0_tensor.dims(), o.x0_tensor.data() + o.noise_tensor.data());
    return o;
}

ObservationSet synthesize(const Scenario& s, const NoiseSpec& spec, std::uint64_t seed) {
    s.validate();
    Rng rng = make_rng(seed, 0);
    cmat symbols = generate_symbols(s, rng);
    NoiseSampler sampler(spec, s.total_sensors(), s.snapshots);
    Rng nrng = make_rng(seed, 1);
    return observe(s, symbols, sampler.draw(nrng));
}

}  // namespace tesp
