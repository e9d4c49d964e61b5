// Copyright 2026 The loopsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once
#ifndef LOOPSIM_QUANTUM_HPP
#define LOOPSIM_QUANTUM_HPP

#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "loopsim/geometry.hpp"

namespace loopsim {

using Complex = std::complex<double>;

struct SpinOperators {
    int n = 2;
    double S = 0.5;
    Eigen::MatrixXcd S1, S2, S3;
};

/// Spin-S matrices with 2S + 1 = n in the S3 eigenbasis, ordered
/// m = S, S-1, ..., -S.
inline SpinOperators build_spin_operators(int n) {
    if (n < 2) {
        throw std::invalid_argument("spin operators need n >= 2");
    }
    SpinOperators ops;
    ops.n = n;
    ops.S = (n - 1) / 2.0;
    Eigen::MatrixXd plus = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd s3 = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        double m = ops.S - i;
        s3(i, i) = m;
        if (i > 0) {
            plus(i - 1, i) = std::sqrt(ops.S * (ops.S + 1) - m * (m + 1));  // raises m to m+1
        }
    }
    Eigen::MatrixXd minus = plus.transpose();
    ops.S1 = (0.5 * (plus + minus)).cast<Complex>();
    ops.S2 = (plus - minus).cast<Complex>() / Complex(0.0, 2.0);
    ops.S3 = s3.cast<Complex>();
    return ops;
}

/// Two-site swap T|a,b> = |b,a> on C^n (x) C^n, index a*n + b.
inline Eigen::MatrixXd swap_operator(int n) {
    const int D = n * n;
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(D, D);
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
            T(b * n + a, a * n + b) = 1.0;
        }
    }
    return T;
}

/// Q = (1/n) sum_{a,b} |b,b><a,a|, a rank-one projector.
inline Eigen::MatrixXd pair_operator(int n) {
    const int D = n * n;
    Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(D, D);
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
            Q(b * n + b, a * n + a) = 1.0 / n;
        }
    }
    return Q;
}

/// Normalisation of the pair term in the Hamiltonian.
enum class PairConvention {
    /// -(1-u) Q with Q the projector above.
    Projector,
    /// -(1-u) n Q = -(1-u) sum_{a,b} |b,b><a,a|; the normalisation under
    /// which double bars of intensity 1-u and the weight n^loops describe
    /// the same Gibbs state.
    LoopMatched,
};

inline const char* convention_name(PairConvention c) { return c == PairConvention::Projector ? "projector" : "loop-matched"; }

/// Spin component for correlation queries.
enum class Component { One = 1, Two = 2, Three = 3 };

/// H = -sum_{xy} [u T_xy + (1-u) c Q_xy] on (C^n)^{sites}, diagonalised once.
/// Basis index: site 0 is the most significant base-n digit.
class QuantumModel {
  public:
    QuantumModel(int sites, std::vector<std::pair<int, int>> edges, int n, double u,
                 PairConvention conv = PairConvention::Projector, std::size_t cap = 4096)
        : sites_(sites), edges_(std::move(edges)), n_(n), u_(u), conv_(conv), ops_(build_spin_operators(n)) {
        if (sites < 1) {
            throw std::invalid_argument("need at least one site");
        }
        if (!(u >= 0.0 && u <= 1.0)) {
            throw std::invalid_argument("u must lie in [0, 1]");
        }
        double dim = std::pow(static_cast<double>(n), sites);
        if (dim > static_cast<double>(cap)) {
            throw std::length_error("Hilbert space dimension " + std::to_string(static_cast<long long>(dim)) +
                                    " exceeds the cap " + std::to_string(cap));
        }
        dim_ = static_cast<int>(std::lround(dim));
        for (auto [x, y] : edges_) {
            if (x < 0 || y < 0 || x >= sites || y >= sites || x == y) {
                throw std::invalid_argument("bad edge");
            }
        }
        pow_.assign(static_cast<std::size_t>(sites), 1);
        for (int s = sites - 2; s >= 0; --s) {
            pow_[static_cast<std::size_t>(s)] = pow_[static_cast<std::size_t>(s) + 1] * n;
        }
        build();
    }

    int sites() const { return sites_; }
    int n() const { return n_; }
    double u() const { return u_; }
    int dimension() const { return dim_; }
    PairConvention convention() const { return conv_; }
    const Eigen::MatrixXd& hamiltonian() const { return H_; }
    const Eigen::VectorXd& energies() const { return E_; }
    const SpinOperators& spin() const { return ops_; }

    int digit(int state, int site) const { return (state / pow_[static_cast<std::size_t>(site)]) % n_; }

    /// A local n x n operator placed on `site`, as a dense matrix.
    Eigen::MatrixXcd site_operator(const Eigen::MatrixXcd& local, int site) const {
        Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim_, dim_);
        const int p = pow_[static_cast<std::size_t>(site)];
        for (int s = 0; s < dim_; ++s) {
            int a = digit(s, site);
            int rest = s - a * p;
            for (int b = 0; b < n_; ++b) {
                if (local(b, a) != Complex(0.0, 0.0)) {
                    out(rest + b * p, s) += local(b, a);
                }
            }
        }
        return out;
    }

    /// Gibbs expectation of a local operator.
    double expectation(Component c, int site, double beta) const {
        const Eigen::MatrixXd& A = eigen_site(c, site);
        Eigen::VectorXd w = weights(beta);
        return (w.array() * A.diagonal().array()).sum() / w.sum();
    }

    /// <B(t) A(s)> with A(t) = e^{tH} A e^{-tH}, ordered so the later time
    /// stands to the left: Tr[e^{-(beta - tau) H} B e^{-tau H} A] / Z with
    /// tau = (t - s) mod beta. For Component::Two the real factor M of
    /// S2 = i M is used.
    double raw_correlation(Component ca, int x, double s, Component cb, int y, double t, double beta) const {
        if (!(beta > 0.0)) {
            throw std::invalid_argument("beta must be positive");
        }
        double tau = std::fmod(t - s, beta);
        if (tau < 0) {
            tau += beta;
        }
        const Eigen::MatrixXd& A = eigen_site(ca, x);
        const Eigen::MatrixXd& B = eigen_site(cb, y);
        const double e0 = E_.minCoeff();
        Eigen::ArrayXd lo = (-(beta - tau) * (E_.array() - e0)).exp();
        Eigen::ArrayXd hi = (-tau * (E_.array() - e0)).exp();
        double z = (-beta * (E_.array() - e0)).exp().sum();
        // sum_ij lo_i B_ij hi_j A_ji
        double acc = (lo.matrix().asDiagonal() * B.cwiseProduct(A.transpose()) * hi.matrix()).sum();
        return acc / z;
    }

    /// Truncated correlation <S^(i)_x(s); S^(i)_y(t)>.
    double truncated_correlation(Component c, int x, double s, int y, double t, double beta) const {
        double g = raw_correlation(c, x, s, c, y, t, beta);
        double mx = expectation(c, x, beta);
        double my = expectation(c, y, beta);
        double trunc = g - mx * my;
        return c == Component::Two ? -trunc : trunc;  // (iM)(iM) = -MM
    }

  private:
    void build() {
        H_ = Eigen::MatrixXd::Zero(dim_, dim_);
        const double qscale = (1.0 - u_) * (conv_ == PairConvention::LoopMatched ? 1.0 : 1.0 / n_);
        for (auto [x, y] : edges_) {
            const int px = pow_[static_cast<std::size_t>(x)];
            const int py = pow_[static_cast<std::size_t>(y)];
            for (int s = 0; s < dim_; ++s) {
                int a = digit(s, x);
                int b = digit(s, y);
                int swapped = s + (b - a) * px + (a - b) * py;
                H_(swapped, s) -= u_;
                if (a == b) {
                    int base = s - a * px - a * py;
                    for (int c = 0; c < n_; ++c) {
                        H_(base + c * px + c * py, s) -= qscale;
                    }
                }
            }
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H_);
        if (es.info() != Eigen::Success) {
            throw std::runtime_error("eigendecomposition failed");
        }
        E_ = es.eigenvalues();
        V_ = es.eigenvectors();
    }

    Eigen::VectorXd weights(double beta) const {
        const double e0 = E_.minCoeff();
        return (-beta * (E_.array() - e0)).exp().matrix();
    }

    /// Real matrix of the (real part of the) site operator in the eigenbasis.
    const Eigen::MatrixXd& eigen_site(Component c, int site) const {
        if (site < 0 || site >= sites_) {
            throw std::out_of_range("site index");
        }
        auto key = std::make_pair(static_cast<int>(c), site);
        auto it = cache_.find(key);
        if (it != cache_.end()) {
            return it->second;
        }
        Eigen::MatrixXcd local;
        switch (c) {
            case Component::One:
                local = ops_.S1;
                break;
            case Component::Two:
                local = ops_.S2 / Complex(0.0, 1.0);  // M with S2 = i M
                break;
            case Component::Three:
                local = ops_.S3;
                break;
        }
        Eigen::MatrixXd real = site_operator(local, site).real();
        Eigen::MatrixXd rotated = V_.transpose() * real * V_;
        return cache_.emplace(key, std::move(rotated)).first->second;
    }

    int sites_;
    std::vector<std::pair<int, int>> edges_;
    int n_;
    double u_;
    PairConvention conv_;
    SpinOperators ops_;
    int dim_ = 1;
    std::vector<int> pow_;
    Eigen::MatrixXd H_;
    Eigen::VectorXd E_;
    Eigen::MatrixXd V_;
    mutable std::map<std::pair<int, int>, Eigen::MatrixXd> cache_;
};

/// Model on the sites and edges of a torus; vertex v is site v.
inline QuantumModel build_hamiltonian(const TorusGeometry& g, int n, double u,
                                      PairConvention conv = PairConvention::Projector, std::size_t cap = 4096) {
    std::vector<std::pair<int, int>> edges;
    for (const Edge& e : g.edges()) {
        edges.emplace_back(static_cast<int>(e.lo), static_cast<int>(e.hi));
    }
    return QuantumModel(static_cast<int>(g.num_vertices()), std::move(edges), n, u, conv, cap);
}

/// (n^2 - 1) / 12.
inline double spin_coefficient(int n) { return (static_cast<double>(n) * n - 1.0) / 12.0; }

}  // namespace loopsim

#endif  // LOOPSIM_QUANTUM_HPP
