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

#include <algorithm>
#include <cmath>

#include "gtest/gtest.h"
#include "loopsim/quantum.hpp"

using namespace loopsim;

namespace {

const Complex I(0.0, 1.0);

double max_abs(const Eigen::MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

std::vector<std::pair<int, int>> ring(int L) {
    std::vector<std::pair<int, int>> e;
    for (int i = 0; i < L; ++i) e.emplace_back(i, (i + 1) % L);
    return e;
}

}  // namespace

TEST(spin_operators, small_cases) {
    auto s2 = build_spin_operators(2);
    EXPECT_LT(max_abs(s2.S3 - Eigen::Vector2cd(0.5, -0.5).asDiagonal().toDenseMatrix()), 1e-15);
    auto s3 = build_spin_operators(3);
    EXPECT_LT(max_abs(s3.S3 - Eigen::Vector3cd(1, 0, -1).asDiagonal().toDenseMatrix()), 1e-15);
    EXPECT_THROW(build_spin_operators(1), std::invalid_argument);
}

TEST(spin_operators, algebra) {
    for (int n : {2, 3, 4, 5}) {
        auto s = build_spin_operators(n);
        EXPECT_LT(max_abs(s.S1 * s.S2 - s.S2 * s.S1 - I * s.S3), 1e-12) << n;
        EXPECT_LT(max_abs(s.S2 * s.S3 - s.S3 * s.S2 - I * s.S1), 1e-12) << n;
        EXPECT_LT(max_abs(s.S3 * s.S1 - s.S1 * s.S3 - I * s.S2), 1e-12) << n;
        Eigen::MatrixXcd cas = s.S1 * s.S1 + s.S2 * s.S2 + s.S3 * s.S3;
        EXPECT_LT(max_abs(cas - s.S * (s.S + 1) * Eigen::MatrixXcd::Identity(n, n)), 1e-12) << n;
        EXPECT_LT(s.S1.imag().cwiseAbs().maxCoeff(), 1e-15);
        EXPECT_LT(s.S2.real().cwiseAbs().maxCoeff(), 1e-15);
        EXPECT_LT(max_abs(s.S2 + s.S2.transpose()), 1e-15);
        EXPECT_LT(max_abs(s.S1 - s.S1.transpose()), 1e-15);
    }
}

TEST(pair_operators, swap_and_projector) {
    for (int n : {2, 3, 4, 5}) {
        Eigen::MatrixXd T = swap_operator(n), Q = pair_operator(n);
        EXPECT_LT((T * T - Eigen::MatrixXd::Identity(n * n, n * n)).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_LT((Q * Q - Q).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_LT((Q - Q.transpose()).cwiseAbs().maxCoeff(), 1e-15);
    }
}

TEST(hamiltonian, single_edge_projector_spectrum) {
    QuantumModel m(2, {{0, 1}}, 2, 0.0);
    std::vector<double> e(m.energies().data(), m.energies().data() + 4);
    std::sort(e.begin(), e.end());
    EXPECT_NEAR(e[0], -1.0, 1e-12);
    for (int i = 1; i < 4; ++i) EXPECT_NEAR(e[i], 0.0, 1e-12);
}

TEST(hamiltonian, single_edge_matches_embedded_two_site_operators) {
    for (double u : {0.0, 0.3, 1.0}) {
        QuantumModel m(2, {{0, 1}}, 3, u);
        Eigen::MatrixXd want = -(u * swap_operator(3) + (1 - u) * pair_operator(3));
        EXPECT_LT((m.hamiltonian() - want).cwiseAbs().maxCoeff(), 1e-15);
    }
}

TEST(hamiltonian, three_level_edge_spectrum) {
    // Q projects onto a symmetric vector, so on the 6-dim symmetric space
    // the energies are -1 (once) and -u (five times); on the 3-dim
    // antisymmetric space T = -1 gives +u.
    const double u = 0.3;
    QuantumModel m(2, {{0, 1}}, 3, u);
    std::vector<double> e(m.energies().data(), m.energies().data() + 9);
    std::sort(e.begin(), e.end());
    EXPECT_NEAR(e[0], -1.0, 1e-12);
    for (int i = 1; i < 6; ++i) EXPECT_NEAR(e[i], -u, 1e-12);
    for (int i = 6; i < 9; ++i) EXPECT_NEAR(e[i], u, 1e-12);
}

TEST(hamiltonian, hermitian_and_capped) {
    QuantumModel m(4, ring(4), 3, 0.25);
    EXPECT_LT((m.hamiltonian() - m.hamiltonian().transpose()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_THROW(QuantumModel(13, ring(13), 2, 0.25), std::length_error);
    EXPECT_THROW(QuantumModel(2, {{0, 0}}, 2, 0.25), std::invalid_argument);
}

TEST(correlation, high_temperature_variance) {
    for (int n : {2, 3, 4}) {
        QuantumModel m(3, ring(3), n, 0.25);
        double c = m.truncated_correlation(Component::Three, 1, 0.0, 1, 0.0, 1e-9);
        EXPECT_NEAR(c, (n * n - 1) / 12.0, 1e-7);
    }
}

TEST(correlation, s1_equals_s3_and_nonnegative) {
    for (int n : {2, 3}) {
        for (auto conv : {PairConvention::Projector, PairConvention::LoopMatched}) {
            for (double u : {0.0, 0.25, 0.5}) {
                QuantumModel m(4, ring(4), n, u, conv);
                for (double beta : {0.3, 1.0, 2.5}) {
                    for (int y = 0; y < 4; ++y) {
                        for (double t : {0.0, 0.2 * beta, 0.5 * beta, 0.9 * beta}) {
                            double s1 = m.truncated_correlation(Component::One, 0, 0.0, y, t, beta);
                            double s3 = m.truncated_correlation(Component::Three, 0, 0.0, y, t, beta);
                            EXPECT_NEAR(s1, s3, 1e-10);
                            EXPECT_GE(s1, -1e-12);
                            double s2 = m.truncated_correlation(Component::Two, 0, 0.0, y, t, beta);
                            EXPECT_LE(std::abs(s2), s1 + 1e-10);
                        }
                    }
                    for (auto c : {Component::One, Component::Two, Component::Three}) {
                        EXPECT_NEAR(m.expectation(c, 2, beta), 0.0, 1e-12);
                    }
                }
            }
        }
    }
}

TEST(correlation, translation_invariance) {
    QuantumModel m(4, ring(4), 2, 0.25, PairConvention::LoopMatched);
    for (int x = 0; x < 4; ++x) {
        for (int dx = 0; dx < 4; ++dx) {
            double a = m.truncated_correlation(Component::Three, 0, 0.0, dx, 0.3, 1.0);
            double b = m.truncated_correlation(Component::Three, x, 0.0, (x + dx) % 4, 0.3, 1.0);
            EXPECT_NEAR(a, b, 1e-12);
        }
    }
}

TEST(correlation, only_time_difference_matters) {
    QuantumModel m(4, ring(4), 2, 0.25);
    double a = m.truncated_correlation(Component::One, 0, 0.0, 1, 0.3, 1.0);
    double b = m.truncated_correlation(Component::One, 0, 0.4, 1, 0.7, 1.0);
    double c = m.truncated_correlation(Component::One, 1, 0.0, 0, 0.7, 1.0);  // mirror in time
    EXPECT_NEAR(a, b, 1e-12);
    EXPECT_NEAR(a, c, 1e-12);
}

TEST(correlation, isolated_site_is_static) {
    QuantumModel m(1, {}, 3, 0.25);
    double c0 = m.truncated_correlation(Component::Three, 0, 0.0, 0, 0.0, 2.0);
    for (double t : {0.1, 0.7, 1.9}) {
        EXPECT_NEAR(m.truncated_correlation(Component::Three, 0, 0.0, 0, t, 2.0), c0, 1e-13);
    }
    EXPECT_NEAR(c0, 8.0 / 12.0, 1e-13);
}

TEST(correlation, coefficients) {
    EXPECT_DOUBLE_EQ(spin_coefficient(2), 0.25);
    EXPECT_DOUBLE_EQ(spin_coefficient(3), 2.0 / 3.0);
}
