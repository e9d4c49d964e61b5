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
#ifndef LOOPSIM_ESTIMATORS_HPP
#define LOOPSIM_ESTIMATORS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "loopsim/events.hpp"
#include "loopsim/loops.hpp"
#include "loopsim/quantum.hpp"
#include "loopsim/sampler.hpp"
#include "loopsim/statistics.hpp"

namespace loopsim {

/// Space-time displacement (x, t).
struct Displacement {
    std::vector<int> x;
    double t = 0.0;
};

struct ConnectionEstimate {
    Displacement displacement;
    double probability = 0.0;
    double se = 0.0;
    double ess = 0.0;
    std::uint64_t samples = 0;
};

/// Periodic L1 norm of a spatial displacement on the torus.
inline int torus_norm(const TorusGeometry& g, std::span<const int> x) {
    int s = 0;
    for (int r = 0; r < g.dim(); ++r) {
        int L = g.side(r);
        int a = TorusGeometry::wrap(x[static_cast<std::size_t>(r)], L);
        s += std::min(a, L - a);
    }
    return s;
}

/// Distance on the time circle.
inline double circle_distance(double t, double beta) {
    double a = std::fmod(std::abs(t), beta);
    return std::min(a, beta - a);
}

/// Connection probabilities (0, 0) <-> (x, t), averaged per sample over all
/// spatial origins and `time_origins` evenly spaced starting times.
class ConnectionAccumulator {
  public:
    ConnectionAccumulator(GeometryPtr geom, std::vector<Displacement> disp, int time_origins = 1)
        : geom_(std::move(geom)), disp_(std::move(disp)), time_origins_(std::max(1, time_origins)), stats_(disp_.size()) {
        for (const auto& d : disp_) {
            if (static_cast<int>(d.x.size()) != geom_->dim()) {
                throw std::invalid_argument("displacement dimension does not match the torus");
            }
        }
        const TorusGeometry& g = *geom_;
        targets_.resize(disp_.size());
        for (std::size_t i = 0; i < disp_.size(); ++i) {
            targets_[i].resize(g.num_vertices());
            for (VertexId v = 0; v < g.num_vertices(); ++v) {
                std::vector<int> c = g.coords(v);
                for (int r = 0; r < g.dim(); ++r) {
                    c[static_cast<std::size_t>(r)] += disp_[i].x[static_cast<std::size_t>(r)];
                }
                targets_[i][v] = g.vertex(c);
            }
        }
    }

    void add(const LinkConfiguration& cfg) { add(decompose_periodic(cfg)); }

    void add(const LoopDecomposition& dec) {
        const TorusGeometry& g = *geom_;
        const double beta = g.beta();
        const double norm = 1.0 / (static_cast<double>(g.num_vertices()) * time_origins_);
        for (std::size_t i = 0; i < disp_.size(); ++i) {
            std::size_t hits = 0;
            for (int k = 0; k < time_origins_; ++k) {
                double s = beta * k / time_origins_;
                double t = std::fmod(s + disp_[i].t, beta);
                if (t < 0) {
                    t += beta;
                }
                for (VertexId v = 0; v < g.num_vertices(); ++v) {
                    hits += dec.loop_of(v, s) == dec.loop_of(targets_[i][v], t) ? 1 : 0;
                }
            }
            stats_[i].add(static_cast<double>(hits) * norm);
        }
    }

    std::vector<ConnectionEstimate> estimates() const {
        std::vector<ConnectionEstimate> out;
        for (std::size_t i = 0; i < disp_.size(); ++i) {
            out.push_back(ConnectionEstimate{disp_[i], stats_[i].mean(), stats_[i].se(), stats_[i].ess(), stats_[i].count()});
        }
        return out;
    }

    const std::vector<Displacement>& displacements() const { return disp_; }
    const BatchMeans& stats(std::size_t i) const { return stats_[i]; }

  private:
    GeometryPtr geom_;
    std::vector<Displacement> disp_;
    int time_origins_;
    std::vector<BatchMeans> stats_;
    std::vector<std::vector<VertexId>> targets_;
};

/// Pools per-replica estimates of the same displacements.
inline std::vector<ConnectionEstimate> combine_estimates(const std::vector<std::vector<ConnectionEstimate>>& parts) {
    if (parts.empty()) {
        return {};
    }
    std::vector<ConnectionEstimate> out = parts.front();
    for (std::size_t i = 0; i < out.size(); ++i) {
        std::vector<Estimate> e;
        for (const auto& p : parts) {
            e.push_back(Estimate{p[i].probability, p[i].se, p[i].ess, p[i].samples});
        }
        Estimate c = combine(e);
        out[i].probability = c.mean;
        out[i].se = c.se;
        out[i].ess = c.ess;
        out[i].samples = c.samples;
    }
    return out;
}

// ---- decay fit -------------------------------------------------------------

enum class FitMode { Joint, Spatial, Temporal };

struct DecayFit {
    double rate = 0.0;
    double rate_se = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double intercept = 0.0;
    std::vector<double> distances;
    std::vector<double> residuals;  // in units of the point's log-error
    std::vector<std::size_t> used;  // indices into the input
    double window_min = 0.0;
    double window_max = 0.0;
};

inline double fit_distance(const TorusGeometry& g, const Displacement& d, FitMode mode) {
    double xs = torus_norm(g, d.x);
    double ts = circle_distance(d.t, g.beta());
    switch (mode) {
        case FitMode::Spatial:
            return xs;
        case FitMode::Temporal:
            return ts;
        case FitMode::Joint:
            break;
    }
    return xs + ts;
}

/// Weighted least squares of log p against distance; points need p > 10 SE
/// and a nonzero SE.
/// The rate is minus the slope, with a normal 95% interval.
inline DecayFit fit_decay(const TorusGeometry& g, const std::vector<ConnectionEstimate>& est,
                          FitMode mode = FitMode::Joint) {
    DecayFit f;
    std::vector<double> xs, ys, ws;
    for (std::size_t i = 0; i < est.size(); ++i) {
        const auto& e = est[i];
        // A zero SE means the value is fixed (the reflexive displacement):
        // it carries no statistical information and would get infinite weight.
        if (!(e.probability > 0.0) || !(e.se > 0.0) || !(e.probability > 10.0 * e.se)) {
            continue;
        }
        double se = e.se;
        double x = fit_distance(g, e.displacement, mode);
        f.used.push_back(i);
        xs.push_back(x);
        ys.push_back(std::log(e.probability));
        ws.push_back((e.probability * e.probability) / (se * se));  // 1 / var(log p)
    }
    if (xs.size() < 3) {
        throw std::runtime_error("insufficient signal: " + std::to_string(xs.size()) +
                                 " displacements clear the 10 SE floor, need 3");
    }
    double sw = 0, sx = 0, sy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sw += ws[i];
        sx += ws[i] * xs[i];
        sy += ws[i] * ys[i];
    }
    double mx = sx / sw, my = sy / sw;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += ws[i] * (xs[i] - mx) * (xs[i] - mx);
        sxy += ws[i] * (xs[i] - mx) * (ys[i] - my);
    }
    if (!(sxx > 0)) {
        throw std::runtime_error("insufficient signal: all usable displacements share one distance");
    }
    double slope = sxy / sxx;
    f.rate = -slope;
    f.intercept = my - slope * mx;
    f.rate_se = std::sqrt(1.0 / sxx);
    f.ci_low = f.rate - 1.96 * f.rate_se;
    f.ci_high = f.rate + 1.96 * f.rate_se;
    f.distances = xs;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        f.residuals.push_back((ys[i] - (f.intercept + slope * xs[i])) * std::sqrt(ws[i]));
    }
    f.window_min = *std::min_element(xs.begin(), xs.end());
    f.window_max = *std::max_element(xs.begin(), xs.end());
    return f;
}

/// Pairs (i, j) along the same ray where the farther point exceeds the
/// nearer one by more than `z` combined standard errors. Displacements lie
/// on a common ray when their directions are positive multiples.
inline std::vector<std::pair<std::size_t, std::size_t>> monotonicity_violations(
    const TorusGeometry& g, const std::vector<ConnectionEstimate>& est, double z = 3.0) {
    std::vector<std::pair<std::size_t, std::size_t>> bad;
    auto same_ray = [&](const Displacement& a, const Displacement& b, double& ratio) {
        // b = ratio * a in the (x, t) components, ratio > 1.
        std::vector<double> va, vb;
        for (int v : a.x) va.push_back(v);
        for (int v : b.x) vb.push_back(v);
        va.push_back(a.t);
        vb.push_back(b.t);
        ratio = -1;
        for (std::size_t k = 0; k < va.size(); ++k) {
            if ((va[k] == 0) != (vb[k] == 0)) {
                return false;
            }
            if (va[k] != 0) {
                double r = vb[k] / va[k];
                if (ratio < 0) {
                    ratio = r;
                } else if (std::abs(r - ratio) > 1e-9 * std::max(1.0, ratio)) {
                    return false;
                }
            }
        }
        return ratio > 0;
    };
    for (std::size_t i = 0; i < est.size(); ++i) {
        for (std::size_t j = 0; j < est.size(); ++j) {
            double di = fit_distance(g, est[i].displacement, FitMode::Joint);
            double dj = fit_distance(g, est[j].displacement, FitMode::Joint);
            double ratio;
            if (i == j || !(dj > di) || !same_ray(est[i].displacement, est[j].displacement, ratio) || ratio <= 1.0) {
                continue;
            }
            double tol = z * std::sqrt(est[i].se * est[i].se + est[j].se * est[j].se);
            if (est[j].probability > est[i].probability + tol) {
                bad.emplace_back(i, j);
            }
        }
    }
    return bad;
}

/// Decay fit along one ray from the origin.
struct RayFit {
    std::vector<double> unit_x;       // direction scaled to joint distance 1
    double unit_t = 0.0;
    std::vector<std::size_t> members; // indices into the input
    bool fitted = false;
    DecayFit fit;
    std::string note;                 // why the ray was not fitted
};

/// Groups displacements by ray and fits each ray on its own; rays with fewer
/// than three usable points are reported unfitted. The reflexive
/// displacement belongs to no ray. The
/// smallest fitted rate is the largest single constant consistent with
/// every direction.
inline std::vector<RayFit> fit_decay_rays(const TorusGeometry& g, const std::vector<ConnectionEstimate>& est) {
    std::vector<RayFit> rays;
    auto unit_of = [&](const Displacement& d) {
        double len = fit_distance(g, d, FitMode::Joint);
        std::vector<double> ux;
        for (int v : d.x) {
            ux.push_back(v / len);
        }
        return std::make_pair(ux, d.t / len);
    };
    std::vector<std::pair<std::vector<double>, double>> keys;
    for (std::size_t i = 0; i < est.size(); ++i) {
        const Displacement& d = est[i].displacement;
        if (!(fit_distance(g, d, FitMode::Joint) > 0.0)) {
            continue;
        }
        auto key = unit_of(d);
        std::size_t r = 0;
        for (; r < keys.size(); ++r) {
            bool same = std::abs(keys[r].second - key.second) < 1e-9;
            for (std::size_t k = 0; same && k < key.first.size(); ++k) {
                same = std::abs(keys[r].first[k] - key.first[k]) < 1e-9;
            }
            if (same) {
                break;
            }
        }
        if (r == keys.size()) {
            keys.push_back(key);
            RayFit rf;
            rf.unit_x = key.first;
            rf.unit_t = key.second;
            rays.push_back(rf);
        }
        rays[r].members.push_back(i);
    }
    for (RayFit& rf : rays) {
        std::vector<ConnectionEstimate> sub;
        for (std::size_t i : rf.members) {
            sub.push_back(est[i]);
        }
        try {
            rf.fit = fit_decay(g, sub);
            for (std::size_t& u : rf.fit.used) {
                u = rf.members[u];
            }
            rf.fitted = true;
        } catch (const std::runtime_error& e) {
            rf.note = e.what();
        }
    }
    return rays;
}

/// Index of the fitted ray with the smallest rate, if any ray was fitted.
inline std::optional<std::size_t> slowest_ray(const std::vector<RayFit>& rays) {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < rays.size(); ++i) {
        if (rays[i].fitted && (!best || rays[i].fit.rate < rays[*best].fit.rate)) {
            best = i;
        }
    }
    return best;
}

// ---- quantum comparison ----------------------------------------------------

struct CorrelationReport {
    int n = 2;
    double coefficient = 0.0;  // (n^2 - 1) / 12
    double exact_s1 = 0.0;
    double exact_s2 = 0.0;
    double exact_s3 = 0.0;
    double probability = 0.0;
    double se = 0.0;
    double ess = 0.0;
    double predicted = 0.0;  // coefficient * probability
    double z = 0.0;
    bool pass = false;       // |z| <= 3
    bool s2_bound = false;   // |<S2;S2>| <= coefficient * (p + 3 SE)
    bool s1_equals_s3 = false;
};

/// Compares the exact <S1_x(s); S1_y(t)> with (n^2 - 1)/12 times a loop
/// estimate of the connection probability.
inline CorrelationReport verify_lemma22(const QuantumModel& model, int x, double s, int y, double t, double beta,
                                    const ConnectionEstimate& est) {
    CorrelationReport r;
    r.n = model.n();
    r.coefficient = spin_coefficient(r.n);
    r.exact_s1 = model.truncated_correlation(Component::One, x, s, y, t, beta);
    r.exact_s2 = model.truncated_correlation(Component::Two, x, s, y, t, beta);
    r.exact_s3 = model.truncated_correlation(Component::Three, x, s, y, t, beta);
    r.probability = est.probability;
    r.se = est.se;
    r.ess = est.ess;
    r.predicted = r.coefficient * est.probability;
    double sigma = r.coefficient * est.se;
    r.z = sigma > 0 ? (r.exact_s1 - r.predicted) / sigma : (r.exact_s1 == r.predicted ? 0.0 : INFINITY);
    r.pass = std::abs(r.z) <= 3.0;
    r.s2_bound = std::abs(r.exact_s2) <= r.coefficient * (est.probability + 3.0 * est.se);
    r.s1_equals_s3 = std::abs(r.exact_s1 - r.exact_s3) <= 1e-10;
    return r;
}

// ---- partition function bound ------------------------------------------------

/// Exponent of the lower bound Z_n >= exp[(n (1-u) / 2 - d) beta K'].
inline double zbound_exponent(int d, double u, int n, double beta, double K) {
    return (n * (1.0 - u) / 2.0 - d) * beta * K;
}


/// Zero exponent bound together with the chain frequency of its witness.
struct ZBoundReport {
    double exponent = 0.0;
    double bound = 1.0;
    Estimate witness;  // frequency of the dimer-stack event; reported only
};

/// All links are double bars on the dimer cover pairing even sites with
/// their successor along the first axis.
inline bool dimer_stack_witness(const LinkConfiguration& cfg) {
    const TorusGeometry& g = cfg.geometry();
    Pairing dimer = dimer_pairing(g, 0);
    for (const Link& l : cfg.links()) {
        const Edge& e = g.edge(l.edge);
        if (l.kind != LinkKind::DoubleBar || dimer[e.lo] != e.hi) {
            return false;
        }
    }
    return true;
}

inline ZBoundReport zbound_report(int d, double u, int n, double beta, double K, const BatchMeans* witness = nullptr) {
    ZBoundReport r;
    r.exponent = zbound_exponent(d, u, n, beta, K);
    r.bound = std::exp(r.exponent);
    if (witness) {
        r.witness = witness->estimate();
    }
    return r;
}

// ---- chessboard spot-check ---------------------------------------------------

/// A cube event of the reference big cube, evaluated in cube q through the
/// reflection onto it.
struct CubeEvent {
    enum class Kind { Always, Never, Crowded, Empty, Transposition, Bad, CrowdedPair };
    Kind kind = Kind::Empty;
    EdgeId e = 0;  // CrowdedPair only, as edges of the reference cube
    EdgeId f = 0;

    static CubeEvent crowded_pair(EdgeId e, EdgeId f) { return CubeEvent{Kind::CrowdedPair, e, f}; }
};

inline const char* event_name(CubeEvent::Kind k) {
    switch (k) {
        case CubeEvent::Kind::Always: return "always";
        case CubeEvent::Kind::Never: return "never";
        case CubeEvent::Kind::Crowded: return "C";
        case CubeEvent::Kind::Empty: return "E";
        case CubeEvent::Kind::Transposition: return "T";
        case CubeEvent::Kind::Bad: return "B";
        case CubeEvent::Kind::CrowdedPair: return "Cee";
    }
    return "?";
}

inline CubeEvent parse_event(const std::string& s) {
    using K = CubeEvent::Kind;
    for (K k : {K::Always, K::Never, K::Crowded, K::Empty, K::Transposition, K::Bad}) {
        if (s == event_name(k)) {
            return CubeEvent{k, 0, 0};
        }
    }
    throw std::invalid_argument("unknown cube event '" + s + "' (use C, E, T, B, always or never)");
}

inline bool event_occurs(const LinkConfiguration& cfg, const CubeComplex& cx, std::size_t q, const CubeEvent& ev) {
    using K = CubeEvent::Kind;
    switch (ev.kind) {
        case K::Always: return true;
        case K::Never: return false;
        case K::CrowdedPair: {
            Block blk = cx.block(q, 0);
            auto linked = [&](EdgeId e) {
                for (const Link& l : cfg.links_on_edge(e)) {
                    if (cx.block_has_link(blk, e, l.time)) {
                        return true;
                    }
                }
                return false;
            };
            return linked(cx.reflect_edge(q, ev.e)) && linked(cx.reflect_edge(q, ev.f));
        }
        default: break;
    }
    BadEventReport r = detect_bad_events(cfg, cx, q, 0);
    switch (ev.kind) {
        case K::Crowded: return r.crowded;
        case K::Empty: return r.empty;
        case K::Transposition: return r.transposition;
        default: return r.bad();
    }
}

/// `m` distinct big cubes drawn uniformly.
template <class Rng>
std::vector<std::size_t> random_cube_subset(const CubeComplex& cx, std::size_t m, Rng& rng) {
    if (m < 1 || m > cx.num_big_cubes()) {
        throw std::invalid_argument("subset size must lie in [1, number of big cubes]");
    }
    std::vector<std::size_t> all(cx.num_big_cubes());
    for (std::size_t i = 0; i < all.size(); ++i) {
        all[i] = i;
    }
    std::shuffle(all.begin(), all.end(), rng);
    all.resize(m);
    std::sort(all.begin(), all.end());
    return all;
}

struct ChessboardReport {
    std::string event;
    std::vector<std::size_t> cubes;
    std::size_t num_cubes = 0;  // K_{d+1}, all big cubes
    Estimate joint;             // event in every chosen cube
    Estimate distributed;       // event in every cube
    double rhs = 0.0;           // distributed^(m / num_cubes)
    double rhs_se = 0.0;
    double slack = 0.0;         // rhs - joint
    double tolerance = 0.0;     // 3 combined SE
    bool holds = false;
};

/// Joint occurrence of one event in a fixed set of cubes against the
/// product of distributed-event probabilities, sample by sample.
class ChessboardAccumulator {
  public:
    ChessboardAccumulator(const CubeComplex& cx, CubeEvent ev, std::vector<std::size_t> cubes)
        : cx_(&cx), ev_(ev), cubes_(std::move(cubes)), in_subset_(cx.num_big_cubes(), false) {
        if (cubes_.empty()) {
            throw std::invalid_argument("chessboard check needs at least one cube");
        }
        for (std::size_t q : cubes_) {
            if (q >= cx.num_big_cubes()) {
                throw std::out_of_range("big cube index " + std::to_string(q) + " out of range");
            }
            if (in_subset_[q]) {
                throw std::invalid_argument("chessboard cubes must be distinct");
            }
            in_subset_[q] = true;
        }
    }

    void add(const LinkConfiguration& cfg) {
        bool joint = true, all = true;
        // Subset cubes first so an early miss settles both indicators.
        for (std::size_t q : cubes_) {
            if (!event_occurs(cfg, *cx_, q, ev_)) {
                joint = all = false;
                break;
            }
        }
        for (std::size_t q = 0; all && q < cx_->num_big_cubes(); ++q) {
            if (!in_subset_[q] && !event_occurs(cfg, *cx_, q, ev_)) {
                all = false;
            }
        }
        joint_.add(joint ? 1.0 : 0.0);
        dist_.add(all ? 1.0 : 0.0);
    }

    ChessboardReport report() const {
        ChessboardReport r;
        r.event = event_name(ev_.kind);
        r.cubes = cubes_;
        r.num_cubes = cx_->num_big_cubes();
        r.joint = joint_.estimate();
        r.distributed = dist_.estimate();
        double a = static_cast<double>(cubes_.size()) / static_cast<double>(r.num_cubes);
        double p = r.distributed.mean;
        r.rhs = std::pow(p, a);
        // Delta method; at p = 0 the right side is 0 and so is its spread.
        r.rhs_se = p > 0.0 ? a * std::pow(p, a - 1.0) * r.distributed.se : 0.0;
        r.slack = r.rhs - r.joint.mean;
        r.tolerance = 3.0 * std::sqrt(r.joint.se * r.joint.se + r.rhs_se * r.rhs_se);
        r.holds = r.joint.mean <= r.rhs + r.tolerance;
        return r;
    }

  private:
    const CubeComplex* cx_;
    CubeEvent ev_;
    std::vector<std::size_t> cubes_;
    std::vector<bool> in_subset_;
    BatchMeans joint_;
    BatchMeans dist_;
};

/// Runs one chain and feeds every measured sample to the accumulator.
inline ChessboardReport chessboard_spot_check(GeometryPtr geom, const SamplerParams& sp, const CubeComplex& cx,
                                              CubeEvent ev, std::vector<std::size_t> cubes) {
    ChessboardAccumulator acc(cx, ev, std::move(cubes));
    run_chain(std::move(geom), sp, [&](const Chain& ch, std::uint64_t) { acc.add(ch.config()); });
    return acc.report();
}

}  // namespace loopsim

#endif  // LOOPSIM_ESTIMATORS_HPP
