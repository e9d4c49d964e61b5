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
#ifndef LOOPSIM_VERIFICATION_HPP
#define LOOPSIM_VERIFICATION_HPP

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "loopsim/coloring.hpp"
#include "loopsim/cubes.hpp"
#include "loopsim/estimators.hpp"
#include "loopsim/events.hpp"
#include "loopsim/loops.hpp"
#include "loopsim/path.hpp"
#include "loopsim/quantum.hpp"
#include "loopsim/sampler.hpp"

namespace loopsim::verification {

// Tolerances and run sizes. Changing any of these changes what a PASS means.
namespace tol {
inline constexpr double z_max = 3.0;                 // criteria 1, 5, 9, 10, 12
inline constexpr double spin_min_ess = 1e6;
inline constexpr std::uint64_t spin_chunk = 1'000'000;
inline constexpr std::uint64_t spin_max_sweeps = 60'000'000;
inline constexpr double calibration_min_ess = 1e5;
inline constexpr std::uint64_t calibration_chunk = 200'000;
inline constexpr std::uint64_t calibration_max_sweeps = 20'000'000;
inline constexpr double tail_max = 1e-3;             // criterion 9
inline constexpr std::uint64_t domination_sweeps = 200'000;
inline constexpr std::uint64_t decay_sweeps = 200'000;
inline constexpr std::uint64_t chessboard_samples = 1'000'000;
inline constexpr double operator_tol = 1e-12;        // criterion 11
inline constexpr double correlation_tol = 1e-10;
}  // namespace tol

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string summary;             // one line
    std::vector<std::string> details;
    double seconds = 0.0;
};

struct SuiteOptions {
    std::uint64_t seed = 20260101;
    /// Progress lines (may be null).
    std::function<void(const std::string&)> log;
};

inline constexpr int kNumCriteria = 12;

namespace detail {

inline std::string fmt(double x, int prec = 4) {
    std::ostringstream os;
    os.precision(prec);
    os << x;
    return os.str();
}

template <class Rng>
LinkConfiguration random_links(GeometryPtr g, std::size_t count, double u, Rng& rng) {
    LinkConfiguration cfg(g);
    std::uniform_int_distribution<EdgeId> edge(0, static_cast<EdgeId>(g->num_edges() - 1));
    std::uniform_real_distribution<double> when(0.0, g->beta());
    std::bernoulli_distribution cross(u);
    while (cfg.size() < count) {
        Link l{edge(rng), when(rng), cross(rng) ? LinkKind::Cross : LinkKind::DoubleBar};
        if (!cfg.contains(l.edge, l.time)) {
            cfg.insert(l);
        }
    }
    return cfg;
}

inline std::uint64_t ipow(std::uint64_t b, std::size_t e) {
    std::uint64_t r = 1;
    while (e--) {
        r *= b;
    }
    return r;
}

inline void say(const SuiteOptions& o, const std::string& s) {
    if (o.log) {
        o.log(s);
    }
}

}  // namespace detail

// 1. Loop representation of the spin correlations on the 4-site ring.
inline CriterionResult criterion_lemma22(const SuiteOptions& opt) {
    CriterionResult r{1, "spin correlation = (n^2-1)/12 x connection probability", true, "", {}, 0.0};
    struct Setting {
        int n;
        double beta;
    };
    double worst = 0.0, min_ess = INFINITY;
    int points = 0;
    std::uint64_t stream = 0;
    for (Setting st : {Setting{2, 0.5}, Setting{3, 0.3}}) {
        auto g = build_geometry(1, {1}, st.beta);
        for (double u : {0.0, 0.25, 0.5}) {
            SamplerParams sp;
            sp.n = st.n;
            sp.u = u;
            sp.burnin = 5000;
            sp.seed = replica_seed(opt.seed, 100 + stream++);
            std::vector<Displacement> disp;
            for (double t : {0.0, st.beta / 4}) {
                for (int x : {0, 1, 2}) {
                    if (x != 0 || t != 0.0) {
                        disp.push_back({{x}, t});
                    }
                }
            }
            ConnectionAccumulator acc(g, disp);
            Chain chain(g, sp);
            for (std::uint64_t s = 0; s < sp.burnin; ++s) {
                chain.sweep();
            }
            std::uint64_t done = 0;
            std::vector<ConnectionEstimate> est;
            for (;;) {
                for (std::uint64_t s = 0; s < tol::spin_chunk; ++s) {
                    chain.sweep();
                    acc.add(chain.config());
                }
                done += tol::spin_chunk;
                est = acc.estimates();
                double m = INFINITY;
                for (const auto& e : est) {
                    m = std::min(m, e.ess);
                }
                if (m >= tol::spin_min_ess || done >= tol::spin_max_sweeps) {
                    break;
                }
            }
            QuantumModel model = build_hamiltonian(*g, st.n, u, PairConvention::LoopMatched);
            for (const auto& e : est) {
                CorrelationReport rep = verify_lemma22(model, 0, 0.0, e.displacement.x[0], e.displacement.t, st.beta, e);
                bool ok = std::abs(rep.z) <= tol::z_max && e.ess >= tol::spin_min_ess;
                r.pass = r.pass && ok;
                worst = std::max(worst, std::abs(rep.z));
                min_ess = std::min(min_ess, e.ess);
                ++points;
                r.details.push_back("n=" + std::to_string(st.n) + " beta=" + detail::fmt(st.beta) + " u=" + detail::fmt(u) +
                                    " x=" + std::to_string(e.displacement.x[0]) + " t=" + detail::fmt(e.displacement.t) +
                                    " exact=" + detail::fmt(rep.exact_s1, 6) + " loop=" + detail::fmt(rep.predicted, 6) +
                                    " z=" + detail::fmt(rep.z, 3) + " ess=" + detail::fmt(e.ess, 3) + (ok ? "" : "  <-- FAIL"));
            }
            detail::say(opt, "  criterion 1: n=" + std::to_string(st.n) + " u=" + detail::fmt(u) + " done after " +
                                 std::to_string(done) + " sweeps");
        }
    }
    r.summary = std::to_string(points) + " points, max |z| = " + detail::fmt(worst, 3) + " (limit 3), min ESS = " +
                detail::fmt(min_ess, 3) + " (need 1e6)";
    return r;
}

// 2. Coloring count against the loop count.
inline CriterionResult criterion_colorings(const SuiteOptions& opt) {
    CriterionResult r{2, "n^loops equals the number of colorings", true, "", {}, 0.0};
    std::mt19937_64 rng(replica_seed(opt.seed, 2));
    auto g = build_geometry(1, {1}, 1.0);
    std::size_t mismatches = 0;
    for (int rep = 0; rep < 200; ++rep) {
        auto cfg = detail::random_links(g, rng() % 7, 0.5, rng);
        std::size_t loops = count_loops(cfg);
        for (int n : {2, 3}) {
            if (count_colorings(cfg, n) != detail::ipow(static_cast<std::uint64_t>(n), loops)) {
                ++mismatches;
            }
        }
    }
    r.pass = mismatches == 0;
    r.summary = "200 configurations (4 sites, <= 6 links), n in {2,3}: " + std::to_string(mismatches) + " mismatches";
    return r;
}

// 3. Boundary-condition inequalities.
inline CriterionResult criterion_boundary(const SuiteOptions& opt) {
    CriterionResult r{3, "loop counts under pairing boundary conditions", true, "", {}, 0.0};
    std::mt19937_64 rng(replica_seed(opt.seed, 3));
    std::vector<GeometryPtr> gs{build_geometry(1, {1}, 1.0), build_geometry(1, {2}, 2.0), build_geometry(2, {1, 1}, 1.0)};
    std::size_t v1 = 0, v2 = 0;
    for (int rep = 0; rep < 1000; ++rep) {
        auto g = gs[static_cast<std::size_t>(rep) % gs.size()];
        const std::size_t K = g->num_vertices();
        auto cfg = detail::random_links(g, rng() % 40, 0.3, rng);
        auto xi = random_pairing(K, rng);
        auto xi1 = random_pairing(K, rng);
        std::size_t per = count_loops(cfg);
        std::size_t bc = decompose_with_pairings(cfg, xi, xi1).count();
        std::size_t L = count_closing_links(cfg, xi);
        v1 += per > bc + K - 1;
        v2 += bc > L + K / 2;
    }
    r.pass = v1 == 0 && v2 == 0;
    r.summary = "1000 triples: " + std::to_string(v1) + " violations of per <= bc + K'-1, " + std::to_string(v2) +
                " of bc <= L + K'/2";
    return r;
}

// 4. Incremental loop counts.
inline CriterionResult criterion_delta(const SuiteOptions& opt) {
    CriterionResult r{4, "incremental loop count equals recount", true, "", {}, 0.0};
    std::mt19937_64 rng(replica_seed(opt.seed, 4));
    std::uniform_real_distribution<double> U(0, 1);
    std::vector<GeometryPtr> gs{build_geometry(1, {1}, 1.0), build_geometry(1, {2}, 2.0), build_geometry(2, {1, 1}, 1.0)};
    std::size_t bad = 0, moves = 0;
    for (std::size_t gi = 0; gi < gs.size(); ++gi) {
        auto g = gs[gi];
        auto cfg = detail::random_links(g, 10, 0.3, rng);
        int budget = gi == 0 ? 334 : 333;
        for (int step = 0; step < budget; ++step, ++moves) {
            Move mv;
            double x = U(rng);
            if (x < 0.4 || cfg.empty()) {
                mv = Move{MoveType::Insert, Link{static_cast<EdgeId>(rng() % g->num_edges()), U(rng) * g->beta(),
                                                 U(rng) < 0.3 ? LinkKind::Cross : LinkKind::DoubleBar}};
            } else {
                mv = Move{x < 0.8 ? MoveType::Remove : MoveType::Flip, cfg.at(rng() % cfg.size())};
            }
            int before = static_cast<int>(count_loops(cfg));
            int d = delta_loops(cfg, mv);
            if (mv.type == MoveType::Insert) {
                cfg.insert(mv.link);
            } else if (mv.type == MoveType::Remove) {
                cfg.remove(mv.link.edge, mv.link.time);
            } else {
                cfg.flip(mv.link.edge, mv.link.time);
            }
            bad += d != static_cast<int>(count_loops(cfg)) - before;
        }
    }
    r.pass = bad == 0;
    r.summary = std::to_string(moves) + " random moves: " + std::to_string(bad) + " disagreements";
    return r;
}

// 5. Sampler calibration against the plain Poisson process.
inline CriterionResult criterion_calibration(const SuiteOptions& opt) {
    CriterionResult r{5, "sampler calibration at n = 1", true, "", {}, 0.0};
    const double u = 0.25;
    auto g = build_geometry(1, {2}, 2.0);
    SamplerParams sp;
    sp.n = 1;
    sp.u = u;
    sp.burnin = 2000;
    sp.seed = replica_seed(opt.seed, 5);
    Chain chain(g, sp);
    for (std::uint64_t s = 0; s < sp.burnin; ++s) {
        chain.sweep();
    }
    BatchMeans links, crosses;
    std::uint64_t done = 0;
    for (;;) {
        for (std::uint64_t s = 0; s < tol::calibration_chunk; ++s) {
            chain.sweep();
            const auto& cfg = chain.config();
            links.add(static_cast<double>(cfg.size()));
            if (!cfg.empty()) {
                std::size_t c = 0;
                for (const Link& l : cfg.links()) {
                    c += l.kind == LinkKind::Cross;
                }
                crosses.add(static_cast<double>(c) / static_cast<double>(cfg.size()));
            }
        }
        done += tol::calibration_chunk;
        if ((links.ess() >= tol::calibration_min_ess && crosses.ess() >= tol::calibration_min_ess) ||
            done >= tol::calibration_max_sweeps) {
            break;
        }
    }
    const double mean = static_cast<double>(g->dim() * g->num_vertices()) * g->beta();
    double z1 = (links.mean() - mean) / links.se();
    double z2 = (crosses.mean() - u) / crosses.se();
    bool ess_ok = links.ess() >= tol::calibration_min_ess && crosses.ess() >= tol::calibration_min_ess;
    r.pass = std::abs(z1) <= tol::z_max && std::abs(z2) <= tol::z_max && ess_ok;
    r.summary = "links " + detail::fmt(links.mean(), 6) + " vs " + detail::fmt(mean) + " (z=" + detail::fmt(z1, 3) +
                "), cross fraction " + detail::fmt(crosses.mean(), 5) + " vs " + detail::fmt(u) + " (z=" +
                detail::fmt(z2, 3) + "), ESS " + detail::fmt(links.ess(), 3) + "/" + detail::fmt(crosses.ess(), 3);
    return r;
}

// 6. Switches and the distributed crowded event.
inline CriterionResult criterion_switches(const SuiteOptions& opt) {
    CriterionResult r{6, "switch upper links never close; D C_{e,e'} has >= m0 non-closing links", true, "", {}, 0.0};
    std::mt19937_64 rng(replica_seed(opt.seed, 6));
    std::vector<GeometryPtr> gs{build_geometry(1, {2}, 1.0), build_geometry(2, {1, 1}, 1.0)};
    std::size_t switches = 0, violations = 0, cross_below = 0, no_cross_violations = 0, both = 0;
    for (int trial = 0; trial < 500; ++trial) {
        auto g = gs[static_cast<std::size_t>(trial % 2)];
        double u = (trial % 3) * 0.25;
        auto cfg = detail::random_links(g, 5 + static_cast<std::size_t>(trial % 40), u, rng);
        auto xi = random_pairing(g->num_vertices(), rng);
        SwitchAudit a = audit_switches(cfg, xi);
        switches += a.switches;
        violations += a.upper_closing;
        cross_below += a.upper_closing_cross_lower;
        both += a.both_closing;
        if (u == 0.0) {
            no_cross_violations += a.upper_closing;
        }
    }
    bool literal = violations == 0;
    r.details.push_back("switch claim: " + std::to_string(switches) + " switches, " + std::to_string(violations) +
                        " closing upper links (" + std::to_string(cross_below) + " above a cross; " +
                        std::to_string(no_cross_violations) + " in cross-free configurations; " + std::to_string(both) +
                        " switches with both links closing)");

    // Deterministic D C_{e,e'} for every placement case.
    auto g = build_geometry(2, {1, 1}, 2.0);
    CubeComplex cx(g, 0.5, 4);
    const double m0 = cx.n() * g->beta() * static_cast<double>(cx.num_boxes()) / (4.0 * cx.R());
    bool cases_ok = true;
    std::string seen;
    for (auto [e, f] : adjacent_pairs_in_reference(cx)) {
        char c = placement_letter(placement_case(cx, e, f));
        if (seen.find(c) != std::string::npos) {
            continue;
        }
        seen += c;
        double h = cx.slab_height();
        auto cfg = build_distributed_crowded(cx, e, 0.3 * h, LinkKind::DoubleBar, f, 0.6 * h, LinkKind::DoubleBar);
        bool crowded = true;
        for (std::size_t q = 0; q < cx.num_big_cubes(); ++q) {
            crowded = crowded && detect_bad_events(cfg, cx, q).crowded;
        }
        std::size_t worst = cfg.size();
        for (const Pairing& xi : {dimer_pairing(*g, 0), dimer_pairing(*g, 1), random_pairing(g->num_vertices(), rng)}) {
            worst = std::min(worst, count_nonclosing(cfg, xi));
        }
        bool ok = crowded && static_cast<double>(worst) >= m0;
        cases_ok = cases_ok && ok;
        r.details.push_back(std::string("case (") + c + "): " + std::to_string(cfg.size()) + " links, " +
                            std::to_string(worst) + " non-closing (fewest over 3 bottom pairings), m0 = " +
                            detail::fmt(m0) + (ok ? "" : "  <-- FAIL"));
    }
    cases_ok = cases_ok && seen.size() == 3;
    r.pass = literal && cases_ok;
    r.summary = std::to_string(violations) + " closing upper links in 500 random configurations (claim: 0); cases " +
                std::string(cases_ok ? "(a),(b),(c) all >= m0" : "FAILED");
    return r;
}

// 7. Path extraction on sampled configurations.
inline CriterionResult criterion_paths(const SuiteOptions& opt) {
    CriterionResult r{7, "extracted paths are valid with bad fraction >= phi", true, "", {}, 0.0};
    bool constants = phi_denominator(1) == 9 && phi_denominator(2) == 19 && phi(1) == 1.0 / 9.0 && phi(2) == 1.0 / 19.0;
    struct Case {
        int d;
        double beta;
        int n;
    };
    std::size_t paths = 0, invalid = 0, below = 0;
    double worst = 1.0;
    std::uint64_t stream = 0;
    for (Case c : {Case{1, 4.0, 4}, Case{2, 2.0, 4}}) {
        auto g = build_geometry(c.d, std::vector<int>(static_cast<std::size_t>(c.d), 1), c.beta);
        CubeComplex cx(g, 1.0, c.n);
        SamplerParams sp;
        sp.n = c.n;
        sp.u = 0.25;
        sp.sweeps = 250 * 4;
        sp.thin = 4;
        sp.burnin = 200;
        sp.seed = replica_seed(opt.seed, 700 + stream++);
        std::mt19937_64 rng(sp.seed ^ 0x5a5a);
        std::uniform_int_distribution<VertexId> V(0, static_cast<VertexId>(g->num_vertices() - 1));
        std::uniform_real_distribution<double> T(0.0, c.beta);
        run_chain(g, sp, [&](const Chain& ch, std::uint64_t) {
            SpaceTimePoint src{V(rng), T(rng)};
            auto tr = trace_loop(ch.config(), cx, src);
            // Target: a uniformly chosen run of the loop through the source.
            const LoopRun& run = tr.runs[rng() % tr.runs.size()];
            std::uniform_real_distribution<double> along(run.from, run.to);
            SpaceTimePoint dst{run.vertex, ::loopsim::detail::wrap_time(along(rng), c.beta)};
            ++paths;
            try {
                ExtractedPath p = extract_path(ch.config(), cx, src, dst);
                if (!path_problems(cx, p, src, dst).empty()) {
                    ++invalid;
                }
                worst = std::min(worst, p.best_fraction);
                below += p.best_fraction < phi(c.d);
            } catch (const std::exception&) {
                ++invalid;
            }
        });
    }
    r.pass = constants && invalid == 0 && below == 0 && paths == 500;
    r.summary = std::to_string(paths) + " paths (d=1,2): " + std::to_string(invalid) + " invalid, " +
                std::to_string(below) + " below phi; worst best-translate fraction " + detail::fmt(worst) +
                "; phi(1)=1/" + std::to_string(phi_denominator(1)) + ", phi(2)=1/" + std::to_string(phi_denominator(2));
    return r;
}

// 8. Minimal pairs.
inline CriterionResult criterion_minimal_pairs(const SuiteOptions& opt) {
    CriterionResult r{8, "minimal pairs of a pairing <= K'/2", true, "", {}, 0.0};
    std::mt19937_64 rng(replica_seed(opt.seed, 8));
    std::vector<GeometryPtr> gs{build_geometry(1, {1}, 1.0), build_geometry(1, {3}, 1.0), build_geometry(2, {1, 1}, 1.0),
                                build_geometry(2, {1, 2}, 1.0), build_geometry(3, {1, 1, 1}, 1.0)};
    std::size_t bad = 0, most = 0;
    for (int rep = 0; rep < 1000; ++rep) {
        auto g = gs[static_cast<std::size_t>(rep) % gs.size()];
        auto xi = rep % 10 == 0 ? dimer_pairing(*g, rep % g->dim()) : random_pairing(g->num_vertices(), rng);
        std::size_t m = minimal_pair_count(xi, *g);
        bad += 2 * m > g->num_vertices();
        most = std::max(most, m);
    }
    r.pass = bad == 0;
    r.summary = "1000 pairings on 5 tori: " + std::to_string(bad) + " violations";
    return r;
}

// 9. Poisson domination of the link count.
inline CriterionResult criterion_domination(const SuiteOptions& opt) {
    CriterionResult r{9, "link count dominated by Poisson(n)", true, "", {}, 0.0};
    const int n = 5;
    auto g = build_geometry(1, {2}, 1.0);
    SamplerParams sp;
    sp.n = n;
    sp.u = 0.25;
    sp.sweeps = tol::domination_sweeps;
    sp.burnin = 2000;
    sp.seed = replica_seed(opt.seed, 9);
    const double M = std::exp(2.0) * g->dim() * n * g->beta() * static_cast<double>(g->num_vertices());
    BatchMeans counts;
    std::uint64_t exceed = 0;
    run_chain(g, sp, [&](const Chain& ch, std::uint64_t) {
        double c = static_cast<double>(ch.config().size());
        counts.add(c);
        exceed += c > M;
    });
    DominationReport d = check_poisson_domination(counts, exceed, *g, n);
    r.pass = d.mean_ok && d.tail_ok;
    r.summary = "mean links " + detail::fmt(d.links.mean, 6) + " +- " + detail::fmt(d.links.se, 2) + " vs d n beta K' = " +
                detail::fmt(d.poisson_mean) + "; P[links > " + detail::fmt(d.threshold) + "] = " +
                detail::fmt(d.tail_frequency, 3) + " (limit 1e-3)";
    return r;
}

// 10. Qualitative exponential decay.
struct DecayRun {
    std::vector<ConnectionEstimate> est;
    std::vector<RayFit> rays;
    std::optional<std::size_t> slowest;
    std::size_t violations = 0;
    std::optional<DecayFit> joint;
};

inline std::vector<Displacement> decay_displacements(double beta, int reach) {
    std::vector<Displacement> disp;
    for (int x = 1; x <= reach; ++x) {
        disp.push_back({{x}, 0.0});
    }
    for (int k = 1; k <= 4; ++k) {
        disp.push_back({{0}, k * beta / 8});
        disp.push_back({{k}, k * beta / 8});
    }
    return disp;
}

inline DecayRun decay_run(int n, std::uint64_t sweeps, std::uint64_t seed) {
    auto g = build_geometry(1, {4}, 1.0);
    SamplerParams sp;
    sp.n = n;
    sp.u = 0.25;
    sp.sweeps = sweeps;
    sp.burnin = 2000;
    sp.seed = seed;
    ConnectionAccumulator acc(g, decay_displacements(g->beta(), 8), 8);
    run_chain(g, sp, [&](const Chain& ch, std::uint64_t) { acc.add(ch.config()); });
    DecayRun d;
    d.est = acc.estimates();
    d.rays = fit_decay_rays(*g, d.est);
    d.slowest = slowest_ray(d.rays);
    d.violations = monotonicity_violations(*g, d.est, tol::z_max).size();
    try {
        d.joint = fit_decay(*g, d.est);
    } catch (const std::runtime_error&) {
    }
    return d;
}

inline CriterionResult criterion_decay(const SuiteOptions& opt) {
    CriterionResult r{10, "connection probabilities decay; faster at larger n", true, "", {}, 0.0};
    DecayRun big = decay_run(20, tol::decay_sweeps, replica_seed(opt.seed, 10));
    detail::say(opt, "  criterion 10: n=20 run done");
    DecayRun small = decay_run(2, tol::decay_sweeps, replica_seed(opt.seed, 11));
    auto describe = [](const char* tag, const DecayRun& d) {
        std::vector<std::string> out;
        for (const RayFit& rf : d.rays) {
            std::string dir = "(" + detail::fmt(rf.unit_x[0], 3) + ", " + detail::fmt(rf.unit_t, 3) + ")";
            out.push_back(std::string(tag) + " ray " + dir + ": " +
                          (rf.fitted ? "rate " + detail::fmt(rf.fit.rate) + " [" + detail::fmt(rf.fit.ci_low) + ", " +
                                           detail::fmt(rf.fit.ci_high) + "] from " +
                                           std::to_string(rf.fit.used.size()) + " points"
                                     : rf.note));
        }
        out.push_back(std::string(tag) + " joint fit over all rays: " +
                      (d.joint ? "rate " + detail::fmt(d.joint->rate) : std::string("no fit")) +
                      "; monotonicity violations " + std::to_string(d.violations));
        return out;
    };
    for (auto& s : describe("n=20", big)) r.details.push_back(s);
    for (auto& s : describe("n=2 ", small)) r.details.push_back(s);
    bool have = big.slowest && small.slowest;
    double rb = have ? big.rays[*big.slowest].fit.rate : NAN;
    double rs = have ? small.rays[*small.slowest].fit.rate : NAN;
    bool ci = have && big.rays[*big.slowest].fit.ci_low > 0.0;
    r.pass = have && big.violations == 0 && ci && rs < rb;
    r.summary = "n=20: " + std::to_string(big.violations) + " monotonicity violations, slowest-ray rate " +
                detail::fmt(rb) + (ci ? " (CI excludes 0)" : " (CI includes 0)") + "; n=2 slowest-ray rate " +
                detail::fmt(rs);
    return r;
}

// 11. Operator identities and S1 = S3 correlations.
inline CriterionResult criterion_operators(const SuiteOptions&) {
    CriterionResult r{11, "spin operator identities; S1 and S3 correlations agree", true, "", {}, 0.0};
    using C = std::complex<double>;
    double worst_op = 0.0;
    for (int n : {2, 3, 4, 5}) {
        SpinOperators s = build_spin_operators(n);
        const C I(0.0, 1.0);
        auto mx = [](const Eigen::MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); };
        Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);
        worst_op = std::max({worst_op, mx(s.S1 * s.S2 - s.S2 * s.S1 - I * s.S3), mx(s.S2 * s.S3 - s.S3 * s.S2 - I * s.S1),
                             mx(s.S3 * s.S1 - s.S1 * s.S3 - I * s.S2),
                             mx(s.S1 * s.S1 + s.S2 * s.S2 + s.S3 * s.S3 - s.S * (s.S + 1) * id),
                             mx(s.S1 - s.S1.adjoint()), mx(s.S2 - s.S2.adjoint()), mx(s.S3 - s.S3.adjoint())});
        Eigen::MatrixXd T = swap_operator(n), Q = pair_operator(n);
        Eigen::MatrixXd idn = Eigen::MatrixXd::Identity(n * n, n * n);
        worst_op = std::max({worst_op, (T * T - idn).cwiseAbs().maxCoeff(), (Q * Q - Q).cwiseAbs().maxCoeff(),
                             (T - T.transpose()).cwiseAbs().maxCoeff(), (Q - Q.transpose()).cwiseAbs().maxCoeff()});
        auto g = build_geometry(1, {1}, 1.0);
        QuantumModel m = build_hamiltonian(*g, n, 0.25);
        worst_op = std::max(worst_op, (m.hamiltonian() - m.hamiltonian().transpose()).cwiseAbs().maxCoeff());
    }
    double worst_corr = 0.0;
    int evaluated = 0;
    auto g = build_geometry(1, {1}, 1.0);
    for (int n : {2, 3}) {
        for (double u : {0.0, 0.25, 0.5}) {
            QuantumModel m = build_hamiltonian(*g, n, u);
            for (double beta : {0.3, 1.0, 2.5}) {
                for (int x = 0; x < 4; ++x) {
                    for (double f : {0.0, 0.2, 0.5, 0.9}) {
                        double s1 = m.truncated_correlation(Component::One, 0, 0.0, x, f * beta, beta);
                        double s3 = m.truncated_correlation(Component::Three, 0, 0.0, x, f * beta, beta);
                        worst_corr = std::max(worst_corr, std::abs(s1 - s3));
                        ++evaluated;
                    }
                }
            }
        }
    }
    r.pass = worst_op <= tol::operator_tol && worst_corr <= tol::correlation_tol;
    r.summary = "n=2..5 operator residual " + detail::fmt(worst_op, 3) + " (limit 1e-12); max |<S1;S1> - <S3;S3>| " +
                detail::fmt(worst_corr, 3) + " over " + std::to_string(evaluated) + " points (limit 1e-10)";
    return r;
}

// 12. Chessboard spot-check for the empty event.
inline CriterionResult criterion_chessboard(const SuiteOptions& opt) {
    CriterionResult r{12, "chessboard inequality for the empty event", true, "", {}, 0.0};
    const int n = 2;
    const double R0 = 5.0;
    // Smallest integer beta with beta n / R0 > 2, so the block-height
    // selection yields two slabs of big cubes.
    const double beta = std::floor(2.0 * R0 / n) + 1.0;
    auto g = build_geometry(1, {1}, beta);
    CubeComplex cx(g, R0, n);
    std::mt19937_64 rng(replica_seed(opt.seed, 12));
    auto cubes = random_cube_subset(cx, 2, rng);
    SamplerParams sp;
    sp.n = n;
    sp.u = 0.25;
    sp.sweeps = tol::chessboard_samples;
    sp.burnin = 2000;
    sp.seed = replica_seed(opt.seed, 13);
    ChessboardReport c = chessboard_spot_check(g, sp, cx, CubeEvent{CubeEvent::Kind::Empty}, cubes);
    r.pass = c.holds;
    r.summary = "beta=" + detail::fmt(beta) + " R=" + detail::fmt(cx.R()) + ", cubes {" + std::to_string(cubes[0]) + "," +
                std::to_string(cubes[1]) + "} of " + std::to_string(c.num_cubes) + ": LHS " + detail::fmt(c.joint.mean) +
                " +- " + detail::fmt(c.joint.se, 2) + " <= RHS " + detail::fmt(c.rhs) + " +- " + detail::fmt(c.rhs_se, 2) +
                " (P[DE] = " + detail::fmt(c.distributed.mean, 3) + ")";
    return r;
}

inline CriterionResult run_criterion(int id, const SuiteOptions& opt) {
    using Fn = CriterionResult (*)(const SuiteOptions&);
    static const Fn table[kNumCriteria] = {criterion_lemma22,       criterion_colorings,  criterion_boundary,
                                           criterion_delta,         criterion_calibration, criterion_switches,
                                           criterion_paths,         criterion_minimal_pairs, criterion_domination,
                                           criterion_decay,         criterion_operators,  criterion_chessboard};
    if (id < 1 || id > kNumCriteria) {
        throw std::out_of_range("criterion " + std::to_string(id) + " does not exist (1.." +
                                std::to_string(kNumCriteria) + ")");
    }
    auto t0 = std::chrono::steady_clock::now();
    CriterionResult r;
    try {
        r = table[id - 1](opt);
    } catch (const std::exception& e) {
        r.id = id;
        r.pass = false;
        r.summary = std::string("error: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

/// "criterion  7  PASS  name: summary"
inline std::string format_line(const CriterionResult& r) {
    char head[32];
    std::snprintf(head, sizeof head, "criterion %2d  %s  ", r.id, r.pass ? "PASS" : "FAIL");
    return std::string(head) + r.name + ": " + r.summary;
}

}  // namespace loopsim::verification

#endif  // LOOPSIM_VERIFICATION_HPP
