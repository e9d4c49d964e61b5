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
#ifndef LOOPSIM_SAMPLER_HPP
#define LOOPSIM_SAMPLER_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "loopsim/configuration.hpp"
#include "loopsim/loops.hpp"
#include "loopsim/statistics.hpp"

namespace loopsim {

struct SamplerParams {
    int n = 1;
    double u = 0.5;
    std::uint64_t sweeps = 1000;
    std::uint64_t burnin = 100;
    std::uint64_t thin = 1;
    std::uint64_t seed = 1;
    /// Steps per sweep; 0 picks max(1, ceil(d K' beta max(n, 1))).
    std::uint64_t sweep_length = 0;
    /// Compare the running loop count with a full recount every this many
    /// steps; 0 disables the check.
    std::uint64_t check_every = 0;
    /// Traversal budget for incremental loop counts before recounting.
    std::size_t delta_cap = 1u << 20;
    /// "auto", "empty", "poisson" or "dimer".
    std::string init = "auto";
};

inline void validate(const SamplerParams& p) {
    if (p.n < 1) {
        throw std::invalid_argument("n must be at least 1");
    }
    if (!(p.u >= 0.0 && p.u <= 1.0)) {
        throw std::invalid_argument("u must lie in [0, 1]");
    }
    if (p.thin == 0) {
        throw std::invalid_argument("thin must be positive");
    }
    if (p.init != "auto" && p.init != "empty" && p.init != "poisson" && p.init != "dimer") {
        throw std::invalid_argument("unknown initial state '" + p.init + "'");
    }
}

/// splitmix64 step; used to derive replica seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t replica_seed(std::uint64_t seed, std::uint64_t replica) {
    return replica == 0 ? seed : splitmix64(seed ^ splitmix64(replica));
}

/// Double bars stacked on the edges of a dimer cover, `per_edge` of them
/// per dimer at evenly spaced, slightly jittered times.
template <class Rng>
LinkConfiguration dimer_stack(GeometryPtr geom, int per_edge, Rng& rng) {
    LinkConfiguration cfg(geom);
    Pairing dimers = dimer_pairing(*geom, 0);
    const double beta = geom->beta();
    std::uniform_real_distribution<double> jitter(0.0, 1.0);
    for (VertexId v = 0; v < geom->num_vertices(); ++v) {
        if (v > dimers[v]) {
            continue;
        }
        EdgeId e = *geom->find_edge(v, dimers[v]);
        for (int i = 0; i < per_edge; ++i) {
            double t = beta * (i + jitter(rng)) / per_edge;
            if (t < beta && !cfg.contains(e, t)) {
                cfg.insert(Link{e, t, LinkKind::DoubleBar});
            }
        }
    }
    return cfg;
}

enum MoveIndex : std::size_t { kInsert = 0, kRemove = 1, kFlip = 2 };

struct MoveCounters {
    std::array<std::uint64_t, 3> proposed{};
    std::array<std::uint64_t, 3> accepted{};

    double rate(std::size_t m) const {
        return proposed[m] ? static_cast<double>(accepted[m]) / static_cast<double>(proposed[m]) : 0.0;
    }
    MoveCounters& operator+=(const MoveCounters& o) {
        for (std::size_t i = 0; i < 3; ++i) {
            proposed[i] += o.proposed[i];
            accepted[i] += o.accepted[i];
        }
        return *this;
    }
};

/// Metropolis chain for the Poisson link measure reweighted by n^loops.
class Chain {
  public:
    Chain(GeometryPtr geom, const SamplerParams& p) : geom_(std::move(geom)), p_(p), cfg_(geom_), rng_(p.seed) {
        validate(p_);
        const double K = static_cast<double>(geom_->num_vertices());
        volume_ = static_cast<double>(geom_->dim()) * K * geom_->beta();
        log_volume_ = std::log(volume_);
        log_n_ = std::log(static_cast<double>(p_.n));
        if (p_.u > 0.0 && p_.u < 1.0) {
            log_c_to_d_ = std::log((1.0 - p_.u) / p_.u);
            move_cdf_ = {0.4, 0.8, 1.0};
        } else {
            move_cdf_ = {0.5, 1.0, 1.0};
        }
        sweep_length_ = p_.sweep_length;
        if (sweep_length_ == 0) {
            sweep_length_ = std::max<std::uint64_t>(
                1, static_cast<std::uint64_t>(std::ceil(volume_ * std::max(1, p_.n))));
        }
        initialise();
    }

    const LinkConfiguration& config() const { return cfg_; }
    const TorusGeometry& geometry() const { return *geom_; }
    const SamplerParams& params() const { return p_; }
    std::size_t loops() const { return loops_; }
    std::uint64_t steps() const { return steps_; }
    std::uint64_t sweep_length() const { return sweep_length_; }
    const MoveCounters& counters() const { return counters_; }
    std::mt19937_64& rng() { return rng_; }

    /// Replaces the state; the loop count is recomputed.
    void set_config(LinkConfiguration cfg) {
        if (!cfg.geometry().same_shape(*geom_)) {
            throw std::invalid_argument("configuration belongs to a different torus");
        }
        cfg_ = std::move(cfg);
        loops_ = count_loops(cfg_);
    }

    void step() {
        double r = unit_(rng_);
        if (r < move_cdf_[0]) {
            propose_insert();
        } else if (r < move_cdf_[1]) {
            propose_remove();
        } else {
            propose_flip();
        }
        ++steps_;
        if (p_.check_every != 0 && steps_ % p_.check_every == 0) {
            verify_loop_count();
        }
    }

    void sweep() {
        for (std::uint64_t i = 0; i < sweep_length_; ++i) {
            step();
        }
    }

    void verify_loop_count() const {
        std::size_t full = count_loops(cfg_);
        if (full != loops_) {
            throw std::logic_error("incremental loop count " + std::to_string(loops_) + " differs from recount " +
                                   std::to_string(full) + " after step " + std::to_string(steps_));
        }
    }

  private:
    void initialise() {
        std::string mode = p_.init;
        double stack = static_cast<double>(p_.n) * geom_->beta() * (1.0 - p_.u);
        if (mode == "auto") {
            mode = stack >= 2.0 ? "dimer" : "empty";
        }
        if (mode == "poisson") {
            cfg_ = sample_poisson(geom_, p_.u, 1.0, rng_);
        } else if (mode == "dimer") {
            cfg_ = dimer_stack(geom_, std::max(1, static_cast<int>(std::lround(stack))), rng_);
        }
        loops_ = count_loops(cfg_);
    }

    bool accept(double log_ratio) { return log_ratio >= 0.0 || std::log(unit_(rng_)) < log_ratio; }

    void propose_insert() {
        ++counters_.proposed[kInsert];
        std::uniform_int_distribution<EdgeId> edge(0, static_cast<EdgeId>(geom_->num_edges() - 1));
        Link l;
        l.edge = edge(rng_);
        l.time = unit_(rng_) * geom_->beta();
        if (l.time >= geom_->beta()) {
            l.time = 0.0;
        }
        l.kind = unit_(rng_) < p_.u ? LinkKind::Cross : LinkKind::DoubleBar;
        if (cfg_.contains(l.edge, l.time)) {
            return;
        }
        int delta = delta_loops(cfg_, Move{MoveType::Insert, l}, DeltaOptions{p_.delta_cap});
        double lr = delta * log_n_ + log_volume_ - std::log(static_cast<double>(cfg_.size() + 1));
        if (accept(lr)) {
            cfg_.insert(l);
            loops_ = static_cast<std::size_t>(static_cast<long>(loops_) + delta);
            ++counters_.accepted[kInsert];
        }
    }

    void propose_remove() {
        ++counters_.proposed[kRemove];
        const std::size_t m = cfg_.size();
        if (m == 0) {
            return;
        }
        std::uniform_int_distribution<std::size_t> pick(0, m - 1);
        Link l = cfg_.at(pick(rng_));
        int delta = delta_loops(cfg_, Move{MoveType::Remove, l}, DeltaOptions{p_.delta_cap});
        double lr = delta * log_n_ + std::log(static_cast<double>(m)) - log_volume_;
        if (accept(lr)) {
            cfg_.remove(l.edge, l.time);
            loops_ = static_cast<std::size_t>(static_cast<long>(loops_) + delta);
            ++counters_.accepted[kRemove];
        }
    }

    void propose_flip() {
        ++counters_.proposed[kFlip];
        const std::size_t m = cfg_.size();
        if (m == 0 || p_.u <= 0.0 || p_.u >= 1.0) {
            return;
        }
        std::uniform_int_distribution<std::size_t> pick(0, m - 1);
        Link l = cfg_.at(pick(rng_));
        int delta = delta_loops(cfg_, Move{MoveType::Flip, l}, DeltaOptions{p_.delta_cap});
        double lr = delta * log_n_ + (l.kind == LinkKind::Cross ? log_c_to_d_ : -log_c_to_d_);
        if (accept(lr)) {
            cfg_.flip(l.edge, l.time);
            loops_ = static_cast<std::size_t>(static_cast<long>(loops_) + delta);
            ++counters_.accepted[kFlip];
        }
    }

    GeometryPtr geom_;
    SamplerParams p_;
    LinkConfiguration cfg_;
    std::mt19937_64 rng_;
    std::uniform_real_distribution<double> unit_{0.0, 1.0};
    std::size_t loops_ = 0;
    std::uint64_t steps_ = 0;
    std::uint64_t sweep_length_ = 1;
    double volume_ = 0.0;
    double log_volume_ = 0.0;
    double log_n_ = 0.0;
    double log_c_to_d_ = 0.0;
    std::array<double, 3> move_cdf_{};
    MoveCounters counters_;
};

/// Runs burn-in, then calls `observe(chain, sweep)` after every `thin`-th
/// measurement sweep.
template <class Observer>
MoveCounters run_chain(GeometryPtr geom, const SamplerParams& p, Observer&& observe) {
    Chain chain(std::move(geom), p);
    for (std::uint64_t s = 0; s < p.burnin; ++s) {
        chain.sweep();
    }
    for (std::uint64_t s = 0; s < p.sweeps; ++s) {
        chain.sweep();
        if (s % p.thin == 0) {
            observe(static_cast<const Chain&>(chain), s);
        }
    }
    return chain.counters();
}

/// Worker count from LOOPSIM_THREADS, else the hardware concurrency.
inline unsigned default_threads() {
    if (const char* env = std::getenv("LOOPSIM_THREADS")) {
        int v = std::atoi(env);
        if (v > 0) {
            return static_cast<unsigned>(v);
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs `replicas` independent chains with derived seeds. `make(r)` builds
/// the observer for replica r; observers are returned in replica order so
/// the merged result does not depend on scheduling.
template <class Factory>
auto run_replicas(GeometryPtr geom, const SamplerParams& p, std::size_t replicas, Factory&& make,
                  unsigned threads = 0) {
    using Obs = decltype(make(std::size_t{0}));
    std::vector<Obs> observers;
    observers.reserve(replicas);
    for (std::size_t r = 0; r < replicas; ++r) {
        observers.push_back(make(r));
    }
    std::vector<MoveCounters> counters(replicas);
    if (threads == 0) {
        threads = default_threads();
    }
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(replicas, 1)));
    std::size_t next = 0;
    std::mutex mu;
    std::exception_ptr failure;
    auto worker = [&]() {
        for (;;) {
            std::size_t r;
            {
                std::lock_guard<std::mutex> lock(mu);
                if (next >= replicas || failure) {
                    return;
                }
                r = next++;
            }
            try {
                SamplerParams pr = p;
                pr.seed = replica_seed(p.seed, r);
                counters[r] = run_chain(geom, pr, observers[r]);
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                failure = std::current_exception();
            }
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned i = 0; i < threads; ++i) {
            pool.emplace_back(worker);
        }
        for (auto& t : pool) {
            t.join();
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
    MoveCounters total;
    for (const auto& c : counters) {
        total += c;
    }
    return std::make_pair(std::move(observers), total);
}

// ---- Poisson domination ----------------------------------------------------

struct DominationReport {
    Estimate links;
    double poisson_mean = 0.0;     // d n beta K'
    double threshold = 0.0;        // e^2 d n beta K'
    double tail_frequency = 0.0;   // fraction of samples above threshold
    bool mean_ok = false;
    bool tail_ok = false;
};

/// Checks the link count against the Poisson(n) domination: mean below
/// d n beta K' + 3 SE and exceedances of e^2 d n beta K' rarer than 1e-3.
inline DominationReport check_poisson_domination(const BatchMeans& link_counts, std::uint64_t exceed,
                                                 const TorusGeometry& g, int n) {
    DominationReport r;
    r.links = link_counts.estimate();
    r.poisson_mean = static_cast<double>(g.dim()) * n * g.beta() * static_cast<double>(g.num_vertices());
    r.threshold = std::exp(2.0) * r.poisson_mean;
    r.tail_frequency = r.links.samples ? static_cast<double>(exceed) / static_cast<double>(r.links.samples) : 0.0;
    r.mean_ok = r.links.mean <= r.poisson_mean + 3.0 * r.links.se;
    r.tail_ok = r.tail_frequency < 1e-3;
    return r;
}

}  // namespace loopsim

#endif  // LOOPSIM_SAMPLER_HPP
