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
#ifndef LOOPSIM_PATH_HPP
#define LOOPSIM_PATH_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "loopsim/configuration.hpp"
#include "loopsim/cubes.hpp"
#include "loopsim/events.hpp"
#include "loopsim/loops.hpp"

namespace loopsim {

// ---- walking a loop through the small cubes ---------------------------------

enum class Entry { Start, Temporal, Spatial };

/// One stay of the loop in a small cube.
struct CubeVisit {
    SmallCube cube;
    Entry entry = Entry::Start;
    /// Direction of travel on entry: +1 up, -1 down.
    int direction = +1;
    /// The link crossed on a spatial entry.
    Link via{};
};

/// A vertical stretch of the loop at one vertex; `to` is unwrapped, so it
/// may exceed beta or drop below 0.
struct LoopRun {
    VertexId vertex = 0;
    double from = 0.0;
    double to = 0.0;
    int direction = +1;
};

struct LoopTrace {
    std::vector<CubeVisit> visits;
    std::vector<LoopRun> runs;
    bool reached_target = false;
};

namespace detail {

inline double wrap_time(double t, double beta) {
    double y = std::fmod(t, beta);
    if (y < 0) {
        y += beta;
    }
    return y >= beta ? 0.0 : y;
}

inline long window_floor(double t, double h) { return static_cast<long>(std::floor(t / h)); }

}  // namespace detail

/// Follows the loop through `source` upwards. Stops at `target` when given
/// (the visit list then ends in the target's cube), otherwise when the walk
/// is back at the source. Throws std::invalid_argument when the target is
/// not on the loop.
inline LoopTrace trace_loop(const LinkConfiguration& cfg, const CubeComplex& cx, const SpaceTimePoint& source,
                            std::optional<SpaceTimePoint> target = std::nullopt) {
    const TorusGeometry& g = cfg.geometry();
    const double beta = g.beta();
    const double h = cx.window_height();
    const int W = cx.windows();
    if (source.vertex >= g.num_vertices() || (target && target->vertex >= g.num_vertices())) {
        throw std::out_of_range("space-time point vertex out of range");
    }
    LoopTrace tr;
    auto push = [&](VertexId v, long w, Entry e, int dir, const Link& via) {
        tr.visits.push_back(CubeVisit{SmallCube{v, TorusGeometry::wrap(static_cast<int>(w % W), W)}, e, dir, via});
    };
    // Appends the temporal moves of a run from `a` to `b` (unwrapped).
    auto sweep = [&](VertexId v, double a, double b, int dir) {
        long wa = detail::window_floor(a, h);
        long wb = detail::window_floor(b, h);
        if (dir > 0) {
            for (long w = wa + 1; w <= wb; ++w) {
                push(v, w, Entry::Temporal, +1, Link{});
            }
        } else {
            for (long w = wa - 1; w >= wb; --w) {
                push(v, w, Entry::Temporal, -1, Link{});
            }
        }
    };
    // Without a target the walk stops when it comes back to the source.
    const bool full_turn = !target;
    const SpaceTimePoint goal = target ? *target : source;
    // Unwrapped position of the goal on a run, if it lies on it.
    auto hits = [&](VertexId v, double a, double b, int dir, bool strict) -> std::optional<double> {
        if (goal.vertex != v) {
            return std::nullopt;
        }
        double t = goal.time;
        if (dir > 0) {
            double tt = t + std::ceil((a - t) / beta) * beta;
            if (tt < a || (strict && tt == a)) tt += beta;
            if (tt <= b) return tt;
        } else {
            double tt = t + std::floor((a - t) / beta) * beta;
            if (tt > a || (strict && tt == a)) tt -= beta;
            if (tt >= b) return tt;
        }
        return std::nullopt;
    };

    VertexId v = source.vertex;
    double a = detail::wrap_time(source.time, beta);
    int dir = +1;
    LinkKey at{a, std::numeric_limits<EdgeId>::max()};
    push(v, detail::window_floor(a, h), Entry::Start, +1, Link{});
    const std::size_t max_runs = 2 * cfg.size() + 2;
    for (std::size_t step = 0; step <= max_runs; ++step) {
        auto inc = cfg.incidences(v);
        double b;
        std::optional<Incidence> next;
        const double base = a - detail::wrap_time(a, beta);
        if (inc.empty()) {
            b = a + dir * beta;
        } else if (dir > 0) {
            auto it = std::upper_bound(inc.begin(), inc.end(), at,
                                       [](const LinkKey& k, const Incidence& x) { return k < x.key(); });
            bool wrapped = it == inc.end();
            next = wrapped ? inc.front() : *it;
            b = base + next->time + (wrapped ? beta : 0.0);
        } else {
            auto it = std::lower_bound(inc.begin(), inc.end(), at,
                                       [](const Incidence& x, const LinkKey& k) { return x.key() < k; });
            bool wrapped = it == inc.begin();
            next = wrapped ? inc.back() : *(it - 1);
            b = base + next->time - (wrapped ? beta : 0.0);
        }
        if (auto tt = hits(v, a, b, dir, full_turn && step == 0)) {
            sweep(v, a, *tt, dir);
            tr.runs.push_back(LoopRun{v, a, *tt, dir});
            tr.reached_target = true;
            return tr;
        }
        sweep(v, a, b, dir);
        tr.runs.push_back(LoopRun{v, a, b, dir});
        if (!next) {
            break;
        }
        Link via{next->edge, next->time, next->kind};
        if (next->kind == LinkKind::DoubleBar) {
            dir = -dir;
        }
        v = g.edge(next->edge).other(v);
        a = next->time;
        at = next->key();
        push(v, detail::window_floor(a, h), Entry::Spatial, dir, via);
    }
    if (target) {
        throw std::invalid_argument("target is not on the loop through the source");
    }
    throw std::logic_error("loop walk did not close");
}

// ---- extraction -------------------------------------------------------------

/// One step of the bookkeeping: `length` consecutive path cubes starting at
/// `begin`, all inside the witness big cube.
struct PathSegment {
    std::size_t begin = 0;
    std::size_t length = 0;
    /// Which branch of the case analysis produced the segment.
    std::string rule;
    /// Cubes the rule inspects (may include an erased cube).
    std::vector<SmallCube> witness_cubes;
    /// False for the unconditioned first and final pieces.
    bool charged = true;
    int translate = -1;
    std::size_t big_cube = 0;
    bool bad = false;
};

struct ExtractedPath {
    std::vector<SmallCube> cubes;
    std::vector<PathSegment> segments;
    /// Per translate: distinct big cubes met by the path, in order.
    std::vector<std::vector<std::size_t>> big_path;
    std::vector<std::vector<char>> bad_flags;
    std::vector<double> bad_fraction;
    int best_translate = 0;
    double best_fraction = 0.0;
    /// Visits of the traced loop up to the target.
    std::size_t visits = 0;
    /// Branches where the later of two cubes was reached only diagonally
    /// from the current one, so the other cube was erased.
    std::size_t diagonal_erasures = 0;
    /// Type 3 cubes the loop came back to after the branch's cubes; kept
    /// as uncharged single-cube segments.
    std::size_t reentries = 0;
};

class PathInvariantError : public std::logic_error {
  public:
    using std::logic_error::logic_error;
};

namespace detail {

class PathBuilder {
  public:
    PathBuilder(const LinkConfiguration& cfg, const CubeComplex& cx, const std::vector<CubeVisit>& visits)
        : cfg_(cfg), cx_(cx), v_(visits) {
        for (std::size_t i = 0; i < v_.size(); ++i) {
            last_[cx_.small_index(v_[i].cube)] = i;
        }
        target_ = v_.back().cube;
    }

    ExtractedPath run() {
        ExtractedPath out;
        out.visits = v_.size();
        std::vector<SmallCube>& path = out.cubes;
        path.push_back(v_[0].cube);
        open(out, 0, 1, "first", {v_[0].cube}, false);
        std::size_t p = last(v_[0].cube);
        bool done = v_[0].cube == target_;
        while (!done) {
            const std::size_t i = p + 1;
            if (i >= v_.size()) {
                throw PathInvariantError("walk ended before reaching the target cube");
            }
            const SmallCube sk = v_[i].cube;
            const SmallCube prev = path.back();
            const std::size_t at = path.size();
            path.push_back(sk);
            if (sk == target_) {
                open(out, at, 1, "final", {sk}, false);
                break;
            }
            if (small_cube_crowded(cfg_, cx_, sk) || small_cube_empty(cfg_, cx_, sk)) {
                open(out, at, 1, small_cube_crowded(cfg_, cx_, sk) ? "crowded" : "empty", {sk}, true);
                p = last(sk);
                continue;
            }
            const CubeVisit& exit = v_[i + 1];
            const std::size_t segs = out.segments.size();
            std::size_t q = p;
            if (v_[i].entry == Entry::Spatial && exit.entry == Entry::Temporal) {
                done = type_3a(out, i, prev, exit.direction, q);
            } else if (v_[i].entry == Entry::Temporal && exit.entry == Entry::Spatial) {
                done = type_3b(out, i, prev, q);
            } else {
                throw PathInvariantError("type 3 cube entered and left the same way");
            }
            if (last(sk) > q) {
                // The loop comes back to s_k after the branch's cubes, so
                // the branch would break the loop erasure.
                path.resize(at + 1);
                out.segments.resize(segs);
                open(out, at, 1, "type3-reentered", {sk}, false);
                ++out.reentries;
                p = last(sk);
                done = false;
                continue;
            }
            p = q;
        }
        finish(out);
        return out;
    }

  private:
    std::size_t last(const SmallCube& s) const {
        auto it = last_.find(cx_.small_index(s));
        return it == last_.end() ? npos : it->second;
    }

    bool visited_after(const SmallCube& s, std::size_t i) const {
        std::size_t l = last(s);
        return l != npos && l > i;
    }

    bool union_crowded(const SmallCube& a, const SmallCube& b) const {
        const SmallCube& low = cx_.shift_window(a, 1) == b ? a : b;
        return vertical_union_crowded(cfg_, cx_, low, 2);
    }

    bool cross_on(const SmallCube& a, const SmallCube& b) const {
        auto e = cfg_.geometry().find_edge(a.vertex, b.vertex);
        if (!e) {
            return false;
        }
        for (const Link& l : cfg_.links_on_edge(*e)) {
            if (l.kind == LinkKind::Cross && cx_.time_in_windows(l.time, a.window, 1)) {
                return true;
            }
        }
        return false;
    }

    // Appends the later-visited of two cubes last; erases the earlier one
    // when it is not adjacent to the current end of the path.
    void append_pair(ExtractedPath& out, const SmallCube& a, const SmallCube& b, std::size_t& p) {
        std::size_t la = last(a), lb = last(b);
        const SmallCube& later = (lb != npos && (la == npos || lb > la)) ? b : a;
        const SmallCube& other = later == a ? b : a;
        std::size_t lo = later == a ? lb : la;
        if (lo != npos && lo > p && cx_.small_adjacent(out.cubes.back(), other)) {
            out.cubes.push_back(other);
        } else if (lo != npos && lo > p) {
            ++out.diagonal_erasures;
        }
        out.cubes.push_back(later);
        p = std::max(la == npos ? 0 : la, lb == npos ? 0 : lb);
    }

    bool type_3a(ExtractedPath& out, std::size_t i, const SmallCube& prev, int dir, std::size_t& p) {
        const SmallCube sk = v_[i].cube;
        const SmallCube s1 = cx_.shift_window(sk, dir);
        const SmallCube s2 = cx_.shift_window(prev, dir);
        const std::size_t at = out.cubes.size() - 1;
        if (union_crowded(sk, s1) || small_cube_empty(cfg_, cx_, s1)) {
            out.cubes.push_back(s1);
            p = last(s1);
            open(out, at, 2, union_crowded(sk, s1) ? "3a-union-crowded" : "3a-above-empty", {sk, s1}, true);
            return s1 == target_;
        }
        const bool cross = cross_on(s1, s2);
        if (cross || small_cube_crowded(cfg_, cx_, s2)) {
            if (!visited_after(s2, i)) {
                if (last(s1) + 1 == v_.size()) {
                    out.cubes.push_back(s1);
                    open(out, at, 2, "terminal", {sk, s1, s2}, false);
                    return true;
                }
                throw PathInvariantError("3a: loop does not reach the cube beside");
            }
            append_pair(out, s1, s2, p);
            open(out, at, out.cubes.size() - at, cross ? "3a-cross" : "3a-side-crowded", {sk, s1, s2}, true);
            return out.cubes.back() == target_;
        }
        if (s1 == target_ || s2 == target_) {
            append_pair(out, s1, s2, p);
            open(out, at, out.cubes.size() - at, "terminal", {sk, s1, s2}, false);
            return true;
        }
        throw PathInvariantError("3a: no branch applies");
    }

    bool type_3b(ExtractedPath& out, std::size_t i, const SmallCube& prev, std::size_t& p) {
        const SmallCube sk = v_[i].cube;
        const CubeVisit& exit = v_[i + 1];
        const SmallCube s1 = exit.cube;
        const SmallCube s2{s1.vertex, prev.window};
        const std::size_t at = out.cubes.size() - 1;
        if (exit.via.kind == LinkKind::Cross) {
            out.cubes.push_back(s1);
            p = last(s1);
            open(out, at, 2, "3b-cross", {sk, s1}, true);
            return s1 == target_;
        }
        if (union_crowded(s1, s2)) {
            append_pair(out, s1, s2, p);
            open(out, at, out.cubes.size() - at, "3b-union-crowded", {sk, s1, s2}, true);
            return out.cubes.back() == target_;
        }
        if (i + 2 >= v_.size()) {
            out.cubes.push_back(s1);
            open(out, at, 2, "terminal", {sk, s1, s2}, false);
            return true;
        }
        if (v_[i + 2].cube != s2) {
            throw PathInvariantError("3b: loop does not turn into the cube below");
        }
        if (small_cube_empty(cfg_, cx_, s2)) {
            append_pair(out, s1, s2, p);
            open(out, at, out.cubes.size() - at, "3b-below-empty", {sk, s1, s2}, true);
            return out.cubes.back() == target_;
        }
        if (s1 == target_ || s2 == target_) {
            append_pair(out, s1, s2, p);
            open(out, at, out.cubes.size() - at, "terminal", {sk, s1, s2}, false);
            return true;
        }
        throw PathInvariantError("3b: no branch applies");
    }

    void open(ExtractedPath& out, std::size_t begin, std::size_t length, std::string rule,
              std::vector<SmallCube> witness, bool charged) {
        PathSegment seg;
        seg.begin = begin;
        seg.length = length;
        seg.rule = std::move(rule);
        seg.witness_cubes = std::move(witness);
        seg.charged = charged;
        out.segments.push_back(std::move(seg));
    }

    // Witness blocks and per-translate fractions.
    void finish(ExtractedPath& out) {
        std::size_t next = 0;
        for (PathSegment& seg : out.segments) {
            if (seg.begin != next) {
                throw PathInvariantError("segments do not tile the path");
            }
            next += seg.length;
            for (std::size_t j = seg.begin; j < seg.begin + seg.length; ++j) {
                seg.witness_cubes.push_back(out.cubes[j]);
            }
            for (int t = 0; t < cx_.num_translates(); ++t) {
                Block blk = cx_.block_containing(seg.witness_cubes.front(), t);
                bool all = std::all_of(seg.witness_cubes.begin(), seg.witness_cubes.end(),
                                       [&](const SmallCube& s) { return cx_.block_has_small(blk, s); });
                if (all) {
                    seg.translate = t;
                    seg.big_cube = cx_.cube_index_of(blk);
                    seg.bad = detect_bad_events(cfg_, cx_, blk).bad();
                    break;
                }
            }
            if (seg.translate < 0) {
                throw PathInvariantError("segment not contained in a single big cube");
            }
        }
        if (next != out.cubes.size()) {
            throw PathInvariantError("segments do not cover the path");
        }
        const int T = cx_.num_translates();
        out.big_path.assign(static_cast<std::size_t>(T), {});
        out.bad_flags.assign(static_cast<std::size_t>(T), {});
        out.bad_fraction.assign(static_cast<std::size_t>(T), 0.0);
        out.best_translate = 0;
        out.best_fraction = -1.0;
        for (int t = 0; t < T; ++t) {
            auto& bp = out.big_path[static_cast<std::size_t>(t)];
            auto& bf = out.bad_flags[static_cast<std::size_t>(t)];
            std::size_t bad = 0;
            for (const SmallCube& s : out.cubes) {
                Block blk = cx_.block_containing(s, t);
                std::size_t q = cx_.cube_index_of(blk);
                if (std::find(bp.begin(), bp.end(), q) == bp.end()) {
                    bp.push_back(q);
                    bool b = detect_bad_events(cfg_, cx_, blk).bad();
                    bf.push_back(b);
                    bad += b;
                }
            }
            double f = static_cast<double>(bad) / static_cast<double>(bp.size());
            out.bad_fraction[static_cast<std::size_t>(t)] = f;
            if (f > out.best_fraction) {
                out.best_fraction = f;
                out.best_translate = t;
            }
        }
    }

    static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

    const LinkConfiguration& cfg_;
    const CubeComplex& cx_;
    const std::vector<CubeVisit>& v_;
    std::unordered_map<std::size_t, std::size_t> last_;
    SmallCube target_;
};

}  // namespace detail

/// Loop-erased small-cube path from `source` to `target` along their
/// common loop, with the segment bookkeeping and bad big cubes per
/// translate. Throws std::invalid_argument if the points are not
/// connected and PathInvariantError if the case analysis breaks.
inline ExtractedPath extract_path(const LinkConfiguration& cfg, const CubeComplex& cx, const SpaceTimePoint& source,
                                  const SpaceTimePoint& target) {
    LoopTrace tr = trace_loop(cfg, cx, source, target);
    return detail::PathBuilder(cfg, cx, tr.visits).run();
}

/// Structural checks: adjacency, distinctness, end points, segment lengths.
inline std::vector<std::string> path_problems(const CubeComplex& cx, const ExtractedPath& p,
                                              const SpaceTimePoint& source, const SpaceTimePoint& target) {
    std::vector<std::string> out;
    if (p.cubes.empty()) {
        out.push_back("empty path");
        return out;
    }
    if (p.cubes.front() != cx.small_cube_at(source.vertex, source.time)) {
        out.push_back("first cube does not contain the source");
    }
    if (p.cubes.back() != cx.small_cube_at(target.vertex, target.time)) {
        out.push_back("last cube does not contain the target");
    }
    for (std::size_t i = 1; i < p.cubes.size(); ++i) {
        if (!cx.small_adjacent(p.cubes[i - 1], p.cubes[i])) {
            out.push_back("cubes " + std::to_string(i - 1) + " and " + std::to_string(i) + " not adjacent");
        }
    }
    std::vector<std::size_t> idx;
    for (const SmallCube& s : p.cubes) {
        idx.push_back(cx.small_index(s));
    }
    std::sort(idx.begin(), idx.end());
    if (std::adjacent_find(idx.begin(), idx.end()) != idx.end()) {
        out.push_back("repeated cube");
    }
    for (const PathSegment& s : p.segments) {
        if (s.length < 1 || s.length > 3) {
            out.push_back("segment length " + std::to_string(s.length));
        }
        if (s.charged && !s.bad) {
            out.push_back("charged segment at " + std::to_string(s.begin) + " (" + s.rule + ") in a good cube");
        }
    }
    return out;
}

}  // namespace loopsim

#endif  // LOOPSIM_PATH_HPP
