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

// loopsim: sampling, loop statistics, connection estimates and checks for
// the random loop model behind the spin-S quantum chains.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "loopsim/loopsim.hpp"
#include "loopsim/run_config.hpp"
#include "loopsim/verification.hpp"

using json = nlohmann::json;
using namespace loopsim;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitCriterion = 3;
constexpr const char* kVersion = "1.0.0";

/// Thrown when a check ran to completion and failed.
struct CheckFailed : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Output sink: a file or stdout. The first line is always the header.
class Output {
  public:
    explicit Output(const std::string& path) {
        if (!path.empty() && path != "-") {
            file_ = std::make_unique<std::ofstream>(path);
            if (!*file_) {
                throw std::runtime_error("cannot open '" + path + "' for writing");
            }
        }
    }
    std::ostream& os() { return file_ ? *file_ : std::cout; }
    void line(const json& j) { os() << j.dump() << '\n'; }

  private:
    std::unique_ptr<std::ofstream> file_;
};

std::ofstream open_side_file(const std::string& path) {
    std::ofstream f(path);
    if (!f) {
        throw std::runtime_error("cannot open '" + path + "' for writing");
    }
    return f;
}

json header(const RunConfig& cfg, const std::vector<std::string>& warnings) {
    return json{{"header",
                 {{"program", "loopsim"}, {"version", kVersion}, {"seed", cfg.seed}, {"config", cfg}, {"warnings", warnings}}}};
}

json estimate_json(const Estimate& e) { return json{{"mean", e.mean}, {"se", e.se}, {"ess", e.ess}, {"samples", e.samples}}; }

json displacement_json(const Displacement& d) { return json{{"x", d.x}, {"t", d.t}}; }

std::string displacement_text(const Displacement& d) {
    std::string s;
    for (std::size_t i = 0; i < d.x.size(); ++i) {
        s += (i ? "," : "") + std::to_string(d.x[i]);
    }
    return s + ":" + detail::format_double(d.t);
}

json small_cube_json(const TorusGeometry& g, const SmallCube& s) {
    return json{{"x", g.coords(s.vertex)}, {"window", s.window}};
}

LinkConfiguration read_configuration(const std::string& path) {
    if (path.empty()) {
        throw std::invalid_argument("--input is required");
    }
    if (path == "-") {
        return deserialize(std::cin);
    }
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open '" + path + "'");
    }
    return deserialize(in);
}

// ---- subcommands -------------------------------------------------------------

void cmd_sample(const RunConfig& cfg, Output& out, unsigned threads) {
    auto g = cfg.geometry();
    struct Observer {
        std::vector<std::string> lines;
        BatchMeans links, loops, cross_fraction;
        std::size_t replica = 0;
        void operator()(const Chain& ch, std::uint64_t sweep) {
            const auto& c = ch.config();
            std::size_t crosses = 0;
            for (const Link& l : c.links()) {
                crosses += l.kind == LinkKind::Cross;
            }
            links.add(static_cast<double>(c.size()));
            loops.add(static_cast<double>(ch.loops()));
            if (!c.empty()) {
                cross_fraction.add(static_cast<double>(crosses) / static_cast<double>(c.size()));
            }
            lines.push_back(json{{"replica", replica},
                                 {"sweep", sweep},
                                 {"links", c.size()},
                                 {"crosses", crosses},
                                 {"double_bars", c.size() - crosses},
                                 {"loops", ch.loops()}}
                                .dump());
        }
    };
    auto [obs, counters] = run_replicas(
        g, cfg.sampler(), cfg.replicas,
        [](std::size_t r) {
            Observer o;
            o.replica = r;
            return o;
        },
        threads);
    std::vector<Estimate> links, loops, cf;
    for (auto& o : obs) {
        for (const auto& l : o.lines) {
            out.os() << l << '\n';
        }
        links.push_back(o.links.estimate());
        loops.push_back(o.loops.estimate());
        cf.push_back(o.cross_fraction.estimate());
    }
    out.line(json{{"summary",
                   {{"links", estimate_json(combine(links))},
                    {"loops", estimate_json(combine(loops))},
                    {"cross_fraction", estimate_json(combine(cf))},
                    {"acceptance",
                     {{"insert", counters.rate(kInsert)}, {"remove", counters.rate(kRemove)}, {"flip", counters.rate(kFlip)}}}}}});
}

void cmd_loops(const RunConfig& cfg, Output& out) {
    LinkConfiguration c = read_configuration(cfg.input);
    const TorusGeometry& g = c.geometry();
    std::mt19937_64 rng(cfg.seed);
    Pairing bottom = parse_pairing(cfg.pairing, g, rng);
    Pairing top = cfg.top_pairing.empty() ? bottom : parse_pairing(cfg.top_pairing, g, rng);
    ClosingSweep sweep = sweep_closing_links(c, bottom);
    out.line(json{{"sites", g.num_vertices()},
                  {"links", c.size()},
                  {"l_per", count_loops(c)},
                  {"l_pairing", decompose_with_pairings(c, bottom, top).count()},
                  {"L", sweep.closing},
                  {"minimal_pairs_bottom", minimal_pair_count(bottom, g)},
                  {"bottom_pairing", bottom},
                  {"top_pairing", top}});
}

std::vector<Displacement> requested_displacements(const RunConfig& cfg, const TorusGeometry& g) {
    std::vector<Displacement> disp;
    for (const auto& s : cfg.displacements) {
        disp.push_back(parse_displacement(s, g.dim()));
    }
    if (disp.empty()) {
        // Default: the first axis out to half the side, at t = 0 and beta/4.
        for (double t : {0.0, g.beta() / 4}) {
            for (int x = 0; x <= g.side(0) / 2; ++x) {
                std::vector<int> v(static_cast<std::size_t>(g.dim()), 0);
                v[0] = x;
                disp.push_back({v, t});
            }
        }
    }
    return disp;
}

std::vector<ConnectionEstimate> run_connection(const RunConfig& cfg, const std::vector<Displacement>& disp,
                                               unsigned threads) {
    auto g = cfg.geometry();
    struct Observer {
        std::shared_ptr<ConnectionAccumulator> acc;
        void operator()(const Chain& ch, std::uint64_t) { acc->add(ch.config()); }
    };
    auto [obs, counters] = run_replicas(
        g, cfg.sampler(), cfg.replicas,
        [&](std::size_t) { return Observer{std::make_shared<ConnectionAccumulator>(g, disp, cfg.time_origins)}; },
        threads);
    std::vector<std::vector<ConnectionEstimate>> parts;
    for (auto& o : obs) {
        parts.push_back(o.acc->estimates());
    }
    return combine_estimates(parts);
}

void write_csv(const std::string& path, const json& head, const std::vector<ConnectionEstimate>& est) {
    if (path.empty()) {
        return;
    }
    auto f = open_side_file(path);
    f << "# " << head.dump() << '\n';
    f << "displacement,probability,se,ess\n";
    for (const auto& e : est) {
        f << displacement_text(e.displacement) << ',' << detail::format_double(e.probability) << ',' << detail::format_double(e.se) << ','
          << detail::format_double(e.ess) << '\n';
    }
}

json estimates_json(const std::vector<ConnectionEstimate>& est) {
    json arr = json::array();
    for (const auto& e : est) {
        arr.push_back(json{{"displacement", displacement_json(e.displacement)},
                           {"probability", e.probability},
                           {"se", e.se},
                           {"ess", e.ess},
                           {"samples", e.samples}});
    }
    return arr;
}

void cmd_estimate_connection(const RunConfig& cfg, Output& out, const json& head, unsigned threads) {
    auto g = cfg.geometry();
    auto est = run_connection(cfg, requested_displacements(cfg, *g), threads);
    write_csv(cfg.csv, head, est);
    out.line(json{{"estimates", estimates_json(est)}});
}

json fit_json(const DecayFit& f) {
    return json{{"rate", f.rate},         {"rate_se", f.rate_se},         {"ci95", {f.ci_low, f.ci_high}},
                {"intercept", f.intercept}, {"used", f.used},              {"window", {f.window_min, f.window_max}},
                {"residuals", f.residuals}};
}

void cmd_decay_scan(const RunConfig& cfg, Output& out, const json& head, unsigned threads) {
    auto g = cfg.geometry();
    std::vector<Displacement> disp;
    if (!cfg.displacements.empty()) {
        disp = requested_displacements(cfg, *g);
    } else {
        // Rays from the origin along the first axis, in time, and diagonally.
        const int reach = cfg.reach > 0 ? cfg.reach : g->side(0) / 2;
        const int steps = std::max(1, cfg.time_steps);
        auto along = [&](int x) {
            std::vector<int> v(static_cast<std::size_t>(g->dim()), 0);
            v[0] = x;
            return v;
        };
        for (int x = 1; x <= reach; ++x) {
            disp.push_back({along(x), 0.0});
        }
        for (int k = 1; k <= steps; ++k) {
            disp.push_back({along(0), k * g->beta() / (2.0 * steps)});
            disp.push_back({along(k), k * g->beta() / (2.0 * steps)});
        }
    }
    auto est = run_connection(cfg, disp, threads);
    write_csv(cfg.csv, head, est);
    FitMode mode = parse_fit_mode(cfg.fit_mode);
    json result{{"estimates", estimates_json(est)}};
    try {
        result["fit"] = fit_json(fit_decay(*g, est, mode));
        result["fit"]["mode"] = cfg.fit_mode;
    } catch (const std::runtime_error& e) {
        result["fit"] = json{{"error", e.what()}, {"mode", cfg.fit_mode}};
    }
    json rays = json::array();
    auto ray_fits = fit_decay_rays(*g, est);
    for (const RayFit& rf : ray_fits) {
        json r{{"direction", {{"x", rf.unit_x}, {"t", rf.unit_t}}}, {"members", rf.members}};
        if (rf.fitted) {
            r["fit"] = fit_json(rf.fit);
        } else {
            r["error"] = rf.note;
        }
        rays.push_back(r);
    }
    result["rays"] = rays;
    if (auto s = slowest_ray(ray_fits)) {
        result["slowest_ray"] = *s;
    }
    result["monotonicity_violations"] = monotonicity_violations(*g, est);
    if (!cfg.dat.empty()) {
        auto f = open_side_file(cfg.dat);
        f << "# " << head.dump() << '\n';
        f << "# distance probability se\n";
        for (const auto& e : est) {
            f << detail::format_double(fit_distance(*g, e.displacement, mode)) << ' ' << detail::format_double(e.probability) << ' '
              << detail::format_double(e.se) << '\n';
        }
    }
    out.line(result);
}

void cmd_events_scan(const RunConfig& cfg, Output& out) {
    auto g = cfg.geometry();
    CubeComplex cx(g, cfg.R0, cfg.n);
    const int translates = cx.num_translates();
    struct Counts {
        std::vector<BatchMeans> c, e, t, b;       // per translate: fraction of cubes
        std::vector<BatchMeans> dc, de, dt, db;   // per translate: event in every cube
    };
    Counts k;
    for (auto* v : {&k.c, &k.e, &k.t, &k.b, &k.dc, &k.de, &k.dt, &k.db}) {
        v->resize(static_cast<std::size_t>(translates));
    }
    SamplerParams sp = cfg.sampler();
    for (std::size_t r = 0; r < cfg.replicas; ++r) {
        SamplerParams pr = sp;
        pr.seed = replica_seed(sp.seed, r);
        run_chain(g, pr, [&](const Chain& ch, std::uint64_t) {
            for (int tr = 0; tr < translates; ++tr) {
                EventScan s = scan_events(ch.config(), cx, tr);
                const double N = static_cast<double>(s.cubes);
                auto i = static_cast<std::size_t>(tr);
                k.c[i].add(s.crowded / N);
                k.e[i].add(s.empty / N);
                k.t[i].add(s.transposition / N);
                k.b[i].add(s.bad / N);
                k.dc[i].add(s.crowded == s.cubes);
                k.de[i].add(s.empty == s.cubes);
                k.dt[i].add(s.transposition == s.cubes);
                k.db[i].add(s.bad == s.cubes);
            }
        });
    }
    json per = json::array();
    for (std::size_t i = 0; i < static_cast<std::size_t>(translates); ++i) {
        per.push_back(json{{"translate", i},
                           {"cube_fraction",
                            {{"C", estimate_json(k.c[i].estimate())},
                             {"E", estimate_json(k.e[i].estimate())},
                             {"T", estimate_json(k.t[i].estimate())},
                             {"B", estimate_json(k.b[i].estimate())}}},
                           {"distributed",
                            {{"C", estimate_json(k.dc[i].estimate())},
                             {"E", estimate_json(k.de[i].estimate())},
                             {"T", estimate_json(k.dt[i].estimate())},
                             {"B", estimate_json(k.db[i].estimate())}}}});
    }
    BoundInputs in;
    in.d = g->dim();
    in.u = cfg.u;
    in.R = cx.R();
    in.n = cfg.n;
    in.beta = g->beta();
    in.K_prime = static_cast<double>(g->num_vertices());
    BoundValues bv = lemma33_bounds(in);
    out.line(json{{"cubes",
                   {{"R", cx.R()},
                    {"big_cubes", cx.num_big_cubes()},
                    {"translates", translates},
                    {"window_height", cx.window_height()}}},
                  {"translates", per},
                  {"phi", phi(g->dim())},
                  {"bounds",
                   {{"C1", bv.C1},
                    {"E", bv.bound_E},
                    {"T", bv.bound_T},
                    {"C", bv.bound_C},
                    {"m0", bv.m0},
                    {"M", bv.M},
                    {"Delta", bv.Delta},
                    {"log_Z_lower", bv.log_Z_lower}}}});
}

void cmd_algo_trace(const RunConfig& cfg, Output& out) {
    LinkConfiguration c = cfg.input.empty() ? [&] {
        // No input: take the final state of a chain.
        Chain chain(cfg.geometry(), cfg.sampler());
        for (std::uint64_t s = 0; s < cfg.burnin + cfg.sweeps; ++s) {
            chain.sweep();
        }
        return chain.config();
    }()
                                            : read_configuration(cfg.input);
    GeometryPtr g = c.geometry_ptr();
    CubeComplex cx(g, cfg.R0, cfg.n);
    SpaceTimePoint src = cfg.source.empty() ? SpaceTimePoint{0, 0.0} : parse_point(cfg.source, *g);
    SpaceTimePoint dst;
    if (cfg.target.empty()) {
        // Middle of the loop through the source.
        auto tr = trace_loop(c, cx, src);
        const LoopRun& r = tr.runs[tr.runs.size() / 2];
        dst = SpaceTimePoint{r.vertex, ::loopsim::detail::wrap_time(0.5 * (r.from + r.to), g->beta())};
    } else {
        dst = parse_point(cfg.target, *g);
    }
    ExtractedPath p = extract_path(c, cx, src, dst);
    json cubes = json::array();
    for (const auto& s : p.cubes) {
        cubes.push_back(small_cube_json(*g, s));
    }
    json segs = json::array();
    for (const auto& s : p.segments) {
        json w = json::array();
        for (const auto& q : s.witness_cubes) {
            w.push_back(small_cube_json(*g, q));
        }
        segs.push_back(json{{"begin", s.begin},
                            {"length", s.length},
                            {"rule", s.rule},
                            {"charged", s.charged},
                            {"bad", s.bad},
                            {"translate", s.translate},
                            {"big_cube", s.big_cube},
                            {"witness_cubes", w}});
    }
    auto problems = path_problems(cx, p, src, dst);
    out.line(json{{"source", {{"x", g->coords(src.vertex)}, {"t", src.time}}},
                  {"target", {{"x", g->coords(dst.vertex)}, {"t", dst.time}}},
                  {"R", cx.R()},
                  {"window_height", cx.window_height()},
                  {"path", cubes},
                  {"segments", segs},
                  {"bad_fraction", p.bad_fraction},
                  {"best_translate", p.best_translate},
                  {"best_fraction", p.best_fraction},
                  {"phi", phi(g->dim())},
                  {"visits", p.visits},
                  {"diagonal_erasures", p.diagonal_erasures},
                  {"reentries", p.reentries},
                  {"problems", problems}});
    if (!problems.empty()) {
        throw CheckFailed("extracted path failed validation: " + problems.front());
    }
}

void cmd_verify_lemma22(const RunConfig& cfg, Output& out, unsigned threads) {
    auto g = cfg.geometry();
    QuantumModel model = build_hamiltonian(*g, cfg.n, cfg.u, PairConvention::LoopMatched);
    std::vector<Displacement> disp;
    for (double t : {0.0, g->beta() / 4}) {
        for (VertexId v = 0; v < g->num_vertices(); ++v) {
            if (v != 0 || t != 0.0) {
                disp.push_back({g->coords(v), t});
            }
        }
    }
    auto est = run_connection(cfg, disp, threads);
    bool pass = true;
    double worst = 0.0;
    for (const auto& e : est) {
        int y = static_cast<int>(g->vertex(e.displacement.x));
        CorrelationReport r = verify_lemma22(model, 0, 0.0, y, e.displacement.t, g->beta(), e);
        pass = pass && r.pass;
        worst = std::max(worst, std::abs(r.z));
        out.line(json{{"x", e.displacement.x},
                      {"t", e.displacement.t},
                      {"exact_s1", r.exact_s1},
                      {"exact_s2", r.exact_s2},
                      {"exact_s3", r.exact_s3},
                      {"probability", r.probability},
                      {"se", r.se},
                      {"ess", r.ess},
                      {"predicted", r.predicted},
                      {"z", r.z},
                      {"pass", r.pass},
                      {"s2_bound", r.s2_bound},
                      {"s1_equals_s3", r.s1_equals_s3}});
    }
    out.line(json{{"coefficient", spin_coefficient(cfg.n)}, {"max_abs_z", worst}, {"pass", pass}});
    std::cerr << "verify-lemma22: max |z| = " << worst << (pass ? "  PASS" : "  FAIL") << '\n';
    if (!pass) {
        throw CheckFailed("a point exceeds |z| = 3");
    }
}

int cmd_verify_suite(const std::vector<int>& only, std::uint64_t seed, bool verbose) {
    verification::SuiteOptions opt;
    opt.seed = seed;
    if (verbose) {
        opt.log = [](const std::string& s) { std::cerr << s << '\n'; };
    }
    std::vector<int> ids = only;
    if (ids.empty()) {
        for (int i = 1; i <= verification::kNumCriteria; ++i) {
            ids.push_back(i);
        }
    }
    bool all = true;
    for (int id : ids) {
        auto r = verification::run_criterion(id, opt);
        std::cout << verification::format_line(r) << '\n';
        if (verbose) {
            for (const auto& d : r.details) {
                std::cout << "    " << d << '\n';
            }
        }
        std::cout.flush();
        all = all && r.pass;
    }
    return all ? kExitOk : kExitCriterion;
}

/// --config FILE is read before the flags are parsed, so flags override it.
void preload_config(int argc, char** argv, RunConfig& cfg) {
    for (int i = 1; i < argc; ++i) {
        std::string a = argv[i];
        std::string path;
        if (a == "--config" && i + 1 < argc) {
            path = argv[i + 1];
        } else if (a.rfind("--config=", 0) == 0) {
            path = a.substr(9);
        } else {
            continue;
        }
        std::ifstream in(path);
        if (!in) {
            throw std::runtime_error("cannot open config '" + path + "'");
        }
        // A header file may hold several JSON lines; the first one counts.
        std::string first;
        std::getline(in, first);
        std::string rest((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        json j;
        try {
            j = json::parse(first);
        } catch (const json::parse_error&) {
            j = json::parse(first + "\n" + rest);
        }
        from_json(config_object(j), cfg);
    }
}

}  // namespace

int main(int argc, char** argv) {
    RunConfig cfg;
    try {
        preload_config(argc, argv, cfg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    CLI::App app{"loopsim: random loop model sampler and checks"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    std::string config_path;
    unsigned threads = 0;
    std::vector<int> only;
    bool verbose = false;

    auto model_opts = [&](CLI::App* s) {
        s->add_option("--config", config_path, "JSON config or a previous output header; flags override it");
        s->add_option("--d", cfg.d, "Dimension");
        s->add_option("--k", cfg.k, "Torus half-sides k_r (side 4k_r); one value is repeated")->delimiter(',');
        s->add_option("--beta", cfg.beta, "Inverse temperature (time circle length)");
        s->add_option("--n", cfg.n, "Loop fugacity, 2S+1");
        s->add_option("--u", cfg.u, "Cross weight u in [0,1]");
        s->add_option("--seed", cfg.seed, "Random seed");
        s->add_option("--out", cfg.out, "Write the JSON-lines output here instead of stdout");
    };
    auto sampler_opts = [&](CLI::App* s) {
        s->add_option("--sweeps", cfg.sweeps, "Measured sweeps per replica");
        s->add_option("--burnin", cfg.burnin, "Discarded sweeps per replica");
        s->add_option("--thin", cfg.thin, "Measure every thin-th sweep");
        s->add_option("--sweep-length", cfg.sweep_length, "Moves per sweep; 0 = d K' beta max(n,1)");
        s->add_option("--init", cfg.init, "Initial state: auto, empty, poisson or dimer");
        s->add_option("--replicas", cfg.replicas, "Independent chains");
        s->add_option("--threads", threads, "Worker threads; 0 = LOOPSIM_THREADS or all cores");
    };
    auto connection_opts = [&](CLI::App* s) {
        s->add_option("--disp", cfg.displacements, "Displacement x1,...,xd:t (repeatable)");
        s->add_option("--time-origins", cfg.time_origins, "Evenly spaced starting times averaged per sample");
        s->add_option("--csv", cfg.csv, "CSV file: displacement, probability, SE, ESS");
    };

    auto* sample = app.add_subcommand("sample", "Run the Markov chain and emit one JSON record per measurement");
    model_opts(sample);
    sampler_opts(sample);

    auto* loops = app.add_subcommand("loops", "Loop counts of a serialized configuration");
    loops->add_option("--config", config_path, "JSON config");
    loops->add_option("--input", cfg.input, "Serialized configuration ('-' for stdin)")->required();
    loops->add_option("--pairing", cfg.pairing, "Bottom pairing: dimer, dimer:<axis> or random");
    loops->add_option("--top-pairing", cfg.top_pairing, "Top pairing (default: the bottom one)");
    loops->add_option("--seed", cfg.seed, "Seed for random pairings");
    loops->add_option("--out", cfg.out, "Output file");

    auto* conn = app.add_subcommand("estimate-connection", "Estimate connection probabilities");
    model_opts(conn);
    sampler_opts(conn);
    connection_opts(conn);

    auto* decay = app.add_subcommand("decay-scan", "Connection probabilities along rays and exponential fits");
    model_opts(decay);
    sampler_opts(decay);
    connection_opts(decay);
    decay->add_option("--reach", cfg.reach, "Largest spatial distance on the first axis (0 = half the side)");
    decay->add_option("--time-steps", cfg.time_steps, "Points on the time ray up to beta/2");
    decay->add_option("--mode", cfg.fit_mode, "Distance for the global fit: joint, spatial or temporal");
    decay->add_option("--dat", cfg.dat, "gnuplot data file: distance, probability, SE");

    auto* events = app.add_subcommand("events-scan", "Bad-event frequencies per big cube and distributed events");
    model_opts(events);
    sampler_opts(events);
    events->add_option("--R0", cfg.R0, "Lower bound for the block height R");

    auto* trace = app.add_subcommand("algo-trace", "Extract a path of small cubes between two connected points");
    model_opts(trace);
    sampler_opts(trace);
    trace->add_option("--R0", cfg.R0, "Lower bound for the block height R");
    trace->add_option("--input", cfg.input, "Serialized configuration (default: sample one)");
    trace->add_option("--source", cfg.source, "Source point x1,...,xd:t (default origin, t=0)");
    trace->add_option("--target", cfg.target, "Target point (default: halfway along the loop)");

    auto* spin_cmd = app.add_subcommand("verify-lemma22", "Exact spin correlations against loop connection estimates");
    model_opts(spin_cmd);
    sampler_opts(spin_cmd);
    spin_cmd->add_option("--time-origins", cfg.time_origins, "Starting times averaged per sample");

    auto* suite = app.add_subcommand("verify-suite", "Run the acceptance criteria");
    suite->add_option("--only", only, "Criteria to run (comma separated)")->delimiter(',');
    std::uint64_t suite_seed = verification::SuiteOptions{}.seed;
    suite->add_option("--seed", suite_seed, "Suite seed");
    suite->add_flag("--verbose", verbose, "Print per-criterion details and progress");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    CLI::App* sub = app.get_subcommands().front();
    cfg.command = sub->get_name();
    if (sub == spin_cmd && sub->count("--sweeps") == 0 && config_path.empty()) {
        cfg.sweeps = 1'000'000;
    }

    try {
        if (sub == suite) {
            return cmd_verify_suite(only, suite_seed, verbose);
        }
        std::vector<std::string> warnings = validate(cfg);
        for (const auto& w : warnings) {
            std::cerr << "warning: " << w << '\n';
        }
        Output out(cfg.out);
        json head = header(cfg, warnings);
        out.line(head);
        if (sub == sample) {
            cmd_sample(cfg, out, threads);
        } else if (sub == loops) {
            cmd_loops(cfg, out);
        } else if (sub == conn) {
            cmd_estimate_connection(cfg, out, head, threads);
        } else if (sub == decay) {
            cmd_decay_scan(cfg, out, head, threads);
        } else if (sub == events) {
            cmd_events_scan(cfg, out);
        } else if (sub == trace) {
            cmd_algo_trace(cfg, out);
        } else if (sub == spin_cmd) {
            cmd_verify_lemma22(cfg, out, threads);
        }
    } catch (const CheckFailed& e) {
        std::cerr << "check failed: " << e.what() << '\n';
        return kExitCriterion;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitOk;
}
