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
#ifndef LOOPSIM_SERIALIZATION_HPP
#define LOOPSIM_SERIALIZATION_HPP

#include <cstdio>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "loopsim/configuration.hpp"

namespace loopsim {

/// Thrown by `deserialize`; carries the offending line and field.
class ParseError : public std::runtime_error {
  public:
    ParseError(int line, const std::string& field, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ", field '" + field + "': " + what),
          line_(line),
          field_(field) {}
    int line() const { return line_; }
    const std::string& field() const { return field_; }

  private:
    int line_;
    std::string field_;
};

namespace detail {

inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace detail

/// Canonical text form. Header lines, then one link per line in
/// (time, edge) order:
///
///     loopsim-config 1
///     d 1
///     k 2
///     beta 1.5
///     links 2
///     0 1 0.25 D
///     3 4 0.75000000000000011 C
///
/// A link line lists the coordinates of the lower endpoint, then of the
/// upper endpoint, then the time and the kind (C or D).
inline std::string serialize(const LinkConfiguration& cfg) {
    const TorusGeometry& g = cfg.geometry();
    std::ostringstream os;
    os << "loopsim-config 1\n";
    os << "d " << g.dim() << "\n";
    os << "k";
    for (int kr : g.k()) {
        os << ' ' << kr;
    }
    os << "\n";
    os << "beta " << detail::format_double(g.beta()) << "\n";
    os << "links " << cfg.size() << "\n";
    for (const Link& l : cfg.sorted_links()) {
        const Edge& ed = g.edge(l.edge);
        for (VertexId v : {ed.lo, ed.hi}) {
            for (int c : g.coords(v)) {
                os << c << ' ';
            }
        }
        os << detail::format_double(l.time) << ' ' << kind_char(l.kind) << "\n";
    }
    return os.str();
}

namespace detail {

inline std::vector<std::string> split_fields(const std::string& line) {
    std::istringstream is(line);
    std::vector<std::string> out;
    std::string tok;
    while (is >> tok) {
        out.push_back(tok);
    }
    return out;
}

inline long parse_long(const std::string& s, int line, const std::string& field) {
    try {
        std::size_t used = 0;
        long v = std::stol(s, &used);
        if (used != s.size()) {
            throw std::invalid_argument("trailing characters");
        }
        return v;
    } catch (const std::exception&) {
        throw ParseError(line, field, "expected an integer, got '" + s + "'");
    }
}

inline double parse_double(const std::string& s, int line, const std::string& field) {
    try {
        std::size_t used = 0;
        double v = std::stod(s, &used);
        if (used != s.size()) {
            throw std::invalid_argument("trailing characters");
        }
        return v;
    } catch (const std::exception&) {
        throw ParseError(line, field, "expected a number, got '" + s + "'");
    }
}

}  // namespace detail

/// Parses the canonical text form. When `expected` is given the header must
/// describe the same torus.
inline LinkConfiguration deserialize(std::istream& in, GeometryPtr expected = nullptr) {
    std::string line;
    int lineno = 0;
    auto next = [&](const char* what) {
        while (std::getline(in, line)) {
            ++lineno;
            if (!line.empty() && line.find_first_not_of(" \t\r") != std::string::npos) {
                return detail::split_fields(line);
            }
        }
        throw ParseError(lineno + 1, what, "unexpected end of input");
    };

    auto f = next("magic");
    if (f.size() != 2 || f[0] != "loopsim-config") {
        throw ParseError(lineno, "magic", "expected 'loopsim-config <version>'");
    }
    if (detail::parse_long(f[1], lineno, "version") != 1) {
        throw ParseError(lineno, "version", "unsupported version " + f[1]);
    }
    f = next("d");
    if (f.size() != 2 || f[0] != "d") {
        throw ParseError(lineno, "d", "expected 'd <dimension>'");
    }
    int d = static_cast<int>(detail::parse_long(f[1], lineno, "d"));
    if (d < 1) {
        throw ParseError(lineno, "d", "dimension must be >= 1");
    }
    f = next("k");
    if (f.size() != static_cast<std::size_t>(d) + 1 || f[0] != "k") {
        throw ParseError(lineno, "k", "expected 'k' followed by " + std::to_string(d) + " integers");
    }
    std::vector<int> k;
    for (int r = 0; r < d; ++r) {
        k.push_back(static_cast<int>(detail::parse_long(f[static_cast<std::size_t>(r) + 1], lineno, "k")));
    }
    f = next("beta");
    if (f.size() != 2 || f[0] != "beta") {
        throw ParseError(lineno, "beta", "expected 'beta <value>'");
    }
    double beta = detail::parse_double(f[1], lineno, "beta");
    f = next("links");
    if (f.size() != 2 || f[0] != "links") {
        throw ParseError(lineno, "links", "expected 'links <count>'");
    }
    long count = detail::parse_long(f[1], lineno, "links");
    if (count < 0) {
        throw ParseError(lineno, "links", "negative link count");
    }

    GeometryPtr geom;
    try {
        geom = build_geometry(d, k, beta);
    } catch (const std::invalid_argument& e) {
        throw ParseError(lineno, "header", e.what());
    }
    if (expected) {
        if (!expected->same_shape(*geom)) {
            throw ParseError(lineno, "header", "configuration header does not match the requested geometry");
        }
        geom = expected;
    }

    LinkConfiguration cfg(geom);
    const std::size_t nf = 2 * static_cast<std::size_t>(d) + 2;
    for (long i = 0; i < count; ++i) {
        f = next("link");
        if (f.size() != nf) {
            throw ParseError(lineno, "link", "expected " + std::to_string(nf) + " fields, got " + std::to_string(f.size()));
        }
        std::vector<int> a(static_cast<std::size_t>(d));
        std::vector<int> b(static_cast<std::size_t>(d));
        for (int r = 0; r < d; ++r) {
            std::string name = "x" + std::to_string(r);
            a[static_cast<std::size_t>(r)] = static_cast<int>(detail::parse_long(f[static_cast<std::size_t>(r)], lineno, name));
            b[static_cast<std::size_t>(r)] =
                static_cast<int>(detail::parse_long(f[static_cast<std::size_t>(d + r)], lineno, "y" + std::to_string(r)));
            if (a[static_cast<std::size_t>(r)] < 0 || a[static_cast<std::size_t>(r)] >= geom->side(r) ||
                b[static_cast<std::size_t>(r)] < 0 || b[static_cast<std::size_t>(r)] >= geom->side(r)) {
                throw ParseError(lineno, name, "coordinate outside the torus");
            }
        }
        auto e = geom->find_edge(geom->vertex(a), geom->vertex(b));
        if (!e) {
            throw ParseError(lineno, "endpoints", "endpoints are not nearest neighbours");
        }
        double t = detail::parse_double(f[nf - 2], lineno, "time");
        const std::string& kf = f[nf - 1];
        LinkKind kind;
        if (kf == "C") {
            kind = LinkKind::Cross;
        } else if (kf == "D") {
            kind = LinkKind::DoubleBar;
        } else {
            throw ParseError(lineno, "kind", "expected C or D, got '" + kf + "'");
        }
        try {
            cfg.insert(Link{*e, t, kind});
        } catch (const std::invalid_argument& ex) {
            throw ParseError(lineno, "time", ex.what());
        }
    }
    return cfg;
}

inline LinkConfiguration deserialize(const std::string& text, GeometryPtr expected = nullptr) {
    std::istringstream is(text);
    return deserialize(is, std::move(expected));
}

}  // namespace loopsim

#endif  // LOOPSIM_SERIALIZATION_HPP
