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


// Runs the acceptance criteria and prints one PASS/FAIL line per criterion.
// Exit status 0 when every selected criterion passes, 3 otherwise.

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "loopsim/verification.hpp"

int main(int argc, char** argv) {
    namespace v = loopsim::verification;
    CLI::App app{"loopsim acceptance criteria"};
    std::vector<int> only;
    std::uint64_t seed = v::SuiteOptions{}.seed;
    bool verbose = false;
    app.add_option("--only", only, "Criteria to run (comma separated, 1-12)")
        ->delimiter(',')
        ->check(CLI::Range(1, v::kNumCriteria));
    app.add_option("--seed", seed, "Suite seed");
    app.add_flag("--verbose", verbose, "Print details under each line and progress on stderr");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }
    if (only.empty()) {
        for (int i = 1; i <= v::kNumCriteria; ++i) {
            only.push_back(i);
        }
    }
    v::SuiteOptions opt;
    opt.seed = seed;
    if (verbose) {
        opt.log = [](const std::string& s) { std::cerr << s << '\n'; };
    }
    int failed = 0;
    for (int id : only) {
        v::CriterionResult r = v::run_criterion(id, opt);
        std::cout << v::format_line(r) << '\n';
        if (verbose || !r.pass) {
            for (const auto& d : r.details) {
                std::cout << "    " << d << '\n';
            }
        }
        std::cout.flush();
        failed += !r.pass;
    }
    return failed == 0 ? 0 : 3;
}
