// End-to-end acceptance: runs every verification suite once on the default
// desk-scale grid and rolls the individual checks up into the sixteen
// headline properties, printing one PASS/FAIL line per property.

#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include <opfield/suites.hpp>

using namespace opfield;

namespace {

struct Criterion {
    const char* title;
    // (suite, check-prefix) selectors; a record belongs to the criterion if
    // its suite matches and its check starts with the prefix
    std::vector<std::pair<std::string, std::string>> selectors;
};

const std::vector<Criterion> kCriteria = {
    {"01 poisson bracket axioms (antisymmetry, Leibniz, Jacobi, canonical)",
     {{"poisson", "bracket-antisymmetry"},
      {"poisson", "bracket-leibniz"},
      {"poisson", "bracket-jacobi"},
      {"poisson", "bracket-canonical"},
      {"poisson", "control-nonzero-bracket"}}},
    {"02 dilation flow generated by the bracket with q.p",
     {{"poisson", "flow-generator"}, {"poisson", "flow-pullback"}}},
    {"03 quantizer backends agree (1d direct, 2d through resampling)",
     {{"weyl", "cross-backend-1d"}, {"weyl", "cross-backend-2d"}}},
    {"04 quantizer adjoint identity in both backends",
     {{"weyl", "kernel-adjoint"},
      {"weyl", "kernel-hermitian"},
      {"weyl", "diffop-adjoint"}}},
    {"05 dilation covariance (polar conjugation and Cartesian metaplectic)",
     {{"weyl", "covariance-dilation"}, {"weyl", "covariance-cartesian"}}},
    {"06 trivialization unitarity and direct-integral Parseval",
     {{"field", "trivialization-"},
      {"field", "parseval-"},
      {"field", "resample-"}}},
    {"07 connection: formula equivalence, closed form, metric Leibniz",
     {{"field", "connection-"}, {"field", "metric-leibniz"}}},
    {"08 symmetric H_X operator and unitary dilation group",
     {{"field", "hx-symmetric"},
      {"field", "dilation-unitary"},
      {"field", "dilation-group-law"}}},
    {"09 decomposability of constant-of-motion operators (with control)",
     {{"opfield", "decomposable-battery"},
      {"opfield", "control-decomposable"},
      {"opfield", "extraction-leakage"},
      {"opfield", "extraction-"}}},
    {"10 horizontality characterizations agree; invariant calculus horizontal",
     {{"horizontal", ""}}},
    {"11 derivative formula for quantized constants of motion, both routes",
     {{"theorem-xu", "derivative-formula-"},
      {"theorem-xu", "rejects-noninvariant"}}},
    {"12 pointwise transport derivative matches the weak pairing",
     {{"opfield", "weak-derivative-"}}},
    {"13 transport estimate: closed form and random draws",
     {{"opfield", "transport-estimate-"}}},
    {"14 rank-one fields: norm formula, derivative identity, norm continuity",
     {{"opfield", "rank-one-"},
      {"opfield", "norm-flat-horizontal"},
      {"opfield", "norm-lipschitz-rank-one"}}},
    {"15 bracket-compatible connection identities on symbols (exact)",
     {{"poisson", "connection-"}}},
    {"16 Fourier conjugation carries multiplication by |q|^2 to -Laplacian",
     {{"weyl", "fourier-"}}},
};

} // namespace

TEST_CASE("acceptance: headline properties at desk scale") {
    RunConfig cfg;
    std::vector<CheckRecord> records = run_suite("all", cfg);

    std::map<std::string, int> used;
    bool all_ok = true;
    for (const auto& crit : kCriteria) {
        int n = 0, failed = 0;
        double worst_margin = 0.0;
        for (const auto& r : records) {
            if (r.status == "info") continue;
            bool match = false;
            for (const auto& [suite, prefix] : crit.selectors)
                if (r.suite == suite && r.check.rfind(prefix, 0) == 0)
                    match = true;
            if (!match) continue;
            ++n;
            ++used[r.suite + "/" + r.check];
            if (r.status != "pass") ++failed;
        }
        (void)worst_margin;
        const bool ok = n > 0 && failed == 0;
        all_ok = all_ok && ok;
        std::printf("[%s] %s (%d checks%s)\n", ok ? "PASS" : "FAIL",
                    crit.title, n,
                    failed ? (", " + std::to_string(failed) + " failing").c_str()
                           : "");
        REQUIRE(n > 0);
        CHECK(failed == 0);
    }

    // every thresholded record must pass, even ones outside the roll-up
    int stray_failures = 0;
    for (const auto& r : records)
        if (r.status == "fail") ++stray_failures;
    REQUIRE(stray_failures == 0);
    REQUIRE(all_ok);
}
