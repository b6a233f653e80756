// Command-line front end: run verification suites, quantize symbols with
// either backend, and extract fiber operators from a saved global operator.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <Eigen/Core>

#include "opfield/cartesian.hpp"
#include "opfield/config.hpp"
#include "opfield/operator_field.hpp"
#include "opfield/polar_op.hpp"
#include "opfield/report.hpp"
#include "opfield/suites.hpp"
#include "opfield/symbol.hpp"

namespace {

void configure_threads() {
    if (const char* env = std::getenv("OPFIELD_THREADS")) {
        try {
            const int n = std::stoi(env);
            if (n > 0) Eigen::setNbThreads(n);
        } catch (const std::exception&) {
            std::cerr << "warning: ignoring invalid OPFIELD_THREADS=" << env
                      << "\n";
        }
    }
}

std::string read_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot read " + path);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

// Infer the dimension from the first alpha tuple of the symbol text.
int symbol_dimension(const std::string& text) {
    const auto open = text.find('(');
    const auto close = text.find(')');
    if (open == std::string::npos || close == std::string::npos || close < open)
        throw std::runtime_error("symbol parse: missing alpha tuple");
    int n = 1;
    for (auto i = open; i < close; ++i)
        if (text[i] == ',') ++n;
    return n;
}

} // namespace

int main(int argc, char** argv) {
    configure_threads();

    CLI::App app{"Numerical checks for fields of fiber operators over the "
                 "radial spectrum"};
    app.require_subcommand(1);

    // common options
    std::string config_path, grid_spec, out_path, format = "json";
    std::uint64_t seed = 0;
    bool seed_set = false;

    auto add_config_opts = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "key=value config file");
        cmd->add_option("--grid", grid_spec,
                        "grid override, e.g. S=32,M=32,N=32");
    };

    // verify --------------------------------------------------------------
    auto* verify = app.add_subcommand("verify", "run a verification suite");
    std::string suite;
    verify->add_option("--suite", suite, "suite name or 'all'")
        ->required()
        ->check(CLI::IsMember(opfield::suite_names()));
    add_config_opts(verify);
    verify->add_option("--out", out_path, "report path (default: stdout)");
    verify->add_option("--format", format, "json | csv")
        ->check(CLI::IsMember({"json", "csv"}));
    verify->add_option("--seed", seed, "override the RNG seed")
        ->each([&](const std::string&) { seed_set = true; });

    // quantize ------------------------------------------------------------
    auto* quantize = app.add_subcommand(
        "quantize", "quantize a symbol and save the operator");
    std::string symbol_path, backend = "kernel";
    quantize->add_option("--symbol", symbol_path, "symbol text file")
        ->required();
    quantize->add_option("--backend", backend, "kernel | diffop")
        ->check(CLI::IsMember({"kernel", "diffop"}));
    quantize->add_option("--out", out_path, "output path")->required();
    add_config_opts(quantize);

    // fibers ----------------------------------------------------------------
    auto* fibers = app.add_subcommand(
        "fibers", "extract fiber operators from a saved operator field");
    std::string op_path;
    fibers->add_option("--operator", op_path, "saved operator field")
        ->required();
    fibers->add_option("--out", out_path, "output path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        opfield::RunConfig cfg;
        if (!config_path.empty()) cfg = opfield::load_config_file(config_path);
        if (!grid_spec.empty()) opfield::apply_grid_overrides(cfg, grid_spec);
        if (seed_set) cfg.seed = seed;
        cfg.validate();

        if (verify->parsed()) {
            auto records = opfield::run_suite(suite, cfg);
            if (out_path.empty()) {
                opfield::emit_report(records, std::cout, format);
            } else {
                std::ofstream os(out_path);
                if (!os) throw std::runtime_error("cannot write " + out_path);
                opfield::emit_report(records, os, format);
            }
            for (const auto& r : records)
                if (r.status == "fail") return 1;
            return 0;
        }

        if (quantize->parsed()) {
            const std::string text = read_file(symbol_path);
            const int n = symbol_dimension(text);
            opfield::PolySymbol u = opfield::PolySymbol::deserialize(text, n);
            if (backend == "kernel") {
                const opfield::CartesianGrid g =
                    n == 1 ? cfg.cartesian_grid_1d() : cfg.cartesian_grid_2d();
                opfield::DenseOperator A = opfield::quantize_kernel(u, g);
                std::ofstream bin(out_path, std::ios::binary);
                if (!bin) throw std::runtime_error("cannot write " + out_path);
                opfield::write_complex_block(bin, A.mat);
                nlohmann::json j{{"kind", "cartesian_dense"},
                                 {"n", g.n},
                                 {"N", g.N},
                                 {"L", g.L},
                                 {"rows", A.mat.rows()},
                                 {"cols", A.mat.cols()}};
                std::ofstream hdr(out_path + ".json");
                hdr << j.dump(2) << "\n";
            } else {
                const opfield::PolarGrid g = cfg.polar_grid();
                opfield::PolarDiffOperator O = opfield::quantize_diffop(u, g);
                opfield::ExtractionResult r = opfield::extract_fibers(O);
                opfield::save_operator_field(r.field, out_path);
                std::cerr << "extraction leakage: " << r.leakage << "\n";
            }
            return 0;
        }

        if (fibers->parsed()) {
            opfield::OperatorField A = opfield::load_operator_field(op_path);
            // Re-extract through probing to validate decomposability, then
            // save the interior fibers.
            opfield::OperatorField probed = opfield::extract_fibers_probed(
                opfield::as_section_map(A), A.grid,
                std::max(0, A.interior_lo));
            probed.interior_lo = std::max(probed.interior_lo, A.interior_lo);
            probed.interior_hi = std::min(probed.interior_hi, A.interior_hi);
            opfield::save_operator_field(probed, out_path);
            return 0;
        }
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 2;
    }
    return 0;
}
