// kacward: validate graph files, run the identity checks, scan regimes and
// sweep free energies. See `kacward --help`.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "kacward/cli.hpp"

namespace {

using namespace kacward;
using namespace kacward::cli;

// Runs `fn` against --out (or stdout); any library error is an input error.
template <class Fn>
int with_output(const std::string& out_path, Fn fn) {
    try {
        if (out_path.empty()) return fn(std::cout);
        std::ofstream file(out_path);
        if (!file) {
            std::cerr << "error: cannot write " << out_path << '\n';
            return kInputError;
        }
        return fn(file);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInputError;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Kac-Ward operators for the planar Ising model"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    std::string out_path;
    std::optional<double> tol;

    // validate
    ValidateConfig vcfg;
    auto* validate = app.add_subcommand("validate", "check a graph file and report degree statistics");
    validate->add_option("file", vcfg.graph_path, "graph file")->required();
    validate->add_flag("--need-dual", vcfg.need_dual, "fail when the file has no dual_vertices section");
    validate->add_option("--out", out_path, "write the report here instead of stdout");

    // verify
    VerifyConfig rcfg;
    auto* verify = app.add_subcommand("verify", "run the identity checks with seeded random weights");
    verify->add_option("file", rcfg.graph_path, "graph file")->required();
    verify->add_option("--seed", rcfg.seed, "random seed")->capture_default_str();
    verify->add_option("--trials", rcfg.trials, "draws per check")->capture_default_str();
    verify->add_option("--tol", tol, "relative tolerance of the partition-function identities (default 1e-8)");
    verify->add_option("--out", out_path, "write the report here instead of stdout");

    // scan-regimes
    ScanConfig scfg;
    std::string re_text = "0.5", im_text = "0";
    auto* scan = app.add_subcommand("scan-regimes", "tabulate regime membership, envelopes and certified bounds");
    scan->add_option("--m", scfg.m, "lower coupling bound (default: from the graph)");
    scan->add_option("--M", scfg.M, "upper coupling bound (default: from the graph)");
    scan->add_option("--re", re_text, "Re beta grid a:b:n")->capture_default_str();
    scan->add_option("--im", im_text, "Im beta grid a:b:n")->capture_default_str();
    scan->add_option("--graph", scfg.graph_path, "graph file for certified bounds and exact radii");
    scan->add_option("--couplings", scfg.couplings, "zinvariant | const:J | file:PATH")->capture_default_str();
    scan->add_option("--rho-limit", scfg.exact_rho_limit, "largest directed-edge count for exact radii")
        ->capture_default_str();
    scan->add_option("--out", out_path, "CSV path; a .json sidecar is written next to it");

    // free-energy
    FreeEnergyConfig fcfg;
    std::string bc_text = "free";
    auto* free_energy = app.add_subcommand("free-energy", "free energy density over a family of subtilings");
    free_energy->add_option("--graph-family", fcfg.family, "square | tri | hex | file")
        ->check(CLI::IsMember({"square", "tri", "hex", "file"}))
        ->capture_default_str();
    free_energy->add_option("--n-max", fcfg.n_max, "largest patch size")->capture_default_str();
    free_energy->add_option("--graph", fcfg.graph_path, "graph file for --graph-family file");
    free_energy->add_option("--bc", bc_text, "free | plus")->check(CLI::IsMember({"free", "plus"}))->capture_default_str();
    free_energy->add_option("--couplings", fcfg.couplings, "zinvariant | const:J | file:PATH")->capture_default_str();
    free_energy->add_option("--re", re_text, "Re beta grid a:b:n")->capture_default_str();
    free_energy->add_option("--im", im_text, "Im beta grid a:b:n")->capture_default_str();
    free_energy->add_option("--tol", tol, "trace-series truncation tolerance (default 1e-12)");
    free_energy->add_option("--out", out_path, "CSV path; a .json sidecar is written next to it");

    // generate
    GenerateConfig gcfg;
    auto* generate = app.add_subcommand("generate", "write an isoradial patch as a graph file");
    generate->add_option("--family", gcfg.family, "square | tri | hex | rhombic")
        ->check(CLI::IsMember({"square", "tri", "hex", "rhombic"}))
        ->capture_default_str();
    generate->add_option("--n", gcfg.n, "patch size")->capture_default_str();
    generate->add_option("--rhombi", gcfg.rhombi_path, "rhombic tiling file for --family rhombic");
    generate->add_option("--out", out_path, "write here instead of stdout");

    // dump-matrix
    DumpConfig dcfg;
    double re_beta = 1.0, im_beta = 0.0;
    auto* dump = app.add_subcommand("dump-matrix", "print a Kac-Ward matrix for tanh(beta J)");
    dump->add_option("file", dcfg.graph_path, "graph file")->required();
    dump->add_option("--kind", dcfg.kind, "lambda | conjugated | b | t")
        ->check(CLI::IsMember({"lambda", "conjugated", "b", "t"}))
        ->capture_default_str();
    dump->add_option("--couplings", dcfg.couplings, "zinvariant | const:J | file:PATH")->capture_default_str();
    dump->add_option("--re", re_beta, "Re beta")->capture_default_str();
    dump->add_option("--im", im_beta, "Im beta")->capture_default_str();
    dump->add_option("--out", out_path, "write here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kInputError;
    }
    if (tol && !(*tol > 0.0)) {
        std::cerr << "error: --tol must be positive\n";
        return kInputError;
    }

    if (validate->parsed()) {
        return with_output(out_path, [&](std::ostream& out) { return cmd_validate(vcfg, out, std::cerr); });
    }
    if (verify->parsed()) {
        if (tol) rcfg.tol = *tol;
        return with_output(out_path, [&](std::ostream& out) { return cmd_verify(rcfg, out, std::cerr); });
    }
    if (scan->parsed()) {
        return with_output(out_path, [&](std::ostream& out) {
            scfg.re = parse_range(re_text);
            scfg.im = parse_range(im_text);
            scfg.out_path = out_path;
            return cmd_scan_regimes(scfg, out, std::cerr);
        });
    }
    if (free_energy->parsed()) {
        return with_output(out_path, [&](std::ostream& out) {
            fcfg.re = parse_range(re_text);
            fcfg.im = parse_range(im_text);
            fcfg.bc = bc_text == "plus" ? Boundary::Plus : Boundary::Free;
            if (tol) fcfg.tol = *tol;
            fcfg.out_path = out_path;
            return cmd_free_energy(fcfg, out, std::cerr);
        });
    }
    if (generate->parsed()) {
        return with_output(out_path, [&](std::ostream& out) { return cmd_generate(gcfg, out, std::cerr); });
    }
    dcfg.beta = {re_beta, im_beta};
    return with_output(out_path, [&](std::ostream& out) { return cmd_dump_matrix(dcfg, out, std::cerr); });
}
