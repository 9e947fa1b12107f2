#pragma once

// Command implementations behind the `kacward` executable. Each command
// writes its report or CSV to `out` and diagnostics to `log`. The return
// value is the process exit code (0 success, 1 verification failure, 2 input
// error).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"

#include "kacward/errors.hpp"
#include "kacward/graph_io.hpp"
#include "kacward/ising.hpp"
#include "kacward/isoradial.hpp"
#include "kacward/kac_ward.hpp"
#include "kacward/planar_graph.hpp"
#include "kacward/regimes.hpp"
#include "kacward/spectral.hpp"

namespace kacward::cli {

inline constexpr const char* kVersion = "1.0.0";

enum ExitCode : int { kSuccess = 0, kVerificationFailure = 1, kInputError = 2 };

/// Seeded uniform draws that do not depend on the standard library's
/// distribution implementations, so outputs are reproducible everywhere.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

private:
    std::mt19937_64 engine_;
};

/// `a:b:n` grid axis; a single number is a one-point axis.
struct Range {
    double lo = 0.0;
    double hi = 0.0;
    std::size_t n = 1;
};

inline Range parse_range(const std::string& text) {
    auto number = [&](const std::string& part) {
        std::size_t used = 0;
        const double v = std::stod(part, &used);
        if (used != part.size()) throw std::invalid_argument(part);
        return v;
    };
    Range r;
    const auto c1 = text.find(':');
    try {
        if (c1 == std::string::npos) {
            r.lo = r.hi = number(text);
            return r;
        }
        const auto c2 = text.find(':', c1 + 1);
        if (c2 == std::string::npos) throw Error(ErrorCode::ParseError, "range '" + text + "' must be a:b:n");
        r.lo = number(text.substr(0, c1));
        r.hi = number(text.substr(c1 + 1, c2 - c1 - 1));
        const std::string count = text.substr(c2 + 1);
        std::size_t used = 0;
        const long long n = std::stoll(count, &used);
        if (used != count.size()) throw std::invalid_argument(count);
        if (n < 1) throw Error(ErrorCode::ParseError, "range '" + text + "' is empty");
        r.n = static_cast<std::size_t>(n);
    } catch (const std::logic_error&) {
        throw Error(ErrorCode::ParseError, "cannot parse range '" + text + "'");
    }
    return r;
}

inline BetaGrid make_grid(const Range& re, const Range& im) { return {re.lo, re.hi, re.n, im.lo, im.hi, im.n}; }

struct CouplingSpec {
    enum class Kind { Zinvariant, Constant, File } kind = Kind::Zinvariant;
    double value = 1.0;
    std::string path;
};

inline CouplingSpec parse_coupling_spec(const std::string& text) {
    if (text == "zinvariant") return {};
    if (text.rfind("const:", 0) == 0) {
        try {
            const std::string value = text.substr(6);
            std::size_t used = 0;
            const double j = std::stod(value, &used);
            if (used != value.size()) throw std::invalid_argument(value);
            return {CouplingSpec::Kind::Constant, j, {}};
        } catch (const std::logic_error&) {
            throw Error(ErrorCode::ParseError, "bad constant coupling '" + text + "'");
        }
    }
    if (text.rfind("file:", 0) == 0) return {CouplingSpec::Kind::File, 0.0, text.substr(5)};
    throw Error(ErrorCode::ParseError, "coupling spec must be zinvariant, const:J or file:PATH");
}

inline std::string optional_field(const std::optional<double>& v) { return v ? format_double(*v) : std::string{}; }

/// A graph with its couplings, plus the dual and contractive base
/// factorizations when they exist.
struct Workspace {
    std::string id;
    GraphPtr ambient;
    std::optional<Subtiling> graph;
    std::optional<DualEmbedding> dual;
    std::optional<Subtiling> dual_sub;
    CouplingSystem couplings;
    std::optional<DirectedWeights> high_base;
    std::optional<DirectedWeights> low_base;
    std::vector<std::string> notes;
};

namespace detail {

inline DirectedWeights symmetric_base(const EmbeddedGraph& g, const std::function<double(Edge)>& weight) {
    UndirectedWeights w;
    for (const Edge& e : g.edges()) w.emplace(e, weight(e));
    return factorize_symmetric(w);
}

inline Workspace make_workspace(std::string id, GraphPtr ambient, std::optional<DualEmbedding> dual,
                                const std::optional<IsoradialGraph>& iso, const CouplingSpec& spec) {
    Workspace ws;
    ws.id = std::move(id);
    ws.ambient = ambient;
    ws.graph = full_subtiling(ambient);
    ws.dual = std::move(dual);
    const auto& g = ws.graph->graph();
    switch (spec.kind) {
        case CouplingSpec::Kind::Zinvariant:
            if (!iso) throw Error(ErrorCode::InvalidArgument, "zinvariant couplings need theta annotations");
            ws.couplings = zinvariant_couplings(*iso);
            ws.high_base = zinvariant_factorization(*iso);
            break;
        case CouplingSpec::Kind::Constant: ws.couplings = constant_couplings(g, spec.value); break;
        case CouplingSpec::Kind::File: {
            std::ifstream in(spec.path);
            if (!in) throw Error(ErrorCode::ParseError, "cannot open " + spec.path);
            ws.couplings = make_couplings(parse_couplings(in));
            for (const Edge& e : g.edges()) (void)ws.couplings.at(e);
            break;
        }
    }
    if (!ws.high_base) {
        auto base = symmetric_base(g, [&](Edge e) { return std::tanh(ws.couplings.at(e)); });
        if (is_contractive(g, base).contractive) {
            ws.high_base = std::move(base);
        } else {
            ws.notes.push_back("symmetric factorization of tanh J is not contractive; no high-temperature certificate");
        }
    }
    if (ws.dual && !ws.graph->interior().empty()) {
        ws.dual_sub = dual_subtiling(*ws.graph, *ws.dual);
        const auto& gs = ws.dual_sub->graph();
        auto base = iso && spec.kind == CouplingSpec::Kind::Zinvariant
                        ? zinvariant_dual_factorization(*iso, gs)
                        : symmetric_base(gs, [&](Edge es) { return std::exp(-2.0 * ws.couplings.at(ws.dual->primal_edge(es))); });
        if (is_contractive(gs, base).contractive) {
            ws.low_base = std::move(base);
        } else {
            ws.notes.push_back("symmetric factorization of exp(-2J) is not contractive; no low-temperature certificate");
        }
    }
    return ws;
}

inline Workspace workspace_from_file(const std::string& path, const CouplingSpec& spec) {
    const GraphFile file = load_graph_file(path);
    std::optional<IsoradialGraph> iso;
    GraphPtr ambient;
    std::optional<DualEmbedding> dual;
    if (file.has_theta()) {
        iso = isoradial_from_file(file);
        ambient = iso->graph;
        dual = iso->dual;
    } else {
        ambient = share(to_graph(file));
        if (file.has_dual()) dual = make_dual(ambient, file.dual_positions);
    }
    return make_workspace(path, ambient, std::move(dual), iso, spec);
}

inline Workspace workspace_from_isoradial(std::string id, const IsoradialGraph& iso, const CouplingSpec& spec) {
    return make_workspace(std::move(id), iso.graph, iso.dual, iso, spec);
}

inline void write_sidecar(const std::string& out_path, const nlohmann::json& meta) {
    if (out_path.empty()) return;
    std::ofstream side(out_path + ".json");
    side << meta.dump(2) << '\n';
}

}  // namespace detail

// ---------------------------------------------------------------- validate

struct ValidateConfig {
    std::string graph_path;
    bool need_dual = false;
};

inline int cmd_validate(const ValidateConfig& cfg, std::ostream& out, std::ostream& log) {
    GraphFile file;
    try {
        file = load_graph_file(cfg.graph_path);
    } catch (const Error& e) {
        log << "error: " << e.what() << '\n';
        return kInputError;
    }
    try {
        auto g = share(to_graph(file));
        std::map<std::size_t, std::size_t> histogram;
        for (const Vertex& v : g->vertices()) ++histogram[g->degree(v.id)];
        out << g->num_vertices() << " vertices, " << g->faces().size() << " faces, " << g->num_edges()
            << " edges, max degree " << g->max_degree() << '\n';
        out << "degree histogram:";
        for (const auto& [d, count] : histogram) out << ' ' << d << ':' << count;
        out << '\n';
        if (file.has_dual()) {
            const auto dual = make_dual(g, file.dual_positions);
            out << "dual: " << dual.graph().num_vertices() << " vertices, " << dual.graph().num_edges() << " edges, "
                << dual.graph().faces().size() << " faces, max degree " << dual.graph().max_degree() << '\n';
        } else if (cfg.need_dual) {
            log << "error: no dual_vertices section but --need-dual was given\n";
            return kVerificationFailure;
        }
        if (file.has_theta()) {
            double lo = INFINITY, hi = 0;
            for (const auto& [e, t] : file.theta) {
                lo = std::min(lo, t);
                hi = std::max(hi, t);
            }
            out << "theta range: [" << format_double(lo) << ", " << format_double(hi) << "]\n";
        }
        out << "valid\n";
        return kSuccess;
    } catch (const Error& e) {
        log << "invalid: " << e.what() << '\n';
        return kVerificationFailure;
    }
}

// ------------------------------------------------------------------ verify

struct VerifyConfig {
    std::string graph_path;
    std::uint64_t seed = 1;
    std::size_t trials = 20;
    double tol = 1e-8;
};

struct CheckResult {
    std::string name;
    std::size_t runs = 0;
    double max_error = 0.0;
    double tolerance = 0.0;
    std::string skipped;  // reason, empty when run

    bool passed() const { return !skipped.empty() || max_error <= tolerance; }
};

inline int cmd_verify(const VerifyConfig& cfg, std::ostream& out, std::ostream& log) {
    GraphFile file;
    GraphPtr ambient;
    std::optional<DualEmbedding> dual;
    try {
        file = load_graph_file(cfg.graph_path);
        ambient = share(to_graph(file));
        if (file.has_dual()) dual = make_dual(ambient, file.dual_positions);
    } catch (const Error& e) {
        log << "error: " << e.what() << '\n';
        return kInputError;
    }
    const Subtiling sub = full_subtiling(ambient);
    const EmbeddedGraph& g = sub.graph();
    out << "graph " << cfg.graph_path << ": " << g.num_vertices() << " vertices, " << g.num_edges() << " edges\n";
    out << "seed " << cfg.seed << ", trials " << cfg.trials << '\n';
    if (cfg.trials == 0) {
        out << "warning: trials = 0, no identity was exercised\n";
        out << "PASS (vacuous)\n";
        return kSuccess;
    }
    Rng rng(cfg.seed);
    auto random_couplings = [&](const EmbeddedGraph& gg) {
        std::map<Edge, double> values;
        for (const Edge& e : gg.edges()) values.emplace(e, rng.uniform(0.5, 1.5));
        return make_couplings(std::move(values));
    };
    auto random_beta = [&] {
        const double re = rng.uniform(0.1, 2.0);
        const double im = rng.uniform(-0.3, 0.3);
        return Complex(re, im);
    };
    auto random_directed = [&](const EmbeddedGraph& gg) {
        DirectedWeights xd;
        for (const DirectedEdge& e : gg.directed_edges()) {
            xd.emplace(e, std::polar(rng.uniform(0.2, 1.2), rng.uniform(-std::numbers::pi, std::numbers::pi)));
        }
        return xd;
    };
    auto rel = [](Complex a, Complex b) { return std::abs(a - b) / std::max(std::abs(a), 1e-300); };

    std::vector<CheckResult> checks;
    const std::size_t interior = sub.interior().size();

    CheckResult free_id{"kac-ward free identity", 0, 0.0, cfg.tol, {}};
    if (g.num_vertices() > kMaxBruteForceSpins) {
        free_id.skipped = "more than " + std::to_string(kMaxBruteForceSpins) + " spins";
    } else {
        for (std::size_t t = 0; t < cfg.trials; ++t) {
            const auto j = random_couplings(g);
            const Complex beta = random_beta();
            const Complex zb = partition_bruteforce(sub, j, beta, Boundary::Free);
            free_id.max_error = std::max(free_id.max_error, rel(zb * zb, partition_free_kw(sub, j, beta).value));
            ++free_id.runs;
        }
    }
    checks.push_back(free_id);

    CheckResult plus_id{"kac-ward plus identity", 0, 0.0, cfg.tol, {}};
    if (!dual) {
        plus_id.skipped = "no dual_vertices section";
    } else if (interior == 0) {
        plus_id.skipped = "empty interior";
    } else if (interior > kMaxBruteForceSpins) {
        plus_id.skipped = "more than " + std::to_string(kMaxBruteForceSpins) + " interior spins";
    } else {
        for (std::size_t t = 0; t < cfg.trials; ++t) {
            const auto j = random_couplings(g);
            const Complex beta = random_beta();
            const Complex zb = partition_bruteforce(sub, j, beta, Boundary::Plus);
            plus_id.max_error = std::max(plus_id.max_error, rel(zb * zb, partition_plus_kw(sub, *dual, j, beta).value));
            ++plus_id.runs;
        }
    }
    checks.push_back(plus_id);

    CheckResult gf_id{"determinant = squared even-subgraph sum", 0, 0.0, cfg.tol, {}};
    if (g.num_edges() + 1 > g.num_vertices() + kMaxCycleSpaceDimension) {
        gf_id.skipped = "cycle space too large";
    } else {
        for (std::size_t t = 0; t < cfg.trials; ++t) {
            UndirectedWeights w;
            for (const Edge& e : g.edges()) {
                w.emplace(e, std::polar(rng.uniform(0.05, 0.9), rng.uniform(-std::numbers::pi, std::numbers::pi)));
            }
            const Complex gf = even_subgraph_gf(g, w);
            gf_id.max_error = std::max(gf_id.max_error, rel(gf * gf, kac_ward_determinant(g, w)));
            ++gf_id.runs;
        }
    }
    checks.push_back(gf_id);

    CheckResult charpoly{"block characteristic polynomial", 0, 0.0, 1e-9, {}};
    CheckResult norm{"norm = max xi (vs singular value)", 0, 0.0, 1e-9, {}};
    CheckResult contract{"contractive iff norm <= 1", 0, 0.0, 0.0, {}};
    CheckResult radius{"spectral radius <= max xi", 0, 0.0, 1e-10, {}};
    const bool dense_ok = g.num_directed_edges() <= 300;
    if (!dense_ok) {
        norm.skipped = radius.skipped = "more than 300 directed edges";
    }
    for (std::size_t t = 0; t < cfg.trials; ++t) {
        const auto xd = random_directed(g);
        for (const Vertex& v : g.vertices()) {
            const double s = rng.uniform(-2.0, 2.0);
            const Matrix block = b_block(g, xd, v.id);
            const Matrix shifted = s * Matrix::Identity(block.rows(), block.cols()) - block;
            const double want = charpoly_bz(g, xd, v.id, s);
            const double got = lu_determinant(shifted).value().real();
            charpoly.max_error = std::max(charpoly.max_error, std::abs(want - got) / (1.0 + std::abs(want)));
        }
        ++charpoly.runs;
        const double by_xi = operator_norm_conjugated(g, xd);
        // Scale so that both sides of the contractivity threshold occur.
        const double scale = rng.uniform(0.5, 1.5) / std::max(by_xi, 1e-300);
        DirectedWeights scaled;
        for (const auto& [e, w] : xd) scaled.emplace(e, w * std::sqrt(scale));
        const double scaled_norm = operator_norm_conjugated(g, scaled);
        const bool contractive = is_contractive(g, scaled).contractive;
        if (contractive != (scaled_norm <= 1.0 + 1e-12) && std::abs(scaled_norm - 1.0) > 1e-9) contract.max_error = 1.0;
        ++contract.runs;
        if (dense_ok) {
            const double sv = largest_singular_value(conjugated_transition_matrix(g, xd).entries);
            norm.max_error = std::max(norm.max_error, std::abs(by_xi - sv) / std::max(sv, 1e-300));
            ++norm.runs;
            const double rho = spectral_radius(transition_matrix(g, induced_weights(g, xd)));
            radius.max_error = std::max(radius.max_error, std::max(0.0, rho - by_xi));
            ++radius.runs;
        }
    }
    checks.push_back(charpoly);
    checks.push_back(norm);
    checks.push_back(contract);
    checks.push_back(radius);

    const CheckResult* first_failure = nullptr;
    for (const auto& c : checks) {
        out << (c.skipped.empty() ? (c.passed() ? "PASS " : "FAIL ") : "SKIP ") << c.name;
        if (c.skipped.empty()) {
            out << ": runs " << c.runs << ", max error " << format_double(c.max_error) << ", tolerance "
                << format_double(c.tolerance) << '\n';
        } else {
            out << ": " << c.skipped << '\n';
        }
        if (!c.passed() && first_failure == nullptr) first_failure = &c;
    }
    if (first_failure != nullptr) {
        out << "FAILED: " << first_failure->name << '\n';
        return kVerificationFailure;
    }
    out << "all checks passed\n";
    return kSuccess;
}

// ------------------------------------------------------------ scan-regimes

struct ScanConfig {
    std::optional<double> m;
    std::optional<double> M;
    Range re{0.5, 0.5, 1};
    Range im{0.0, 0.0, 1};
    std::string graph_path;
    std::string couplings = "zinvariant";
    std::string out_path;
    std::size_t exact_rho_limit = 300;
};

inline void write_regime_csv(std::ostream& out, const std::vector<RegimeRow>& rows) {
    out << "re_beta,im_beta,in_high,in_low,L_high,L_low,cert_bound,rho_exact\n";
    for (const auto& r : rows) {
        out << format_double(r.beta.real()) << ',' << format_double(r.beta.imag()) << ',' << (r.in_high ? 1 : 0) << ','
            << (r.in_low ? 1 : 0) << ',' << optional_field(r.l_high) << ',' << format_double(r.l_low) << ','
            << optional_field(r.cert_bound) << ',' << optional_field(r.rho_exact) << '\n';
    }
}

inline int cmd_scan_regimes(const ScanConfig& cfg, std::ostream& out, std::ostream& log) {
    std::optional<Workspace> ws;
    double m = 0, M = 0;
    try {
        if (!cfg.graph_path.empty()) ws = detail::workspace_from_file(cfg.graph_path, parse_coupling_spec(cfg.couplings));
        if (ws) {
            m = cfg.m.value_or(ws->couplings.m);
            M = cfg.M.value_or(ws->couplings.M);
        } else {
            if (!cfg.m || !cfg.M) throw Error(ErrorCode::InvalidArgument, "--m and --M are required without --graph");
            m = *cfg.m;
            M = *cfg.M;
        }
        kacward::detail::check_bounds(m, M);
    } catch (const Error& e) {
        log << "error: " << e.what() << '\n';
        return kInputError;
    }
    ScanContext ctx;
    if (ws) {
        ctx.graph = &*ws->graph;
        ctx.couplings = &ws->couplings;
        ctx.high_base = ws->high_base;
        ctx.dual = ws->dual ? &*ws->dual : nullptr;
        ctx.low_base = ws->low_base;
        ctx.exact_rho_limit = cfg.exact_rho_limit;
        for (const auto& note : ws->notes) log << "note: " << note << '\n';
    }
    std::vector<RegimeRow> rows;
    try {
        rows = regime_scan(make_grid(cfg.re, cfg.im), m, M, ws ? &ctx : nullptr);
    } catch (const Error& e) {
        log << "error: " << e.what() << '\n';
        return kInputError;
    }
    write_regime_csv(out, rows);
    nlohmann::json meta = {
        {"command", "scan-regimes"},
        {"version", kVersion},
        {"m", m},
        {"M", M},
        {"re", {cfg.re.lo, cfg.re.hi, cfg.re.n}},
        {"im", {cfg.im.lo, cfg.im.hi, cfg.im.n}},
        {"graph", cfg.graph_path},
        {"couplings", cfg.couplings},
        {"exact_rho_limit", cfg.exact_rho_limit},
        {"rows", rows.size()},
        {"notes", ws ? ws->notes : std::vector<std::string>{}},
    };
    detail::write_sidecar(cfg.out_path, meta);
    return kSuccess;
}

// ------------------------------------------------------------- free-energy

struct FreeEnergyConfig {
    std::string family = "square";  // square | tri | hex | file
    int n_max = 3;
    std::string graph_path;  // for family = file
    Boundary bc = Boundary::Free;
    std::string couplings = "zinvariant";
    Range re{0.5, 0.5, 1};
    Range im{0.0, 0.0, 1};
    double tol = 1e-12;
    std::string out_path;
};

struct FreeEnergyRow {
    std::string graph_id;
    std::size_t num_vertices = 0;
    std::size_t num_edges = 0;
    Boundary bc = Boundary::Free;
    Complex beta;
    FreeEnergyMethod method = FreeEnergyMethod::Brute;
    std::optional<Complex> f;
    std::optional<double> tail_bound;
    std::optional<double> tolerance;  // series truncation target
    double boundary_ratio = 0.0;
    std::string status = "ok";
};

/// Evaluates f for one graph and beta with every method whose
/// precondition holds; methods that fail yield flagged rows.
inline std::vector<FreeEnergyRow> free_energy_rows(const Workspace& ws, Boundary bc, Complex beta, double tol) {
    std::vector<FreeEnergyRow> rows;
    const Subtiling& sub = *ws.graph;
    const EmbeddedGraph& g = sub.graph();
    const std::size_t interior = sub.interior().size();
    FreeEnergyRow base;
    base.graph_id = ws.id;
    base.num_vertices = g.num_vertices();
    base.num_edges = g.num_edges();
    base.bc = bc;
    base.beta = beta;
    base.boundary_ratio = static_cast<double>(sub.boundary().size()) / static_cast<double>(g.num_vertices());
    const DualEmbedding* dual = ws.dual ? &*ws.dual : nullptr;

    auto run = [&](FreeEnergyMethod method, const FreeEnergyOptions& options) {
        FreeEnergyRow row = base;
        row.method = method;
        if (method == FreeEnergyMethod::TraceSeries) row.tolerance = options.series_tolerance;
        try {
            const auto r = free_energy_density(sub, ws.couplings, beta, bc, method, dual, options);
            row.f = r.value;
            row.tail_bound = r.truncation_error;
        } catch (const Error& e) {
            row.status = std::string(to_string(e.code()));
        }
        rows.push_back(row);
    };

    const bool real_positive = beta.imag() == 0.0 && beta.real() > 0.0;
    if (real_positive) {
        const std::size_t spins = bc == Boundary::Free ? g.num_vertices() : interior;
        if (spins <= kMaxBruteForceSpins) run(FreeEnergyMethod::Brute, {});
        run(FreeEnergyMethod::Determinant, {});
    }
    FreeEnergyOptions options;
    options.series_tolerance = tol;
    try {
        if (beta.real() > 0.0) {
            if (bc == Boundary::Free && ws.high_base) {
                options.factorization = high_factorization(g, ws.couplings, beta, *ws.high_base);
            } else if (bc == Boundary::Plus && ws.low_base && ws.dual_sub) {
                options.factorization = low_factorization(ws.dual_sub->graph(), *ws.dual, ws.couplings, beta, *ws.low_base);
            }
        }
    } catch (const Error&) {
        options.factorization.reset();
    }
    run(FreeEnergyMethod::TraceSeries, options);
    return rows;
}

inline void write_free_energy_csv(std::ostream& out, const std::vector<FreeEnergyRow>& rows) {
    out << "graph_id,num_vertices,num_edges,bc,re_beta,im_beta,method,re_f,im_f,tail_bound,tolerance,boundary_ratio,status\n";
    for (const auto& r : rows) {
        out << r.graph_id << ',' << r.num_vertices << ',' << r.num_edges << ',' << to_string(r.bc) << ','
            << format_double(r.beta.real()) << ',' << format_double(r.beta.imag()) << ',' << to_string(r.method) << ','
            << (r.f ? format_double(r.f->real()) : "") << ',' << (r.f ? format_double(r.f->imag()) : "") << ','
            << optional_field(r.tail_bound) << ',' << optional_field(r.tolerance) << ',' << format_double(r.boundary_ratio) << ',' << r.status << '\n';
    }
}

inline int cmd_free_energy(const FreeEnergyConfig& cfg, std::ostream& out, std::ostream& log) {
    std::vector<Workspace> family;
    try {
        const auto spec = parse_coupling_spec(cfg.couplings);
        if (cfg.family == "file") {
            if (cfg.graph_path.empty()) throw Error(ErrorCode::InvalidArgument, "--graph-family file needs --graph");
            family.push_back(detail::workspace_from_file(cfg.graph_path, spec));
        } else {
            if (cfg.n_max < 1) throw Error(ErrorCode::InvalidArgument, "--n-max must be at least 1");
            for (int n = 1; n <= cfg.n_max; ++n) {
                IsoradialGraph iso = cfg.family == "square" ? square_patch(n)
                                     : cfg.family == "tri"  ? triangular_patch(n)
                                     : cfg.family == "hex"
                                         ? hexagonal_patch(n)
                                         : throw Error(ErrorCode::InvalidArgument, "unknown family '" + cfg.family + "'");
                family.push_back(detail::workspace_from_isoradial(cfg.family + "-" + std::to_string(n), iso, spec));
            }
        }
        if (!(cfg.tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "--tol must be positive");
    } catch (const Error& e) {
        log << "error: " << e.what() << '\n';
        return kInputError;
    }
    std::vector<FreeEnergyRow> rows;
    const auto betas = make_grid(cfg.re, cfg.im).points();
    for (const auto& ws : family) {
        for (const auto& note : ws.notes) log << "note (" << ws.id << "): " << note << '\n';
        for (const Complex beta : betas) {
            auto part = free_energy_rows(ws, cfg.bc, beta, cfg.tol);
            rows.insert(rows.end(), part.begin(), part.end());
        }
    }
    write_free_energy_csv(out, rows);
    nlohmann::json meta = {
        {"command", "free-energy"},
        {"version", kVersion},
        {"family", cfg.family},
        {"n_max", cfg.n_max},
        {"graph", cfg.graph_path},
        {"bc", std::string(to_string(cfg.bc))},
        {"couplings", cfg.couplings},
        {"re", {cfg.re.lo, cfg.re.hi, cfg.re.n}},
        {"im", {cfg.im.lo, cfg.im.hi, cfg.im.n}},
        {"series_tolerance", cfg.tol},
        {"rows", rows.size()},
    };
    detail::write_sidecar(cfg.out_path, meta);
    return kSuccess;
}

// ---------------------------------------------------------------- generate

struct GenerateConfig {
    std::string family = "square";  // square | tri | hex | rhombic
    int n = 1;
    std::string rhombi_path;
};

inline int cmd_generate(const GenerateConfig& cfg, std::ostream& out, std::ostream& log) {
    try {
        IsoradialGraph iso = cfg.family == "square"    ? square_patch(cfg.n)
                             : cfg.family == "tri"     ? triangular_patch(cfg.n)
                             : cfg.family == "hex"     ? hexagonal_patch(cfg.n)
                             : cfg.family == "rhombic" ? rhombic_from_file(cfg.rhombi_path)
                                                       : throw Error(ErrorCode::InvalidArgument, "unknown family '" + cfg.family + "'");
        write_isoradial(out, iso);
        return kSuccess;
    } catch (const Error& e) {
        log << "error: " << e.what() << '\n';
        return kInputError;
    }
}

// ------------------------------------------------------------- dump-matrix

struct DumpConfig {
    std::string graph_path;
    std::string kind = "lambda";  // lambda | conjugated | b | t
    std::string couplings = "zinvariant";
    Complex beta{1.0, 0.0};
};

/// Writes the matrix for tanh(beta J) on the full subtiling of the graph,
/// after a header line listing the canonical directed-edge order.
inline int cmd_dump_matrix(const DumpConfig& cfg, std::ostream& out, std::ostream& log) {
    try {
        const Workspace ws = detail::workspace_from_file(cfg.graph_path, parse_coupling_spec(cfg.couplings));
        const EmbeddedGraph& g = ws.graph->graph();
        const auto w = high_temperature_weights(g, ws.couplings, cfg.beta);
        KacWardMatrix m = cfg.kind == "lambda"       ? transition_matrix(g, w)
                          : cfg.kind == "conjugated" ? conjugated_transition_matrix(g, factorize_symmetric(w))
                          : cfg.kind == "b"          ? b_matrix(g, factorize_symmetric(w))
                          : cfg.kind == "t"          ? kac_ward_operator(g, w)
                                                     : throw Error(ErrorCode::InvalidArgument, "unknown kind '" + cfg.kind + "'");
        out << "# index";
        for (const auto& e : m.index) out << ' ' << e.tail << "->" << e.head;
        out << '\n';
        dump_matrix(out, m.entries);
        return kSuccess;
    } catch (const Error& e) {
        log << "error: " << e.what() << '\n';
        return kInputError;
    }
}

}  // namespace kacward::cli
