// Command-line front end: verify, eval, table.
#include "twf/verify.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitFlagged = 3;

struct Common {
    std::vector<double> lambdas;
    std::optional<int> n;
    std::optional<int> cutoff;
    std::optional<int> quad_points;
    std::optional<unsigned> seed;
    std::string out;
    std::string format = "report";
};

// Output stream: the --out file when given, stdout otherwise.
std::ostream& open_out(const std::string& path, std::unique_ptr<std::ofstream>& file) {
    if (path.empty()) return std::cout;
    file = std::make_unique<std::ofstream>(path);
    if (!*file) throw twf::DomainError("cannot open output file '" + path + "'");
    return *file;
}

int threads_from_env() {
    const char* v = std::getenv("TWF_THREADS");
    if (!v) return 1;
    const int t = std::atoi(v);
    if (t < 1) throw twf::DomainError("TWF_THREADS must be a positive integer");
    return t;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical verification of twisted Fock space constructions"};
    app.set_config("--config", "", "INI/TOML configuration file; sections name subcommands");
    app.require_subcommand(1);
    app.fallthrough();

    Common c;
    app.add_option("--lambda", c.lambdas, "Twisting parameter (repeatable)");
    app.add_option("--n", c.n, "Complex dimension");
    app.add_option("--cutoff", c.cutoff, "Hermite levels per axis");
    app.add_option("--quad-points", c.quad_points, "Gauss-Hermite points per real axis");
    app.add_option("--seed", c.seed, "Random seed");
    app.add_option("--out", c.out, "Output file (default stdout)");
    app.add_option("--format", c.format, "Output format")->check(CLI::IsMember({"report", "csv"}));

    auto* verify = app.add_subcommand("verify", "Run verification suites");
    std::vector<std::string> suites;
    std::optional<double> tolerance;
    bool suite_given = false;
    verify->add_option("--suite", suites, "Suite to run (repeatable; default all)")
        ->each([&](const std::string&) { suite_given = true; });
    verify->add_option("--tolerance", tolerance, "Replace every check tolerance");

    auto* eval = app.add_subcommand("eval", "Evaluate a function on a real slice");
    std::string target = "weight";
    twf::EvalParams ep;
    std::vector<double> range;
    eval->add_option("--target", target, "weight | heat_kernel | laguerre | gcal_element");
    eval->add_option("--t", ep.t, "Heat-kernel time");
    eval->add_option("--k", ep.k, "Laguerre degree");
    eval->add_option("--row", ep.row, "Matrix-unit row for gcal_element");
    eval->add_option("--col", ep.col, "Matrix-unit column for gcal_element");
    eval->add_option("--range", range, "Slice window LO HI")->expected(2);
    eval->add_option("--points", ep.points, "Nodes per slice axis");

    auto* table = app.add_subcommand("table", "Tabulate commutant dimensions or decompositions");
    std::string kind = "commutant_dims";
    std::vector<double> diag;
    table->add_option("--kind", kind, "commutant_dims | decomposition");
    table->add_option("--diag", diag, "Leading diagonal of the multiplier for decompositions");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    try {
        std::unique_ptr<std::ofstream> file;
        if (verify->parsed()) {
            twf::RunConfig cfg;
            if (!c.lambdas.empty()) cfg.lambdas = c.lambdas;
            if (c.n) cfg.n = *c.n;
            if (c.cutoff) cfg.cutoff = *c.cutoff;
            if (c.quad_points) cfg.quad_points = *c.quad_points;
            if (c.seed) cfg.seed = *c.seed;
            cfg.tolerance = tolerance;
            cfg.suites = suite_given ? suites : twf::registered_suites();
            cfg.threads = threads_from_env();
            cfg.validate();
            const twf::VerificationReport report = twf::run_verify(cfg);
            std::ostream& os = open_out(c.out, file);
            if (c.format == "csv") twf::write_csv(os, report); else twf::write_ndjson(os, report);
            twf::write_summary(std::cerr, report);
            return report.exit_code();
        }
        if (eval->parsed()) {
            ep.target = twf::parse_eval_target(target);
            if (c.lambdas.size() > 1) throw twf::DomainError("eval takes a single --lambda");
            if (!c.lambdas.empty()) ep.lambda = c.lambdas.front();
            if (c.n) ep.n = *c.n;
            if (c.cutoff) ep.cutoff = *c.cutoff;
            if (range.size() == 2) {
                ep.lo = range[0];
                ep.hi = range[1];
            }
            ep.validate();
            std::ostream& os = open_out(c.out, file);
            std::unique_ptr<std::ofstream> matrix;
            if (!c.out.empty()) {
                matrix = std::make_unique<std::ofstream>(c.out + ".matrix.csv");
                if (!*matrix) throw twf::DomainError("cannot open matrix output file");
            }
            twf::run_eval(ep, os, matrix.get());
            return 0;
        }
        twf::TableParams tp;
        tp.kind = twf::parse_table_kind(kind);
        if (!c.lambdas.empty()) tp.lambdas = c.lambdas;
        if (c.n) tp.n = *c.n;
        if (c.cutoff) tp.cutoff = *c.cutoff;
        if (c.seed) tp.seed = *c.seed;
        if (!diag.empty()) tp.diagonal = diag;
        tp.validate();
        std::ostream& os = open_out(c.out, file);
        return twf::run_table(tp, os) ? kExitFlagged : 0;
    } catch (const twf::DomainError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const twf::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return kExitFlagged;
    }
}
