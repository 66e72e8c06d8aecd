#pragma once

#include "twf/core_numerics.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace twf {

// Suite names in execution order.
const std::vector<std::string>& registered_suites();

struct RunConfig {
    int n = 1;
    std::vector<double> lambdas{1.0, 0.5, 2.0, -1.0};
    int cutoff = 16;           // Hermite levels per axis
    int quad_points = 40;      // Gauss-Hermite points per real axis
    int kernel_points = 14;    // per-axis points of the pointwise kernel integrals
    int degree_cap = 24;       // abelian polynomial degree
    int commutant_cutoff = 8;  // truncation of the full-space commutant
    unsigned seed = 7;
    std::optional<double> tolerance;  // replaces every check tolerance when set
    std::vector<std::string> suites;
    int threads = 1;

    // Throws DomainError on any invalid field.
    void validate() const;
};

struct CheckRecord {
    std::string suite;
    std::string check_id;
    std::string anchor;  // statement the check certifies, or "plumbing"
    double max_residual = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    bool flagged = false;  // a numerical self-check fired; max_residual is then infinite
    std::string message;
    double wall_time = 0.0;
};

struct VerificationReport {
    std::vector<CheckRecord> records;

    int passed() const;
    int failed() const;
    int flagged() const;
    // 0 all pass, 1 some check failed, 3 some check raised a numerical flag.
    int exit_code() const;
};

VerificationReport run_verify(const RunConfig& config);

// One JSON object per line, then a summary object.
void write_ndjson(std::ostream& os, const VerificationReport& report, bool include_time = true);
void write_csv(std::ostream& os, const VerificationReport& report);
void write_summary(std::ostream& os, const VerificationReport& report);

enum class EvalTarget { Weight, HeatKernel, Laguerre, GcalElement };
EvalTarget parse_eval_target(const std::string& name);

struct EvalParams {
    EvalTarget target = EvalTarget::Weight;
    double lambda = 1.0;
    int n = 1;
    double t = 1.0;       // heat-kernel time
    int k = 0;            // Laguerre degree
    int row = 0;          // matrix unit of gcal_element
    int col = 0;
    int cutoff = 16;
    double lo = -2.0;     // slice window on both real coordinates
    double hi = 2.0;
    int points = 32;      // nodes per slice axis

    void validate() const;
};

// Evaluates the target on the real slice (x, u) -> (x e_1, u e_1); rows "x,u,re,im,abs,..."
// and, when matrix_os is given, the modulus as a points x points matrix.
void run_eval(const EvalParams& params, std::ostream& os, std::ostream* matrix_os = nullptr);

enum class TableKind { CommutantDims, Decomposition };
TableKind parse_table_kind(const std::string& name);

struct TableParams {
    TableKind kind = TableKind::CommutantDims;
    std::vector<double> lambdas{1.0};
    int n = 1;
    int cutoff = 8;
    unsigned seed = 7;
    std::vector<double> diagonal{1.0, 1.0, 2.0};  // leading diagonal of M for decompositions

    void validate() const;
};

// Returns true when some row is indeterminate.
bool run_table(const TableParams& params, std::ostream& os);

}  // namespace twf
