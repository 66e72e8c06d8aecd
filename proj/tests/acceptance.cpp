// Runs every verification suite at desk scale and reports one line per acceptance criterion.
#include "twf/verify.hpp"

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

namespace {

struct Criterion {
    int id;
    std::string title;
    std::vector<std::pair<std::string, std::string>> checks;  // suite, check-id prefix
};

const std::vector<Criterion>& criteria() {
    static const std::vector<Criterion> all{
        {1, "group law", {{"group_law", "associativity"}, {"group_law", "small_lambda_limit"}}},
        {2, "Schrodinger representation",
         {{"schrodinger", "composition"}, {"schrodinger", "unitarity"}, {"schrodinger", "pointwise_composition"}}},
        {3, "Weyl transform and Plancherel", {{"weyl", "plancherel"}, {"weyl", "heat_kernel_transform"}}},
        {4, "twisted transform isometry", {{"twisted_transforms", "isometry"}}},
        {5, "twisted representation", {{"representation", "composition"}, {"representation", "adjoint"}}},
        {6, "convolution operator equivalence", {{"convolution_ops", "kernel_crosscheck"}}},
        {7, "commutation classes", {{"convolution_ops", "commutes_real"}, {"convolution_ops", "tilde_commutes_imaginary"}}},
        {8, "reproducing identity", {{"algebra", "reproducing_identity"}, {"algebra", "reproducing_negative_control"}}},
        {9, "first-order relations and derivative detector",
         {{"algebra", "first_order_relations"}, {"algebra", "derivative_detector_"}}},
        {10, "commutant dichotomy", {{"irreducibility", "commutant_"}}},
        {11, "invariant subspaces",
         {{"irreducibility", "rank_one"}, {"irreducibility", "rank_two_"}, {"irreducibility", "spectral_decomposition"}}},
        {12, "abelian Fock space",
         {{"abelian_fock", "s_phi_zeta"}, {"abelian_fock", "s_tilde_zeta"}, {"abelian_fock", "u_conjugation"},
          {"abelian_fock", "bargmann_intertwining"}}},
    };
    return all;
}

bool matches(const twf::CheckRecord& r, const std::pair<std::string, std::string>& key) {
    return r.suite == key.first && r.check_id.compare(0, key.second.size(), key.second) == 0;
}

}  // namespace

int main() {
    twf::RunConfig cfg;
    cfg.suites = twf::registered_suites();
    const auto start = std::chrono::steady_clock::now();
    const twf::VerificationReport report = twf::run_verify(cfg);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    int failures = 0;
    for (const Criterion& c : criteria()) {
        int count = 0;
        bool ok = true;
        std::string worst;
        for (const auto& r : report.records) {
            bool hit = false;
            for (const auto& key : c.checks) hit = hit || matches(r, key);
            if (!hit) continue;
            ++count;
            if (!r.pass) {
                ok = false;
                if (worst.empty()) worst = r.suite + "/" + r.check_id;
            }
        }
        ok = ok && count > 0;
        failures += !ok;
        std::printf("criterion %2d %-46s %s (%d checks)%s%s\n", c.id, c.title.c_str(), ok ? "PASS" : "FAIL", count,
                    worst.empty() ? "" : " first failure: ", worst.c_str());
    }
    std::printf("%d of %zu criteria passed in %.0f s\n", int(criteria().size()) - failures, criteria().size(), seconds);
    return failures == 0 ? 0 : 1;
}
