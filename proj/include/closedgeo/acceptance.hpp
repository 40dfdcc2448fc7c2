#pragma once
#include <functional>
#include <string>
#include <vector>

namespace closedgeo {

struct CriterionResult {
    int id = 0;
    std::string title;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

struct AcceptanceOptions {
    // holds sphere.cfg, torus.cfg, ellipsoid.cfg, perturbed.cfg
    std::string config_dir;
    int workers = 1;
    // criteria to run; empty means 1..11
    std::vector<int> only;
};

// one "PASS"/"FAIL" line
std::string format_result(const CriterionResult& r);

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts,
                                            const std::function<void(const CriterionResult&)>& on_result = {});

}  // namespace closedgeo
