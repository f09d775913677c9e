#ifndef DRHEO_EXPERIMENTS_HPP
#define DRHEO_EXPERIMENTS_HPP

#include <string>

#include "drheo/config.hpp"
#include "drheo/driver.hpp"
#include "drheo/relative_energy.hpp"

namespace drheo {

struct experiment_result {
    bool ok = true;              // ran to completion
    bool certificate_ok = true;  // the certificates the experiment asserts
    std::string message;
    std::string verdict;
    long steps = 0;
    double min_dt = inf;
    double max_gap = 0.0;
    double max_rel_err = 0.0; // taylor-green decay deviation
};

// resolved pieces shared by the experiment drivers
torus_grid grid_from_config(const config& cfg);
spectral_velocity initial_from_config(const config& cfg, const torus_grid& grid);
force_fn force_from_config(const config& cfg, const rheology_model& model);
double mu0_from_config(const config& cfg, const rheology_model& model);

experiment_result run_simulate(const config& cfg, const std::string& out_dir);
experiment_result run_taylor_green(const config& cfg, const std::string& out_dir);
experiment_result run_verify_rheology(const config& cfg, const std::string& out_dir);
experiment_result run_weak_strong(const config& cfg, const std::string& out_dir, int threads = 1);
experiment_result run_conjugate_table(const config& cfg, const std::string& out_dir);

} // namespace drheo

#endif
