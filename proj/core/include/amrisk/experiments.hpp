#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "amrisk/calibrate.hpp"
#include "amrisk/mc.hpp"
#include "amrisk/pde2d.hpp"
#include "amrisk/stats.hpp"

namespace amrisk {

/// Everything one study run needs; serialized alongside outputs so a
/// bundle is self-describing and reruns with equal config are
/// bit-identical.
struct ExperimentConfig {
    HestonParams params = base_case_params();
    double strike = 10.0;
    double maturity = 1.0;
    Solver1DConfig solver1d;
    HestonGridSpec grids2d;
    MCSConfig mcs;
    double dupire_tikhonov = 1e-3;
    std::size_t n_paths = 100000;
    std::size_t n_steps = 300;
    std::uint64_t seed = 424242;
    unsigned n_threads = 1;
    std::size_t block_paths = 25000;
    std::vector<double> rho_list = {-0.5, 0.0, 0.5};
    double recal_frequency = 7.0 / 365.0;
    std::string out_dir = "out";

    void validate() const;
    std::string to_json() const;
    static ExperimentConfig from_json(const std::string& text);
    static ExperimentConfig load(const std::string& path);
};

std::uint64_t config_hash(const ExperimentConfig& cfg);

/// One correlation's full pipeline: quote surface, both calibrations,
/// the three boundaries, a shared simulated path set (streamed in
/// blocks) and the three payoff distributions.
struct PipelineResult {
    double rho = 0.0;
    double sigma_bs = 0.0;
    DupireCalibration dupire;
    QuoteSurface quotes;
    ExerciseBoundary1D bs_boundary;
    ExerciseBoundary1D dupire_boundary;
    ExerciseBoundary2D heston_boundary;
    PayoffSampleSet heston_payoffs, bs_payoffs, dupire_payoffs;
    SummaryStats heston_stats, bs_stats, dupire_stats;
};

PipelineResult run_pipeline(const ExperimentConfig& cfg, double rho);

/// Base case: emits summary stats, QQ data for payoffs and stopping
/// times, scatter data for the first 10k paths, boundary and
/// calibration files, and summary.json.
PipelineResult run_base_case(const ExperimentConfig& cfg);

struct CorrelationSweepResult {
    std::vector<PipelineResult> per_rho;
};

CorrelationSweepResult run_correlation_sweep(const ExperimentConfig& cfg);

struct RecalibrationResult {
    double sigma_initial = 0.0;
    PayoffSampleSet heston_payoffs, static_payoffs, recal_payoffs;
    SummaryStats heston_stats, static_stats, recal_stats;
    RecalibrationTrace trace;
    std::size_t boundary_cache_size = 0;
};

RecalibrationResult run_recalibration(const ExperimentConfig& cfg);

}  // namespace amrisk
