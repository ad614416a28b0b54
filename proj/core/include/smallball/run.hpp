#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "smallball/config.hpp"
#include "smallball/report.hpp"

namespace sblab {

/// Runs one experiment (or its sweep) and returns the report rows.
/// `threads` = 0 means one worker per hardware thread.
Table run(const ExperimentConfig& cfg, unsigned threads);

/// One grid point: explicit params and seed.
Table run_point(const ExperimentConfig& cfg, const ExperimentParams& params,
                std::uint64_t seed, unsigned threads);

/// Precedence: command line, then SMALLBALL_LAB_THREADS, then the config
/// value, then auto (0). Throws ConfigError for a malformed environment value.
unsigned resolve_thread_setting(std::optional<unsigned> cli, const char* env_value,
                                std::optional<unsigned> config_value);

}  // namespace sblab
