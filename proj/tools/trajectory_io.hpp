#pragma once

#include <hkflow/trajectory.hpp>

#include <filesystem>
#include <string>

namespace hkflow::cli {

/// Column name of the accumulator for alpha, e.g. acc_5 or acc_4.5.
std::string accumulator_column(double alpha);

/// trajectory.csv (one row per logged step) plus snapshots/snap_XXXXX.off and snapshots/index.csv.
void write_trajectory(const std::filesystem::path& dir, const FlowTrajectory& traj);

/// Inverse of write_trajectory. Snapshots are reloaded with full geometry.
FlowTrajectory read_trajectory(const std::filesystem::path& dir, int k, Termination termination);

/// Gnuplot script for trajectory.csv.
void write_plot_script(const std::filesystem::path& dir, const FlowTrajectory& traj);

} // namespace hkflow::cli
