#ifndef DMD_IO_HPP
#define DMD_IO_HPP

#include "dmd/discrete.hpp"
#include "dmd/flows.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace dmd {

/// Every numeric field is written with 12 significant digits ("%.12g").
/// Non-finite values are written as nan, inf or -inf.
std::string format_number(double value);

/// Columns: t, z_1..z_n, x_1..x_n, V, residual. V is nan when the trajectory
/// carries no Lyapunov samples.
void write_trajectory_csv(const Trajectory& traj, std::ostream& out);
void write_trajectory_csv(const Trajectory& traj,
                          const std::filesystem::path& path);

/// Inverse of write_trajectory_csv. Lyapunov samples are dropped when every
/// V entry is nan. The saturation and divergence flags are not stored in
/// the file and come back cleared.
Trajectory read_trajectory_csv(std::istream& in);
Trajectory read_trajectory_csv(const std::filesystem::path& path);

/// Columns: k, x_1..x_n, residual.
void write_discrete_csv(const DiscreteRun& run, std::ostream& out);
void write_discrete_csv(const DiscreteRun& run,
                        const std::filesystem::path& path);

DiscreteRun read_discrete_csv(std::istream& in);
DiscreteRun read_discrete_csv(const std::filesystem::path& path);

}  // namespace dmd

#endif  // DMD_IO_HPP
