#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <vector>

#include "msce/gp.hpp"
#include "msce/rng.hpp"
#include "msce/solvers.hpp"

namespace msce::detail {

std::vector<double> row_of(const Eigen::MatrixXd& m, Eigen::Index i);

/// Jittered random LHD drawn from `rng`.
Eigen::MatrixXd random_candidates(std::size_t n, std::size_t d, Rng& rng);

/// Maximum-likelihood fit with a per-fit start seed and an optional warm start.
GpModel fit_surrogate(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, GpConfig config, Rng& starts,
                      const GpModel* previous);

/// Copies x_opt, set sizes, spread and fallbacks into the result.
void apply_extraction(InverseResult& result, const Extraction& extraction, const SimulatorSpec& spec);

/// Target values at 1-based grid positions.
std::vector<double> target_at(const TimeSeries& target, const std::vector<std::size_t>& positions);

/// Checks that every position lies in 1..L.
void check_positions(const std::vector<std::size_t>& positions, std::size_t length);

double elapsed_ms(std::uint64_t start_ns);
std::uint64_t now_ns();

}  // namespace msce::detail
