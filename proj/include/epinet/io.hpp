#pragma once

#include <Eigen/Dense>
#include <string>
#include <string_view>
#include <vector>

#include "epinet/chain.hpp"
#include "epinet/montecarlo.hpp"

namespace epinet {

/// Writes to a temporary file in the same directory and renames it over
/// `path`. Throws std::ios_base::failure.
void write_file_atomic(const std::string& path, std::string_view content);
std::string read_file(const std::string& path);

/// Shortest decimal that round-trips.
std::string format_double(double v);

/// Header "t,s,i,r".
std::string trajectory_csv(const std::vector<Counts>& rows);
std::vector<Counts> parse_trajectory_csv(std::string_view text);

/// Header "t,mean_s,mean_i,mean_r,q05_i,q50_i,q95_i".
std::string ensemble_csv(const EnsembleResult& res);

/// Header "k,n", then the values, then one line per row.
std::string transition_matrix_csv(const TransitionMatrix& S);

/// Whitespace- or comma-separated square matrix, '#' comments.
Eigen::MatrixXd parse_matrix(std::string_view text);

}  // namespace epinet
