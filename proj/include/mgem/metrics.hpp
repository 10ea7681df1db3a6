// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mgem/constraints.hpp"

namespace mgem {

/// R(i, j): test accuracy on task j after learning task i (0-based here).
struct AccuracyMatrix {
  Eigen::MatrixXd values;

  explicit AccuracyMatrix(std::size_t tasks = 0)
      : values(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(tasks),
                                     static_cast<Eigen::Index>(tasks))) {}

  std::size_t tasks() const { return static_cast<std::size_t>(values.rows()); }
  double operator()(std::size_t i, std::size_t j) const {
    return values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  double& operator()(std::size_t i, std::size_t j) {
    return values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
};

struct TransferSummary {
  double acc = 0.0;
  double bwd = 0.0;
  double fwd = 0.0;
};

/// FWD = mean R(i,i), BWD = mean (R(T,i) - R(i,i)), both summed left to right,
/// and ACC = BWD + FWD so the identity holds bit-for-bit. ACC agrees with the
/// direct mean of the last row to within rounding.
TransferSummary summarize(const AccuracyMatrix& r);

/// Shortest decimal with at most 9 significant digits, '.' separator.
std::string format_real(double x);

struct SummaryRow {
  MethodSpec method;
  std::uint64_t seed = 0;
  TransferSummary summary;
  std::size_t degraded_steps = 0;
};

struct ParetoRow {
  MethodSpec method;
  std::uint64_t seed = 0;
  double mean_bwd_inner = 0.0;  // mean <g_s, z>
  double mean_fwd_inner = 0.0;  // mean <g_t, z>
};

struct RMatrixRecord {
  MethodSpec method;
  std::uint64_t seed = 0;
  AccuracyMatrix matrix;
};

std::string summary_csv(const std::vector<SummaryRow>& rows);
std::string pareto_csv(const std::vector<ParetoRow>& rows);
/// Long form, one line per (i, j) with 1-based task indices, prefixed by the
/// run's method columns.
std::string rmatrix_csv(const std::vector<RMatrixRecord>& records);

void write_text_file(const std::filesystem::path& path, const std::string& contents);

/// Writes summary.csv and rmatrix.csv into `dir`.
void write_reports(const std::filesystem::path& dir, const std::vector<SummaryRow>& summaries,
                   const std::vector<RMatrixRecord>& rmatrices);

/// Writes pareto.csv into `dir`.
void write_pareto_report(const std::filesystem::path& dir, const std::vector<ParetoRow>& rows);

}  // namespace mgem
