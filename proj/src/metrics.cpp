// SPDX-License-Identifier: Apache-2.0
#include "mgem/metrics.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>

#include "mgem/error.hpp"

namespace mgem {

TransferSummary summarize(const AccuracyMatrix& r) {
  const std::size_t t = r.tasks();
  if (t == 0) throw Error(ErrorCode::invalid_argument, "accuracy matrix is empty");
  if (r.values.cols() != r.values.rows()) throw ShapeError("accuracy matrix must be square");
  double fwd = 0.0;
  double bwd = 0.0;
  for (std::size_t i = 0; i < t; ++i) {
    fwd += r(i, i);
    bwd += r(t - 1, i) - r(i, i);
  }
  TransferSummary s;
  s.fwd = fwd / static_cast<double>(t);
  s.bwd = bwd / static_cast<double>(t);
  s.acc = s.bwd + s.fwd;
  return s;
}

std::string format_real(double x) {
  if (x == 0.0) x = 0.0;  // drop the sign of -0
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x,
                                 std::chars_format::general, 9);
  if (ec != std::errc()) throw Error(ErrorCode::io, "cannot format real");
  return std::string(buf.data(), ptr);
}

namespace {

std::string method_columns(const MethodSpec& m) {
  return to_string(m.kind) + "," + format_real(m.strength) + "," + std::to_string(m.d_param) +
         "," + std::to_string(m.d_data);
}

}  // namespace

std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::string out = "method,q,d_param,d_data,solver,seed,acc,fwd,bwd,degraded_steps\n";
  for (const auto& r : rows) {
    out += method_columns(r.method) + "," + to_string(r.method.solver) + "," +
           std::to_string(r.seed) + "," + format_real(r.summary.acc) + "," +
           format_real(r.summary.fwd) + "," + format_real(r.summary.bwd) + "," +
           std::to_string(r.degraded_steps) + "\n";
  }
  return out;
}

std::string pareto_csv(const std::vector<ParetoRow>& rows) {
  std::string out = "method,q,d_param,d_data,seed,mean_bwd_inner,mean_fwd_inner\n";
  for (const auto& r : rows) {
    out += method_columns(r.method) + "," + std::to_string(r.seed) + "," +
           format_real(r.mean_bwd_inner) + "," + format_real(r.mean_fwd_inner) + "\n";
  }
  return out;
}

std::string rmatrix_csv(const std::vector<RMatrixRecord>& records) {
  std::string out = "method,q,d_param,d_data,solver,seed,i,j,accuracy\n";
  for (const auto& rec : records) {
    const std::string prefix = method_columns(rec.method) + "," + to_string(rec.method.solver) +
                               "," + std::to_string(rec.seed) + ",";
    for (std::size_t i = 0; i < rec.matrix.tasks(); ++i) {
      for (std::size_t j = 0; j < rec.matrix.tasks(); ++j) {
        out += prefix + std::to_string(i + 1) + "," + std::to_string(j + 1) + "," +
               format_real(rec.matrix(i, j)) + "\n";
      }
    }
  }
  return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io, "cannot open '" + path.string() + "' for writing");
  out << contents;
  out.flush();
  if (!out) throw Error(ErrorCode::io, "failed writing '" + path.string() + "'");
}

void write_reports(const std::filesystem::path& dir, const std::vector<SummaryRow>& summaries,
                   const std::vector<RMatrixRecord>& rmatrices) {
  write_text_file(dir / "summary.csv", summary_csv(summaries));
  write_text_file(dir / "rmatrix.csv", rmatrix_csv(rmatrices));
}

void write_pareto_report(const std::filesystem::path& dir, const std::vector<ParetoRow>& rows) {
  write_text_file(dir / "pareto.csv", pareto_csv(rows));
}

}  // namespace mgem
