// SPDX-License-Identifier: Apache-2.0
#include "mgem/selfcheck.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "mgem/instances.hpp"

namespace mgem {

namespace {

template <class Body>
SuiteResult timed(const std::string& name, std::size_t cases, Body&& body) {
  const auto start = std::chrono::steady_clock::now();
  SuiteResult r;
  r.name = name;
  r.cases = cases;
  std::ostringstream detail;
  try {
    body(r, detail);
  } catch (const std::exception& e) {
    ++r.failures;
    detail << "exception: " << e.what();
  }
  r.passed = r.failures == 0;
  r.detail = detail.str();
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

}  // namespace

SuiteResult check_oracle_equivalence(std::size_t cases) {
  return timed("oracle-equivalence", cases, [&](SuiteResult& r, std::ostringstream& detail) {
    Rng rng = make_rng(1, streams::kSelfcheck);
    double worst = 0.0;
    for (std::size_t i = 0; i < cases; ++i) {
      const QpInstance inst = random_qp(rng);
      const double dev =
          (solve_exact(inst).direction - solve_enumerate(inst).direction).cwiseAbs().maxCoeff();
      worst = std::max(worst, std::isfinite(dev) ? dev : INFINITY);
      if (!(dev <= 1e-6)) ++r.failures;
    }
    detail << "max |z_exact - z_enum| = " << worst;
  });
}

SuiteResult check_single_constraint(std::size_t cases, const ApproxSolver& approx) {
  return timed("single-constraint", cases, [&](SuiteResult& r, std::ostringstream& detail) {
    Rng rng = make_rng(2, streams::kSelfcheck);
    RandomQpOptions opts;
    opts.min_m = 1;
    opts.max_m = 1;
    double worst = 0.0;
    for (std::size_t i = 0; i < cases; ++i) {
      const QpInstance inst = random_qp(rng, opts);
      const double dev =
          (approx(inst).direction - solve_exact(inst).direction).cwiseAbs().maxCoeff();
      worst = std::max(worst, std::isfinite(dev) ? dev : INFINITY);
      if (!(dev <= 1e-9)) ++r.failures;
    }
    detail << "max |z_approx - z_exact| = " << worst;
  });
}

SuiteResult check_gradients(std::size_t cases) {
  return timed("gradient-check", cases, [&](SuiteResult& r, std::ostringstream& detail) {
    double worst = 0.0;
    for (std::size_t i = 0; i < cases; ++i) {
      const GradientCase c = make_gradient_case(1000 + i, {});
      const Eigen::VectorXd analytic = loss_and_grad(c.params, c.spec, c.batch).grad.data();
      const Eigen::VectorXd numeric = finite_difference_gradient(c.params, c.spec, c.batch);
      const double err = max_relative_error(analytic, numeric);
      worst = std::max(worst, err);
      if (!(err < 1e-5)) ++r.failures;
    }
    detail << "max relative error = " << worst;
  });
}

SuiteResult check_block_separability(std::size_t cases) {
  return timed("block-separability", cases, [&](SuiteResult& r, std::ostringstream& detail) {
    double worst = 0.0;
    for (std::size_t i = 0; i < cases; ++i) {
      const double dev = block_separability_deviation(2000 + i);
      worst = std::max(worst, dev);
      if (!(dev <= 1e-8)) ++r.failures;
    }
    detail << "max |z_joint - z_blocks| = " << worst;
  });
}

SuiteResult check_strength_ordering(std::size_t cases) {
  return timed("strength-ordering", cases, [&](SuiteResult& r, std::ostringstream& detail) {
    constexpr double kSlack = 1e-7;
    std::size_t p_viol = 0;
    std::size_t d_viol = 0;
    std::size_t ms_viol = 0;
    std::size_t d_below_ms = 0;
    for (std::size_t i = 0; i < cases; ++i) {
      const OrderingCase c = ordering_case(3000 + i);
      const bool ms_ok = c.memory_strength >= c.gem - kSlack;
      const bool p_ok = c.p_mgem >= c.memory_strength - kSlack;
      const bool d_ok = c.d_mgem >= c.gamma - kSlack;
      ms_viol += !ms_ok;
      p_viol += !p_ok;
      d_viol += !d_ok;
      d_below_ms += c.d_mgem < c.memory_strength - kSlack;
      if (!ms_ok || !p_ok || !d_ok || !c.all_converged) ++r.failures;
    }
    detail << "violations: memory-strength vs gem " << ms_viol << ", p-mGEM vs memory-strength "
           << p_viol << ", d-mGEM vs gamma " << d_viol << " (d-mGEM below memory-strength: "
           << d_below_ms << ")";
  });
}

std::vector<SuiteResult> run_selfcheck(const SelfcheckOptions& options) {
  const bool q = options.quick;
  std::vector<SuiteResult> out;
  out.push_back(check_oracle_equivalence(q ? 200 : 1000));
  out.push_back(check_single_constraint(q ? 30 : 100, options.approx));
  out.push_back(check_gradients(q ? 5 : 20));
  out.push_back(check_block_separability(q ? 20 : 100));
  out.push_back(check_strength_ordering(q ? 100 : 500));
  return out;
}

}  // namespace mgem
