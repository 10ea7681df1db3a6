#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
"""Independent reference values frozen into tests/test_oracles.cpp.

Run: python3 tests/oracle/make_oracles.py > tests/oracle_values.inc
Needs numpy, scipy, torch, cvxpy.
"""
import numpy as np
import torch
import cvxpy as cp
from scipy.optimize import lsq_linear

MASK = (1 << 64) - 1


def splitmix64(x):
    x = (x + 0x9E3779B97F4A7C15) & MASK
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK
    return x ^ (x >> 31)


def derive_seed(seed, stream):
    return splitmix64(splitmix64(seed) ^ ((stream * 0xD1B54A32D192ED03) & MASK))


def arr(name, values):
    body = ", ".join(repr(float(v)) for v in np.asarray(values).ravel())
    return f"inline const std::vector<double> {name}{{{body}}};"


out = ["// Generated by tests/oracle/make_oracles.py; do not edit.", "namespace oracle {"]

out.append(f"inline constexpr std::uint64_t kSplitmix0 = {splitmix64(0)}ULL;")
out.append(f"inline constexpr std::uint64_t kSplitmix12345 = {splitmix64(12345)}ULL;")
out.append(f"inline constexpr std::uint64_t kDerive_7_3 = {derive_seed(7, 3)}ULL;")
out.append(f"inline constexpr std::uint64_t kDerive_0_1 = {derive_seed(0, 1)}ULL;")

# MLP: layers (3, 4, 3), 5 samples; parameters laid out as L0.w (4x3 row-major),
# L0.b, L1.w (3x4), L1.b.
rng = np.random.default_rng(20241014)
sizes = [3, 4, 3]
x = np.round(rng.normal(size=(5, 3)), 6)
y = np.array([0, 2, 1, 2, 0])
theta = np.round(rng.normal(scale=0.7, size=4 * 3 + 4 + 3 * 4 + 3), 6)
out.append(arr("kMlpFeatures", x))
out.append("inline const std::vector<int> kMlpLabels{" + ", ".join(map(str, y)) + "};")
out.append(arr("kMlpTheta", theta))
for act in ("relu", "tanh"):
    t = torch.tensor(theta, dtype=torch.float64, requires_grad=True)
    w0 = t[0:12].reshape(4, 3)
    b0 = t[12:16]
    w1 = t[16:28].reshape(3, 4)
    b1 = t[28:31]
    h = torch.tensor(x) @ w0.T + b0
    h = torch.relu(h) if act == "relu" else torch.tanh(h)
    logits = h @ w1.T + b1
    loss = torch.nn.functional.cross_entropy(logits, torch.tensor(y))
    loss.backward()
    out.append(f"inline constexpr double kMlpLoss_{act} = {loss.item()!r};")
    out.append(arr(f"kMlpGrad_{act}", t.grad.numpy()))

# Box-form dual: min 1/2 ||C^T v + g||^2, v >= q, solved as bounded least squares.
qrng = np.random.default_rng(7)
for idx, (n, m) in enumerate([(5, 3), (6, 2), (4, 4)]):
    c = np.round(qrng.normal(size=(m, n)), 6)
    g = np.round(qrng.normal(size=n), 6)
    q = np.array([0.0, 0.1, 0.5, 0.0][:m])
    res = lsq_linear(c.T, -g, bounds=(q, np.inf), tol=1e-15, lsmr_tol="auto", max_iter=10000,
                     method="bvls")
    z = g + c.T @ res.x
    out.append(arr(f"kBoxRows{idx}", c))
    out.append(arr(f"kBoxTarget{idx}", g))
    out.append(arr(f"kBoxStrength{idx}", q))
    out.append(arr(f"kBoxDirection{idx}", z))

# Regularized form via the primal: min 1/2 ||z - g||^2 s.t. C z >= gamma.
for idx, (n, m) in enumerate([(5, 3), (3, 2)]):
    c = np.round(qrng.normal(size=(m, n)), 6)
    g = np.round(qrng.normal(size=n), 6)
    gamma = np.round(np.abs(qrng.normal(scale=0.5, size=m)), 6)
    z = cp.Variable(n)
    prob = cp.Problem(cp.Minimize(0.5 * cp.sum_squares(z - g)), [c @ z >= gamma])
    prob.solve(solver=cp.CLARABEL, tol_gap_abs=1e-12, tol_gap_rel=1e-12, tol_feas=1e-12)
    out.append(arr(f"kRegRows{idx}", c))
    out.append(arr(f"kRegTarget{idx}", g))
    out.append(arr(f"kRegStrength{idx}", gamma))
    out.append(arr(f"kRegDirection{idx}", z.value))

out.append("}  // namespace oracle")
print("\n".join(out))
