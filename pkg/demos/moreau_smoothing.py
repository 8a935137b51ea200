#!/usr/bin/env python3
"""Moreau envelopes in action: prox maps, gradients, and the two-parameter
comparison inequality, for a regularizer and for a set indicator."""
import numpy as np

import manismooth as ms

y = np.array([2.0, -0.5, 0.0, 1.2])

print("== scaled l1, lam = 1 ==")
h = ms.ScaledL1(1.0, y.size)
for mu in (1.0, 0.5, 0.1, 0.01):
    e = ms.moreau_eval(h, mu, y)
    print(f"mu = {mu:5.2f}  h_mu(y) = {e.value:8.4f}  ||grad|| = {np.linalg.norm(e.grad):.4f}"
          f"  prox = {np.round(e.prox_point, 3)}")
print("gradient norms stay below the Lipschitz modulus", h.lipschitz_const)

print()
print("== indicator of the unit ball ==")
ball = ms.IndicatorBall(np.zeros(2), 1.0)
yb = np.array([2.0, 0.0])
for mu in (1.0, 0.25, 0.05):
    e = ms.moreau_eval(ball, mu, yb)
    print(f"mu = {mu:5.2f}  envelope = dist^2/(2 mu) = {e.value:7.3f}  grad = {e.grad}")

print()
print("== envelope comparison across smoothing levels ==")
rng = np.random.default_rng(1)
violations = 0
for _ in range(2000):
    mu1 = float(rng.uniform(0.05, 2.0))
    mu2 = mu1 * float(rng.uniform(0.05, 1.0))
    z = 3 * rng.standard_normal(4)
    for term in (h, ms.IndicatorBall(rng.standard_normal(4), 1.0)):
        violations += not ms.moreau_envelope_inequality_check(term, mu1, mu2, z)
print("violations over 4000 random checks:", violations)
