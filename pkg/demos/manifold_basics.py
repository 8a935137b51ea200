#!/usr/bin/env python3
"""Tour of the manifold primitives: projection, retraction, transport."""
import numpy as np

import manismooth as ms

rng = np.random.default_rng(0)

print("== sphere S^2 ==")
d = ms.sphere(3)
x = ms.random_point(d, rng)
v = rng.standard_normal((3, 1))
eta = ms.tangent_project(x, v)
print("point          ", x.data.ravel())
print("ambient vector ", v.ravel())
print("tangent part   ", eta.data.ravel(), " <x, eta> =", float(np.vdot(x.data, eta.data)))
y = ms.retract(x, 0.5 * eta)
print("retracted point", y.data.ravel(), " norm =", np.linalg.norm(y.data))

print()
print("== Stiefel St(6, 2) ==")
d = ms.stiefel(6, 2)
x = ms.random_point(d, rng)
eta = ms.random_tangent(x, rng, norm=0.8)
y = ms.retract(x, eta)
print("orthogonality drift of retraction:", np.linalg.norm(y.data.T @ y.data - np.eye(2)))
moved = ms.vector_transport(x, y, eta)
print("transport is nonexpansive:", moved.norm(), "<=", eta.norm())

print()
print("== empirical retraction constants ==")
for desc in (ms.sphere(4), ms.stiefel(6, 2), ms.oblique(4, 3)):
    rc = ms.estimate_retraction_constants(desc, 2000, rng_seed=42)
    print(f"{desc.kind:8s} alpha = {rc.alpha:.4f}  beta = {rc.beta:.4f}")
print("(first bound ||R_x(u) - x|| <= alpha ||u||; second is quadratic in ||u||)")
