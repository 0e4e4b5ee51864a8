"""
Two species cannot make a Type-I pattern
========================================

With one diffuser and one non-diffuser, the locus of h(s) has a single
bounded branch heading to the lone eigenvalue of A~.  Random trials show
that the rightmost pole never peaks at a finite gain above both zero and
its limit.
"""

import numpy as np

from turing_one.classify import classify, theorem1_property
from turing_one.model import LinearSystem, SpatialSpec

rng = np.random.default_rng(0)
kinds = {}
trials = 0
while trials < 500:
    A = rng.uniform(-1, 1, (2, 2))
    if np.linalg.eigvals(A).real.max() >= 0:
        continue
    trials += 1
    assert theorem1_property(A)
    v = classify(LinearSystem(A), SpatialSpec(mu=1e-2, L=20.0))
    kinds[v.kind] = kinds.get(v.kind, 0) + 1
print(f"{trials} Hurwitz 2x2 systems:", kinds)

###############################################################################
# Type-II instabilities do occur: an unstable non-diffuser makes the locus
# climb all the way to its limit, so the finest modes grow fastest.

A = np.array([[0.5, 1.0], [-1.0, -1.0]])
print(classify(LinearSystem(A), SpatialSpec(mu=1.0)).kind)
