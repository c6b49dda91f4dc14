"""Cross-check the closed-form frame against the brute-force oracle in
codimension two.

Setting: curves in R^3 (p=1, two fiber components) under the quadratic
slope cost, where extremals are straight segments and the re-solve
oracle is exact.  At slope rows q = (1, 2) the zero-off-diagonal frame
vectors are

    v1 = (1, -1.5, 0)      v2 = (2, 0, 1.5)

while the full kernel of the first-variation boundary system (keeping
the cross-row momentum couplings sum_l q^i_l dL/dq^k_l) is spanned by

    u1 = (1, -1.5, 2)      u2 = (2, 2, 1.5)

Closed form for endpoint deformation (1,1,2) -> + t*w of the segment
from the origin:  A(t) = [(1 + t w2)^2 + (2 + t w3)^2] / (2 (1 + t w1)),
so dA/dt|0 = w2 + 2 w3 - (5/2) w1:  0 for u1, u2; -4 and -2 for
v1, v2.  The oracle below reproduces these numbers, which is why the
all-codimension identity check in the acceptance suite is red while
every codimension-one check is exact.

Run: python3 scripts/codim2_frame_probe.py
"""

import numpy as np

from cartanarea import DeformationSpec, dirichlet, first_variation_fd
from cartanarea.variation import edge_indicator

L = dirichlet(3, 1)
DOMAIN = ((0.0, 1.0),)


def boundary(x):
    return np.array([x[0], 2.0 * x[0]])


def probe(name, w, expect):
    spec = DeformationSpec(
        direction=lambda m: np.asarray(w, dtype=float),
        intensity=edge_indicator(DOMAIN, "xmax"),
        name=name,
    )
    rep = first_variation_fd(L, boundary, DOMAIN, 9, spec)
    print(
        f"{name:>28}: dA/dt = {rep.dA_dt:+.6e}  (closed form {expect:+.4f})"
        f"  -> {rep.classification}"
    )
    return rep


def main():
    print("endpoint deformation of the extremal segment f(x) = (x, 2x)")
    print(f"{'candidate':>28}: first variation of the quadratic cost")
    probe("frame v1 (zero off-diag)", (1.0, -1.5, 0.0), -4.0)
    probe("frame v2 (zero off-diag)", (2.0, 0.0, 1.5), -2.0)
    probe("coupled kernel u1", (1.0, -1.5, 2.0), 0.0)
    probe("coupled kernel u2", (2.0, 2.0, 1.5), 0.0)
    probe("tangent (1, 1, 2)", (1.0, 1.0, 2.0), 2.5)


if __name__ == "__main__":
    main()
