"""What the per-group penalty actually charges.

The penalty matrix of a block is built from the gaps of its squared
singular values: zero along the leading principal direction, growing along
the trailing ones.  This script makes that concrete on one correlated
block.
"""

import numpy as np

import pcsrrr as pc
from pcsrrr.penalty import build_penalty, group_svd

rng = np.random.default_rng(3)
block = pc.gen_signal_block(60, 6, rng)

spec = group_svd(block)
A = build_penalty(spec)

print("singular values: ", np.round(spec.singular_values, 2))
print("squared gaps:    ", np.round(spec.singular_values[0] ** 2
                                    - spec.singular_values ** 2, 2))

print("\npenalty eigenvalues (should equal the gaps up to order):")
print(np.round(np.sort(np.linalg.eigvalsh(A))[::-1], 2))

lead = spec.right_vectors[:, 0]
print("\n|A v1| along the leading direction:", float(np.abs(A @ lead).max()))

print("\nquadratic form c'Ac along each principal direction:")
for j in range(spec.m):
    v = spec.right_vectors[:, j]
    print(f"  direction {j + 1}: {float(v @ A @ v):12.2f}")

# a coefficient row aligned with the top direction is free; one aligned
# with the bottom direction pays the full top-versus-bottom gap
c_cheap = spec.right_vectors[:, 0]
c_dear = spec.right_vectors[:, -1]
print("\npenalty on an aligned row:   ", round(float(c_cheap @ A @ c_cheap), 4))
print("penalty on an anti-aligned row:", round(float(c_dear @ A @ c_dear), 2))
