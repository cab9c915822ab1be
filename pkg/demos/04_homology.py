# %% [markdown]
# Incidence complexes and recovering B
#
# Cells are vertices, interfaces edges and triple junctions triangles.  For
# a flat cluster whose normals close up around every cycle, the normals are
# the image of a single linear map B.

# %%
import numpy as np

from multibubble import EdgeNormalAssignment, IncidenceComplex, build_complex, homology_ranks, recover_B
from multibubble.pullback import PullbackCluster, simplicial_cluster
from multibubble.simplex import e_basis

# %% Hand-made complexes.
hollow = IncidenceComplex.from_json({"q": 3, "edges": [[1, 2], [2, 3], [1, 3]]})
filled = IncidenceComplex.from_json({"q": 3, "edges": [[1, 2], [2, 3], [1, 3]], "triangles": [[1, 2, 3]]})
print("hollow triangle:", homology_ranks(hollow), " filled:", homology_ranks(filled))

# %% Cells of a cluster on a line: the middle one separates the outer two.
line = PullbackCluster(np.array([[-1.0, 0.0, 1.0]]), np.array([0.5, -1.0, 0.5]))
S = build_complex(line)
print("line cluster:", S.to_json(), homology_ranks(S))

# %% Four simplicial cells in R^3: complete complex, b1 = 0.
C = simplicial_cluster(4, 3)
S = build_complex(C)
print(len(S.edges), "edges,", len(S.triangles), "triangles, Betti", homology_ranks(S))

# %% Recover B from the unit normals and check that sqrt2 B is an isometry.
rec = recover_B(S, EdgeNormalAssignment.from_cluster(C, sorted(S.edges)))
U = e_basis(4)
print("residual", rec.residual, " cycle violation", rec.cycle_violation)
print("2 B^T B on E:\n", np.round(2 * U.T @ rec.B.T @ rec.B @ U, 12))
