# One-shot detection from a handful of exemplar embeddings.
#
# A small worked example of the patch-correspondence pipeline: cosine
# similarity against exemplars, per-class thresholding, disjoint class
# assignment, and the patch-count image score.

import numpy as np

from surveysim import ExemplarSet, assign_patches, cosine_similarity, image_score

rng = np.random.default_rng(0)

# three well-separated "prototype" directions in a toy 8-d feature space
target_proto = np.eye(8)[0]
context_proto = np.eye(8)[1]
background_proto = np.eye(8)[2]

print("cosine of a vector with itself:", cosine_similarity(target_proto, target_proto))
print("cosine of orthogonal vectors:  ", cosine_similarity(target_proto, context_proto))
print("hand check, (3,4) vs (4,3):    ", cosine_similarity([3, 4], [4, 3]), "= 24/25")

# the operator clicked three target patches; they become the exemplar set
clicks = np.stack([target_proto + 0.05 * rng.normal(size=8) for _ in range(3)])
target = ExemplarSet("target", clicks, threshold=0.3)
context = ExemplarSet("context", context_proto[None, :], threshold=0.1)

# a candidate image: 4 target-ish patches, 6 context-ish, 10 background
patches = np.concatenate([
    target_proto + 0.1 * rng.normal(size=(4, 8)),
    context_proto + 0.1 * rng.normal(size=(6, 8)),
    background_proto + 0.1 * rng.normal(size=(10, 8)),
])

assignments = assign_patches(patches, [target, context])
print("\nper-patch assignments (index, label, score):")
for a in assignments:
    print(f"  {a.patch_index:2d}  {str(a.label):8s}  {a.score:.3f}")

print("\nimage-level scores:")
print("  target :", image_score(assignments, "target"))
print("  context:", image_score(assignments, "context"))
print("  unassigned patches:", sum(1 for a in assignments if a.label is None))

# each patch carries at most one label, so per-class counts never exceed N
total = image_score(assignments, "target") + image_score(assignments, "context")
print("\ndisjoint assignment check:", total, "labeled of", len(patches), "patches")
