# The environment-context buffer: seed it from the one labeled image, then
# let strong target sightings refresh it through a bounded FIFO.

import numpy as np

from surveysim import (ExemplarSet, as_exemplar_set, assign_patches, image_score,
                       init_buffer, update_if_triggered)

rng = np.random.default_rng(1)
d = 8
target_proto = np.eye(d)[0]
reef_proto = np.eye(d)[1]      # habitat the target sits in
sand_proto = np.eye(d)[2]      # habitat seen later in the survey

target = ExemplarSet("target", target_proto[None, :], threshold=0.3)

# the labeled image: a few target patches among reef habitat
query = np.concatenate([
    target_proto + 0.05 * rng.normal(size=(5, d)),
    reef_proto + 0.05 * rng.normal(size=(15, d)),
])
assignments = assign_patches(query, [target])
print("target patches in the labeled image:", image_score(assignments, "target"))

buf = init_buffer(query, assignments, k=8, m=12, rng=rng)
print("buffer after init:", len(buf), "entries (sampled from the non-target patches)")

# a new image that clears the trigger refreshes the buffer ...
sighting = np.concatenate([
    target_proto + 0.05 * rng.normal(size=(4, d)),
    sand_proto + 0.05 * rng.normal(size=(12, d)),
])
ctx_set = as_exemplar_set(buf, threshold=0.1)
joint = assign_patches(sighting, [target, ctx_set])
phi = image_score(joint, "target")
fired = update_if_triggered(buf, sighting, joint, phi_target=phi, rng=rng)
print(f"sighting with phi_target={phi}: update fired={fired}, buffer now {len(buf)} entries")

# ... while a weak image leaves it untouched
weak = sand_proto + 0.05 * rng.normal(size=(16, d))
joint = assign_patches(weak, [target, as_exemplar_set(buf, threshold=0.1)])
fired = update_if_triggered(buf, weak, joint, phi_target=image_score(joint, "target"), rng=rng)
print(f"weak image: update fired={fired}")

# capacity is enforced oldest-first: flood the buffer and watch it roll over
print("\nFIFO roll-over at capacity", buf.capacity)
for wave in range(3):
    flood = sand_proto + 0.05 * rng.normal(size=(20, d)) + wave
    joint = assign_patches(flood, [target])
    update_if_triggered(buf, flood, joint, phi_target=buf.trigger, rng=rng)
    print(f"  after wave {wave}: {len(buf)} entries")

print("\nexposed as a detector class:", as_exemplar_set(buf, threshold=0.1).label,
      "with", as_exemplar_set(buf, threshold=0.1).size, "exemplars")
