# Site files on disk: a human-readable JSON manifest plus a compact binary
# embedding file, with loaders that reject anything malformed.

import json
import tempfile
from pathlib import Path

import numpy as np

from surveysim import (SiteFormatError, SynthParams, generate_world, load_exemplars,
                       load_site, save_exemplars, save_site,
                       exemplars_from_provenance)

workdir = Path(tempfile.mkdtemp(prefix="surveysim_demo_"))
grid, prov = generate_world(SynthParams(rows=6, cols=6, dim=16, patches_per_cell=8,
                                        n_target_clusters=1, cluster_radius=2.0,
                                        target_cell_fraction=0.08, seed=1))

manifest = save_site(grid, workdir / "site")
print("wrote", manifest)
doc = json.loads(manifest.read_text())
print("manifest keys:", sorted(doc))
print("first cell record:", doc["cells"][0])

bin_path = manifest.parent / "embeddings.bin"
header = bin_path.read_bytes()[:20]
print(f"\nbinary header ({len(header)} bytes): magic={header[:4]!r}, "
      "then version u32, dim u32, patch count u64, then float32 data")

loaded = load_site(manifest)
same = all(np.array_equal(grid.cells[i].patches, loaded.cells[i].patches)
           for i in grid.indices())
print("load-back equals original:", same)

resaved = save_site(loaded, workdir / "copy")
print("save(load(x)) byte-identical:", resaved.read_bytes() == manifest.read_bytes())

# exemplar files can reference site patches instead of inlining vectors
target = exemplars_from_provenance(grid, prov, sigma_target=0.3)
ex_path = save_exemplars(workdir / "site" / "exemplars.json", target,
                         source_site="manifest.json", source_cell=prov.query_cell,
                         source_patch_indices=prov.query_target_patch_indices,
                         query_cell=prov.query_cell)
got, query_cell = load_exemplars(ex_path, loaded)
print(f"\nexemplar file: {got.size} exemplars for {got.label!r}, "
      f"threshold {got.threshold}, query cell {tuple(query_cell)}")

# corruption is caught with a specific error class
truncated = workdir / "broken"
truncated.mkdir()
save_site(grid, truncated)
data = (truncated / "embeddings.bin").read_bytes()
(truncated / "embeddings.bin").write_bytes(data[:-16])
try:
    load_site(truncated / "manifest.json")
except SiteFormatError as e:
    print("\ntruncated file rejected:", e)

print("\nequivalent CLI:")
print("  surveysim synth --rows 30 --cols 30 --out site/")
print("  surveysim validate --site site/manifest.json")
print("  surveysim run --site site/manifest.json --exemplars site/exemplars.json \\")
print("      --policy greedy,lawnmower --signal target_plus_ec,target \\")
print("      --sigma-context 0.3 --trials 100 --seed 42 --out results/")
print("  surveysim curves --results results/trials.csv --out results/replot.csv")
print("  surveysim analyze --site site/manifest.json --exemplars site/exemplars.json \\")
print("      --sigma-context 0.3")
