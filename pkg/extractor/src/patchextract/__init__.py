"""patchextract: offline adapter from survey imagery to surveysim sites.

Runs an embedding backbone over center-cropped images, maps the 37x37
patch lattice onto each image's 3x3 grid-cell footprint, and writes the
survey engine's site and exemplar file formats.
"""

from .backbone import (CROP, PATCH, PATCHES_PER_IMAGE, PATCHES_PER_SIDE, Backbone,
                       DinoV2Backbone, ProjectionBackbone, make_backbone, patch_grid)
from .exemplars import click_to_patch, pick_exemplars
from .extract import band_patch_indices, extract_site, load_cropped
from .registration import (RegisteredImage, RegistrationTable, load_cell_table,
                           load_registration)
from .siteformat import write_embeddings, write_exemplar_file, write_manifest

__version__ = "0.1.0"

__all__ = [
    "Backbone", "CROP", "DinoV2Backbone", "PATCH", "PATCHES_PER_IMAGE",
    "PATCHES_PER_SIDE", "ProjectionBackbone", "RegisteredImage", "RegistrationTable",
    "band_patch_indices", "click_to_patch", "extract_site", "load_cell_table",
    "load_cropped", "load_registration", "make_backbone", "patch_grid",
    "pick_exemplars", "write_embeddings", "write_exemplar_file", "write_manifest",
]
