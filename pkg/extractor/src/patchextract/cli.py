"""patchextract command line: extract imagery into site files, pick
exemplars from clicks."""

from __future__ import annotations

import argparse
import sys

from .backbone import make_backbone
from .exemplars import pick_exemplars
from .extract import extract_site, load_cropped
from .registration import load_cell_table, load_registration


def _cmd_extract(args) -> int:
    backbone = make_backbone(args.backbone, dim=args.dim, seed=args.backbone_seed)
    table = load_registration(args.registration, rows=args.rows, cols=args.cols)
    cells = load_cell_table(args.cells) if args.cells else None
    manifest = extract_site(table, backbone, args.out, cell_table=cells,
                            image_root=args.image_root, species=args.species)
    print(f"wrote {manifest}")
    return 0


def _parse_clicks(text: str) -> list[tuple[int, int]]:
    clicks = []
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        x, y = part.split(",")
        clicks.append((int(x), int(y)))
    if not clicks:
        raise ValueError("no clicks given; use --clicks 'x,y;x,y;...'")
    return clicks


def _cmd_pick(args) -> int:
    backbone = make_backbone(args.backbone, dim=args.dim, seed=args.backbone_seed)
    image = load_cropped(args.image)
    query = tuple(int(v) for v in args.query_cell.split(",")) if args.query_cell else None
    path, indices = pick_exemplars(image, _parse_clicks(args.clicks), backbone,
                                   args.out, label=args.label,
                                   threshold=args.threshold, query_cell=query)
    print(f"wrote {path} ({len(indices)} exemplars from patches {indices})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="patchextract",
                                description="Survey imagery to surveysim site files")
    p.add_argument("--backbone", default="projection", choices=["projection", "dinov2"])
    p.add_argument("--dim", type=int, default=64,
                   help="embedding dim for the projection backbone (default %(default)s)")
    p.add_argument("--backbone-seed", type=int, default=0)
    sub = p.add_subparsers(dest="command", required=True)

    pe = sub.add_parser("extract", help="embed registered imagery into a site")
    pe.add_argument("--registration", required=True,
                    help="CSV: image,center_row,center_col")
    pe.add_argument("--rows", type=int, required=True)
    pe.add_argument("--cols", type=int, required=True)
    pe.add_argument("--cells", default=None,
                    help="optional CSV: row,col,gt_target_area[,scalar_signal]")
    pe.add_argument("--image-root", default=None,
                    help="directory image paths are relative to")
    pe.add_argument("--species", default=None)
    pe.add_argument("--out", required=True, help="output site directory")
    pe.set_defaults(func=_cmd_extract)

    pp = sub.add_parser("pick", help="click coordinates to exemplar file")
    pp.add_argument("--image", required=True)
    pp.add_argument("--clicks", required=True, help="'x,y;x,y;...' pixel coordinates")
    pp.add_argument("--label", default="target")
    pp.add_argument("--threshold", type=float, default=0.3)
    pp.add_argument("--query-cell", default=None, help="'row,col' of the labeled image")
    pp.add_argument("--out", required=True, help="exemplar file path")
    pp.set_defaults(func=_cmd_pick)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
