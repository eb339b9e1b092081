#!/usr/bin/env python3
"""Write a corpus of synthetic face-like PNGs plus a manifest file.

The toolkit ships no biometric data; these smooth, brightly lit portraits
exercise the full transform pipeline (and satisfy the low-frequency energy
profile of real face photos).
"""

import argparse
from pathlib import Path

from hfcf import synth, tensorio


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("outdir", type=Path)
    ap.add_argument("--count", type=int, default=8)
    ap.add_argument("--size", type=int, default=112)
    ap.add_argument("--seed", type=int, default=1000)
    args = ap.parse_args()

    args.outdir.mkdir(parents=True, exist_ok=True)
    paths = []
    for i in range(args.count):
        path = args.outdir / f"face{i:03d}.png"
        tensorio.save_png(synth.make_face(args.seed + i, args.size), path)
        paths.append(path)
        print(f"wrote {path}")
    manifest = args.outdir / "manifest.txt"
    manifest.write_text("".join(f"{p}\n" for p in paths))
    print(f"wrote {manifest} ({len(paths)} images)")


if __name__ == "__main__":
    main()
