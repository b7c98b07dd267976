"""Stand-in video decoder: unpacks an .npz "video" (frames, pts_ms).

Usage: mock_decoder.py INPUT OUTDIR
Writes frame_%06d.png plus timestamps.txt; exits 1 on unreadable input.
"""
import sys
from pathlib import Path

import numpy as np
from PIL import Image

src, out = Path(sys.argv[1]), Path(sys.argv[2])
try:
    data = np.load(src)
    frames, pts = data["frames"], data["pts_ms"]
except Exception as exc:  # noqa: BLE001
    print(f"cannot decode {src}: {exc}", file=sys.stderr)
    sys.exit(1)
out.mkdir(parents=True, exist_ok=True)
for i, frame in enumerate(frames, start=1):
    Image.fromarray(frame).save(out / f"frame_{i:06d}.png")
if len(frames):
    (out / "timestamps.txt").write_text("".join(f"{p!r}\n" for p in pts.tolist()))
