"""Stand-in placeholder detector speaking the line protocol.

Usage: mock_detector.py MODE
  box      one box (10,10,100,100) conf 0.9
  low      one box with conf 0.3
  garbage  a non-JSON line
  wrongid  echoes id + 1
  silent   never answers
  gray     boxes found by thresholding luma 200..240 in the frame
"""
import json
import sys
import time

mode = sys.argv[1] if len(sys.argv) > 1 else "box"

for line in sys.stdin:
    req = json.loads(line)
    if mode == "silent":
        time.sleep(60)
    if mode == "garbage":
        print("this is not json", flush=True)
        continue
    boxes = []
    if mode == "box":
        boxes = [{"x": 10, "y": 10, "w": 100, "h": 100, "conf": 0.9}]
    elif mode == "low":
        boxes = [{"x": 10, "y": 10, "w": 100, "h": 100, "conf": 0.3}]
    elif mode == "gray":
        import numpy as np
        from PIL import Image

        gray = np.asarray(Image.open(req["frame"]).convert("L"))
        ys, xs = np.nonzero((gray >= 200) & (gray <= 240))
        if len(xs) > 500:
            boxes = [{"x": int(xs.min()), "y": int(ys.min()), "w": int(xs.max() - xs.min() + 1),
                      "h": int(ys.max() - ys.min() + 1), "conf": 0.8}]
    rid = req["id"] + 1 if mode == "wrongid" else req["id"]
    print(json.dumps({"id": rid, "boxes": boxes}), flush=True)
