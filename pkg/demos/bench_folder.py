# Run the batch benchmark over a folder of small generated images.
import sys
import tempfile
from pathlib import Path

import numpy as np

from musselseg.cli import main
from musselseg.codec import write_image

rng = np.random.default_rng(1)
folder = Path(tempfile.mkdtemp()) / "images"
folder.mkdir()
for i in range(6):
    img = np.full((24, 24, 3), rng.integers(0, 256, 3), dtype=np.uint8)
    img[4:14, 6:18] = rng.integers(0, 256, 3)
    write_image(folder / f"tile{i}.png", img)

report = folder.parent / "report.csv"
main(["bench", str(folder), "--report", str(report), "--pop", "20", "--iters", "40",
      "--baseline", "kmeans", "--k", "2"])
sys.stdout.write(report.read_text())
