# Six colored patches on white, clustered with and without pixel coordinates.
import numpy as np

from musselseg import MwoConfig, run
from musselseg.features import image_to_dataset
from musselseg.synthetic import gen_six_colors

img = gen_six_colors()

for mode in ("rgb", "rgbxy", "lab"):
    data = image_to_dataset(img, mode)
    ks = []
    for seed in range(3):
        res, _ = run(data, MwoConfig(seed=seed))
        ks.append(res.k_eff)
    print(f"{mode:6s} d={data.d}  k_eff per seed: {ks}")

# with spatial_weight=0 the XY columns are dropped altogether
print(image_to_dataset(img, "rgbxy", spatial_weight=0.0).d)
