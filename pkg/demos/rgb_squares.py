# Segment the three-square test image in RGB space.
#
# The image has four flat colors (black background plus red, green and blue
# squares), so a good run finds four clusters and a DB index of zero.
import numpy as np

from musselseg import MwoConfig, run
from musselseg.codec import render_segmentation, write_image
from musselseg.features import image_to_dataset
from musselseg.synthetic import gen_rgb_squares

img = gen_rgb_squares()
print("image", img.shape, "distinct colors:", len(np.unique(img.reshape(-1, 3), axis=0)))

data = image_to_dataset(img, "rgb")
result, trace = run(data, MwoConfig(seed=0))
print("k_eff =", result.k_eff, " rf =", result.rf, " db =", result.db)
print("centers:")
print(np.round(result.centers, 1))

# best RF per iteration never goes up, since the elite mussels are kept
rf = trace.best_rf()
print("first/last best rf:", rf[0], rf[-1])

write_image("rgb_squares.seg.png", render_segmentation(img.shape[:2], result.labels, img, "mean-color"))
print("wrote rgb_squares.seg.png")
