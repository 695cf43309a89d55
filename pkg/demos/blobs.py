# Three Gaussian blobs plus uniform noise, compared with k-means.
#
# The RF objective keeps falling as clusters are added, so the optimizer
# tends to split the blobs.  Capping k_max shows how the answer moves.
import numpy as np

from musselseg import MwoConfig, run
from musselseg.core import assign_to_centers
from musselseg.evaluation import db_index, kmeans_baseline
from musselseg.fitness import rf_fitness
from musselseg.synthetic import gen_blobs

data = gen_blobs()
print("points:", data.n, " noise points:", int(np.sum(data.reference_labels == -1)))

for k in (2, 3, 5, 10, 15):
    part = kmeans_baseline(data, k, rng=0)
    print(f"k-means k={k:2d}  rf={rf_fitness(data, part):.4f}  db={db_index(data, part):.4f}")

for k_max in (15, 5, 3):
    res, _ = run(data, MwoConfig(seed=0, k_max=k_max))
    print(f"mwo k_max={k_max:2d}  k_eff={res.k_eff}  rf={res.rf:.4f}  db={res.db:.4f}")

# scoring the generating centers directly, for reference
truth = assign_to_centers(data, np.array([[0.0, 0.0], [10.0, 0.0], [5.0, 8.0]]))
print(f"true centers     rf={rf_fitness(data, truth):.4f}  db={db_index(data, truth):.4f}")
