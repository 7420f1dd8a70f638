# Modeling-attack resistance at desk scale: a logistic-regression attacker
# that cleanly models an arbiter-style linear toy PUF stays at coin-flip
# accuracy on the LWE-decryption PUF's exported CRPs.  (The TypeScript
# bench in frontend/ runs the DNN and SVM presets over the same files.)

import tempfile
from pathlib import Path

import numpy as np

from lwepuf.core import key_from_s
from lwepuf.evaluate import export_crps, export_toy_crps, lr_attack
from lwepuf.sampler import make_rng

rng = make_rng(13)
key = key_from_s(rng.integers(0, 256, 160, dtype=np.int64).astype(np.uint8))

with tempfile.TemporaryDirectory() as tmp:
    lattice = str(Path(tmp) / "lattice.csv")
    toy = str(Path(tmp) / "toy.csv")
    n = 25_000  # desk scale; the acceptance suite runs 125k
    export_crps(key, n, "compressed", lattice, rng)
    export_toy_crps(n, toy, make_rng(14))
    print(f"exported {n} CRPs each (one line = 322 hex chars + label)")

    toy_err = lr_attack(toy, epochs=60, rate=1.0, seed=1)
    print(f"\ntoy linear-threshold PUF:  LR test error = {toy_err:.4f}")
    lat_err = lr_attack(lattice, epochs=30, rate=0.5, seed=1)
    print(f"LWE-decryption PUF:        LR test error = {lat_err:.4f}")
    sigma = (0.25 / (n // 5)) ** 0.5
    print(f"\ncoin-flip 3-sigma band at the test size: 0.5 +/- {3 * sigma:.4f}")
    print(f"attacker works (toy small), target indistinguishable from chance: "
          f"{toy_err < 0.1 and abs(lat_err - 0.5) < 3 * sigma}")
