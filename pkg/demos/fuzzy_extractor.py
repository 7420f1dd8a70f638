# Key material comes from SRAM power-up bits, which are noisy (~5% of
# cells flip between reads).  The fuzzy extractor hides a uniformly random
# 1280-bit key behind a concatenated repetition+BCH code and recovers it
# exactly from any read within the code's correction budget.

import numpy as np

from lwepuf.fe import (ECC_BER_1, ECC_BER_5, ECC_BER_10, ECC_BER_15,
                       analytic_failure_rate, fe_gen, fe_rec, pok_new, pok_read)
from lwepuf.sampler import make_rng

rng = make_rng(4)
pok = pok_new(rng, ber=0.05)
key, helper = fe_gen(pok, rng)
print(f"POK cells: {pok.truth.size}, helper data: {len(helper.to_bytes())} bytes")

read = pok_read(pok, rng)
print(f"noisy read differs from enrollment in "
      f"{np.count_nonzero(read != pok.truth)} cells "
      f"({np.mean(read != pok.truth):.3f})")

recovered = fe_rec(read, helper)
print(f"key recovered exactly: {np.array_equal(recovered.s, key.s)}")

trials = 300
ok = sum(np.array_equal(fe_rec(pok_read(pok, rng), helper).s, key.s)
         for _ in range(trials))
print(f"reconstructions over {trials} fresh reads: {ok}/{trials}")

print("\nanalytic key-failure rate of each code preset at its design BER:")
for ber, cfg in ((0.01, ECC_BER_1), (0.05, ECC_BER_5), (0.10, ECC_BER_10),
                 (0.15, ECC_BER_15)):
    rate = analytic_failure_rate(ber, cfg)
    print(f"  BER {ber:4.0%}: outer [{cfg.outer_n},{cfg.outer_k},{cfg.outer_t}] "
          f"inner [{cfg.inner_n},1] raw {cfg.raw_bits:6d} bits -> {rate:.2e}")
print("\nand why the deployed [3,1] inner code cannot take 15% raw noise:")
print(f"  analytic failure at BER 15% under the 5% preset: "
      f"{analytic_failure_rate(0.15):.3f}")
