"""Statistical evaluation harness and CRP dataset export.

run_stats simulates a population of device instances and reports uniformity
(mean response weight on own challenges), uniqueness (pairwise inter-device
Hamming distance on a shared challenge set) and reliability (intra-device
Hamming distance between actual responses and the enrolled plaintexts).
Decryption errors are part of the measured responses; key reconstruction is
assumed ideal, so reliability isolates the decryption error rate.

export_crps writes datasets for modeling attacks, one CRP per line:
322 hex characters (the 160 bytes of a followed by b), a comma and the
plaintext bit.  lr_attack is a self-contained logistic-regression attacker
with a linear-threshold toy PUF to validate it.
"""

from dataclasses import dataclass

import numpy as np

from .core import Params, DEFAULT_PARAMS, SecretKey, key_from_s, quantize_vec
from .crpgen import public_key_for, relaxed_bvector
from .lfsr import absorb_batch, expand_batch, expand_response_streams
from .sampler import derive_rng, sample_bits


@dataclass(frozen=True)
class PopulationSpec:
    """Experiment dimensions for the statistics harness."""

    num_devices: int = 100
    challenges_per_device: int = 1000
    ber: float = 0.05
    master_seed: int = 0

    def __post_init__(self):
        if self.num_devices < 2 or self.challenges_per_device < 1:
            raise ValueError("population must have >= 2 devices and >= 1 challenge")


@dataclass(frozen=True)
class StatsReport:
    uniformity_mean: float
    uniformity_std: float
    uniqueness_mean: float
    uniqueness_std: float
    reliability_mean: float
    reliability_std: float
    decryption_error_rate: float

    def as_text(self) -> str:
        return "".join(f"{k}={v:.6f}\n" for k, v in vars(self).items())


CRP_LENGTH = 100  # challenges are issued as L-bit CRPs of this length


def _expand_shared_challenges(count: int, rng, params: Params) -> np.ndarray:
    """(count, n) matrix of LFSR-expanded a' vectors, one seed per CRP block."""
    n_seeds = -(-count // CRP_LENGTH)
    regs = absorb_batch([rng.bytes(32) for _ in range(n_seeds)], [0] * n_seeds)
    streams = expand_batch(regs, CRP_LENGTH * params.n)
    return streams.reshape(n_seeds * CRP_LENGTH, params.n)[:count]


def _crp_bvectors(key: SecretKey, a_mat: np.ndarray, params: Params, rng
                  ) -> tuple[np.ndarray, np.ndarray]:
    """(b', r) over a challenge set issued in CRP_LENGTH blocks, drawing
    noise exactly as the CRP generator does."""
    bs, rs = [], []
    for lo in range(0, a_mat.shape[0], CRP_LENGTH):
        b, r = relaxed_bvector(key, a_mat[lo:lo + CRP_LENGTH], params, rng)
        bs.append(b)
        rs.append(r)
    return np.concatenate(bs), np.concatenate(rs)


def run_stats(spec: PopulationSpec = PopulationSpec(),
              params: Params = DEFAULT_PARAMS,
              per_device_csv: str = None) -> StatsReport:
    """Simulate the population and compute the three statistical metrics.

    per_device_csv, when given, receives one row per device with its
    uniformity and reliability.
    """
    n_chal = spec.challenges_per_device
    shared_rng = derive_rng(spec.master_seed, 0)
    a_mat = _expand_shared_challenges(n_chal, shared_rng, params)
    a_i64 = a_mat.astype(np.int64)

    # shared challenge set for uniqueness: b' of a reference key outside
    # the population, so every device sees the identical (a', b') pairs
    ref_key = key_from_s(
        shared_rng.integers(0, params.q, params.n, dtype=np.int64).astype(np.uint8), params)
    b_shared = _crp_bvectors(ref_key, a_mat, params, shared_rng)[0]
    b_shared_i64 = b_shared.astype(np.int64)

    shared_resp = np.empty((spec.num_devices, n_chal), dtype=np.uint8)
    uniformity = np.empty(spec.num_devices)
    reliability = np.empty(spec.num_devices)
    errors = 0
    for d in range(spec.num_devices):
        rng = derive_rng(spec.master_seed, 1, d)
        key = key_from_s(rng.integers(0, params.q, params.n, dtype=np.int64).astype(np.uint8),
                         params)
        dots = (a_i64 @ key.s.astype(np.int64)) & params.mask
        # own CRPs on the shared a' set: fresh noise, plaintexts, b'
        b_own, r_own = _crp_bvectors(key, a_mat, params, rng)
        own_resp = quantize_vec((b_own.astype(np.int64) - dots) & params.mask, params.q)
        uniformity[d] = own_resp.mean()
        mismatches = int(np.count_nonzero(own_resp != r_own))
        reliability[d] = mismatches / n_chal
        errors += mismatches
        shared_resp[d] = quantize_vec((b_shared_i64 - dots) & params.mask, params.q)

    if per_device_csv is not None:
        with open(per_device_csv, "w") as fh:
            fh.write("device,uniformity,reliability\n")
            for d in range(spec.num_devices):
                fh.write(f"{d},{uniformity[d]:.6f},{reliability[d]:.6f}\n")

    diffs = shared_resp[:, None, :] != shared_resp[None, :, :]
    pair_hd = diffs.mean(axis=2)[np.triu_indices(spec.num_devices, k=1)]
    return StatsReport(
        uniformity_mean=float(uniformity.mean()),
        uniformity_std=float(uniformity.std()),
        uniqueness_mean=float(pair_hd.mean()),
        uniqueness_std=float(pair_hd.std()),
        reliability_mean=float(reliability.mean()),
        reliability_std=float(reliability.std()),
        decryption_error_rate=errors / (spec.num_devices * n_chal),
    )


def decryption_error_mc(samples: int = 100_000, master_seed: int = 0,
                        params: Params = DEFAULT_PARAMS) -> float:
    """Per-bit decryption error rate over single-bit relaxed CRPs.

    Every sample draws a fresh error vector and selection column (a fresh
    single-bit CRP), so the estimate is a tight binomial around the true
    rate rather than being conditioned on a few error draws.
    """
    rng = derive_rng(master_seed, 3)
    key = key_from_s(rng.integers(0, params.q, params.n, dtype=np.int64).astype(np.uint8),
                     params)
    errors = 0
    done = 0
    while done < samples:
        take = min(2000, samples - done)
        a_mat = _expand_shared_challenges(take, rng, params)
        b_vec, r = relaxed_bvector(key, a_mat, params, rng, per_bit_error=True)
        dots = (a_mat.astype(np.int64) @ key.s.astype(np.int64)) & params.mask
        resp = quantize_vec((b_vec.astype(np.int64) - dots) & params.mask, params.q)
        errors += int(np.count_nonzero(resp != r))
        done += take
    return errors / samples


def combined_reliability(num_devices: int = 20, reads_per_device: int = 50,
                         ber: float = 0.05, length: int = 100,
                         master_seed: int = 0,
                         params: Params = DEFAULT_PARAMS) -> float:
    """Intra-device HD including POK noise and FE reconstruction.

    No reference value exists for this combined figure; with the FE failure
    rate below 1e-6 it should match the decryption error rate.
    """
    from .fe import pok_new, pok_read, fe_gen, fe_rec

    total = failures = 0
    mismatch = 0
    for d in range(num_devices):
        rng = derive_rng(master_seed, 2, d)
        pok = pok_new(rng, ber)
        key, helper = fe_gen(pok, rng)
        a_mat = expand_response_streams(rng.bytes(32), 0, length, 1, params.n)
        b_vec, r = relaxed_bvector(key, a_mat, params, rng)
        for _ in range(reads_per_device):
            got = fe_rec(pok_read(pok, rng), helper)
            if got is None:
                failures += 1
                total += length
                mismatch += length  # a failed reconstruction fails the string
                continue
            dots = (a_mat.astype(np.int64) @ got.s.astype(np.int64)) & params.mask
            resp = quantize_vec((b_vec.astype(np.int64) - dots) & params.mask, params.q)
            mismatch += int(np.count_nonzero(resp != r))
            total += length
    return mismatch / total


# --- CRP dataset export ------------------------------------------------------

LINE_HEX_CHARS = 322  # 161 bytes: a (160) then b (1)


def export_crps(key: SecretKey, count: int, mode: str, path: str, rng,
                params: Params = DEFAULT_PARAMS) -> None:
    """Write `count` labeled CRPs; labels are the plaintext bits r.

    mode "full" draws genuine ciphertexts through the public-key encryption;
    mode "compressed" draws LFSR-expanded challenges as the deployed device
    sees them.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if mode not in ("full", "compressed"):
        raise ValueError(f"unknown mode {mode!r}")
    pk = public_key_for(key, params, rng) if mode == "full" else None
    with open(path, "w") as fh:
        done = 0
        while done < count:
            take = min(10_000, count - done)
            if mode == "full":
                X = sample_bits(take * params.m, rng).reshape(take, params.m).astype(np.int64)
                r_vec = sample_bits(take, rng)
                a_mat = ((X @ pk.A.astype(np.int64)) & params.mask).astype(np.uint8)
                b_vec = ((X @ pk.b_vec.astype(np.int64)
                          + r_vec.astype(np.int64) * (params.q // 2)) & params.mask)
                b_vec = b_vec.astype(np.uint8)
            else:
                a_mat = _expand_shared_challenges(take, rng, params)
                b_vec, r_vec = _crp_bvectors(key, a_mat, params, rng)
            for i in range(take):
                payload = a_mat[i].tobytes() + bytes([int(b_vec[i])])
                fh.write(f"{payload.hex()},{int(r_vec[i])}\n")
            done += take


def load_crps(path: str, params: Params = DEFAULT_PARAMS
              ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Read a dataset back as (a_matrix, b_vector, labels)."""
    a_rows, b_vals, labels = [], [], []
    with open(path) as fh:
        for ln, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                payload_hex, label = line.split(",")
                payload = bytes.fromhex(payload_hex)
                if len(payload) != params.n + 1 or label not in ("0", "1"):
                    raise ValueError
            except ValueError:
                raise ValueError(f"{path}:{ln}: malformed CRP line") from None
            a_rows.append(np.frombuffer(payload[:-1], dtype=np.uint8))
            b_vals.append(payload[-1])
            labels.append(int(label))
    return (np.array(a_rows, dtype=np.uint8),
            np.array(b_vals, dtype=np.uint8),
            np.array(labels, dtype=np.uint8))


def challenge_bits(a_mat: np.ndarray, b_vec: np.ndarray) -> np.ndarray:
    """(count, 1288) challenge bit matrix, LSB-first per byte."""
    packed = np.concatenate([a_mat, b_vec[:, None]], axis=1)
    return np.unpackbits(packed, axis=1, bitorder="little")


# --- in-repo modeling attack --------------------------------------------------

def export_toy_crps(count: int, path: str, rng, stages: int = 32,
                    params: Params = DEFAULT_PARAMS) -> None:
    """Linear-threshold toy PUF (arbiter-style) in the same dataset format.

    The response is the sign of a weighted sum of the first `stages`
    challenge bits (mapped to +/-1) with unit-magnitude stage weights; a
    working attacker must model it easily.
    """
    weights = rng.choice(np.array([-1.0, 1.0]), size=stages)
    chunk = 4096
    with open(path, "w") as fh:
        done = 0
        while done < count:
            take = min(chunk, count - done)
            payload = rng.integers(0, 256, size=(take, params.n + 1), dtype=np.int64
                                   ).astype(np.uint8)
            bits = np.unpackbits(payload, axis=1, bitorder="little")[:, :stages]
            labels = ((2.0 * bits - 1.0) @ weights > 0).astype(np.uint8)
            for row, lab in zip(payload, labels):
                fh.write(f"{row.tobytes().hex()},{int(lab)}\n")
            done += take


def lr_attack(dataset_path: str, epochs: int = 40, rate: float = 0.5,
              batch: int = 4096, test_fraction: float = 0.2,
              seed: int = 0, params: Params = DEFAULT_PARAMS) -> float:
    """Logistic regression over the challenge bits; returns test error.

    Features are the challenge bits mapped to +/-1; training is plain
    minibatch gradient descent with a 1/(1+0.02*epoch) rate decay.  The
    final test split (last test_fraction of the file) is never trained on.
    """
    a_mat, b_vec, labels = load_crps(dataset_path, params)
    if labels.size < 1000:
        raise ValueError("dataset too small; need >= 1000 CRPs")
    X = challenge_bits(a_mat, b_vec)
    n_test = int(labels.size * test_fraction)
    n_train = labels.size - n_test
    rng = np.random.default_rng(seed)
    w = np.zeros(X.shape[1])
    bias = 0.0
    order = np.arange(n_train)
    for epoch in range(epochs):
        lr = rate / (1.0 + 0.02 * epoch)
        rng.shuffle(order)
        for lo in range(0, n_train, batch):
            sel = order[lo:lo + batch]
            Xb = 2.0 * X[sel] - 1.0
            z = Xb @ w + bias
            p = 1.0 / (1.0 + np.exp(-z))
            g = p - labels[sel]
            w -= lr * (Xb.T @ g) / sel.size
            bias -= lr * g.mean()
    Xt = 2.0 * X[n_train:] - 1.0
    pred = (Xt @ w + bias > 0).astype(np.uint8)
    return float(np.mean(pred != labels[n_train:]))
