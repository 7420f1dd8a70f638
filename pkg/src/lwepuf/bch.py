"""GF(2^8) arithmetic, the shortened BCH [212, 128, t=11] code and the
[3, 1] repetition code.

The outer code is BCH(255, 171) over GF(2) with the field generated by
x^8 + x^4 + x^3 + x^2 + 1, shortened by 43: the 43 leading message bits are
fixed to zero and dropped from the codeword.  Encoding is systematic; the
decoder runs syndrome computation, Berlekamp-Massey and a Chien search and
corrects up to 11 bit errors per block.
"""

import numpy as np

GF_PRIM_POLY = 0x11D

# exp/log tables; GF_EXP is doubled so products of logs need no reduction
GF_EXP = np.zeros(510, dtype=np.uint8)
GF_LOG = np.zeros(256, dtype=np.int32)
_x = 1
for _i in range(255):
    GF_EXP[_i] = _x
    GF_LOG[_x] = _i
    _x <<= 1
    if _x & 0x100:
        _x ^= GF_PRIM_POLY
GF_EXP[255:510] = GF_EXP[:255]


def gf_mul(a: int, b: int) -> int:
    if a == 0 or b == 0:
        return 0
    return int(GF_EXP[GF_LOG[a] + GF_LOG[b]])


def gf_inv(a: int) -> int:
    if a == 0:
        raise ZeroDivisionError("0 has no inverse in GF(2^8)")
    return int(GF_EXP[255 - GF_LOG[a]])


def gf_pow(a: int, k: int) -> int:
    if a == 0:
        return 0 if k else 1
    return int(GF_EXP[(GF_LOG[a] * k) % 255])


N_FULL, K_FULL, T = 255, 171, 11
SHORTEN = N_FULL - 212
CODE_N, CODE_K = 212, 128
PARITY = N_FULL - K_FULL  # 84


def _min_poly(j: int) -> int:
    """Minimal polynomial of alpha^j over GF(2), coefficients as int bits."""
    coset, c = [], j % 255
    while c not in coset:
        coset.append(c)
        c = (c * 2) % 255
    poly = [1]  # GF(256) coefficients, poly[i] = coeff of x^i
    for c in coset:
        root = int(GF_EXP[c])
        nxt = [0] * (len(poly) + 1)
        for i, co in enumerate(poly):
            nxt[i] ^= gf_mul(co, root)
            nxt[i + 1] ^= co
        poly = nxt
    out = 0
    for i, co in enumerate(poly):
        assert co in (0, 1)
        out |= co << i
    return out


def _build_generator() -> int:
    """lcm of the minimal polynomials of alpha^1 .. alpha^(2t)."""
    g, seen = 1, set()
    for j in range(1, 2 * T + 1):
        mp = _min_poly(j)
        if mp not in seen:
            seen.add(mp)
            acc = 0
            gg = g
            k = 0
            while gg:
                if gg & 1:
                    acc ^= mp << k
                gg >>= 1
                k += 1
            g = acc
    return g

GEN_POLY = _build_generator()
assert GEN_POLY.bit_length() - 1 == PARITY

# codeword position p (0 = first transmitted bit) holds the coefficient of
# x^(211-p); positions 0..127 are the message, 128..211 the parity bits
_DEG_OF_POS = CODE_N - 1 - np.arange(CODE_N)
_SYND_POW = GF_EXP[(np.arange(1, 2 * T + 1)[:, None] * _DEG_OF_POS[None, :]) % 255]
_CHIEN_LOG = (-np.arange(255)[:, None] * np.arange(T + 1)[None, :]) % 255


def _check_word(word, length: int) -> np.ndarray:
    arr = np.asarray(word, dtype=np.uint8)
    if arr.shape != (length,):
        raise ValueError(f"expected {length} bits, got shape {arr.shape}")
    return arr


def bch_encode(msg) -> np.ndarray:
    """Systematic codeword: 128 message bits followed by 84 parity bits."""
    msg = _check_word(msg, CODE_K)
    acc = 0
    for b in msg:
        acc = (acc << 1) | int(b)
    acc <<= PARITY
    rem = acc
    for deg in range(CODE_N - 1, PARITY - 1, -1):
        if rem >> deg & 1:
            rem ^= GEN_POLY << (deg - PARITY)
    code = acc | rem
    return np.array([(code >> int(d)) & 1 for d in _DEG_OF_POS], dtype=np.uint8)


def bch_syndromes(word) -> np.ndarray:
    """Syndromes S_1..S_22 of a 212-bit word, as GF(2^8) elements."""
    word = _check_word(word, CODE_N)
    idx = np.nonzero(word)[0]
    if idx.size == 0:
        return np.zeros(2 * T, dtype=np.uint8)
    return np.bitwise_xor.reduce(_SYND_POW[:, idx], axis=1)


def _berlekamp_massey(synd: np.ndarray):
    """Error locator polynomial (list of GF coefficients, sigma[0] = 1)."""
    C, B = [1], [1]
    L, m, b = 0, 1, 1
    for n in range(len(synd)):
        d = int(synd[n])
        for i in range(1, L + 1):
            d ^= gf_mul(C[i], int(synd[n - i]))
        if d == 0:
            m += 1
            continue
        coef = gf_mul(d, gf_inv(b))
        if 2 * L <= n:
            T_ = C.copy()
            if len(B) + m > len(C):
                C = C + [0] * (len(B) + m - len(C))
            for i, Bi in enumerate(B):
                C[i + m] ^= gf_mul(coef, Bi)
            L, B, b, m = n + 1 - L, T_, d, 1
        else:
            if len(B) + m > len(C):
                C = C + [0] * (len(B) + m - len(C))
            for i, Bi in enumerate(B):
                C[i + m] ^= gf_mul(coef, Bi)
            m += 1
    while len(C) > 1 and C[-1] == 0:
        C.pop()
    return C, L


def _chien_roots(sigma) -> np.ndarray:
    """Degrees d in [0, 255) with sigma(alpha^-d) = 0."""
    acc = np.full(255, sigma[0], dtype=np.uint8)
    for t, co in enumerate(sigma[1:], start=1):
        if co:
            acc ^= GF_EXP[(GF_LOG[co] + _CHIEN_LOG[:, t]) % 255]
    return np.nonzero(acc == 0)[0]


def bch_decode(word):
    """Correct up to 11 errors; return the 128 message bits or None.

    None signals an uncorrectable word: locator degree above 11, Chien root
    count inconsistent with the locator degree, an error located in the
    shortened (always-zero) prefix, or nonzero syndromes after correction.
    """
    word = _check_word(word, CODE_N)
    synd = bch_syndromes(word)
    if not synd.any():
        return word[:CODE_K].copy()
    sigma, L = _berlekamp_massey(synd)
    if L > T or len(sigma) - 1 != L:
        return None
    err_degs = _chien_roots(sigma)
    if err_degs.size != L or (err_degs > CODE_N - 1).any():
        return None
    fixed = word.copy()
    fixed[CODE_N - 1 - err_degs] ^= 1
    if bch_syndromes(fixed).any():
        return None
    return fixed[:CODE_K].copy()


def rep_encode(bits, width: int = 3) -> np.ndarray:
    """Repeat each bit `width` times."""
    return np.repeat(np.asarray(bits, dtype=np.uint8), width)


def rep_decode(bits, width: int = 3) -> np.ndarray:
    """Majority vote over consecutive groups of `width` bits."""
    arr = np.asarray(bits, dtype=np.uint8)
    if arr.size % width:
        raise ValueError(f"bit count {arr.size} not a multiple of {width}")
    return (arr.reshape(-1, width).sum(axis=1) > width // 2).astype(np.uint8)
