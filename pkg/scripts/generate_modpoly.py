#!/usr/bin/env python3
"""Generate classical modular polynomials Phi_ell over Z.

Method: CRT over many word-size primes.  For each prime P, the coefficients
of Phi_ell are recovered from q-expansions computed in F_P:

  * the j-function series is built from E4^3 / Delta via the pentagonal
    number theorem and Newton series inversion,
  * the power sums of the ell conjugate series j((tau+k)/ell) are read off
    every ell-th coefficient of powers of j(tau/ell) (the root-of-unity
    averaging trick, which needs no roots of unity),
  * Newton's identities give the elementary symmetric functions, and a
    greedy reduction against powers of j(tau) yields the coefficients.

Series multiplication mod P is done by Kronecker substitution: coefficients
are packed into 64-bit slots of a big integer (gmpy2), multiplied once, and
the slots are reduced with numpy.  Primes are kept below 21 million so slot
accumulation cannot overflow 64 bits for series up to ~41000 terms.

The result is verified per ell: internal consistency of the positive-q part
of the expansion, symmetry, the Kronecker congruence
Phi_ell(X, Y) = (X^ell - Y)(X - Y^ell) mod ell, and exact known tables for
ell in {2, 3}.

Output: one file phi_<ell>.txt.gz per ell in the target directory, in the
format consumed by the package loader ("ell" line, then "i j c" triples
with i >= j).

This is a maintenance script, not part of the installed package.
"""

import argparse
import gzip
import math
import multiprocessing as mp
import os
import time

import gmpy2
import numpy as np

# Slot accumulation bound: N * (P-1)^2 < 2^64 for N <= 79601 needs P < 15.2e6.
PRIME_CAP = 15_000_000
SLOT_BYTES = 8


def height_bound_bits(ell):
    """Upper bound on log2 |coeff| of Phi_ell (Broker-Sutherland)."""
    lg = math.log(ell)
    nats = 6 * ell * lg + 16 * ell + 14 * math.sqrt(ell) * lg
    return int(nats / math.log(2)) + 2


def crt_primes(ell, bits):
    """Deterministic list of CRT primes > ell+2, capped below PRIME_CAP."""
    primes = []
    total = 0
    p = PRIME_CAP
    while total < bits + 16:
        p = int(gmpy2.prev_prime(p))
        if p <= ell + 2:
            raise RuntimeError("ran out of CRT primes")
        primes.append(p)
        total += math.log2(p)
    return primes


def pack(vec):
    """Pack a uint64 numpy vector into one big integer, 8 bytes per slot."""
    return int.from_bytes(vec.tobytes(), "little")


def unpack(n, length):
    """Inverse of pack; n must be nonnegative with slots < 2^64."""
    buf = n.to_bytes(length * SLOT_BYTES, "little")
    return np.frombuffer(buf, dtype=np.uint64).copy()


def series_mul(a, b, length, P):
    """Multiply two reduced series (uint64 vectors) mod P, truncated."""
    prod = gmpy2.mpz(pack(a)) * gmpy2.mpz(pack(b))
    full = int(prod) & ((1 << (64 * length)) - 1)
    return unpack(full, length) % P


def series_inv(a, length, P):
    """Newton inversion of a series with a[0] = 1, mod P."""
    inv = np.zeros(length, dtype=np.uint64)
    inv[0] = 1
    k = 1
    while k < length:
        k = min(2 * k, length)
        t = series_mul(a[:k], inv[:k], k, P)
        t = (P - t) % P
        t[0] = (t[0] + 2) % P
        inv[:k] = series_mul(inv[:k], t, k, P)
    return inv


def j_series_mod(P, length):
    """Series S with j(tau) = q^-1 * S(q), to `length` terms, mod P."""
    # eta-like product prod (1-q^n) via pentagonal number theorem.
    e = np.zeros(length, dtype=np.uint64)
    e[0] = 1
    k = 1
    while True:
        g1 = k * (3 * k - 1) // 2
        g2 = k * (3 * k + 1) // 2
        if g1 >= length and g2 >= length:
            break
        s = 1 if k % 2 == 0 else P - 1
        if g1 < length:
            e[g1] = s
        if g2 < length:
            e[g2] = s
        k += 1
    # Delta/q = e^24.
    e2 = series_mul(e, e, length, P)
    e3 = series_mul(e2, e, length, P)
    e6 = series_mul(e3, e3, length, P)
    e12 = series_mul(e6, e6, length, P)
    e24 = series_mul(e12, e12, length, P)
    # E4 = 1 + 240 sum sigma_3(n) q^n, via a sieve.
    sig3 = np.zeros(length, dtype=np.uint64)
    for d in range(1, length):
        c = (d * d % P) * d % P
        sig3[d::d] += np.uint64(c)
        if d % 64 == 0:
            sig3 %= P
    sig3 %= P
    e4 = (240 * sig3) % P
    e4[0] = 1
    e4_3 = series_mul(series_mul(e4, e4, length, P), e4, length, P)
    return series_mul(e4_3, series_inv(e24, length, P), length, P)


def phi_residues(ell, P):
    """Coefficient matrix of Phi_ell mod P, shape (ell+2, ell+2).

    Window bookkeeping: truncated products of q-series with poles at q^-1
    lose one exact coefficient at the top per multiplication, so the power
    sums are computed out to q^(2*ell+1), which keeps the sigma_m exact out
    to q^(ell+1) and the assembled X^i coefficient series exact on the
    matching window [-(ell+1), +1].  The slot at q^+1 is a redundant
    consistency check.
    """
    G = 1                                   # guard slots above q^0
    top_p = 2 * ell + G                     # power sums exact to q^top_p
    length = ell * top_p + ell + 1          # u-series precision
    win = top_p + 2                         # window [-1, top_p], q^t at t+1
    S = j_series_mod(P, length)

    # Power sums p_m(q) of the ell conjugates j((tau+k)/ell):
    # p_m at q^t equals ell * [u^(ell*t+m)] S^m.
    psums = np.zeros((ell + 1, win), dtype=np.uint64)
    T = S.copy()
    for m in range(1, ell + 1):
        if m > 1:
            T = series_mul(T, S, length, P)
        idx = np.arange(-1, top_p + 1) * ell + m
        ok = (idx >= 0) & (idx < length)
        vals = np.zeros(win, dtype=np.uint64)
        vals[ok] = T[idx[ok]]
        psums[m] = vals * np.uint64(ell % P) % P

    # Newton's identities: m*sigma_m = sum_{k=1}^m (-1)^(k-1) sigma_{m-k} p_k.
    # All series anchored at q^-1 (index t+1); convolution shifts by one.
    sigmas = [np.zeros(win, dtype=np.uint64)]
    sigmas[0][1] = 1  # sigma_0 = 1
    for m in range(1, ell + 1):
        acc = np.zeros(2 * win - 1, dtype=np.uint64)
        for k in range(1, m + 1):
            conv = np.convolve(sigmas[m - k], psums[k]) % P
            if k % 2 == 1:
                acc = (acc + conv) % P
            else:
                acc = (acc + P - conv) % P
        res = acc[1:1 + win] % P
        res = res * np.uint64(pow(m, P - 2, P)) % P
        sigmas.append(res)

    # Assemble the X^i coefficient series c_i(q) = psi_{i-1} - B*psi_i with
    # psi_i = (-1)^(ell-i) sigma_{ell-i} and B = j(q^ell) sparse.  Everything
    # below lives on the window [-(ell+1), ell+G], q^t at index t + A.
    wide = 2 * ell + G + 2
    A = ell + 1

    def psi(i):
        """psi_i as a wide-window vector (exact up to q^(ell+G))."""
        if i < 0 or i > ell:
            return np.zeros(wide, dtype=np.uint64)
        sig = sigmas[ell - i]
        v = np.zeros(wide, dtype=np.uint64)
        hi = min(win, ell + G + 2)          # keep q <= ell+G
        v[A - 1:A - 1 + hi] = sig[:hi]
        if (ell - i) % 2 == 1:
            v = (P - v) % P
        return v

    # B = j(q^ell): only terms whose shift can reach q^G matter here.
    bterms = [(-ell, int(S[0]) % P), (0, int(S[1]) % P), (ell, int(S[2]) % P)]

    # Powers of j(tau), exact on [-k, ell+G-k+1] which covers [-k, G].
    jser = np.zeros(wide, dtype=np.uint64)
    stop = min(length, ell + G + 2)
    jser[A - 1:A - 1 + stop] = S[:stop]
    jpow = [np.zeros(wide, dtype=np.uint64) for _ in range(ell + 2)]
    jpow[0][A] = 1
    for k in range(1, ell + 2):
        conv = np.convolve(jpow[k - 1], jser) % P
        jpow[k] = conv[A:A + wide].copy()

    cgrid = np.zeros((ell + 2, ell + 2), dtype=np.uint64)
    for i in range(ell + 2):
        d = psi(i - 1).copy()
        pi = psi(i)
        for (t, cv) in bterms:
            if cv == 0:
                continue
            shifted = np.zeros(wide, dtype=np.uint64)
            if t >= 0:
                shifted[t:] = pi[:wide - t]
            else:
                shifted[:wide + t] = pi[-t:]
            d = (d + (P - shifted) * np.uint64(cv)) % P
        # Greedy reduction against powers of j, highest pole first.
        for k in range(ell + 1, -1, -1):
            a = int(d[A - k]) % P
            cgrid[i, k] = a
            if a:
                d = (d + (P - jpow[k]) * np.uint64(a)) % P
        # Exactness holds on [-(ell+1), G]; all those slots must now vanish.
        if np.any(d[:A + G + 1] % P):
            raise ArithmeticError(f"inconsistent expansion: ell={ell} P={P} i={i}")

    if not np.array_equal(cgrid, cgrid.T):
        raise ArithmeticError(f"asymmetric result: ell={ell} P={P}")
    return cgrid


def crt_combine(residue_mats, primes):
    """Balanced CRT of coefficient matrices; returns gmpy2 matrix and modulus."""
    n = len(primes)
    if n == 1:
        return [[gmpy2.mpz(int(x)) for x in row] for row in residue_mats[0]], gmpy2.mpz(primes[0])
    half = n // 2
    lo, M1 = crt_combine(residue_mats[:half], primes[:half])
    hi, M2 = crt_combine(residue_mats[half:], primes[half:])
    inv = gmpy2.invert(M1, M2)
    rows = len(lo)
    out = []
    for i in range(rows):
        row = []
        for k in range(rows):
            d = ((hi[i][k] - lo[i][k]) * inv) % M2
            row.append(lo[i][k] + M1 * d)
        out.append(row)
    return out, M1 * M2


KNOWN = {
    2: {(3, 0): 1, (2, 2): -1, (2, 1): 1488, (2, 0): -162000,
        (1, 1): 40773375, (1, 0): 8748000000, (0, 0): -157464000000000},
    3: {(4, 0): 1, (3, 3): -1, (3, 2): 2232, (3, 1): -1069956,
        (3, 0): 36864000, (2, 2): 2587918086, (2, 1): 8900222976000,
        (2, 0): 452984832000000, (1, 1): -770845966336000000,
        (1, 0): 1855425871872000000000, (0, 0): 0},
}


def verify(ell, coeffs):
    """Check symmetry, Kronecker congruence, and known small tables."""
    n = ell + 2
    for i in range(n):
        for k in range(i):
            assert coeffs[i][k] == coeffs[k][i], f"symmetry {ell} ({i},{k})"
    # (X^ell - Y)(X - Y^ell) = X^(ell+1) - X^ell Y^ell - XY + Y^(ell+1)
    exp = {(ell + 1, 0): 1, (ell, ell): -1, (1, 1): -1, (0, ell + 1): 1}
    for i in range(n):
        for k in range(n):
            want = exp.get((i, k), 0) % ell
            assert int(coeffs[i][k]) % ell == want, \
                f"Kronecker congruence fails: ell={ell} ({i},{k})"
    if ell in KNOWN:
        known = KNOWN[ell]
        for i in range(n):
            for k in range(i + 1):
                assert int(coeffs[i][k]) == known.get((i, k), 0), \
                    f"known-table mismatch ell={ell} ({i},{k})"


def worker(args):
    ell, P = args
    return P, phi_residues(ell, P)


def generate(ell, outdir, procs):
    t0 = time.time()
    bits = height_bound_bits(ell)
    primes = crt_primes(ell, bits)
    if procs > 1 and ell > 23:
        with mp.Pool(procs) as pool:
            results = pool.map(worker, [(ell, P) for P in primes], chunksize=4)
    else:
        results = [worker((ell, P)) for P in primes]
    results.sort(key=lambda r: r[0])
    mats = [r[1] for r in results]
    combined, M = crt_combine(mats, [r[0] for r in results])
    half = M >> 1
    n = ell + 2
    coeffs = [[int(c - M) if c > half else int(c) for c in row] for row in combined]
    verify(ell, coeffs)
    path = os.path.join(outdir, f"phi_{ell}.txt.gz")
    with gzip.open(path, "wt") as fh:
        fh.write(f"{ell}\n")
        for i in range(n):
            for k in range(i + 1):
                c = coeffs[i][k]
                if c:
                    fh.write(f"{i} {k} {c}\n")
    dt = time.time() - t0
    size = os.path.getsize(path)
    print(f"ell={ell}: {len(primes)} primes, {dt:.1f}s, {size/1e6:.2f} MB",
          flush=True)


def verify_existing(outdir):
    """Re-check symmetry, Kronecker congruence and height of written files."""
    names = sorted(f for f in os.listdir(outdir) if f.startswith("phi_"))
    for name in names:
        ell = int(name.split("_")[1].split(".")[0])
        coeffs = [[0] * (ell + 2) for _ in range(ell + 2)]
        with gzip.open(os.path.join(outdir, name), "rt") as fh:
            assert int(fh.readline()) == ell
            for line in fh:
                i, k, c = line.split()
                coeffs[int(i)][int(k)] = int(c)
                coeffs[int(k)][int(i)] = int(c)
        verify(ell, coeffs)
        h = max(abs(c) for row in coeffs for c in row).bit_length()
        assert h <= height_bound_bits(ell), (ell, h)
        print(f"ell={ell}: verified (height {h} bits)", flush=True)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--lmax", type=int, default=199)
    ap.add_argument("--lmin", type=int, default=2)
    ap.add_argument("--outdir", default="src/fp2count/data/modpoly")
    ap.add_argument("--procs", type=int, default=2)
    ap.add_argument("--verify", action="store_true",
                    help="re-verify already generated files and exit")
    args = ap.parse_args()
    if args.verify:
        verify_existing(args.outdir)
        return
    os.makedirs(args.outdir, exist_ok=True)
    ells = [l for l in range(2, args.lmax + 1) if gmpy2.is_prime(l)
            and l >= args.lmin]
    for ell in ells:
        path = os.path.join(args.outdir, f"phi_{ell}.txt.gz")
        if os.path.exists(path):
            print(f"ell={ell}: exists, skipping", flush=True)
            continue
        generate(ell, args.outdir, args.procs)


if __name__ == "__main__":
    main()
