"""Built-in invariant checks for the `hfcf selftest` command.

A fast, dependency-free subset of the full pytest suite: each check prints
one PASS/FAIL line and the run exits non-zero on any failure.
"""

from __future__ import annotations

import traceback

import numpy as np

from . import bdct, fusion, polyprotect, tensorio
from .smpc import (
    dealer_make_triples,
    decode_dot,
    encode_fixed,
    make_enrolled_share,
    share,
    shared_dot,
    verify_session,
)


def _check_dct_roundtrip():
    rng = np.random.default_rng(7)
    img = tensorio.RasterImage(
        rng.uniform(0, 255, size=(128, 128, 3)), tensorio.ColorSpace.YCBCR
    )
    back = bdct.inverse_bdct(bdct.forward_bdct(img))
    err = np.max(np.abs(back.data - img.data))
    assert err <= 1e-6, f"round-trip error {err}"


def _check_frequency_fuse():
    rng = np.random.default_rng(8)
    full = bdct.forward_bdct(
        tensorio.RasterImage(rng.uniform(0, 255, (32, 32, 3)), tensorio.ColorSpace.YCBCR)
    )
    _, ac = bdct.split_dc(full)
    fused = fusion.frequency_fuse(ac)
    y = ac.tensor.data[:, :, 0:63]
    cb = ac.tensor.data[:, :, 63:126]
    cr = ac.tensor.data[:, :, 126:189]
    stacked = np.stack([y, cb, cr])
    expect_abs = np.max(np.abs(stacked), axis=0)
    assert np.array_equal(np.abs(fused.tensor.data), expect_abs), "fusion magnitude"


def _check_protect_oracle():
    rng = np.random.default_rng(9)
    for _ in range(50):
        n = int(rng.integers(5, 60))
        overlap = int(rng.integers(0, 5))
        params = polyprotect.gen_params(int(rng.integers(0, 2**31)), overlap=overlap)
        v = rng.uniform(-1, 1, size=n)
        got = polyprotect.protect(v, params).values
        k = polyprotect.output_len(n, params.m, overlap)
        stride = params.m - overlap
        expect = []
        for j in range(k):
            s = j * stride
            expect.append(
                sum(
                    c * v[s + i] ** e
                    for i, (c, e) in enumerate(zip(params.coefficients, params.exponents))
                )
            )
        assert np.allclose(got, expect, rtol=1e-12, atol=1e-12), "polynomial mismatch"


def _check_sharing():
    rng = np.random.default_rng(10)
    x = rng.uniform(-5, 5, size=64)
    y = rng.uniform(-5, 5, size=64)
    sx = share(encode_fixed(x), rng)
    sy = share(encode_fixed(y), rng)
    t1, t2 = dealer_make_triples(1, 64, seed=3)
    z1, z2 = shared_dot(sx, sy, (t1[0], t2[0]))
    got = decode_dot(z1, z2)
    assert abs(got - float(x @ y)) < 64 * 2**-16 + 2**-15, "shared dot off"


def _check_secure_session():
    rng = np.random.default_rng(11)
    vecs = rng.uniform(-1, 1, size=(10, 32))
    gallery = [make_enrolled_share(f"id{i}", vecs[i]) for i in range(10)]
    q = vecs[3] + rng.normal(0, 0.01, size=32)
    results = verify_session(q, gallery, triple_seed=5)
    plain = {
        f"id{i}": 1.0 - float(q @ vecs[i]) / (np.linalg.norm(q) * np.linalg.norm(vecs[i]))
        for i in range(10)
    }
    for label, dist in results:
        assert abs(dist - plain[label]) <= 1e-3, f"{label}: {dist} vs {plain[label]}"
    assert min(results, key=lambda r: r[1])[0] == "id3", "wrong nearest identity"


def _check_serialization():
    import os
    import tempfile

    rng = np.random.default_rng(12)
    data = rng.uniform(-100, 100, size=(5, 7, 3)).astype(np.float32).astype(np.float64)
    t = tensorio.Tensor3(data)
    fd, path = tempfile.mkstemp(suffix=".hft")
    os.close(fd)
    try:
        tensorio.write_tensor(t, path)
        back = tensorio.read_tensor(path)
        assert np.array_equal(back.data, t.data), "tensor round-trip"
    finally:
        os.unlink(path)


CHECKS = [
    ("dct-roundtrip", _check_dct_roundtrip),
    ("frequency-fuse", _check_frequency_fuse),
    ("protect-oracle", _check_protect_oracle),
    ("shared-dot", _check_sharing),
    ("secure-session", _check_secure_session),
    ("serialization", _check_serialization),
]


def run() -> int:
    failures = 0
    for name, check in CHECKS:
        try:
            check()
            print(f"PASS {name}")
        except Exception:
            failures += 1
            print(f"FAIL {name}")
            traceback.print_exc()
    return 1 if failures else 0
