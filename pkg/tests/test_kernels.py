import os
import random
import subprocess
import sys

import pytest

from bccs import _pykernels, kernels

try:
    from bccs import _ckernels
except ImportError:  # extension not built
    _ckernels = None

BACKENDS = [_pykernels] + ([_ckernels] if _ckernels is not None else [])


def _ref_dominated(ps, qs):
    return all(any(q <= p for q in qs) for p in ps)


def _ref_refuting(ps, qs, n):
    for b in range(1 << n):
        B = {i for i in range(n) if b >> i & 1}
        if any(not (p & B) for p in ps) and all(q & B for q in qs):
            return b
    return -1


def _sets(mask, n):
    return frozenset(i for i in range(n) if mask >> i & 1)


@pytest.mark.parametrize("mod", BACKENDS, ids=lambda m: m.__name__.rsplit(".", 1)[-1])
def test_kernels_match_set_reference(mod):
    rng = random.Random(12)
    for _ in range(400):
        n = rng.randint(1, 9)
        ps = [rng.getrandbits(n) for _ in range(rng.randint(0, 4))]
        qs = [rng.getrandbits(n) for _ in range(rng.randint(0, 4))]
        pset, qset = [_sets(p, n) for p in ps], [_sets(q, n) for q in qs]
        assert mod.dominated(ps, qs) == _ref_dominated(pset, qset)
        assert mod.refuting_subset(ps, qs, n) == _ref_refuting(pset, qset, n)


@pytest.mark.skipif(_ckernels is None, reason="compiled extension not available")
def test_wide_masks_fall_back():
    rng = random.Random(3)
    for _ in range(300):
        n = rng.randint(40, 70)
        ps = [rng.getrandbits(n) for _ in range(rng.randint(1, 5))]
        qs = [rng.getrandbits(n) for _ in range(rng.randint(1, 5))]
        assert _ckernels.dominated(ps, qs) == _pykernels.dominated(ps, qs)


def test_masks_for():
    masks, n = kernels.masks_for([{"x", "y"}, {"y"}, set()])
    assert n == 2 and masks[2] == 0 and masks[0] == masks[1] | (masks[0] & ~masks[1])
    assert bin(masks[0]).count("1") == 2 and bin(masks[1]).count("1") == 1


def test_pure_python_switch():
    env = dict(os.environ, BCCS_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from bccs import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_selected_backend_reported():
    assert kernels.BACKEND in ("python", "cython")
    if _ckernels is not None and not os.environ.get("BCCS_PURE_PYTHON"):
        assert kernels.BACKEND == "cython"
