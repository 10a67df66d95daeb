"""Kernel selection: the compiled extension when importable, else pure Python.

Set ``BCCS_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _pykernels

BACKEND = "python"
dominated = _pykernels.dominated
refuting_subset = _pykernels.refuting_subset

if not os.environ.get("BCCS_PURE_PYTHON"):
    try:
        from . import _ckernels
    except ImportError:
        pass
    else:
        BACKEND = "cython"
        dominated = _ckernels.dominated
        refuting_subset = _ckernels.refuting_subset


def masks_for(sets):
    """Encode a list of finite sets as bitmasks over their union.

    Returns ``(masks, universe_size)``.
    """
    index: dict = {}
    masks = []
    for s in sets:
        m = 0
        for e in s:
            i = index.get(e)
            if i is None:
                i = index[e] = len(index)
            m |= 1 << i
        masks.append(m)
    return masks, len(index)
