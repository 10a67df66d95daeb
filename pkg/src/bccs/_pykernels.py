"""Pure-Python versions of the bitmask kernels (see ``_ckernels.pyx``)."""


def dominated(p_masks, q_masks):
    """Every p-mask has some q-mask that is a subset of it."""
    for pm in p_masks:
        inv = ~pm
        for qm in q_masks:
            if not (qm & inv):
                break
        else:
            return False
    return True


def refuting_subset(p_masks, q_masks, nbits):
    """Least B in [0, 2**nbits) missed by some p-mask but hit by every q-mask, else -1."""
    for b in range(1 << nbits):
        p_hit = False
        for pm in p_masks:
            if not (pm & b):
                p_hit = True
                break
        if not p_hit:
            continue
        for qm in q_masks:
            if not (qm & b):
                break
        else:
            return b
    return -1
