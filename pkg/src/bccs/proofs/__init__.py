"""Derivation objects, their checker, bounded search and derived-law scripts."""

from .core import (Chain, Conclusion, Derivation, DerivationError, apply_axiom_at, ax,
                   bridge, check, checks, cong, deserialize, instantiate, norm, prefix,
                   refl, reverse, serialize, sum_, sym, trans, trans_all, walk)
from .laws import (LAW_KEYS, DerivedLaw, d1_derivation, d2_derivation, derived_law,
                   eliminate_tau, is_tau_normal, lift_init_tau_derivation, weak_core)
from .search import SearchReport, random_walk, search, search_derivation, steps

check_derivation = check
replay = deserialize
