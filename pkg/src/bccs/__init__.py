"""Equational reasoning for basic CCS with silent moves under the
impossible-futures family of semantics."""

from .axioms import (Axiom, Axiomatization, AxiomError, axiom, catalog, combine,
                     init_tau_axiomatization, parse_axiomatization, transform_weak)
from .completeness import (NotRelated, prove_if_ground, prove_weak_from_concrete,
                           residual_saturation, saturate)
from .semantics import RelationId, check_closed, check_oracle, refute_open
from .syntax import NIL, TAU, Alphabet, Substitution, Term, ac_canonical, parse, render, term

__version__ = "0.1.0"
