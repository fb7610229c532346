"""First-order proof workbench: TPTP/TPI proof scripts, lemma pipelines and
prover backends, partial-model evaluation, and derivation analysis."""

__version__ = "0.1.0"
