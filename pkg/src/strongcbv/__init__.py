"""Strong call-by-value normalization toolkit.

Parsing and printing of named lambda terms, a reference reduction
semantics for the strong right-to-left call-by-value strategy, a
memoizing normalization-by-evaluation interpreter, two bisimilar abstract
machines (environment-based and substitution-based) whose normal forms
come out as shared graphs, and runtime audits for the machines' shape,
decoding, and amortized-potential guarantees.
"""

from .errors import AuditViolation, FuelError, MachineStuck, ShapeViolation, UnfoldCapExceeded
from .syntax import (
    App,
    Ident,
    Lam,
    ParseError,
    Term,
    Var,
    alpha_eq,
    bound_vars,
    free_vars,
    gen_family,
    parse,
    pretty,
    subst,
)
from .reduction import classify, decompose, normalize, step, weak_normalize
from .sharing import TermGraph, convertible, dag_text, graph_of_term, shared_alpha_eq
from .nbe import nbe_normalize
from . import analysis, env_machine, subst_machine

__version__ = "0.1.0"

__all__ = [
    "AuditViolation",
    "FuelError",
    "MachineStuck",
    "ParseError",
    "ShapeViolation",
    "UnfoldCapExceeded",
    "App",
    "Ident",
    "Lam",
    "Term",
    "Var",
    "alpha_eq",
    "bound_vars",
    "free_vars",
    "gen_family",
    "parse",
    "pretty",
    "subst",
    "classify",
    "decompose",
    "normalize",
    "step",
    "weak_normalize",
    "TermGraph",
    "convertible",
    "dag_text",
    "graph_of_term",
    "shared_alpha_eq",
    "nbe_normalize",
    "analysis",
    "env_machine",
    "subst_machine",
    "__version__",
]
