"""Algebras of finite partial functions: operations, law checking,
filter-based representations and small-model search."""

from .algebra import (CongruencePartition, FinAlgebra, all_congruences, adjoin_meet,
                      format_algebra, generated_congruence, is_congruence, is_embedding,
                      lift_to_stack, natural_le, parse_algebra, proj_quasiorder, quotient)
from .errors import PfalgError
from .pfun import (FinSet, PFun, all_pfuns, comparison, compose, difference, domain_map,
                   generate_subalgebra, intersect, minus, override, restrict, update)
from .signature import make_signature
from .syntax import Law, Violation, check_lawset, eval_term, law_holds, parse_law, parse_laws

__version__ = "0.1.0"
