"""Bundled SMT-LIB solver for quantified linear integer arithmetic.

Speaks enough SMT-LIB 2 to decide the scripts the compiler emits: define-fun
macros, declare-fun/declare-const, assert, check-sat, get-model. Complete for
closed Presburger goals via Cooper's elimination; handles the recursive
defining axioms the compiler produces by ground rewriting plus a one-step
induction tactic; everything outside that fragment answers `unknown`.
"""

from .engine import SolveResult, solve_script

__all__ = ["solve_script", "SolveResult"]
