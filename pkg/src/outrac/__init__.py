"""Outer drawings of series-parallel graphs with right-angle crossings.

Exact-rational constructions and validators: every coordinate is a
`fractions.Fraction` and every geometric predicate is decided exactly, so a
drawing this package calls valid is valid, not valid-up-to-epsilon.
"""

__version__ = "0.1.0"
