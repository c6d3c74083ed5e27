"""misr: exact-integer machinery for maximum independent set of rectangles.

Subpackages:
  geom_core   axis-parallel primitives and polygon splitting
  instance    instances, generators, preprocessing, exact optimum oracle
  structure   maximal extensions, nesting/niceness, visibility, fences
  partition   cut constructions and the recursive partitioning driver
  charging    charging schemes, ledgers, and ratio verification
  dp_solver   the polygon dynamic program
  cli         command-line interface (generate / solve / certify / render / bench)
"""

__version__ = "0.1.0"
