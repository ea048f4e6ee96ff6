"""
Lattice regression test package.
"""
